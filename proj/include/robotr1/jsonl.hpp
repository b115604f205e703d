#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "robotr1/error.hpp"

namespace robotr1 {

// ordered_json keeps insertion order so reruns emit byte-identical files.
using Json = nlohmann::ordered_json;

/// First record of every output file: identifies the producing command and
/// pins the configuration hash and seed the file was generated with.
inline Json make_header_record(const std::string& command, const std::string& config_hash,
                               std::uint64_t seed) {
  Json header;
  header["record"] = "header";
  header["tool"] = "robotr1";
  header["command"] = command;
  header["config_hash"] = config_hash;
  header["seed"] = seed;
  return header;
}

inline bool is_header_record(const Json& record) {
  return record.is_object() && record.contains("record") && record["record"] == "header";
}

/// Reads a JSON Lines file. A leading header record, if present, is
/// dropped. Throws MalformedRecord with the 1-based line number on bad JSON.
inline std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingFile, "cannot open " + path.string());
  std::vector<Json> records;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    Json record = Json::parse(line, nullptr, false);
    if (record.is_discarded()) {
      fail(ErrorKind::MalformedRecord,
           path.string() + ":" + std::to_string(line_number) + ": invalid JSON");
    }
    if (line_number == 1 && is_header_record(record)) continue;
    records.push_back(std::move(record));
  }
  return records;
}

inline void write_jsonl(const std::filesystem::path& path, const Json& header,
                        const std::vector<Json>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::MissingFile, "cannot write " + path.string());
  out << header.dump() << "\n";
  for (const Json& record : records) out << record.dump() << "\n";
}

}  // namespace robotr1
