#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "embedkit/common/errors.hpp"

namespace embedkit {

using json = nlohmann::ordered_json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::missing_input, "cannot open file: " + path.string());
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

// Writes via a temp file in the same directory, then renames into place.
inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail_io("cannot write file: " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail_io("short write: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::missing_input, "cannot open file: " + path.string());
  std::vector<json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      fail_schema("invalid JSON at " + path.string() + ":" + std::to_string(lineno));
    }
    records.push_back(std::move(j));
  }
  return records;
}

inline void write_jsonl(const std::filesystem::path& path,
                        const std::vector<json>& records) {
  std::string buf;
  for (const auto& r : records) {
    buf += r.dump();
    buf += '\n';
  }
  atomic_write_file(path, buf);
}

inline const json& require_field(const json& j, const std::string& key,
                                 const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) fail_schema(context + ": missing field '" + key + "'");
  return *it;
}

}  // namespace embedkit
