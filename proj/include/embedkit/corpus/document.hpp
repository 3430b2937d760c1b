#pragma once

#include <string>
#include <vector>

#include "embedkit/common/jsonl.hpp"

namespace embedkit::corpus {

struct Block {
  enum class Kind { heading, paragraph };
  Kind kind = Kind::paragraph;
  int level = 0;      // headings: 1..6
  std::string text;
  std::string label;  // paragraph class attribute ("summary" on news pages)

  bool is_heading() const { return kind == Kind::heading; }
};

struct StructuredDocument {
  std::string id;
  std::string source_url;
  std::string category;
  std::vector<Block> blocks;

  json to_json() const;
  static StructuredDocument from_json(const json& j);
};

}  // namespace embedkit::corpus
