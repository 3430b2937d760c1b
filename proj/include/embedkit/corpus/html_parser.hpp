#pragma once

#include <string_view>

#include "embedkit/corpus/document.hpp"
#include "embedkit/tokenizer/normalizer.hpp"

namespace embedkit::corpus {

// Tolerant structural extraction: h1..h6 become headings, p becomes a
// paragraph (its class attribute is kept as the block label), everything
// inside script/style/nav is dropped, other tags are transparent. Unclosed
// p/h blocks are closed implicitly by the next block-level tag. Basic
// character and numeric entities are decoded; whitespace is collapsed.
StructuredDocument parse_structured_html(std::string_view html);

// Per-source noise removal (advertisements, citation tails, template
// phrases). Patterns are keyed by category; "*" applies everywhere.
// Application is a fixpoint, so applying twice equals applying once.
struct NoiseRuleSet {
  std::map<std::string, std::vector<std::string>> patterns;

  static NoiseRuleSet from_json(const json& j);
  json to_json() const;
  std::string apply(const std::string& text, const std::string& category) const;
};

// Normalizes every block text and drops blocks that normalize to empty.
StructuredDocument clean_document(const StructuredDocument& doc,
                                  const tok::Normalizer& normalizer,
                                  const NoiseRuleSet& noise);

}  // namespace embedkit::corpus
