#pragma once

#include <string>
#include <vector>

#include "embedkit/common/jsonl.hpp"
#include "embedkit/corpus/document.hpp"

namespace embedkit::corpus {

enum class PairKind { h1_p, h2_p, title_summary, summary_lead };

const char* pair_kind_name(PairKind k);

struct ExtractedPair {
  std::string query;
  std::string document;
  PairKind kind = PairKind::h1_p;

  json to_json(const std::string& doc_id) const;
};

struct PairExtractOptions {
  // Paragraph label marking a news summary; empty disables the news rules.
  std::string summary_label = "summary";
};

// Structural pairs: (H1, first following paragraph), (each H2, its following
// paragraph), and when a labeled summary paragraph exists, (title, summary)
// plus (summary, first body paragraph). Pure function of the document.
std::vector<ExtractedPair> extract_pairs(const StructuredDocument& doc,
                                         const PairExtractOptions& options = {});

}  // namespace embedkit::corpus
