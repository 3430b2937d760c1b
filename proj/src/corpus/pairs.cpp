#include "embedkit/corpus/pairs.hpp"

namespace embedkit::corpus {

const char* pair_kind_name(PairKind k) {
  switch (k) {
    case PairKind::h1_p: return "h1_p";
    case PairKind::h2_p: return "h2_p";
    case PairKind::title_summary: return "title_summary";
    case PairKind::summary_lead: return "summary_lead";
  }
  return "?";
}

json ExtractedPair::to_json(const std::string& doc_id) const {
  json j;
  j["query"] = query;
  j["positive"] = document;
  j["pair_kind"] = pair_kind_name(kind);
  j["doc_id"] = doc_id;
  return j;
}

std::vector<ExtractedPair> extract_pairs(const StructuredDocument& doc,
                                         const PairExtractOptions& options) {
  std::vector<ExtractedPair> out;
  const auto& blocks = doc.blocks;

  // A heading pairs with the first paragraph before the next heading.
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    if (!b.is_heading() || b.level > 2) continue;
    for (std::size_t j = i + 1; j < blocks.size(); ++j) {
      if (blocks[j].is_heading()) break;
      out.push_back({b.text, blocks[j].text,
                     b.level == 1 ? PairKind::h1_p : PairKind::h2_p});
      break;
    }
  }

  if (!options.summary_label.empty()) {
    const Block* title = nullptr;
    const Block* summary = nullptr;
    const Block* lead = nullptr;
    for (const auto& b : blocks) {
      if (b.is_heading()) {
        if (b.level == 1 && !title) title = &b;
      } else if (b.label == options.summary_label) {
        if (!summary) summary = &b;
      } else if (!lead) {
        lead = &b;
      }
    }
    if (title && summary) {
      out.push_back({title->text, summary->text, PairKind::title_summary});
    }
    if (summary && lead) {
      out.push_back({summary->text, lead->text, PairKind::summary_lead});
    }
  }
  return out;
}

}  // namespace embedkit::corpus
