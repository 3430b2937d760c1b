#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embedkit/instruct/templates.hpp"

namespace embedkit::instruct {

struct TrainingExample {
  std::string query;        // text to classify, search query, or text_a
  std::string second_text;  // text_b for cross_classification
  std::string positive;     // label (classification/cross) or document
  std::vector<std::string> negatives;  // negative labels/documents, 0 or 9
  std::string task_id;
  TaskCategory category = TaskCategory::relative_pair;
};

struct RenderedExample {
  std::string query;
  std::string positive;
  std::vector<std::string> negatives;
  Variant variant = Variant::inst1;
  bool instructed = true;
};

// Pure given (example, template, policy, seed). With probability
// effective_mix() the instructed variants emit the raw uninstructed
// rendering. no_inst is only defined for relative_pair tasks.
RenderedExample render(const TrainingExample& example,
                       const InstructionTemplate& tmpl, const VariantPolicy& policy,
                       std::uint64_t seed);

}  // namespace embedkit::instruct
