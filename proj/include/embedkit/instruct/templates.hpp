#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "embedkit/common/jsonl.hpp"

namespace embedkit::instruct {

enum class TaskCategory { classification, cross_classification, relative_pair };
const char* category_name(TaskCategory c);
TaskCategory category_from(const std::string& name);

enum class Variant { inst1, inst2, inst3, inst4, inst5, no_inst };
const char* variant_name(Variant v);
Variant variant_from(const std::string& name);

// Versioned, immutable-at-train-time prompt templates. Placeholders use
// double braces: {{text}}, {{text_a}}, {{text_b}}, {{label}} resolve from
// the example; {{class_list}} expands only under inst2. Prompt content is
// data shipped in configs/templates.json, not code.
struct InstructionTemplate {
  std::string task_id;
  TaskCategory category = TaskCategory::relative_pair;
  std::string query_prompt;
  std::string doc_prompt;
  std::string query_prompt_short;  // abbreviated forms for inst3/inst4
  std::string doc_prompt_short;
  std::vector<std::string> class_names;
};

struct TemplateLibrary {
  int version = 0;
  std::map<std::string, InstructionTemplate> by_task;

  static TemplateLibrary from_json(const json& j);
  static TemplateLibrary load(const std::filesystem::path& path);
  const InstructionTemplate& get(const std::string& task_id) const;
};

struct VariantPolicy {
  Variant variant = Variant::inst1;
  double uninstructed_mix_ratio = 0.2;

  // inst4 is never exposed to uninstructed examples; no_inst renders raw
  // unconditionally, so mixing is irrelevant there.
  double effective_mix() const {
    if (variant == Variant::inst4 || variant == Variant::no_inst) return 0.0;
    return uninstructed_mix_ratio;
  }
};

}  // namespace embedkit::instruct
