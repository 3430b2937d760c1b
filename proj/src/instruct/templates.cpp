#include "embedkit/instruct/templates.hpp"

#include "embedkit/common/errors.hpp"

namespace embedkit::instruct {

const char* category_name(TaskCategory c) {
  switch (c) {
    case TaskCategory::classification: return "classification";
    case TaskCategory::cross_classification: return "cross_classification";
    case TaskCategory::relative_pair: return "relative_pair";
  }
  return "?";
}

TaskCategory category_from(const std::string& name) {
  for (TaskCategory c : {TaskCategory::classification,
                         TaskCategory::cross_classification,
                         TaskCategory::relative_pair}) {
    if (name == category_name(c)) return c;
  }
  fail_schema("unknown instruction category: " + name);
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::inst1: return "inst1";
    case Variant::inst2: return "inst2";
    case Variant::inst3: return "inst3";
    case Variant::inst4: return "inst4";
    case Variant::inst5: return "inst5";
    case Variant::no_inst: return "no_inst";
  }
  return "?";
}

Variant variant_from(const std::string& name) {
  for (Variant v : {Variant::inst1, Variant::inst2, Variant::inst3, Variant::inst4,
                    Variant::inst5, Variant::no_inst}) {
    if (name == variant_name(v)) return v;
  }
  fail_config("unknown instruction variant: " + name);
}

TemplateLibrary TemplateLibrary::from_json(const json& j) {
  TemplateLibrary lib;
  lib.version = require_field(j, "version", "template file").get<int>();
  for (const auto& jt : require_field(j, "templates", "template file")) {
    InstructionTemplate t;
    t.task_id = require_field(jt, "task_id", "template").get<std::string>();
    t.category =
        category_from(require_field(jt, "category", "template").get<std::string>());
    t.query_prompt = require_field(jt, "query_prompt", t.task_id).get<std::string>();
    t.doc_prompt = require_field(jt, "doc_prompt", t.task_id).get<std::string>();
    t.query_prompt_short = jt.value("query_prompt_short", t.query_prompt);
    t.doc_prompt_short = jt.value("doc_prompt_short", t.doc_prompt);
    if (jt.contains("classes")) {
      for (const auto& c : jt["classes"]) t.class_names.push_back(c.get<std::string>());
    }
    if (!lib.by_task.emplace(t.task_id, t).second) {
      fail_config("duplicate template task_id: " + t.task_id);
    }
  }
  return lib;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& path) {
  return from_json(json::parse(read_file(path)));
}

const InstructionTemplate& TemplateLibrary::get(const std::string& task_id) const {
  auto it = by_task.find(task_id);
  if (it == by_task.end()) fail_config("no template for task_id: " + task_id);
  return it->second;
}

}  // namespace embedkit::instruct
