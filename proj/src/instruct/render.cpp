#include "embedkit/instruct/render.hpp"

#include <map>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/rng.hpp"

namespace embedkit::instruct {

namespace {

std::string expand(const std::string& prompt,
                   const std::map<std::string, std::string>& fields,
                   const std::string& task_id) {
  std::string out;
  std::size_t i = 0;
  while (i < prompt.size()) {
    auto open = prompt.find("{{", i);
    if (open == std::string::npos) {
      out.append(prompt, i, std::string::npos);
      break;
    }
    out.append(prompt, i, open - i);
    auto close = prompt.find("}}", open);
    if (close == std::string::npos) {
      fail_config("template " + task_id + ": unterminated placeholder");
    }
    std::string key = prompt.substr(open + 2, close - open - 2);
    auto it = fields.find(key);
    if (it == fields.end()) {
      fail_config("template " + task_id + ": unresolved placeholder {{" + key + "}}");
    }
    out += it->second;
    i = close + 2;
  }
  return out;
}

std::string class_list_text(const InstructionTemplate& tmpl) {
  std::string out = "options: ";
  for (std::size_t i = 0; i < tmpl.class_names.size(); ++i) {
    if (i) out += ", ";
    out += tmpl.class_names[i];
  }
  out += ". ";
  return out;
}

}  // namespace

RenderedExample render(const TrainingExample& example,
                       const InstructionTemplate& tmpl, const VariantPolicy& policy,
                       std::uint64_t seed) {
  if (tmpl.category != example.category) {
    fail_config("template " + tmpl.task_id + " is " + category_name(tmpl.category) +
                " but the example is " + category_name(example.category));
  }
  const Variant v = policy.variant;
  if (v == Variant::no_inst && example.category != TaskCategory::relative_pair) {
    fail_config("no_inst is not defined for " +
                std::string(category_name(example.category)) + " tasks");
  }

  RenderedExample out;
  out.variant = v;

  auto raw = [&]() {
    out.instructed = false;
    if (example.category == TaskCategory::cross_classification) {
      out.query = example.query + " " + example.second_text;
    } else {
      out.query = example.query;
    }
    out.positive = example.positive;
    out.negatives = example.negatives;
  };

  if (v == Variant::no_inst) {
    raw();
    return out;
  }
  Rng rng(seed);
  if (rng.uniform() < policy.effective_mix()) {
    raw();
    return out;
  }

  const bool abbreviated = v == Variant::inst3 || v == Variant::inst4;
  const std::string& query_prompt =
      abbreviated ? tmpl.query_prompt_short : tmpl.query_prompt;
  const std::string& doc_prompt = abbreviated ? tmpl.doc_prompt_short : tmpl.doc_prompt;

  std::map<std::string, std::string> query_fields;
  query_fields["class_list"] = v == Variant::inst2 ? class_list_text(tmpl) : "";
  switch (example.category) {
    case TaskCategory::classification:
    case TaskCategory::relative_pair:
      query_fields["text"] = example.query;
      break;
    case TaskCategory::cross_classification:
      query_fields["text_a"] = example.query;
      query_fields["text_b"] = example.second_text;
      break;
  }
  out.query = expand(query_prompt, query_fields, tmpl.task_id);

  // inst5 drops the instruction on the second element except in
  // classification tasks.
  const bool doc_instructed =
      v != Variant::inst5 || example.category == TaskCategory::classification;
  auto render_doc = [&](const std::string& text) {
    if (!doc_instructed) return text;
    std::map<std::string, std::string> doc_fields;
    if (example.category == TaskCategory::relative_pair) {
      doc_fields["text"] = text;
    } else {
      doc_fields["label"] = text;
    }
    return expand(doc_prompt, doc_fields, tmpl.task_id);
  };
  out.positive = render_doc(example.positive);
  for (const auto& n : example.negatives) out.negatives.push_back(render_doc(n));
  out.instructed = true;
  return out;
}

}  // namespace embedkit::instruct
