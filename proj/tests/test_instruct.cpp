#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>

#include "embedkit/common/errors.hpp"
#include "embedkit/instruct/render.hpp"
#include "embedkit/instruct/templates.hpp"

using namespace embedkit;
using namespace embedkit::instruct;

namespace {

InstructionTemplate classification_template() {
  InstructionTemplate t;
  t.task_id = "fixture-topic";
  t.category = TaskCategory::classification;
  t.query_prompt = "Classify the topic of the following text. {{class_list}}Text: {{text}}";
  t.query_prompt_short = "topic? {{class_list}}{{text}}";
  t.doc_prompt = "Topic label: {{label}}";
  t.doc_prompt_short = "label: {{label}}";
  t.class_names = {"sports", "economy"};
  return t;
}

InstructionTemplate cross_template() {
  InstructionTemplate t;
  t.task_id = "fixture-match";
  t.category = TaskCategory::cross_classification;
  t.query_prompt =
      "Decide how the two texts relate. {{class_list}}First: {{text_a}} Second: {{text_b}}";
  t.query_prompt_short = "relate? {{class_list}}A: {{text_a}} B: {{text_b}}";
  t.doc_prompt = "Relation: {{label}}";
  t.doc_prompt_short = "rel: {{label}}";
  t.class_names = {"match", "mismatch"};
  return t;
}

InstructionTemplate relative_template() {
  InstructionTemplate t;
  t.task_id = "fixture-retrieval";
  t.category = TaskCategory::relative_pair;
  t.query_prompt = "Given a query, retrieve the passage that answers it. Query: {{text}}";
  t.query_prompt_short = "query: {{text}}";
  t.doc_prompt = "Passage: {{text}}";
  t.doc_prompt_short = "passage: {{text}}";
  return t;
}

TrainingExample example_for(TaskCategory cat) {
  TrainingExample e;
  e.category = cat;
  switch (cat) {
    case TaskCategory::classification:
      e.query = "the match ended in a draw";
      e.positive = "sports";
      e.task_id = "fixture-topic";
      break;
    case TaskCategory::cross_classification:
      e.query = "is water wet";
      e.second_text = "yes it is";
      e.positive = "match";
      e.task_id = "fixture-match";
      break;
    case TaskCategory::relative_pair:
      e.query = "best hiking trails";
      e.positive = "a list of scenic mountain trails";
      e.task_id = "fixture-retrieval";
      break;
  }
  return e;
}

InstructionTemplate template_for(TaskCategory cat) {
  switch (cat) {
    case TaskCategory::classification: return classification_template();
    case TaskCategory::cross_classification: return cross_template();
    default: return relative_template();
  }
}

// Parses the golden file into (variant, category, field) -> line.
std::map<std::string, std::string> load_goldens() {
  std::ifstream in(std::filesystem::path(TEST_SOURCE_DIR) /
                   "golden/instruct_renders.txt");
  REQUIRE(in.good());
  std::map<std::string, std::string> out;
  std::string line, key;
  while (std::getline(in, line)) {
    if (line.rfind(">>> ", 0) == 0) {
      key = line.substr(4);
    } else if (!key.empty()) {
      out[key] = line;
      key.clear();
    }
  }
  return out;
}

}  // namespace

TEST_CASE("renders match the frozen golden file byte for byte") {
  auto goldens = load_goldens();
  REQUIRE(goldens.size() == 34);
  VariantPolicy policy;
  policy.uninstructed_mix_ratio = 0.0;

  for (Variant v : {Variant::inst1, Variant::inst2, Variant::inst3, Variant::inst4,
                    Variant::inst5, Variant::no_inst}) {
    policy.variant = v;
    for (TaskCategory cat : {TaskCategory::classification,
                             TaskCategory::cross_classification,
                             TaskCategory::relative_pair}) {
      std::string base = std::string(variant_name(v)) + " " + category_name(cat);
      if (v == Variant::no_inst && cat != TaskCategory::relative_pair) {
        CHECK(goldens.count(base + " error") == 1);
        CHECK_THROWS_AS(render(example_for(cat), template_for(cat), policy, 7),
                        Error);
        continue;
      }
      auto r = render(example_for(cat), template_for(cat), policy, 7);
      CAPTURE(base);
      CHECK(r.query == goldens.at(base + " query"));
      CHECK(r.positive == goldens.at(base + " positive"));
    }
  }
}

TEST_CASE("no_inst leaves relative pairs untouched") {
  VariantPolicy policy;
  policy.variant = Variant::no_inst;
  auto e = example_for(TaskCategory::relative_pair);
  auto r = render(e, relative_template(), policy, 1);
  CHECK(r.query == e.query);
  CHECK(r.positive == e.positive);
  CHECK_FALSE(r.instructed);
}

TEST_CASE("rendered strings contain the original texts verbatim") {
  VariantPolicy policy;
  policy.uninstructed_mix_ratio = 0.0;
  for (Variant v : {Variant::inst1, Variant::inst2, Variant::inst3, Variant::inst4,
                    Variant::inst5}) {
    policy.variant = v;
    for (TaskCategory cat : {TaskCategory::classification,
                             TaskCategory::cross_classification,
                             TaskCategory::relative_pair}) {
      auto e = example_for(cat);
      e.negatives = {"first negative", "second negative"};
      auto r = render(e, template_for(cat), policy, 3);
      CHECK(r.query.find(e.query) != std::string::npos);
      if (cat == TaskCategory::cross_classification) {
        CHECK(r.query.find(e.second_text) != std::string::npos);
      }
      CHECK(r.positive.find(e.positive) != std::string::npos);
      REQUIRE(r.negatives.size() == 2);
      CHECK(r.negatives[0].find("first negative") != std::string::npos);
      CHECK(r.negatives[1].find("second negative") != std::string::npos);
    }
  }
}

TEST_CASE("render is pure given the seed") {
  VariantPolicy policy;
  policy.variant = Variant::inst1;
  policy.uninstructed_mix_ratio = 0.5;
  auto e = example_for(TaskCategory::relative_pair);
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 99ull}) {
    auto a = render(e, relative_template(), policy, seed);
    auto b = render(e, relative_template(), policy, seed);
    CHECK(a.query == b.query);
    CHECK(a.instructed == b.instructed);
  }
}

TEST_CASE("uninstructed mix frequency tracks the configured ratio") {
  VariantPolicy policy;
  policy.variant = Variant::inst1;
  policy.uninstructed_mix_ratio = 0.2;
  auto e = example_for(TaskCategory::relative_pair);
  auto t = relative_template();
  int uninstructed = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    if (!render(e, t, policy, 1000 + std::uint64_t(i)).instructed) ++uninstructed;
  }
  // binomial 3 sigma around 0.2
  double frac = double(uninstructed) / n;
  CHECK(frac > 0.2 - 3 * 0.004);
  CHECK(frac < 0.2 + 3 * 0.004);

  SUBCASE("inst4 never mixes") {
    policy.variant = Variant::inst4;
    for (int i = 0; i < 500; ++i) {
      CHECK(render(e, t, policy, std::uint64_t(i)).instructed);
    }
  }
}

TEST_CASE("unresolved placeholders are a hard error") {
  auto t = relative_template();
  t.query_prompt = "uses a {{missing}} field: {{text}}";
  VariantPolicy policy;
  policy.uninstructed_mix_ratio = 0.0;
  CHECK_THROWS_AS(render(example_for(TaskCategory::relative_pair), t, policy, 1),
                  Error);
}

TEST_CASE("category mismatch between template and example is an error") {
  VariantPolicy policy;
  CHECK_THROWS_AS(
      render(example_for(TaskCategory::classification), relative_template(), policy, 1),
      Error);
}

TEST_CASE("template library round trips through json") {
  json j;
  j["version"] = 1;
  j["templates"] = json::array();
  json t;
  t["task_id"] = "x";
  t["category"] = "classification";
  t["query_prompt"] = "q {{text}}";
  t["doc_prompt"] = "d {{label}}";
  t["classes"] = {"a", "b"};
  j["templates"].push_back(t);
  auto lib = TemplateLibrary::from_json(j);
  CHECK(lib.version == 1);
  const auto& got = lib.get("x");
  CHECK(got.category == TaskCategory::classification);
  CHECK(got.query_prompt_short == "q {{text}}");  // defaults to the full form
  CHECK(got.class_names.size() == 2);
  CHECK_THROWS_AS(lib.get("absent"), Error);
}
