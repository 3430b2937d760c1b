#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "embedkit/common/jsonl.hpp"
#include "embedkit/instruct/render.hpp"
#include "embedkit/pairmine/scorer.hpp"

namespace embedkit::evalbench {

enum class TaskKind {
  retrieval,
  sts,
  classification,
  pair_classification,
  cross_classification,
  reranking,
  clustering,
};
const char* task_kind_name(TaskKind k);
TaskKind task_kind_from(const std::string& name);

struct RetrievalQuery {
  std::string id;
  std::string text;
  std::set<std::string> relevant;
};
struct RetrievalTask {
  std::vector<std::pair<std::string, std::string>> docs;  // (id, text)
  std::vector<RetrievalQuery> queries;
};
struct StsTask {
  std::vector<std::tuple<std::string, std::string, double>> pairs;
};
struct LabeledTextTask {  // classification and clustering
  std::vector<std::pair<std::string, std::string>> records;  // (text, label)
};
struct PairTask {  // pair_classification (int labels) and cross (string labels)
  std::vector<std::tuple<std::string, std::string, std::string>> records;
};
struct RerankCandidate {
  std::string text;
  bool positive = false;
};
struct RerankingTask {
  std::vector<std::pair<std::string, std::vector<RerankCandidate>>> queries;
};

struct EvalTask {
  std::string task_id;
  TaskKind kind = TaskKind::retrieval;
  std::string template_id;  // optional instruction template
  std::variant<RetrievalTask, StsTask, LabeledTextTask, PairTask, RerankingTask> data;
};

EvalTask load_task(const std::filesystem::path& path);

struct TaskReport {
  std::string task_id;
  std::string kind;
  std::map<std::string, double> metrics;
  double primary = 0.0;  // the headline metric for the macro average
  std::size_t records = 0;
  std::size_t excluded = 0;
  std::string error;  // non-empty when the task failed

  json to_json() const;
};

struct EvalReport {
  std::string checkpoint_id;
  std::string variant;
  std::vector<TaskReport> tasks;
  double macro_average = 0.0;

  json to_json() const;
  std::string table() const;
};

// Embeddings come from the scorer; when a template library is supplied and a
// task names a template, queries/documents/labels are rendered through it
// under the given variant before embedding.
struct EvalContext {
  const pairmine::SimilarityScorer& scorer;
  const instruct::TemplateLibrary* templates = nullptr;
  instruct::Variant variant = instruct::Variant::inst1;
  std::uint64_t seed = 42;
};

TaskReport eval_retrieval(const EvalTask& task, const EvalContext& ctx);
TaskReport eval_sts(const EvalTask& task, const EvalContext& ctx);
TaskReport eval_classification(const EvalTask& task, const EvalContext& ctx);
TaskReport eval_pair_classification(const EvalTask& task, const EvalContext& ctx);
TaskReport eval_cross_classification(const EvalTask& task, const EvalContext& ctx);
TaskReport eval_reranking(const EvalTask& task, const EvalContext& ctx);
TaskReport eval_clustering(const EvalTask& task, const EvalContext& ctx);

TaskReport eval_task(const EvalTask& task, const EvalContext& ctx);

// Evaluates every *.jsonl task in a directory (sorted by filename); task
// failures land in the report instead of aborting the run.
EvalReport evaluate_directory(const std::filesystem::path& dir, const EvalContext& ctx,
                              const std::string& checkpoint_id);

}  // namespace embedkit::evalbench
