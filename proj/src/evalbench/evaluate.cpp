#include "embedkit/evalbench/evaluate.hpp"

#include <algorithm>
#include <numeric>

#include "embedkit/common/errors.hpp"
#include "embedkit/evalbench/metrics.hpp"

namespace embedkit::evalbench {

const char* task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::retrieval: return "retrieval";
    case TaskKind::sts: return "sts";
    case TaskKind::classification: return "classification";
    case TaskKind::pair_classification: return "pair_classification";
    case TaskKind::cross_classification: return "cross_classification";
    case TaskKind::reranking: return "reranking";
    case TaskKind::clustering: return "clustering";
  }
  return "?";
}

TaskKind task_kind_from(const std::string& name) {
  for (TaskKind k : {TaskKind::retrieval, TaskKind::sts, TaskKind::classification,
                     TaskKind::pair_classification, TaskKind::cross_classification,
                     TaskKind::reranking, TaskKind::clustering}) {
    if (name == task_kind_name(k)) return k;
  }
  fail_schema("unknown eval task kind: " + name);
}

EvalTask load_task(const std::filesystem::path& path) {
  auto records = read_jsonl(path);
  if (records.empty() || !records[0].value("header", false)) {
    fail_schema("task file " + path.string() + " must start with a header line");
  }
  EvalTask task;
  const json& header = records[0];
  task.task_id = require_field(header, "task_id", "task header").get<std::string>();
  task.kind = task_kind_from(require_field(header, "kind", "task header").get<std::string>());
  task.template_id = header.value("template_id", "");

  auto body = std::vector<json>(records.begin() + 1, records.end());
  const std::string ctx = "task " + task.task_id;
  switch (task.kind) {
    case TaskKind::retrieval: {
      RetrievalTask t;
      std::set<std::string> doc_ids, query_ids;
      for (const auto& r : body) {
        std::string rec = require_field(r, "record", ctx).get<std::string>();
        if (rec == "doc") {
          std::string id = require_field(r, "id", ctx).get<std::string>();
          if (!doc_ids.insert(id).second) fail_schema(ctx + ": duplicate doc id " + id);
          t.docs.emplace_back(id, require_field(r, "text", ctx).get<std::string>());
        } else if (rec == "query") {
          RetrievalQuery q;
          q.id = require_field(r, "id", ctx).get<std::string>();
          if (!query_ids.insert(q.id).second) {
            fail_schema(ctx + ": duplicate query id " + q.id);
          }
          q.text = require_field(r, "text", ctx).get<std::string>();
          for (const auto& rel : require_field(r, "relevant", ctx)) {
            q.relevant.insert(rel.get<std::string>());
          }
          t.queries.push_back(std::move(q));
        } else {
          fail_schema(ctx + ": record must be doc|query");
        }
      }
      task.data = std::move(t);
      break;
    }
    case TaskKind::sts: {
      StsTask t;
      for (const auto& r : body) {
        t.pairs.emplace_back(require_field(r, "text_a", ctx).get<std::string>(),
                             require_field(r, "text_b", ctx).get<std::string>(),
                             require_field(r, "score", ctx).get<double>());
      }
      task.data = std::move(t);
      break;
    }
    case TaskKind::classification:
    case TaskKind::clustering: {
      LabeledTextTask t;
      const char* key = task.kind == TaskKind::classification ? "label" : "cluster";
      for (const auto& r : body) {
        t.records.emplace_back(require_field(r, "text", ctx).get<std::string>(),
                               require_field(r, key, ctx).get<std::string>());
      }
      task.data = std::move(t);
      break;
    }
    case TaskKind::pair_classification: {
      PairTask t;
      for (const auto& r : body) {
        int label = require_field(r, "label", ctx).get<int>();
        if (label != 0 && label != 1) fail_schema(ctx + ": labels must be 0/1");
        t.records.emplace_back(require_field(r, "text_a", ctx).get<std::string>(),
                               require_field(r, "text_b", ctx).get<std::string>(),
                               std::to_string(label));
      }
      task.data = std::move(t);
      break;
    }
    case TaskKind::cross_classification: {
      PairTask t;
      for (const auto& r : body) {
        t.records.emplace_back(require_field(r, "text_a", ctx).get<std::string>(),
                               require_field(r, "text_b", ctx).get<std::string>(),
                               require_field(r, "label", ctx).get<std::string>());
      }
      task.data = std::move(t);
      break;
    }
    case TaskKind::reranking: {
      RerankingTask t;
      for (const auto& r : body) {
        std::vector<RerankCandidate> cands;
        for (const auto& c : require_field(r, "candidates", ctx)) {
          cands.push_back({require_field(c, "text", ctx).get<std::string>(),
                           require_field(c, "positive", ctx).get<bool>()});
        }
        t.queries.emplace_back(require_field(r, "query", ctx).get<std::string>(),
                               std::move(cands));
      }
      task.data = std::move(t);
      break;
    }
  }
  return task;
}

json TaskReport::to_json() const {
  json j;
  j["task_id"] = task_id;
  j["kind"] = kind;
  j["records"] = records;
  j["excluded"] = excluded;
  if (!error.empty()) {
    j["error"] = error;
  } else {
    j["metrics"] = json::object();
    for (const auto& [k, v] : metrics) j["metrics"][k] = v;
    j["primary"] = primary;
  }
  return j;
}

json EvalReport::to_json() const {
  json j;
  j["checkpoint"] = checkpoint_id;
  j["variant"] = variant;
  j["macro_average"] = macro_average;
  j["tasks"] = json::array();
  for (const auto& t : tasks) j["tasks"].push_back(t.to_json());
  return j;
}

std::string EvalReport::table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %-22s %10s\n", "task", "kind", "primary");
  out += line;
  out += std::string(62, '-') + "\n";
  for (const auto& t : tasks) {
    if (t.error.empty()) {
      std::snprintf(line, sizeof line, "%-28s %-22s %10.4f\n", t.task_id.c_str(),
                    t.kind.c_str(), t.primary);
    } else {
      std::snprintf(line, sizeof line, "%-28s %-22s %10s\n", t.task_id.c_str(),
                    t.kind.c_str(), "ERROR");
    }
    out += line;
  }
  std::snprintf(line, sizeof line, "%-28s %-22s %10.4f\n", "macro_average", "",
                macro_average);
  out += line;
  return out;
}

namespace {

using instruct::TaskCategory;
using instruct::TrainingExample;
using instruct::Variant;
using instruct::VariantPolicy;

// Renders eval texts through the task's template when one is configured;
// rendering for evaluation never mixes in uninstructed examples.
struct Renderer {
  const EvalContext& ctx;
  const instruct::InstructionTemplate* tmpl = nullptr;

  Renderer(const EvalContext& context, const EvalTask& task) : ctx(context) {
    if (ctx.templates && !task.template_id.empty() && ctx.variant != Variant::no_inst) {
      tmpl = &ctx.templates->get(task.template_id);
    }
  }

  VariantPolicy policy() const {
    VariantPolicy p;
    p.variant = ctx.variant;
    p.uninstructed_mix_ratio = 0.0;
    return p;
  }

  std::string query(const std::string& text) const {
    if (!tmpl) return text;
    TrainingExample e;
    e.category = tmpl->category;
    e.query = text;
    e.positive = "";
    return instruct::render(e, *tmpl, policy(), 0).query;
  }

  std::string document(const std::string& text) const {
    if (!tmpl) return text;
    TrainingExample e;
    e.category = tmpl->category;
    e.query = "";
    e.positive = text;
    return instruct::render(e, *tmpl, policy(), 0).positive;
  }

  std::string cross_query(const std::string& a, const std::string& b) const {
    if (!tmpl) return a + " " + b;
    TrainingExample e;
    e.category = tmpl->category;
    e.query = a;
    e.second_text = b;
    e.positive = "";
    return instruct::render(e, *tmpl, policy(), 0).query;
  }
};

std::vector<std::vector<double>> embed_all(const EvalContext& ctx,
                                           const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out(texts.size());
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto it = first_seen.find(texts[i]);
    if (it != first_seen.end()) {
      out[i] = out[it->second];
    } else {
      out[i] = ctx.scorer.embed(texts[i]);
      first_seen[texts[i]] = i;
    }
  }
  return out;
}

TaskReport base_report(const EvalTask& task) {
  TaskReport r;
  r.task_id = task.task_id;
  r.kind = task_kind_name(task.kind);
  return r;
}

// Nearest-label classification shared by classification and cross tasks.
// Candidate labels: the template's class list when present, else the sorted
// gold label set; a gold label outside the candidates is an error.
std::vector<std::string> candidate_labels(const Renderer& render,
                                          const std::vector<std::string>& gold) {
  std::vector<std::string> labels;
  if (render.tmpl && !render.tmpl->class_names.empty()) {
    labels = render.tmpl->class_names;
  } else {
    std::set<std::string> uniq(gold.begin(), gold.end());
    labels.assign(uniq.begin(), uniq.end());
  }
  std::set<std::string> known(labels.begin(), labels.end());
  for (const auto& g : gold) {
    if (!known.count(g)) fail_data("unseen label in test data: " + g);
  }
  return labels;
}

std::vector<std::string> nearest_labels(
    const EvalContext& ctx, const std::vector<std::vector<double>>& inputs,
    const std::vector<std::string>& labels, const Renderer& render) {
  std::vector<std::string> rendered;
  rendered.reserve(labels.size());
  for (const auto& l : labels) rendered.push_back(render.document(l));
  auto label_emb = embed_all(ctx, rendered);

  std::vector<std::string> predictions;
  predictions.reserve(inputs.size());
  for (const auto& v : inputs) {
    std::size_t best = 0;
    double best_score = pairmine::cosine(v, label_emb[0]);
    for (std::size_t c = 1; c < labels.size(); ++c) {
      double s = pairmine::cosine(v, label_emb[c]);
      if (s > best_score) {  // ties keep the lower class id
        best_score = s;
        best = c;
      }
    }
    predictions.push_back(labels[best]);
  }
  return predictions;
}

}  // namespace

TaskReport eval_retrieval(const EvalTask& task, const EvalContext& ctx) {
  const auto& t = std::get<RetrievalTask>(task.data);
  if (t.docs.size() < 10) fail_data("retrieval task needs a corpus of >= 10 docs");
  Renderer render(ctx, task);
  TaskReport report = base_report(task);

  std::vector<std::string> doc_texts;
  for (const auto& [id, text] : t.docs) doc_texts.push_back(render.document(text));
  auto doc_emb = embed_all(ctx, doc_texts);

  double ndcg = 0, r1 = 0, r10 = 0;
  std::size_t used = 0;
  for (const auto& q : t.queries) {
    if (q.relevant.empty()) {
      ++report.excluded;
      continue;
    }
    auto q_emb = ctx.scorer.embed(render.query(q.text));
    std::vector<std::size_t> order(t.docs.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> scores(t.docs.size());
    for (std::size_t i = 0; i < t.docs.size(); ++i) {
      scores[i] = pairmine::cosine(q_emb, doc_emb[i]);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return t.docs[a].first < t.docs[b].first;  // deterministic id tie-break
    });
    std::vector<std::string> ranked;
    ranked.reserve(order.size());
    for (std::size_t i : order) ranked.push_back(t.docs[i].first);

    ndcg += ndcg_at_k(ranked, q.relevant, 10);
    r1 += recall_at_k(ranked, q.relevant, 1);
    r10 += recall_at_k(ranked, q.relevant, 10);
    ++used;
  }
  if (used == 0) fail_data("retrieval task has no scorable queries");
  report.records = used;
  report.metrics["ndcg@10"] = ndcg / double(used);
  report.metrics["recall@1"] = r1 / double(used);
  report.metrics["recall@10"] = r10 / double(used);
  report.primary = report.metrics["ndcg@10"];
  return report;
}

TaskReport eval_sts(const EvalTask& task, const EvalContext& ctx) {
  const auto& t = std::get<StsTask>(task.data);
  if (t.pairs.size() < 3) fail_data("sts task needs at least 3 pairs");
  Renderer render(ctx, task);
  TaskReport report = base_report(task);

  std::vector<double> sims, gold;
  for (const auto& [a, b, score] : t.pairs) {
    auto ea = ctx.scorer.embed(render.query(a));
    auto eb = ctx.scorer.embed(render.document(b));
    sims.push_back(pairmine::cosine(ea, eb));
    gold.push_back(score);
  }
  report.records = t.pairs.size();
  report.metrics["spearman"] = spearman(sims, gold);
  report.primary = report.metrics["spearman"];
  return report;
}

TaskReport eval_classification(const EvalTask& task, const EvalContext& ctx) {
  const auto& t = std::get<LabeledTextTask>(task.data);
  if (t.records.empty()) fail_data("classification task is empty");
  Renderer render(ctx, task);
  TaskReport report = base_report(task);

  std::vector<std::string> gold, texts;
  for (const auto& [text, label] : t.records) {
    texts.push_back(render.query(text));
    gold.push_back(label);
  }
  std::set<std::string> classes(gold.begin(), gold.end());
  if (classes.size() < 2 && candidate_labels(render, gold).size() < 2) {
    // single-class data is legal; accuracy is trivially 1 when predicted
  }
  auto inputs = embed_all(ctx, texts);
  auto labels = candidate_labels(render, gold);
  auto predicted = nearest_labels(ctx, inputs, labels, render);

  auto stats = classification_stats(gold, predicted);
  report.records = gold.size();
  report.metrics["accuracy"] = stats.accuracy;
  report.metrics["macro_f1"] = stats.macro_f1;
  report.primary = stats.accuracy;
  return report;
}

TaskReport eval_cross_classification(const EvalTask& task, const EvalContext& ctx) {
  const auto& t = std::get<PairTask>(task.data);
  if (t.records.empty()) fail_data("cross_classification task is empty");
  Renderer render(ctx, task);
  TaskReport report = base_report(task);

  std::vector<std::string> gold, inputs_text;
  for (const auto& [a, b, label] : t.records) {
    inputs_text.push_back(render.cross_query(a, b));
    gold.push_back(label);
  }
  auto inputs = embed_all(ctx, inputs_text);
  auto labels = candidate_labels(render, gold);
  auto predicted = nearest_labels(ctx, inputs, labels, render);

  report.records = gold.size();
  report.metrics["accuracy"] = classification_stats(gold, predicted).accuracy;
  report.primary = report.metrics["accuracy"];
  return report;
}

TaskReport eval_pair_classification(const EvalTask& task, const EvalContext& ctx) {
  const auto& t = std::get<PairTask>(task.data);
  if (t.records.empty()) fail_data("pair_classification task is empty");
  Renderer render(ctx, task);
  TaskReport report = base_report(task);

  std::vector<double> sims;
  std::vector<int> labels;
  for (const auto& [a, b, label] : t.records) {
    auto ea = ctx.scorer.embed(render.query(a));
    auto eb = ctx.scorer.embed(render.document(b));
    sims.push_back(pairmine::cosine(ea, eb));
    labels.push_back(label == "1" ? 1 : 0);
  }
  report.records = t.records.size();
  report.metrics["accuracy@best_threshold"] = best_threshold_accuracy(sims, labels);
  report.primary = report.metrics["accuracy@best_threshold"];
  return report;
}

TaskReport eval_reranking(const EvalTask& task, const EvalContext& ctx) {
  const auto& t = std::get<RerankingTask>(task.data);
  if (t.queries.empty()) fail_data("reranking task is empty");
  Renderer render(ctx, task);
  TaskReport report = base_report(task);

  double map_sum = 0.0;
  std::size_t used = 0;
  for (const auto& [query, candidates] : t.queries) {
    bool has_positive = false;
    for (const auto& c : candidates) has_positive = has_positive || c.positive;
    if (!has_positive) {
      ++report.excluded;
      continue;
    }
    auto q_emb = ctx.scorer.embed(render.query(query));
    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      scores[i] = pairmine::cosine(q_emb, ctx.scorer.embed(render.document(
                                              candidates[i].text)));
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return a < b;
    });
    std::vector<bool> ranked;
    ranked.reserve(order.size());
    for (std::size_t i : order) ranked.push_back(candidates[i].positive);
    map_sum += average_precision(ranked);
    ++used;
  }
  if (used == 0) fail_data("reranking task has no scorable queries");
  report.records = used;
  report.metrics["map"] = map_sum / double(used);
  report.primary = report.metrics["map"];
  return report;
}

TaskReport eval_clustering(const EvalTask& task, const EvalContext& ctx) {
  const auto& t = std::get<LabeledTextTask>(task.data);
  if (t.records.empty()) fail_data("clustering task is empty");
  Renderer render(ctx, task);
  TaskReport report = base_report(task);

  std::map<std::string, int> class_ids;
  std::vector<int> gold;
  std::vector<std::string> texts;
  for (const auto& [text, label] : t.records) {
    auto [it, inserted] = class_ids.emplace(label, int(class_ids.size()));
    gold.push_back(it->second);
    texts.push_back(render.query(text));
  }
  auto points = embed_all(ctx, texts);
  auto result = kmeans(points, class_ids.size(), ctx.seed);

  report.records = t.records.size();
  report.metrics["v_measure"] = v_measure(gold, result.assignment);
  report.primary = report.metrics["v_measure"];
  return report;
}

TaskReport eval_task(const EvalTask& task, const EvalContext& ctx) {
  switch (task.kind) {
    case TaskKind::retrieval: return eval_retrieval(task, ctx);
    case TaskKind::sts: return eval_sts(task, ctx);
    case TaskKind::classification: return eval_classification(task, ctx);
    case TaskKind::pair_classification: return eval_pair_classification(task, ctx);
    case TaskKind::cross_classification: return eval_cross_classification(task, ctx);
    case TaskKind::reranking: return eval_reranking(task, ctx);
    case TaskKind::clustering: return eval_clustering(task, ctx);
  }
  fail_data("unhandled task kind");
}

EvalReport evaluate_directory(const std::filesystem::path& dir, const EvalContext& ctx,
                              const std::string& checkpoint_id) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    fail(ErrorKind::missing_input, "task directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail_data("no .jsonl task files in " + dir.string());

  EvalReport report;
  report.checkpoint_id = checkpoint_id;
  report.variant = instruct::variant_name(ctx.variant);
  double sum = 0.0;
  std::size_t ok = 0;
  for (const auto& f : files) {
    EvalTask task = load_task(f);
    TaskReport tr;
    try {
      tr = eval_task(task, ctx);
    } catch (const Error& e) {
      tr = TaskReport{};
      tr.task_id = task.task_id;
      tr.kind = task_kind_name(task.kind);
      tr.error = e.what();
    }
    if (tr.error.empty()) {
      sum += tr.primary;
      ++ok;
    }
    report.tasks.push_back(std::move(tr));
  }
  report.macro_average = ok ? sum / double(ok) : 0.0;
  return report;
}

}  // namespace embedkit::evalbench
