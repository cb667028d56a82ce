#include "kgpath/eval.hpp"

#include <algorithm>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kgpath/errors.hpp"
#include "kgpath/io.hpp"

namespace kgpath {

double quantile(const ModelParams& params, const KnowledgeGraph& graph,
                const PathQuery& q, EntityId t) {
  const std::vector<EntityId> negs = graph.incorrect_answers(q);
  if (negs.empty())
    throw DataError("quantile undefined: type-match-trivial query");
  const auto states = params.forward_states(q);
  const std::vector<double>& v = states.back();
  const double pos = params.member(v, t);
  long below = 0;
  for (EntityId n : negs)
    if (params.member(v, n) < pos) ++below;
  return static_cast<double>(below) / negs.size();
}

namespace {

enum class Outcome { Evaluated, TrivialTypeMatch, TrivialInverse };

struct ExampleResult {
  Outcome outcome = Outcome::Evaluated;
  double quantile = 0.0;
  bool hit = false;
  int length = 0;
  QueryClass cls = QueryClass::Induction;
};

ExampleResult evaluate_one(const ModelParams& params,
                           const KnowledgeGraph& eval_graph,
                           const KnowledgeGraph& train_graph,
                           const QueryExample& ex, const EvalConfig& config) {
  ExampleResult res;
  res.length = static_cast<int>(ex.query.path.size());
  if (config.filter_trivial_inverse && res.length == 1 &&
      train_graph.has_inverses() &&
      is_trivial_inverse_edge(
          train_graph, {ex.query.source, ex.query.path[0], ex.answer})) {
    res.outcome = Outcome::TrivialInverse;
    return res;
  }
  std::vector<EntityId> negs = eval_graph.incorrect_answers(ex.query);
  // Under the TrainGraph ablation the answer itself can land in N(q)
  // (unseen edge); it is never scored as its own negative.
  auto self = std::lower_bound(negs.begin(), negs.end(), ex.answer);
  if (self != negs.end() && *self == ex.answer) negs.erase(self);
  if (negs.empty()) {
    res.outcome = Outcome::TrivialTypeMatch;
    return res;
  }
  const auto states = params.forward_states(ex.query);
  const std::vector<double>& v = states.back();
  const double pos = params.member(v, ex.answer);
  long below = 0;
  long at_or_above = 0;
  for (EntityId n : negs) {
    const double s = params.member(v, n);
    if (s < pos) ++below;
    if (s >= pos) ++at_or_above;
  }
  res.quantile = static_cast<double>(below) / negs.size();
  res.hit = 1 + at_or_above <= config.hits_k;
  if (res.length >= 2) res.cls = classify_deduction(train_graph, ex);
  return res;
}

// Quantiles are gathered per subset and summed in sorted order so the
// report is exactly invariant under permutation of the input examples.
struct SubsetAcc {
  std::vector<double> quantiles;
  long hits = 0;

  void add(const ExampleResult& r) {
    quantiles.push_back(r.quantile);
    if (r.hit) ++hits;
  }
  SubsetStats finish() {
    SubsetStats s;
    s.n = static_cast<long>(quantiles.size());
    s.hits = hits;
    std::sort(quantiles.begin(), quantiles.end());
    for (double q : quantiles) s.quantile_sum += q;
    return s;
  }
};

}  // namespace

EvalReport evaluate(const ModelParams& params, const KnowledgeGraph& full_graph,
                    const KnowledgeGraph& train_graph,
                    const std::vector<QueryExample>& examples,
                    const EvalConfig& config) {
  const KnowledgeGraph& eval_graph =
      config.eval_graph_policy == EvalGraphPolicy::FullGraph ? full_graph
                                                             : train_graph;
  std::vector<ExampleResult> results(examples.size());
  const int64_t n = static_cast<int64_t>(examples.size());
  if (config.workers > 1) {
#ifdef _OPENMP
    omp_set_num_threads(config.workers);
#endif
#pragma omp parallel for schedule(dynamic, 16)
    for (int64_t i = 0; i < n; ++i)
      results[i] =
          evaluate_one(params, eval_graph, train_graph, examples[i], config);
  } else {
    for (int64_t i = 0; i < n; ++i)
      results[i] =
          evaluate_one(params, eval_graph, train_graph, examples[i], config);
  }

  EvalReport report;
  report.n_input = n;
  report.hits_k = config.hits_k;
  SubsetAcc overall, deduction, induction;
  std::map<int, SubsetAcc> by_length, ded_by_length, ind_by_length;
  for (const ExampleResult& r : results) {
    switch (r.outcome) {
      case Outcome::TrivialInverse:
        ++report.n_excluded_inverse;
        continue;
      case Outcome::TrivialTypeMatch:
        ++report.n_excluded_trivial;
        continue;
      case Outcome::Evaluated:
        break;
    }
    ++report.n_evaluated;
    overall.add(r);
    by_length[r.length].add(r);
    if (r.length >= 2) {
      if (r.cls == QueryClass::Deduction) {
        deduction.add(r);
        ded_by_length[r.length].add(r);
      } else {
        induction.add(r);
        ind_by_length[r.length].add(r);
      }
    }
  }
  report.overall = overall.finish();
  report.deduction = deduction.finish();
  report.induction = induction.finish();
  for (auto& [len, acc] : by_length) report.by_length[len] = acc.finish();
  for (auto& [len, acc] : ded_by_length)
    report.deduction_by_length[len] = acc.finish();
  for (auto& [len, acc] : ind_by_length)
    report.induction_by_length[len] = acc.finish();
  return report;
}

namespace {

void write_row(std::ostream& out, const std::string& subset,
               const std::string& length, const SubsetStats& s) {
  out << subset << "," << length << "," << s.n << ",";
  if (auto mq = s.mean_quantile()) out << format_double(*mq);
  out << ",";
  if (auto h = s.hits_pct()) out << format_double(*h);
  out << "\n";
}

}  // namespace

void write_eval_report_csv(std::ostream& out, const EvalReport& report) {
  out << "subset,length,n,mq,hits_at_k\n";
  write_row(out, "all", "all", report.overall);
  for (const auto& [len, s] : report.by_length)
    write_row(out, "all", std::to_string(len), s);
  write_row(out, "deduction", "all", report.deduction);
  for (const auto& [len, s] : report.deduction_by_length)
    write_row(out, "deduction", std::to_string(len), s);
  write_row(out, "induction", "all", report.induction);
  for (const auto& [len, s] : report.induction_by_length)
    write_row(out, "induction", std::to_string(len), s);
}

void print_eval_summary(std::ostream& out, const EvalReport& report) {
  out << "examples: " << report.n_input << " (evaluated " << report.n_evaluated
      << ", type-match-trivial " << report.n_excluded_trivial
      << ", trivial-inverse " << report.n_excluded_inverse << ")\n";
  auto line = [&](const char* name, const SubsetStats& s) {
    out << "  " << name << ": n=" << s.n;
    if (auto mq = s.mean_quantile())
      out << "  MQ=" << format_double(100.0 * *mq);
    if (auto h = s.hits_pct())
      out << "  H@" << report.hits_k << "=" << format_double(*h);
    out << "\n";
  };
  line("overall", report.overall);
  for (const auto& [len, s] : report.by_length)
    line(("length " + std::to_string(len)).c_str(), s);
  line("deduction", report.deduction);
  line("induction", report.induction);
}

}  // namespace kgpath
