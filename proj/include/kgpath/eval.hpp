#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgpath/graph.hpp"
#include "kgpath/model.hpp"

namespace kgpath {

enum class EvalGraphPolicy { FullGraph, TrainGraph };

struct EvalConfig {
  int hits_k = 10;
  EvalGraphPolicy eval_graph_policy = EvalGraphPolicy::FullGraph;
  // Drop length-1 test edges already present in the (closed) train graph.
  bool filter_trivial_inverse = true;
  int workers = 1;
};

// Fraction of incorrect answers ranked strictly below t; ties count zero.
// Requires N(q) nonempty (checked by the caller via exclusion).
double quantile(const ModelParams& params, const KnowledgeGraph& graph,
                const PathQuery& q, EntityId t);

struct SubsetStats {
  long n = 0;
  double quantile_sum = 0.0;
  long hits = 0;

  std::optional<double> mean_quantile() const {
    if (n == 0) return std::nullopt;
    return quantile_sum / n;
  }
  std::optional<double> hits_pct() const {
    if (n == 0) return std::nullopt;
    return 100.0 * hits / n;
  }
};

struct EvalReport {
  long n_input = 0;
  long n_evaluated = 0;
  long n_excluded_trivial = 0;        // type-match trivial: N(q) empty
  long n_excluded_inverse = 0;        // trivial-inverse length-1 edges
  int hits_k = 10;
  SubsetStats overall;
  std::map<int, SubsetStats> by_length;
  SubsetStats deduction;  // multi-hop only
  SubsetStats induction;
  std::map<int, SubsetStats> deduction_by_length;
  std::map<int, SubsetStats> induction_by_length;
};

// Scores each example against N(q) computed per eval_graph_policy;
// hits@k uses the pessimistic rank 1 + #{t' : score(t') >= score(t)}.
// Deduction/induction labels come from exact traversal of train_graph.
EvalReport evaluate(const ModelParams& params,
                    const KnowledgeGraph& full_graph,
                    const KnowledgeGraph& train_graph,
                    const std::vector<QueryExample>& examples,
                    const EvalConfig& config);

// CSV rows: subset,length,n,mq,hits_at_k  (length "all" for aggregates).
void write_eval_report_csv(std::ostream& out, const EvalReport& report);
void print_eval_summary(std::ostream& out, const EvalReport& report);

}  // namespace kgpath
