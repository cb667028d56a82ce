// Compares the serial and OpenMP candidate-scoring kernels on a random
// graph, and both evaluation paths (workers=1 vs workers=N).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kgpath/eval.hpp"
#include "kgpath/graph.hpp"
#include "kgpath/model.hpp"
#include "kgpath/pathgen.hpp"
#include "kgpath/rng.hpp"

using namespace kgpath;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

KnowledgeGraph random_graph(int n_entities, int n_relations, int n_edges,
                            Rng& rng) {
  std::set<Triple> edges;
  while (static_cast<int>(edges.size()) < n_edges) {
    edges.insert({static_cast<EntityId>(rng.below(n_entities)),
                  static_cast<RelationId>(rng.below(n_relations)),
                  static_cast<EntityId>(rng.below(n_entities))});
  }
  std::vector<std::string> entities, relations;
  for (int e = 0; e < n_entities; ++e) entities.push_back("e" + std::to_string(e));
  for (int r = 0; r < n_relations; ++r) relations.push_back("r" + std::to_string(r));
  return KnowledgeGraph(std::move(entities), std::move(relations),
                        {edges.begin(), edges.end()});
}

}  // namespace

int main(int argc, char** argv) {
  const int n_entities = argc > 1 ? std::atoi(argv[1]) : 2000;
  const int n_queries = argc > 2 ? std::atoi(argv[2]) : 200;
  const int dim = argc > 3 ? std::atoi(argv[3]) : 64;

  Rng rng(42);
  const KnowledgeGraph graph =
      random_graph(n_entities, 8, n_entities * 12, rng).close_inverses();
  const ModelParams params =
      init_params(ModelKind::Bilinear, dim, graph, 0.1, rng);

  std::vector<PathQuery> queries;
  std::vector<QueryExample> examples;
  while (static_cast<int>(queries.size()) < n_queries) {
    const QueryExample ex = sample_walk(graph, 2, 4, rng);
    queries.push_back(ex.query);
    examples.push_back(ex);
  }

#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::printf("graph: %zu entities, %zu triples; dim %d; %d queries; %d threads\n",
              graph.num_entities(), graph.num_triples(), dim, n_queries,
              threads);

  // Kernel: score every candidate of every query.
  std::vector<double> scores;
  double checksum_serial = 0, checksum_parallel = 0;

  auto t0 = Clock::now();
  for (const PathQuery& q : queries) {
    const auto& cands = graph.candidates(q);
    scores.resize(cands.size());
    score_candidates_serial(params, q, cands, scores);
    for (double s : scores) checksum_serial += s;
  }
  const double serial_s = seconds_since(t0);

  t0 = Clock::now();
  for (const PathQuery& q : queries) {
    const auto& cands = graph.candidates(q);
    scores.resize(cands.size());
    score_candidates_parallel(params, q, cands, scores);
    for (double s : scores) checksum_parallel += s;
  }
  const double parallel_s = seconds_since(t0);

  std::printf("score_candidates   serial %8.3fs   parallel %8.3fs   speedup %.2fx\n",
              serial_s, parallel_s, serial_s / parallel_s);
  if (checksum_serial != checksum_parallel) {
    std::printf("MISMATCH: checksums differ (%.17g vs %.17g)\n",
                checksum_serial, checksum_parallel);
    return 1;
  }

  EvalConfig config;
  t0 = Clock::now();
  const EvalReport r1 = evaluate(params, graph, graph, examples, config);
  const double eval_serial_s = seconds_since(t0);

  config.workers = threads;
  t0 = Clock::now();
  const EvalReport r2 = evaluate(params, graph, graph, examples, config);
  const double eval_parallel_s = seconds_since(t0);

  std::printf("evaluate           serial %8.3fs   parallel %8.3fs   speedup %.2fx\n",
              eval_serial_s, eval_parallel_s, eval_serial_s / eval_parallel_s);
  if (r1.overall.quantile_sum != r2.overall.quantile_sum) {
    std::printf("MISMATCH: evaluation results differ\n");
    return 1;
  }
  std::printf("checksum %.17g  mq %s\n", checksum_serial,
              r1.overall.mean_quantile() ? "defined" : "undefined");
  return 0;
}
