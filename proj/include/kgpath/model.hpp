#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgpath/graph.hpp"
#include "kgpath/rng.hpp"

namespace kgpath {

enum class ModelKind { Bilinear, BilinearDiag, TransE };

const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

// Entity vectors plus per-relation parameters. Bilinear relations carry a
// d x d row-major matrix; BilinearDiag and TransE carry a length-d vector.
// Bilinear traversal uses the row form v^T W.
struct ModelParams {
  ModelKind kind = ModelKind::Bilinear;
  int dim = 0;
  std::vector<std::vector<double>> entity_vecs;
  std::vector<std::vector<double>> relation_params;
  std::vector<std::string> entity_names;
  std::vector<std::string> relation_names;

  size_t relation_param_size() const {
    return kind == ModelKind::Bilinear ? static_cast<size_t>(dim) * dim : dim;
  }

  // One traversal step T_r(v).
  std::vector<double> traverse(std::span<const double> v, RelationId r) const;
  // Membership score M(v, x_t).
  double member(std::span<const double> v, EntityId t) const;
  // Composed score: member applied to the fold of traverse over the path.
  double score(const PathQuery& q, EntityId t) const;

  // States of the forward fold: x_s, T_r1(x_s), ..., the full vector
  // denotation. Shared by scoring and backpropagation.
  std::vector<std::vector<double>> forward_states(const PathQuery& q) const;
  double member_vec(std::span<const double> v, std::span<const double> x) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Gaussian init (std init_std in every entry); entity vectors projected to
// the unit ball afterwards.
ModelParams init_params(ModelKind kind, int dim, const KnowledgeGraph& graph,
                        double init_std, Rng& rng);

// Scores every candidate of q. The two variants compute identical results;
// the parallel one shards candidates across OpenMP threads.
void score_candidates_serial(const ModelParams& params, const PathQuery& q,
                             std::span<const EntityId> candidates,
                             std::span<double> out);
void score_candidates_parallel(const ModelParams& params, const PathQuery& q,
                               std::span<const EntityId> candidates,
                               std::span<double> out);

// Candidates of q sorted by descending score, ties by ascending entity id.
// Empty result signals an empty candidate set.
std::vector<std::pair<EntityId, double>> rank_candidates(
    const ModelParams& params, const KnowledgeGraph& graph, const PathQuery& q);

// Exact-traversal construction: d = |E|, W_r = adjacency matrix of r,
// x_e = indicator. The Bilinear score then counts paths from s to t.
ModelParams adjacency_oracle_params(const KnowledgeGraph& graph);

void project_to_unit_ball(std::vector<double>& v);

}  // namespace kgpath
