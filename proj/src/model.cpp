#include "kgpath/model.hpp"

#include <algorithm>
#include <cmath>

#include "kgpath/errors.hpp"

namespace kgpath {

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Bilinear:
      return "bilinear";
    case ModelKind::BilinearDiag:
      return "bilinear-diag";
    case ModelKind::TransE:
      return "transe";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "bilinear") return ModelKind::Bilinear;
  if (name == "bilinear-diag") return ModelKind::BilinearDiag;
  if (name == "transe") return ModelKind::TransE;
  throw UsageError("unknown model kind: " + name);
}

std::vector<double> ModelParams::traverse(std::span<const double> v,
                                          RelationId r) const {
  if (r < 0 || static_cast<size_t>(r) >= relation_params.size())
    throw DataError("traverse: unknown relation id");
  const std::vector<double>& w = relation_params[r];
  std::vector<double> out(dim, 0.0);
  switch (kind) {
    case ModelKind::Bilinear:
      // Row form: out[j] = sum_a v[a] * W[a][j].
      for (int a = 0; a < dim; ++a) {
        const double va = v[a];
        if (va == 0.0) continue;
        const double* row = w.data() + static_cast<size_t>(a) * dim;
        for (int j = 0; j < dim; ++j) out[j] += va * row[j];
      }
      break;
    case ModelKind::BilinearDiag:
      for (int j = 0; j < dim; ++j) out[j] = v[j] * w[j];
      break;
    case ModelKind::TransE:
      for (int j = 0; j < dim; ++j) out[j] = v[j] + w[j];
      break;
  }
  return out;
}

double ModelParams::member_vec(std::span<const double> v,
                               std::span<const double> x) const {
  if (kind == ModelKind::TransE) {
    double acc = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double diff = v[j] - x[j];
      acc += diff * diff;
    }
    return -acc;
  }
  double acc = 0.0;
  for (int j = 0; j < dim; ++j) acc += v[j] * x[j];
  return acc;
}

double ModelParams::member(std::span<const double> v, EntityId t) const {
  if (t < 0 || static_cast<size_t>(t) >= entity_vecs.size())
    throw DataError("member: unknown entity id");
  return member_vec(v, entity_vecs[t]);
}

std::vector<std::vector<double>> ModelParams::forward_states(
    const PathQuery& q) const {
  if (q.source < 0 || static_cast<size_t>(q.source) >= entity_vecs.size())
    throw DataError("score: unknown source entity id");
  std::vector<std::vector<double>> states;
  states.reserve(q.path.size() + 1);
  states.push_back(entity_vecs[q.source]);
  for (RelationId r : q.path) states.push_back(traverse(states.back(), r));
  return states;
}

double ModelParams::score(const PathQuery& q, EntityId t) const {
  return member(forward_states(q).back(), t);
}

ModelParams init_params(ModelKind kind, int dim, const KnowledgeGraph& graph,
                        double init_std, Rng& rng) {
  ModelParams p;
  p.kind = kind;
  p.dim = dim;
  p.entity_names = graph.entity_names();
  p.relation_names = graph.relation_names();
  p.entity_vecs.resize(graph.num_entities());
  for (auto& v : p.entity_vecs) {
    v.resize(dim);
    for (double& x : v) x = init_std * rng.gaussian();
    project_to_unit_ball(v);
  }
  p.relation_params.resize(graph.num_relations());
  for (auto& w : p.relation_params) {
    w.resize(p.relation_param_size());
    for (double& x : w) x = init_std * rng.gaussian();
  }
  return p;
}

void project_to_unit_ball(std::vector<double>& v) {
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 == 0.0) {
    // Degenerate zero vector: pin to a fixed unit basis vector.
    v[0] = 1.0;
    return;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
}

void score_candidates_serial(const ModelParams& params, const PathQuery& q,
                             std::span<const EntityId> candidates,
                             std::span<double> out) {
  const auto states = params.forward_states(q);
  const std::vector<double>& v = states.back();
  for (size_t i = 0; i < candidates.size(); ++i)
    out[i] = params.member(v, candidates[i]);
}

void score_candidates_parallel(const ModelParams& params, const PathQuery& q,
                               std::span<const EntityId> candidates,
                               std::span<double> out) {
  const auto states = params.forward_states(q);
  const std::vector<double>& v = states.back();
  const int64_t n = static_cast<int64_t>(candidates.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) out[i] = params.member(v, candidates[i]);
}

std::vector<std::pair<EntityId, double>> rank_candidates(
    const ModelParams& params, const KnowledgeGraph& graph,
    const PathQuery& q) {
  const std::vector<EntityId> cand = graph.candidates(q);
  std::vector<double> scores(cand.size());
  score_candidates_serial(params, q, cand, scores);
  std::vector<std::pair<EntityId, double>> out;
  out.reserve(cand.size());
  for (size_t i = 0; i < cand.size(); ++i) out.emplace_back(cand[i], scores[i]);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

ModelParams adjacency_oracle_params(const KnowledgeGraph& graph) {
  ModelParams p;
  p.kind = ModelKind::Bilinear;
  p.dim = static_cast<int>(graph.num_entities());
  p.entity_names = graph.entity_names();
  p.relation_names = graph.relation_names();
  p.entity_vecs.assign(graph.num_entities(),
                       std::vector<double>(p.dim, 0.0));
  for (size_t e = 0; e < graph.num_entities(); ++e) p.entity_vecs[e][e] = 1.0;
  p.relation_params.assign(graph.num_relations(),
                           std::vector<double>(p.relation_param_size(), 0.0));
  for (const Triple& t : graph.triples())
    p.relation_params[t.relation][static_cast<size_t>(t.source) * p.dim +
                                  t.target] = 1.0;
  return p;
}

}  // namespace kgpath
