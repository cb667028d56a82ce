#include "kgpath/train.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "kgpath/errors.hpp"
#include "kgpath/io.hpp"

namespace kgpath {

namespace {

constexpr double kAdaGradEps = 1e-8;

std::vector<double> transpose(const std::vector<double>& m, int d) {
  std::vector<double> out(m.size());
  for (int a = 0; a < d; ++a)
    for (int j = 0; j < d; ++j)
      out[static_cast<size_t>(j) * d + a] = m[static_cast<size_t>(a) * d + j];
  return out;
}

template <typename Map>
std::vector<typename Map::key_type> sorted_keys(const Map& map) {
  std::vector<typename Map::key_type> keys;
  keys.reserve(map.size());
  for (const auto& [k, v] : map) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

TrainConfig parse_train_config(const std::map<std::string, std::string>& kv) {
  TrainConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "step_size") c.step_size = parse_double(value);
    else if (key == "minibatch") c.minibatch = std::stoi(value);
    else if (key == "negatives_per_example")
      c.negatives_per_example = std::stoi(value);
    else if (key == "margin") c.margin = parse_double(value);
    else if (key == "init_std") c.init_std = parse_double(value);
    else if (key == "max_epochs") c.max_epochs = std::stoi(value);
    else if (key == "patience") c.patience = std::stoi(value);
    else if (key == "clip_multiplier") c.clip_multiplier = parse_double(value);
    else if (key == "clip_window") c.clip_window = std::stoi(value);
    else if (key == "use_max_over_negatives")
      c.use_max_over_negatives = (value == "true" || value == "1");
    else if (key == "aux_l2_weight") c.aux_l2_weight = parse_double(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "curriculum") {
      if (value == "single") c.curriculum = Curriculum::SingleEdgeOnly;
      else if (value == "comp") c.curriculum = Curriculum::Compositional;
      else throw DataError("curriculum must be 'single' or 'comp'");
    } else if (key == "dim") c.dim = std::stoi(value);
    else if (key == "heldout_fraction") c.heldout_fraction = parse_double(value);
    else throw DataError("unknown training config key: " + key);
  }
  if (c.minibatch < 1 || c.negatives_per_example < 0 || c.margin <= 0 ||
      c.dim < 1 || c.max_epochs < 1 || c.patience < 1 || c.clip_window < 1 ||
      c.aux_l2_weight < 0)
    throw DataError("training config value out of range");
  return c;
}

double SparseGrad::squared_norm() const {
  // Sorted key order keeps the accumulation order platform-independent.
  double acc = 0.0;
  for (EntityId e : sorted_keys(entity))
    for (double x : entity.at(e)) acc += x * x;
  for (RelationId r : sorted_keys(relation))
    for (double x : relation.at(r)) acc += x * x;
  return acc;
}

void SparseGrad::scale(double factor) {
  for (auto& [e, v] : entity)
    for (double& x : v) x *= factor;
  for (auto& [r, v] : relation)
    for (double& x : v) x *= factor;
}

void SparseGrad::accumulate(const SparseGrad& other) {
  for (const auto& [e, v] : other.entity) {
    auto& dst = entity[e];
    if (dst.empty()) dst.assign(v.size(), 0.0);
    for (size_t i = 0; i < v.size(); ++i) dst[i] += v[i];
  }
  for (const auto& [r, v] : other.relation) {
    auto& dst = relation[r];
    if (dst.empty()) dst.assign(v.size(), 0.0);
    for (size_t i = 0; i < v.size(); ++i) dst[i] += v[i];
  }
}

namespace {

// Reverse-mode pass for one example: given the loss gradient with respect
// to the final set vector (dv_top) and per-target entity gradients already
// accumulated, pushes dv_top back through the traversal chain, touching
// relation parameters and the source vector.
void backprop_path(const ModelParams& params,
                   const std::vector<std::vector<double>>& states,
                   const PathQuery& q, std::vector<double> dv,
                   SparseGrad& grad) {
  const int d = params.dim;
  for (size_t i = q.path.size(); i > 0; --i) {
    const RelationId r = q.path[i - 1];
    const std::vector<double>& v_prev = states[i - 1];
    auto& rgrad = grad.relation[r];
    if (rgrad.empty()) rgrad.assign(params.relation_param_size(), 0.0);
    std::vector<double> dv_prev(d, 0.0);
    switch (params.kind) {
      case ModelKind::Bilinear: {
        const std::vector<double>& w = params.relation_params[r];
        for (int a = 0; a < d; ++a) {
          const double va = v_prev[a];
          const double* wrow = w.data() + static_cast<size_t>(a) * d;
          double* grow = rgrad.data() + static_cast<size_t>(a) * d;
          double acc = 0.0;
          for (int j = 0; j < d; ++j) {
            grow[j] += va * dv[j];
            acc += wrow[j] * dv[j];
          }
          dv_prev[a] = acc;
        }
        break;
      }
      case ModelKind::BilinearDiag: {
        const std::vector<double>& w = params.relation_params[r];
        for (int j = 0; j < d; ++j) {
          rgrad[j] += v_prev[j] * dv[j];
          dv_prev[j] = w[j] * dv[j];
        }
        break;
      }
      case ModelKind::TransE: {
        for (int j = 0; j < d; ++j) {
          rgrad[j] += dv[j];
          dv_prev[j] = dv[j];
        }
        break;
      }
    }
    dv = std::move(dv_prev);
  }
  auto& sgrad = grad.entity[q.source];
  if (sgrad.empty()) sgrad.assign(d, 0.0);
  for (int j = 0; j < d; ++j) sgrad[j] += dv[j];
}

// d member(v, x_t) / dv contribution for weight w, accumulated into dv;
// the matching d/dx_t lands in grad.
void member_backward(const ModelParams& params,
                     const std::vector<double>& v, EntityId t, double weight,
                     std::vector<double>& dv, SparseGrad& grad) {
  const int d = params.dim;
  const std::vector<double>& x = params.entity_vecs[t];
  auto& tgrad = grad.entity[t];
  if (tgrad.empty()) tgrad.assign(d, 0.0);
  if (params.kind == ModelKind::TransE) {
    for (int j = 0; j < d; ++j) {
      const double diff = v[j] - x[j];
      dv[j] += weight * (-2.0) * diff;
      tgrad[j] += weight * 2.0 * diff;
    }
  } else {
    for (int j = 0; j < d; ++j) {
      dv[j] += weight * x[j];
      tgrad[j] += weight * v[j];
    }
  }
}

struct HingeTerms {
  double loss = 0.0;
  double pos_weight = 0.0;                       // d loss / d score(q, t)
  std::vector<std::pair<size_t, double>> neg_weights;  // index into negatives
};

HingeTerms hinge_terms(double pos_score, const std::vector<double>& neg_scores,
                       LossMode mode, double margin) {
  HingeTerms out;
  if (mode == LossMode::MaxOverNegatives) {
    size_t best = 0;
    double best_hinge = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < neg_scores.size(); ++i) {
      const double h = margin - (pos_score - neg_scores[i]);
      if (h > best_hinge) {
        best_hinge = h;
        best = i;
      }
    }
    if (best_hinge > 0.0) {
      out.loss = best_hinge;
      out.pos_weight = -1.0;
      out.neg_weights.emplace_back(best, 1.0);
    }
    return out;
  }
  for (size_t i = 0; i < neg_scores.size(); ++i) {
    const double h = margin - (pos_score - neg_scores[i]);
    if (h > 0.0) {
      out.loss += h;
      out.pos_weight -= 1.0;
      out.neg_weights.emplace_back(i, 1.0);
    }
  }
  return out;
}

}  // namespace

double example_loss(const ModelParams& params, const QueryExample& example,
                    const std::vector<EntityId>& negatives, LossMode mode,
                    double margin, double aux_l2_weight, bool* skipped) {
  if (skipped) *skipped = negatives.empty();
  if (negatives.empty()) return 0.0;
  const auto states = params.forward_states(example.query);
  const std::vector<double>& v = states.back();
  const double pos = params.member(v, example.answer);
  std::vector<double> neg_scores(negatives.size());
  for (size_t i = 0; i < negatives.size(); ++i)
    neg_scores[i] = params.member(v, negatives[i]);
  double loss = hinge_terms(pos, neg_scores, mode, margin).loss;
  if (aux_l2_weight > 0.0 && example.query.path.size() == 1) {
    const std::vector<double>& x = params.entity_vecs[example.answer];
    double acc = 0.0;
    for (int j = 0; j < params.dim; ++j) {
      const double diff = v[j] - x[j];
      acc += diff * diff;
    }
    loss += aux_l2_weight * acc;
  }
  return loss;
}

double example_loss_grad(const ModelParams& params, const QueryExample& example,
                         const std::vector<EntityId>& negatives, LossMode mode,
                         double margin, double aux_l2_weight,
                         SparseGrad& grad) {
  if (negatives.empty()) return 0.0;
  const auto states = params.forward_states(example.query);
  const std::vector<double>& v = states.back();
  const double pos = params.member(v, example.answer);
  std::vector<double> neg_scores(negatives.size());
  for (size_t i = 0; i < negatives.size(); ++i)
    neg_scores[i] = params.member(v, negatives[i]);
  const HingeTerms terms = hinge_terms(pos, neg_scores, mode, margin);

  std::vector<double> dv(params.dim, 0.0);
  double loss = terms.loss;
  if (terms.pos_weight != 0.0)
    member_backward(params, v, example.answer, terms.pos_weight, dv, grad);
  for (const auto& [i, w] : terms.neg_weights)
    member_backward(params, v, negatives[i], w, dv, grad);

  if (aux_l2_weight > 0.0 && example.query.path.size() == 1) {
    const std::vector<double>& x = params.entity_vecs[example.answer];
    auto& tgrad = grad.entity[example.answer];
    if (tgrad.empty()) tgrad.assign(params.dim, 0.0);
    double acc = 0.0;
    for (int j = 0; j < params.dim; ++j) {
      const double diff = v[j] - x[j];
      acc += diff * diff;
      dv[j] += 2.0 * aux_l2_weight * diff;
      tgrad[j] -= 2.0 * aux_l2_weight * diff;
    }
    loss += aux_l2_weight * acc;
  }

  backprop_path(params, states, example.query, std::move(dv), grad);
  return loss;
}

std::vector<EntityId> sample_negatives(const KnowledgeGraph& graph,
                                       const PathQuery& query, int k,
                                       Rng& rng) {
  std::vector<EntityId> pool = graph.incorrect_answers(query);
  if (static_cast<int>(pool.size()) <= k) return pool;
  // Partial Fisher-Yates: first k positions form the sample.
  for (int i = 0; i < k; ++i) {
    const size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

double GradientClipper::median() const {
  std::vector<double> sorted(norms_.begin(), norms_.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double GradientClipper::decide_scale(double norm) const {
  if (norms_.empty() || norm == 0.0) return 1.0;
  const double med = median();
  if (norm > multiplier_ * med) return med / norm;
  return 1.0;
}

void GradientClipper::record(double norm) {
  norms_.push_back(norm);
  while (norms_.size() > window_) norms_.pop_front();
}

double GradientClipper::clip(SparseGrad& grad) {
  const double norm = std::sqrt(grad.squared_norm());
  const double scale = decide_scale(norm);
  if (scale != 1.0) grad.scale(scale);
  record(norm * scale);
  return scale;
}

AdaGradState AdaGradState::zeros_like(const ModelParams& params) {
  AdaGradState s;
  s.entity_acc.assign(params.entity_vecs.size(),
                      std::vector<double>(params.dim, 0.0));
  s.relation_acc.assign(params.relation_params.size(),
                        std::vector<double>(params.relation_param_size(), 0.0));
  return s;
}

void apply_adagrad(ModelParams& params, AdaGradState& state,
                   const SparseGrad& grad, double step_size) {
  for (EntityId e : sorted_keys(grad.entity)) {
    const std::vector<double>& g = grad.entity.at(e);
    std::vector<double>& acc = state.entity_acc[e];
    std::vector<double>& theta = params.entity_vecs[e];
    for (size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i]))
        throw NumericError("non-finite gradient for entity " +
                           params.entity_names[e]);
      acc[i] += g[i] * g[i];
      theta[i] -= step_size * g[i] / std::sqrt(acc[i] + kAdaGradEps);
    }
    project_to_unit_ball(theta);
  }
  for (RelationId r : sorted_keys(grad.relation)) {
    const std::vector<double>& g = grad.relation.at(r);
    std::vector<double>& acc = state.relation_acc[r];
    std::vector<double>& theta = params.relation_params[r];
    for (size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i]))
        throw NumericError("non-finite gradient for relation " +
                           params.relation_names[r]);
      acc[i] += g[i] * g[i];
      theta[i] -= step_size * g[i] / std::sqrt(acc[i] + kAdaGradEps);
    }
  }
}

void init_inverse_relations(ModelParams& params, const KnowledgeGraph& graph,
                            double init_std, Rng& rng) {
  if (!graph.has_inverses()) return;
  const RelationId base = graph.num_base_relations();
  for (RelationId r = 0; r < base; ++r) {
    const RelationId inv = graph.inverse_of(r);
    switch (params.kind) {
      case ModelKind::Bilinear:
        params.relation_params[inv] =
            transpose(params.relation_params[r], params.dim);
        break;
      case ModelKind::TransE: {
        std::vector<double> w = params.relation_params[r];
        for (double& x : w) x = -x;
        params.relation_params[inv] = std::move(w);
        break;
      }
      case ModelKind::BilinearDiag: {
        // Exact elementwise inverse 1/w is numerically unstable; use a
        // fresh Gaussian draw instead.
        std::vector<double>& w = params.relation_params[inv];
        for (double& x : w) x = init_std * rng.gaussian();
        break;
      }
    }
  }
}

namespace {

// Mean quantile of held-out examples against N(q) on the training graph;
// returns -1 when nothing is scorable.
double heldout_mean_quantile(const ModelParams& params,
                             const KnowledgeGraph& graph,
                             const std::vector<QueryExample>& examples) {
  double sum = 0.0;
  long n = 0;
  for (const QueryExample& ex : examples) {
    const std::vector<EntityId> negs = graph.incorrect_answers(ex.query);
    if (negs.empty()) continue;
    const auto states = params.forward_states(ex.query);
    const std::vector<double>& v = states.back();
    const double pos = params.member(v, ex.answer);
    long below = 0;
    for (EntityId t : negs)
      if (params.member(v, t) < pos) ++below;
    sum += static_cast<double>(below) / negs.size();
    ++n;
  }
  return n == 0 ? -1.0 : sum / n;
}

struct PhaseOutcome {
  std::vector<TrainLogRow> log;
};

void run_phase(int phase_no, ModelParams& params, const KnowledgeGraph& graph,
               const std::vector<QueryExample>& pool,
               const std::vector<QueryExample>& heldout,
               const TrainConfig& config, LossMode mode, Rng& rng,
               std::vector<TrainLogRow>& log) {
  if (pool.empty()) return;
  AdaGradState state = AdaGradState::zeros_like(params);
  GradientClipper clipper(config.clip_multiplier, config.clip_window);
  std::vector<size_t> order(pool.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  double best_stat = -std::numeric_limits<double>::infinity();
  int bad_evals = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (size_t i = 0; i + 1 < order.size(); ++i) {
      const size_t j = i + rng.below(order.size() - i);
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    long batches = 0;
    long clipped = 0;
    for (size_t start = 0; start < order.size();
         start += config.minibatch) {
      const size_t end = std::min(order.size(),
                                  start + static_cast<size_t>(config.minibatch));
      SparseGrad grad;
      double batch_loss = 0.0;
      for (size_t i = start; i < end; ++i) {
        const QueryExample& ex = pool[order[i]];
        const std::vector<EntityId> negs = sample_negatives(
            graph, ex.query, config.negatives_per_example, rng);
        if (negs.empty()) continue;
        batch_loss += example_loss_grad(params, ex, negs, mode, config.margin,
                                        config.aux_l2_weight, grad);
      }
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      grad.scale(inv_batch);
      batch_loss *= inv_batch;
      if (clipper.clip(grad) != 1.0) ++clipped;
      apply_adagrad(params, state, grad, config.step_size);
      epoch_loss += batch_loss;
      ++batches;
    }
    const double mean_loss = batches ? epoch_loss / batches : 0.0;
    const double mq = heldout_mean_quantile(params, graph, heldout);
    log.push_back({epoch, phase_no, mean_loss,
                   batches ? static_cast<double>(clipped) / batches : 0.0,
                   mq});
    const double stat = mq >= 0.0 ? mq : -mean_loss;
    if (stat > best_stat + 1e-12) {
      best_stat = stat;
      bad_evals = 0;
    } else if (++bad_evals >= config.patience) {
      break;
    }
  }
}

}  // namespace

TrainResult train(const KnowledgeGraph& graph,
                  const std::vector<QueryExample>& examples, ModelKind kind,
                  const TrainConfig& config) {
  if (examples.empty()) throw DataError("train: empty example set");
  const Rng root(config.seed);
  Rng init_rng = root.substream(0);
  TrainResult result;
  result.params =
      init_params(kind, config.dim, graph, config.init_std, init_rng);
  const LossMode mode = config.resolve_max_mode(kind)
                            ? LossMode::MaxOverNegatives
                            : LossMode::SumOverNegatives;

  // Seed-derived held-out split for convergence tracking.
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng = root.substream(1);
  for (size_t i = 0; i + 1 < order.size(); ++i) {
    const size_t j = i + split_rng.below(order.size() - i);
    std::swap(order[i], order[j]);
  }
  const size_t n_heldout =
      static_cast<size_t>(config.heldout_fraction * examples.size());
  std::vector<QueryExample> heldout, pool;
  for (size_t i = 0; i < order.size(); ++i)
    (i < n_heldout ? heldout : pool).push_back(examples[order[i]]);
  if (pool.empty()) {
    pool = std::move(heldout);
    heldout.clear();
  }

  const RelationId base = graph.num_base_relations();
  auto is_single_base = [&](const QueryExample& ex) {
    return ex.query.path.size() == 1 && ex.query.path[0] < base;
  };
  std::vector<QueryExample> pool1, heldout1;
  for (const QueryExample& ex : pool)
    if (is_single_base(ex)) pool1.push_back(ex);
  for (const QueryExample& ex : heldout)
    if (is_single_base(ex)) heldout1.push_back(ex);

  Rng phase1_rng = root.substream(2);
  run_phase(1, result.params, graph, pool1, heldout1, config, mode, phase1_rng,
            result.log);

  Rng inv_rng = root.substream(3);
  init_inverse_relations(result.params, graph, config.init_std, inv_rng);

  if (config.curriculum == Curriculum::Compositional) {
    Rng phase2_rng = root.substream(4);
    run_phase(2, result.params, graph, pool, heldout, config, mode, phase2_rng,
              result.log);
  }
  return result;
}

void write_train_log(std::ostream& out, const std::vector<TrainLogRow>& log) {
  out << "epoch,phase,loss,clip_rate,heldout_mq\n";
  for (const TrainLogRow& row : log)
    out << row.epoch << "," << row.phase << "," << format_double(row.loss)
        << "," << format_double(row.clip_rate) << ","
        << format_double(row.heldout_mq) << "\n";
}

}  // namespace kgpath
