#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgpath/graph.hpp"
#include "kgpath/model.hpp"
#include "kgpath/rng.hpp"

namespace kgpath {

enum class Curriculum { SingleEdgeOnly, Compositional };

struct TrainConfig {
  double step_size = 0.01;          // in [0.001, 0.1]
  int minibatch = 300;
  int negatives_per_example = 10;
  double margin = 1.0;
  double init_std = 0.31622776601683794;  // sqrt(0.1)
  int max_epochs = 100;
  int patience = 5;
  double clip_multiplier = 3.0;
  int clip_window = 1000;
  // Resolved per model when unset: Bilinear uses max over negatives,
  // the others sum.
  std::optional<bool> use_max_over_negatives;
  double aux_l2_weight = 0.0;
  uint64_t seed = 0;
  Curriculum curriculum = Curriculum::Compositional;
  int dim = 100;
  double heldout_fraction = 0.05;

  bool resolve_max_mode(ModelKind kind) const {
    return use_max_over_negatives.value_or(kind == ModelKind::Bilinear);
  }
};

// Parses the flat key=value config format; unknown keys are an error.
TrainConfig parse_train_config(const std::map<std::string, std::string>& kv);

enum class LossMode { SumOverNegatives, MaxOverNegatives };

// Gradient touching only the parameters on one example's support:
// the source/answer/negative entity vectors and the path's relations.
struct SparseGrad {
  std::unordered_map<EntityId, std::vector<double>> entity;
  std::unordered_map<RelationId, std::vector<double>> relation;

  double squared_norm() const;
  void scale(double factor);
  void accumulate(const SparseGrad& other);
};

// Hinge loss of one example against its sampled negatives. Sum mode adds
// [1 - margin(q,t,t')]+ over negatives; max mode takes the largest term.
// With aux_l2_weight > 0 and a length-1 query, adds the auxiliary
// lambda * ||T_r(x_s) - x_t||^2 term. Empty negatives: loss 0, skipped set.
double example_loss(const ModelParams& params, const QueryExample& example,
                    const std::vector<EntityId>& negatives, LossMode mode,
                    double margin, double aux_l2_weight,
                    bool* skipped = nullptr);

// Loss plus its subgradient (accumulated into grad). The hinge kink at
// exactly zero uses the zero subgradient.
double example_loss_grad(const ModelParams& params, const QueryExample& example,
                         const std::vector<EntityId>& negatives, LossMode mode,
                         double margin, double aux_l2_weight, SparseGrad& grad);

// Up to k distinct entities uniform without replacement from N(q),
// computed on `graph`.
std::vector<EntityId> sample_negatives(const KnowledgeGraph& graph,
                                       const PathQuery& query, int k, Rng& rng);

// Sliding-window median clipping of minibatch update norms: an update
// whose l2 norm exceeds multiplier * median(window) is rescaled to the
// median; the post-decision norm enters the window.
class GradientClipper {
 public:
  GradientClipper(double multiplier, int window)
      : multiplier_(multiplier), window_(window) {}

  // Returns the scale factor applied (1.0 when unclipped) and records
  // the resulting norm.
  double clip(SparseGrad& grad);

  // Decision rule on a bare norm; exposed for the reference test.
  double decide_scale(double norm) const;
  void record(double norm);

 private:
  double median() const;
  double multiplier_;
  size_t window_;
  std::deque<double> norms_;
};

struct AdaGradState {
  std::vector<std::vector<double>> entity_acc;
  std::vector<std::vector<double>> relation_acc;

  static AdaGradState zeros_like(const ModelParams& params);
};

// Per-entry theta -= step * g / sqrt(G + 1e-8), G += g^2; every touched
// entity vector is then projected back to the unit ball. Throws
// NumericError on non-finite gradient entries.
void apply_adagrad(ModelParams& params, AdaGradState& state,
                   const SparseGrad& grad, double step_size);

struct TrainLogRow {
  int epoch;
  int phase;   // 1 = single-edge, 2 = compositional
  double loss;
  double clip_rate;
  double heldout_mq;  // -1 when no held-out example was scorable
};

struct TrainResult {
  ModelParams params;
  std::vector<TrainLogRow> log;
};

// Curriculum training. Phase 1 trains on length-1 base-relation examples;
// at the phase boundary inverse relation parameters are derived
// (Bilinear: W transposed; TransE: negated; BilinearDiag: fresh Gaussian).
// Phase 2 (Compositional only) trains on all examples. Convergence is
// patience-based early stopping on held-out mean quantile.
TrainResult train(const KnowledgeGraph& graph,
                  const std::vector<QueryExample>& examples, ModelKind kind,
                  const TrainConfig& config);

// The phase-boundary inverse initialization, exposed for testing.
void init_inverse_relations(ModelParams& params, const KnowledgeGraph& graph,
                            double init_std, Rng& rng);

void write_train_log(std::ostream& out, const std::vector<TrainLogRow>& log);

}  // namespace kgpath
