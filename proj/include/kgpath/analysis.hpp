#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kgpath/graph.hpp"
#include "kgpath/model.hpp"

namespace kgpath {

// Relation sequence with no anchor entity.
struct PathType {
  std::vector<RelationId> relations;
};

// Average quantile over all correct answers of q; 1.0 iff every member of
// the denotation outranks every incorrect candidate. nullopt when the
// denotation or the incorrect set is empty.
std::optional<double> reconstruction_quality(const ModelParams& params,
                                             const KnowledgeGraph& graph,
                                             const PathQuery& q);

struct RqPoint {
  int prefix_len = 0;
  std::optional<double> rq;
  std::vector<std::pair<EntityId, double>> top5;
};

// RQ of every query prefix s/r1/.../ri plus the five highest-scoring
// candidates at each step.
std::vector<RqPoint> rq_profile(const ModelParams& params,
                                const KnowledgeGraph& graph,
                                const PathQuery& q);

// prec(p) = |pairs(p) \cap pairs(r)| / |pairs(p)| where pairs(p) is the
// set of ordered entity pairs connected by path type p. nullopt when
// pairs(p) is empty.
std::optional<double> path_precision(const KnowledgeGraph& graph,
                                     const PathType& p, RelationId r);

// Chain product W_{r1} ... W_{rk} (row-major, Bilinear only).
std::vector<double> compose_matrices(const ModelParams& params,
                                     const PathType& p);

// Angle in [0, pi] between vec(W_{r1}...W_{rk}) and vec(W_r) in R^{d^2}.
// nullopt when either matrix is zero.
std::optional<double> matrix_angle(const ModelParams& params,
                                   const PathType& p, RelationId r);
std::optional<double> matrix_angle_vecs(const std::vector<double>& a,
                                        const std::vector<double>& b);

enum class PrecisionGroup { High, Low, NonCooccurring };

struct DeltaDistRow {
  PathType path;
  std::optional<double> precision;  // nullopt: empty pair set
  std::optional<double> dist_single;
  std::optional<double> dist_comp;
  std::optional<double> delta;
  std::optional<PrecisionGroup> group;
};

struct GroupSummary {
  long n = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct DeltaDistReport {
  RelationId relation;
  std::vector<DeltaDistRow> rows;  // all (2|R_base|)^2 length-2 path types
  GroupSummary high, low, non_cooccurring;
};

// Enumerates every length-2 path type over the parameterized relations,
// computes prec(p) against r on the graph and dist(p, r) under both
// checkpoints, and groups Delta dist by the precision threshold.
DeltaDistReport delta_dist_report(const ModelParams& comp,
                                  const ModelParams& single,
                                  const KnowledgeGraph& graph, RelationId r,
                                  double precision_threshold = 0.3,
                                  int workers = 1);

void write_rq_profile_csv(std::ostream& out, const KnowledgeGraph& graph,
                          const PathQuery& q, const std::vector<RqPoint>& rows);
void write_delta_dist_csv(std::ostream& out, const KnowledgeGraph& graph,
                          const DeltaDistReport& report);

}  // namespace kgpath
