#include "kgpath/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "kgpath/errors.hpp"
#include "kgpath/io.hpp"

namespace kgpath {

std::optional<double> reconstruction_quality(const ModelParams& params,
                                             const KnowledgeGraph& graph,
                                             const PathQuery& q) {
  const std::vector<EntityId> den = graph.denotation(q);
  const std::vector<EntityId> negs = graph.incorrect_answers(q);
  if (den.empty() || negs.empty()) return std::nullopt;
  const auto states = params.forward_states(q);
  const std::vector<double>& v = states.back();
  std::vector<double> neg_scores(negs.size());
  for (size_t i = 0; i < negs.size(); ++i)
    neg_scores[i] = params.member(v, negs[i]);
  double sum = 0.0;
  for (EntityId t : den) {
    const double pos = params.member(v, t);
    long below = 0;
    for (double s : neg_scores)
      if (s < pos) ++below;
    sum += static_cast<double>(below) / negs.size();
  }
  return sum / den.size();
}

std::vector<RqPoint> rq_profile(const ModelParams& params,
                                const KnowledgeGraph& graph,
                                const PathQuery& q) {
  std::vector<RqPoint> out;
  for (size_t len = 1; len <= q.path.size(); ++len) {
    PathQuery prefix{q.source,
                     {q.path.begin(), q.path.begin() + len}};
    RqPoint point;
    point.prefix_len = static_cast<int>(len);
    point.rq = reconstruction_quality(params, graph, prefix);
    auto ranked = rank_candidates(params, graph, prefix);
    if (ranked.size() > 5) ranked.resize(5);
    point.top5 = std::move(ranked);
    out.push_back(std::move(point));
  }
  return out;
}

namespace {

std::set<std::pair<EntityId, EntityId>> path_pairs(const KnowledgeGraph& graph,
                                                   const PathType& p) {
  std::set<std::pair<EntityId, EntityId>> pairs;
  for (EntityId s = 0; s < static_cast<EntityId>(graph.num_entities()); ++s) {
    // Cheap prefilter: the first relation must leave s.
    const auto rels = graph.outgoing_relations(s);
    if (!std::binary_search(rels.begin(), rels.end(), p.relations.front()))
      continue;
    for (EntityId t : graph.denotation({s, p.relations})) pairs.insert({s, t});
  }
  return pairs;
}

}  // namespace

std::optional<double> path_precision(const KnowledgeGraph& graph,
                                     const PathType& p, RelationId r) {
  if (p.relations.empty()) throw DataError("path type must be nonempty");
  const auto p_pairs = path_pairs(graph, p);
  if (p_pairs.empty()) return std::nullopt;
  long hits = 0;
  for (const auto& [s, t] : p_pairs)
    if (graph.has_triple(s, r, t)) ++hits;
  return static_cast<double>(hits) / p_pairs.size();
}

std::vector<double> compose_matrices(const ModelParams& params,
                                     const PathType& p) {
  if (params.kind != ModelKind::Bilinear)
    throw DataError("matrix composition requires a Bilinear checkpoint");
  const int d = params.dim;
  std::vector<double> acc = params.relation_params[p.relations.front()];
  for (size_t i = 1; i < p.relations.size(); ++i) {
    const std::vector<double>& w = params.relation_params[p.relations[i]];
    std::vector<double> next(static_cast<size_t>(d) * d, 0.0);
    for (int a = 0; a < d; ++a)
      for (int k = 0; k < d; ++k) {
        const double v = acc[static_cast<size_t>(a) * d + k];
        if (v == 0.0) continue;
        const double* wrow = w.data() + static_cast<size_t>(k) * d;
        double* nrow = next.data() + static_cast<size_t>(a) * d;
        for (int j = 0; j < d; ++j) nrow[j] += v * wrow[j];
      }
    acc = std::move(next);
  }
  return acc;
}

std::optional<double> matrix_angle_vecs(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  double cosine = dot / (std::sqrt(na) * std::sqrt(nb));
  cosine = std::clamp(cosine, -1.0, 1.0);
  return std::acos(cosine);
}

std::optional<double> matrix_angle(const ModelParams& params,
                                   const PathType& p, RelationId r) {
  return matrix_angle_vecs(compose_matrices(params, p),
                           params.relation_params[r]);
}

namespace {

GroupSummary summarize(std::vector<double> values) {
  GroupSummary s;
  s.n = static_cast<long>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto quantile_at = [&](double f) {
    // Linear interpolation between closest ranks.
    const double pos = f * (values.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - lo;
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  s.min = values.front();
  s.q1 = quantile_at(0.25);
  s.median = quantile_at(0.5);
  s.q3 = quantile_at(0.75);
  s.max = values.back();
  return s;
}

}  // namespace

DeltaDistReport delta_dist_report(const ModelParams& comp,
                                  const ModelParams& single,
                                  const KnowledgeGraph& graph, RelationId r,
                                  double precision_threshold, int workers) {
  if (comp.kind != ModelKind::Bilinear || single.kind != ModelKind::Bilinear)
    throw DataError("delta_dist_report requires Bilinear checkpoints");
  if (comp.dim != single.dim || comp.entity_names != single.entity_names ||
      comp.relation_names != single.relation_names)
    throw DataError("checkpoints have mismatched entity/relation tables");

  const int n_rel = static_cast<int>(graph.num_relations());
  DeltaDistReport report;
  report.relation = r;
  report.rows.resize(static_cast<size_t>(n_rel) * n_rel);

  const int64_t total = static_cast<int64_t>(n_rel) * n_rel;
#pragma omp parallel for schedule(dynamic, 4) if (workers > 1)
  for (int64_t idx = 0; idx < total; ++idx) {
    const RelationId r1 = static_cast<RelationId>(idx / n_rel);
    const RelationId r2 = static_cast<RelationId>(idx % n_rel);
    DeltaDistRow row;
    row.path.relations = {r1, r2};
    row.precision = path_precision(graph, row.path, r);
    row.dist_single = matrix_angle(single, row.path, r);
    row.dist_comp = matrix_angle(comp, row.path, r);
    if (row.dist_single && row.dist_comp && *row.dist_single != 0.0)
      row.delta = (*row.dist_comp - *row.dist_single) / *row.dist_single;
    if (row.dist_single && row.dist_comp) {
      if (!row.precision || *row.precision == 0.0)
        row.group = PrecisionGroup::NonCooccurring;
      else if (*row.precision > precision_threshold)
        row.group = PrecisionGroup::High;
      else
        row.group = PrecisionGroup::Low;
    }
    report.rows[idx] = std::move(row);
  }

  std::vector<double> high, low, none;
  for (const DeltaDistRow& row : report.rows) {
    if (!row.group || !row.delta) continue;
    switch (*row.group) {
      case PrecisionGroup::High:
        high.push_back(*row.delta);
        break;
      case PrecisionGroup::Low:
        low.push_back(*row.delta);
        break;
      case PrecisionGroup::NonCooccurring:
        none.push_back(*row.delta);
        break;
    }
  }
  report.high = summarize(std::move(high));
  report.low = summarize(std::move(low));
  report.non_cooccurring = summarize(std::move(none));
  return report;
}

void write_rq_profile_csv(std::ostream& out, const KnowledgeGraph& graph,
                          const PathQuery& q,
                          const std::vector<RqPoint>& rows) {
  out << "query,prefix_len,rq,top5\n";
  const std::string qstr = query_to_string(graph, q);
  for (const RqPoint& row : rows) {
    out << qstr << "," << row.prefix_len << ",";
    if (row.rq) out << format_double(*row.rq);
    out << ",";
    for (size_t i = 0; i < row.top5.size(); ++i) {
      if (i > 0) out << " ";
      out << graph.entity_name(row.top5[i].first);
    }
    out << "\n";
  }
}

void write_delta_dist_csv(std::ostream& out, const KnowledgeGraph& graph,
                          const DeltaDistReport& report) {
  out << "path,prec,dist_single,dist_comp,delta,group\n";
  for (const DeltaDistRow& row : report.rows) {
    out << graph.relation_name(row.path.relations[0]) << "/"
        << graph.relation_name(row.path.relations[1]) << ",";
    if (row.precision) out << format_double(*row.precision);
    out << ",";
    if (row.dist_single) out << format_double(*row.dist_single);
    out << ",";
    if (row.dist_comp) out << format_double(*row.dist_comp);
    out << ",";
    if (row.delta) out << format_double(*row.delta);
    out << ",";
    if (row.group) {
      switch (*row.group) {
        case PrecisionGroup::High:
          out << "high";
          break;
        case PrecisionGroup::Low:
          out << "low";
          break;
        case PrecisionGroup::NonCooccurring:
          out << "none";
          break;
      }
    }
    out << "\n";
  }
}

}  // namespace kgpath
