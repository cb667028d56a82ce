#include "doctest.h"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "kgpath/analysis.hpp"
#include "kgpath/errors.hpp"
#include "test_util.hpp"

using namespace kgpath;
using kgtest::make_graph;
using kgtest::random_graph;

namespace {

ModelParams random_bilinear(int dim, int n_entities, int n_relations,
                            Rng& rng) {
  ModelParams p;
  p.kind = ModelKind::Bilinear;
  p.dim = dim;
  for (int e = 0; e < n_entities; ++e) {
    p.entity_names.push_back("e" + std::to_string(e));
    std::vector<double> v(dim);
    for (double& x : v) x = rng.gaussian();
    p.entity_vecs.push_back(std::move(v));
  }
  for (int r = 0; r < n_relations; ++r) {
    p.relation_names.push_back("r" + std::to_string(r));
    std::vector<double> w(static_cast<size_t>(dim) * dim);
    for (double& x : w) x = rng.gaussian();
    p.relation_params.push_back(std::move(w));
  }
  return p;
}

// Independent RQ: sort-based brute force over all correct answers.
double brute_rq(const ModelParams& params, const KnowledgeGraph& g,
                const PathQuery& q) {
  const auto den = g.denotation(q);
  const auto negs = g.incorrect_answers(q);
  double sum = 0.0;
  for (EntityId t : den) {
    const double pos = params.score(q, t);
    long below = 0;
    for (EntityId n : negs)
      if (params.score(q, n) < pos) ++below;
    sum += static_cast<double>(below) / negs.size();
  }
  return sum / den.size();
}

}  // namespace

TEST_CASE("reconstruction_quality: perfect separation is 1.0") {
  Rng rng(1);
  const KnowledgeGraph g = random_graph(15, 2, 45, rng);
  const ModelParams oracle = adjacency_oracle_params(g);
  Rng qr(2);
  int done = 0;
  while (done < 10) {
    PathQuery q{static_cast<EntityId>(qr.below(15)),
                {static_cast<RelationId>(qr.below(2)),
                 static_cast<RelationId>(qr.below(2))}};
    const auto rq = reconstruction_quality(oracle, g, q);
    if (!rq) continue;
    CHECK(*rq == 1.0);
    ++done;
  }
}

TEST_CASE("reconstruction_quality: all correct ranked last is 0.0") {
  const KnowledgeGraph g = make_graph("a r b\nc r d\nc r e");
  ModelParams p;
  p.kind = ModelKind::Bilinear;
  p.dim = 1;
  p.entity_names = g.entity_names();
  p.relation_names = g.relation_names();
  // Candidates {b, d, e}; query a/r has denotation {b}. Score b lowest.
  p.entity_vecs = {{1}, {0.0}, {1}, {5.0}, {5.0}};
  p.relation_params = {{1.0}};
  const auto rq = reconstruction_quality(p, g, {*g.find_entity("a"), {0}});
  REQUIRE(rq);
  CHECK(*rq == 0.0);
}

TEST_CASE("reconstruction_quality: undefined on empty denotation") {
  const KnowledgeGraph g = make_graph("a r b\nc r d");
  Rng rng(3);
  const ModelParams p = random_bilinear(2, 4, 1, rng);
  CHECK_FALSE(reconstruction_quality(p, g, {*g.find_entity("b"), {0}})
                  .has_value());
}

TEST_CASE("reconstruction_quality matches brute-force average") {
  Rng rng(4);
  const KnowledgeGraph g = random_graph(20, 3, 70, rng);
  const ModelParams p = random_bilinear(4, 20, 3, rng);
  Rng qr(5);
  int done = 0;
  while (done < 20) {
    PathQuery q{static_cast<EntityId>(qr.below(20)),
                {static_cast<RelationId>(qr.below(3)),
                 static_cast<RelationId>(qr.below(3))}};
    const auto rq = reconstruction_quality(p, g, q);
    if (!rq) continue;
    CHECK(*rq == doctest::Approx(brute_rq(p, g, q)).epsilon(1e-12));
    // RQ equals quantile when the denotation is a singleton, and always
    // sits in [0, 1].
    CHECK(*rq >= 0.0);
    CHECK(*rq <= 1.0);
    ++done;
  }
}

TEST_CASE("rq_profile: length-1 equals reconstruction_quality; top5 present") {
  Rng rng(6);
  const KnowledgeGraph g = random_graph(15, 2, 50, rng);
  const ModelParams p = random_bilinear(3, 15, 2, rng);
  Rng qr(7);
  for (int i = 0; i < 10; ++i) {
    PathQuery q{static_cast<EntityId>(qr.below(15)),
                {static_cast<RelationId>(qr.below(2))}};
    const auto profile = rq_profile(p, g, q);
    REQUIRE(profile.size() == 1);
    CHECK(profile[0].rq == reconstruction_quality(p, g, q));
    CHECK(profile[0].top5.size() <= 5);
  }
}

TEST_CASE("rq_profile: adjacency oracle profile is constant 1.0") {
  Rng rng(8);
  const KnowledgeGraph g = random_graph(15, 2, 50, rng);
  const ModelParams oracle = adjacency_oracle_params(g);
  Rng qr(9);
  int done = 0;
  while (done < 5) {
    PathQuery q{static_cast<EntityId>(qr.below(15)),
                {static_cast<RelationId>(qr.below(2)),
                 static_cast<RelationId>(qr.below(2)),
                 static_cast<RelationId>(qr.below(2))}};
    const auto profile = rq_profile(oracle, g, q);
    bool all_defined = true;
    for (const auto& point : profile) all_defined &= point.rq.has_value();
    if (!all_defined) continue;
    for (const auto& point : profile) CHECK(*point.rq == 1.0);
    ++done;
  }
}

TEST_CASE("path_precision: identity and disjoint cases") {
  const KnowledgeGraph g = make_graph("a r b\nc r d\na s x");
  const RelationId r = *g.find_relation("r");
  const RelationId s = *g.find_relation("s");
  CHECK(*path_precision(g, {{r}}, r) == 1.0);
  CHECK(*path_precision(g, {{s}}, r) == 0.0);
  // Empty pair set -> undefined.
  const KnowledgeGraph g2 = make_graph("a r b");
  CHECK_FALSE(path_precision(g2, {{0, 0}}, 0).has_value());
}

TEST_CASE("path_precision matches brute-force pair enumeration") {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const KnowledgeGraph g = random_graph(20, 3, 70, rng);
    for (RelationId r1 = 0; r1 < 3; ++r1)
      for (RelationId r2 = 0; r2 < 3; ++r2)
        for (RelationId r = 0; r < 3; ++r) {
          // Brute force: enumerate all edge pairs.
          std::set<std::pair<EntityId, EntityId>> pairs;
          for (const Triple& t1 : g.triples())
            for (const Triple& t2 : g.triples())
              if (t1.relation == r1 && t2.relation == r2 &&
                  t1.target == t2.source)
                pairs.insert({t1.source, t2.target});
          long hits = 0;
          for (const auto& [s, t] : pairs)
            if (g.has_triple(s, r, t)) ++hits;
          const auto prec = path_precision(g, {{r1, r2}}, r);
          if (pairs.empty()) {
            CHECK_FALSE(prec.has_value());
          } else {
            REQUIRE(prec);
            CHECK(*prec == static_cast<double>(hits) / pairs.size());
          }
        }
  }
}

TEST_CASE("matrix_angle: basic geometry") {
  Rng rng(11);
  ModelParams p = random_bilinear(3, 2, 3, rng);
  // p = r (length 1): angle 0.
  CHECK(*matrix_angle(p, {{0}}, 0) == doctest::Approx(0.0).epsilon(1e-12));
  // W_2 = -W_1: angle pi.
  for (size_t i = 0; i < 9; ++i)
    p.relation_params[2][i] = -p.relation_params[1][i];
  CHECK(*matrix_angle(p, {{1}}, 2) ==
        doctest::Approx(std::numbers::pi).epsilon(1e-12));
  // Zero matrix: undefined.
  p.relation_params[0].assign(9, 0.0);
  CHECK_FALSE(matrix_angle(p, {{0}}, 1).has_value());
}

TEST_CASE("matrix_angle matches independent cosine computation") {
  Rng rng(12);
  const ModelParams p = random_bilinear(3, 2, 4, rng);
  for (int i = 0; i < 50; ++i) {
    const RelationId r1 = static_cast<RelationId>(rng.below(4));
    const RelationId r2 = static_cast<RelationId>(rng.below(4));
    const RelationId r = static_cast<RelationId>(rng.below(4));
    // Independent: explicit product then cosine via scalar loops.
    double prod[9] = {0};
    for (int a = 0; a < 3; ++a)
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
          prod[a * 3 + j] += p.relation_params[r1][a * 3 + k] *
                             p.relation_params[r2][k * 3 + j];
    double dot = 0, na = 0, nb = 0;
    for (int i2 = 0; i2 < 9; ++i2) {
      dot += prod[i2] * p.relation_params[r][i2];
      na += prod[i2] * prod[i2];
      nb += p.relation_params[r][i2] * p.relation_params[r][i2];
    }
    const double expect = std::acos(std::clamp(
        dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0));
    CHECK(*matrix_angle(p, {{r1, r2}}, r) ==
          doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("matrix_angle: symmetric and scale-invariant") {
  Rng rng(13);
  const ModelParams p = random_bilinear(3, 2, 2, rng);
  const auto a = matrix_angle_vecs(p.relation_params[0], p.relation_params[1]);
  const auto b = matrix_angle_vecs(p.relation_params[1], p.relation_params[0]);
  CHECK(*a == doctest::Approx(*b).epsilon(1e-12));
  std::vector<double> scaled = p.relation_params[0];
  for (double& x : scaled) x *= 7.5;
  const auto c = matrix_angle_vecs(scaled, p.relation_params[1]);
  CHECK(*a == doctest::Approx(*c).epsilon(1e-12));
}

TEST_CASE("delta_dist_report: enumeration count and identical checkpoints") {
  Rng rng(14);
  const KnowledgeGraph g = random_graph(15, 3, 45, rng).close_inverses();
  REQUIRE(g.num_relations() == 6);
  const ModelParams p = random_bilinear(3, 15, 6, rng);
  const DeltaDistReport report = delta_dist_report(p, p, g, 0);
  CHECK(report.rows.size() == 36);  // (2 * |R_base|)^2
  for (const DeltaDistRow& row : report.rows)
    if (row.delta) CHECK(*row.delta == 0.0);
  // Group sizes partition the rows with defined dist.
  long with_dist = 0;
  for (const DeltaDistRow& row : report.rows)
    if (row.group) ++with_dist;
  CHECK(report.high.n + report.low.n + report.non_cooccurring.n == with_dist);
}

TEST_CASE("delta_dist_report: mismatched tables error") {
  Rng rng(15);
  const KnowledgeGraph g = random_graph(10, 2, 25, rng).close_inverses();
  const ModelParams a = random_bilinear(3, 10, 4, rng);
  ModelParams b = a;
  b.entity_names[0] = "different";
  CHECK_THROWS_AS(delta_dist_report(a, b, g, 0), DataError);
}

TEST_CASE("CSV writers emit the documented shapes") {
  Rng rng(16);
  const KnowledgeGraph g = random_graph(10, 2, 30, rng).close_inverses();
  const ModelParams p = random_bilinear(3, 10, 4, rng);
  const PathQuery q{0, {0, 1}};
  std::ostringstream rq_out;
  write_rq_profile_csv(rq_out, g, q, rq_profile(p, g, q));
  CHECK(rq_out.str().starts_with("query,prefix_len,rq,top5\n"));
  std::ostringstream dd_out;
  write_delta_dist_csv(dd_out, g, delta_dist_report(p, p, g, 0));
  CHECK(dd_out.str().starts_with(
      "path,prec,dist_single,dist_comp,delta,group\n"));
}
