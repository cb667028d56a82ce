#include "doctest.h"

#include <cmath>

#include "kgpath/errors.hpp"
#include "kgpath/model.hpp"
#include "test_util.hpp"

using namespace kgpath;
using kgtest::brute_denotation;
using kgtest::brute_path_count;
using kgtest::make_graph;
using kgtest::random_graph;

namespace {

ModelParams toy_params(ModelKind kind, int dim, int n_entities,
                       int n_relations, Rng& rng) {
  ModelParams p;
  p.kind = kind;
  p.dim = dim;
  for (int e = 0; e < n_entities; ++e) {
    p.entity_names.push_back("e" + std::to_string(e));
    std::vector<double> v(dim);
    for (double& x : v) x = rng.gaussian();
    p.entity_vecs.push_back(std::move(v));
  }
  for (int r = 0; r < n_relations; ++r) {
    p.relation_names.push_back("r" + std::to_string(r));
    std::vector<double> w(p.relation_param_size());
    for (double& x : w) x = rng.gaussian();
    p.relation_params.push_back(std::move(w));
  }
  return p;
}

}  // namespace

TEST_CASE("traverse: identity matrix and zero translation are no-ops") {
  Rng rng(1);
  ModelParams bil = toy_params(ModelKind::Bilinear, 3, 2, 1, rng);
  bil.relation_params[0] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  const std::vector<double> v{0.5, -1.25, 2.0};
  CHECK(bil.traverse(v, 0) == v);

  ModelParams tr = toy_params(ModelKind::TransE, 3, 2, 1, rng);
  tr.relation_params[0] = {0, 0, 0};
  CHECK(tr.traverse(v, 0) == v);
}

TEST_CASE("traverse: bilinear row form hand computation") {
  Rng rng(2);
  ModelParams p = toy_params(ModelKind::Bilinear, 2, 1, 1, rng);
  p.relation_params[0] = {0, 1, 1, 0};  // [[0,1],[1,0]] row-major
  const std::vector<double> out = p.traverse(std::vector<double>{1, 2}, 0);
  CHECK(out == std::vector<double>{2, 1});
}

TEST_CASE("traverse: bilinear-diag is elementwise product") {
  Rng rng(3);
  ModelParams p = toy_params(ModelKind::BilinearDiag, 3, 1, 1, rng);
  p.relation_params[0] = {2, -1, 0.5};
  CHECK(p.traverse(std::vector<double>{1, 2, 4}, 0) ==
        std::vector<double>{2, -2, 2});
}

TEST_CASE("traverse: unknown relation is an error") {
  Rng rng(4);
  const ModelParams p = toy_params(ModelKind::TransE, 2, 1, 1, rng);
  CHECK_THROWS_AS(p.traverse(std::vector<double>{0, 0}, 5), DataError);
}

TEST_CASE("member: hand computations") {
  Rng rng(5);
  ModelParams dot = toy_params(ModelKind::Bilinear, 2, 1, 1, rng);
  dot.entity_vecs[0] = {3, 4};
  CHECK(dot.member(std::vector<double>{1, 2}, 0) == 11.0);
  // Orthogonal vectors score zero.
  dot.entity_vecs[0] = {1, 0};
  CHECK(dot.member(std::vector<double>{0, 5}, 0) == 0.0);

  ModelParams tr = toy_params(ModelKind::TransE, 2, 1, 1, rng);
  tr.entity_vecs[0] = {3, 4};
  CHECK(tr.member(std::vector<double>{1, 2}, 0) == -8.0);
  CHECK(tr.member(std::vector<double>{3, 4}, 0) == 0.0);  // maximum
  CHECK_THROWS_AS(tr.member(std::vector<double>{0, 0}, 9), DataError);
}

TEST_CASE("score: length-1 bilinear reduces to x_s^T W x_t") {
  Rng rng(6);
  const ModelParams p = toy_params(ModelKind::Bilinear, 4, 3, 2, rng);
  for (EntityId s = 0; s < 3; ++s)
    for (EntityId t = 0; t < 3; ++t)
      for (RelationId r = 0; r < 2; ++r) {
        double expect = 0.0;
        for (int a = 0; a < 4; ++a)
          for (int j = 0; j < 4; ++j)
            expect += p.entity_vecs[s][a] *
                      p.relation_params[r][a * 4 + j] * p.entity_vecs[t][j];
        CHECK(p.score({s, {r}}, t) == doctest::Approx(expect).epsilon(1e-12));
      }
}

TEST_CASE("score equals an explicit independent fold") {
  Rng rng(7);
  for (ModelKind kind :
       {ModelKind::Bilinear, ModelKind::BilinearDiag, ModelKind::TransE}) {
    const ModelParams p = toy_params(kind, 3, 4, 3, rng);
    const PathQuery q{1, {0, 2, 1}};
    // Fold computed step by step with scalar loops, no shared helpers.
    std::vector<double> v = p.entity_vecs[1];
    for (RelationId r : q.path) {
      std::vector<double> next(3, 0.0);
      for (int j = 0; j < 3; ++j) {
        if (kind == ModelKind::Bilinear) {
          for (int a = 0; a < 3; ++a)
            next[j] += v[a] * p.relation_params[r][a * 3 + j];
        } else if (kind == ModelKind::BilinearDiag) {
          next[j] = v[j] * p.relation_params[r][j];
        } else {
          next[j] = v[j] + p.relation_params[r][j];
        }
      }
      v = next;
    }
    double expect = 0.0;
    if (kind == ModelKind::TransE) {
      for (int j = 0; j < 3; ++j)
        expect -= (v[j] - p.entity_vecs[2][j]) * (v[j] - p.entity_vecs[2][j]);
    } else {
      for (int j = 0; j < 3; ++j) expect += v[j] * p.entity_vecs[2][j];
    }
    CHECK(p.score(q, 2) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("adjacency oracle counts unique paths and separates denotation") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const KnowledgeGraph g = random_graph(20, 3, 60, rng);
    const ModelParams oracle = adjacency_oracle_params(g);
    for (int qi = 0; qi < 10; ++qi) {
      PathQuery q{static_cast<EntityId>(rng.below(20)), {}};
      const int len = 1 + static_cast<int>(rng.below(4));
      for (int i = 0; i < len; ++i)
        q.path.push_back(static_cast<RelationId>(rng.below(3)));
      const auto den = brute_denotation(g, q);
      for (EntityId t = 0; t < 20; ++t) {
        const double s = oracle.score(q, t);
        CHECK(s == static_cast<double>(brute_path_count(g, q, t)));
        CHECK((s > 0) == std::binary_search(den.begin(), den.end(), t));
      }
    }
  }
}

TEST_CASE("transE path score is invariant under relation permutation") {
  Rng rng(9);
  const ModelParams p = toy_params(ModelKind::TransE, 5, 4, 4, rng);
  for (int i = 0; i < 50; ++i) {
    PathQuery q{static_cast<EntityId>(rng.below(4)), {}};
    for (int j = 0; j < 3; ++j)
      q.path.push_back(static_cast<RelationId>(rng.below(4)));
    PathQuery shuffled = q;
    std::swap(shuffled.path[0], shuffled.path[2]);
    const EntityId t = static_cast<EntityId>(rng.below(4));
    CHECK(p.score(q, t) == doctest::Approx(p.score(shuffled, t)).epsilon(1e-12));
  }
}

TEST_CASE("bilinear-diag equals bilinear with diagonal matrices") {
  Rng rng(10);
  const ModelParams diag = toy_params(ModelKind::BilinearDiag, 4, 3, 2, rng);
  ModelParams bil;
  bil.kind = ModelKind::Bilinear;
  bil.dim = 4;
  bil.entity_vecs = diag.entity_vecs;
  bil.entity_names = diag.entity_names;
  bil.relation_names = diag.relation_names;
  for (const auto& w : diag.relation_params) {
    std::vector<double> m(16, 0.0);
    for (int j = 0; j < 4; ++j) m[j * 4 + j] = w[j];
    bil.relation_params.push_back(std::move(m));
  }
  for (int i = 0; i < 30; ++i) {
    PathQuery q{static_cast<EntityId>(rng.below(3)),
                {static_cast<RelationId>(rng.below(2)),
                 static_cast<RelationId>(rng.below(2))}};
    const EntityId t = static_cast<EntityId>(rng.below(3));
    CHECK(diag.score(q, t) == doctest::Approx(bil.score(q, t)).epsilon(1e-12));
  }
}

TEST_CASE("rank_candidates: ordering and tie-break") {
  const KnowledgeGraph g = make_graph("a r b\nc r d");
  Rng rng(11);
  ModelParams p = toy_params(ModelKind::Bilinear, 2, 4, 1, rng);
  p.entity_names = g.entity_names();
  // Engineer equal scores for both candidates (b=1, d=3).
  p.entity_vecs = {{1, 0}, {0, 1}, {1, 0}, {0, 1}};
  p.relation_params[0] = {0, 1, 0, 0};
  const auto ranked = rank_candidates(p, g, {*g.find_entity("a"), {0}});
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].second == ranked[1].second);
  CHECK(ranked[0].first < ranked[1].first);  // lower id first on ties

  // Single candidate.
  const KnowledgeGraph g1 = make_graph("a r b");
  ModelParams p1 = toy_params(ModelKind::TransE, 2, 2, 1, rng);
  const auto one = rank_candidates(p1, g1, {0, {0}});
  REQUIRE(one.size() == 1);
  CHECK(one[0].first == *g1.find_entity("b"));
}

TEST_CASE("rank_candidates: adjacency oracle puts denotation on top") {
  Rng rng(12);
  const KnowledgeGraph g = random_graph(15, 2, 40, rng);
  const ModelParams oracle = adjacency_oracle_params(g);
  for (int i = 0; i < 20; ++i) {
    PathQuery q{static_cast<EntityId>(rng.below(15)),
                {static_cast<RelationId>(rng.below(2)),
                 static_cast<RelationId>(rng.below(2))}};
    const auto den = g.denotation(q);
    if (den.empty()) continue;
    const auto ranked = rank_candidates(oracle, g, q);
    // All members of the denotation that type-match must outrank N(q).
    size_t in_den = 0;
    for (const auto& [e, score] : ranked)
      if (std::binary_search(den.begin(), den.end(), e)) ++in_den;
    for (size_t i2 = 0; i2 < in_den; ++i2)
      CHECK(std::binary_search(den.begin(), den.end(), ranked[i2].first));
  }
}

TEST_CASE("parallel candidate scoring matches the serial reference") {
  Rng rng(13);
  const ModelParams p = toy_params(ModelKind::Bilinear, 8, 50, 3, rng);
  std::vector<EntityId> cand(50);
  for (int i = 0; i < 50; ++i) cand[i] = i;
  const PathQuery q{3, {0, 1, 2}};
  std::vector<double> serial(cand.size()), parallel(cand.size());
  score_candidates_serial(p, q, cand, serial);
  score_candidates_parallel(p, q, cand, parallel);
  CHECK(serial == parallel);  // bitwise: identical per-candidate arithmetic
}
