#include "doctest.h"

#include <sstream>

#include "kgpath/errors.hpp"
#include "kgpath/io.hpp"
#include "kgpath/pathgen.hpp"
#include "test_util.hpp"

using namespace kgpath;
using kgtest::make_graph;
using kgtest::random_graph;

TEST_CASE("format_double round-trips exactly") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.below(20));
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(parse_double("-0.5") == -0.5);
  CHECK_THROWS_AS(parse_double("abc"), DataError);
  CHECK_THROWS_AS(parse_double("1.5x"), DataError);
}

TEST_CASE("path query files: one valid line") {
  const KnowledgeGraph g = make_graph("a r b\nb s c");
  std::istringstream in("# seed=5\na\tr,s\tc\n");
  const auto examples = read_path_queries(in, g);
  REQUIRE(examples.size() == 1);
  CHECK(examples[0].query.source == *g.find_entity("a"));
  CHECK(examples[0].query.path ==
        std::vector<RelationId>{*g.find_relation("r"), *g.find_relation("s")});
  CHECK(examples[0].answer == *g.find_entity("c"));
}

TEST_CASE("path query files: unknown names error with line number") {
  const KnowledgeGraph g = make_graph("a r b");
  std::istringstream bad_rel("a\tnope\tb\n");
  CHECK_THROWS_WITH_AS(read_path_queries(bad_rel, g),
                       doctest::Contains("line 1"), DataError);
  std::istringstream bad_ent("a\tr\tzzz\n");
  CHECK_THROWS_AS(read_path_queries(bad_ent, g), DataError);
}

TEST_CASE("path query write-then-read round trip") {
  Rng rng(3);
  const KnowledgeGraph g = random_graph(30, 3, 100, rng).close_inverses();
  std::vector<QueryExample> examples;
  Rng walk_rng(17);
  for (int i = 0; i < 10000; ++i)
    examples.push_back(sample_walk(g, 1, 4, walk_rng));
  std::ostringstream out;
  PathFileHeader header;
  header.fields["seed"] = "17";
  header.fields["generator"] = Rng::kName;
  write_path_queries(out, g, examples, header);
  std::istringstream in(out.str());
  CHECK(read_path_queries(in, g) == examples);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  Rng rng(4);
  const KnowledgeGraph g = random_graph(10, 2, 25, rng);
  for (ModelKind kind :
       {ModelKind::Bilinear, ModelKind::BilinearDiag, ModelKind::TransE}) {
    Rng init(5);
    const ModelParams p = init_params(kind, 2, g, 0.31622776601683794, init);
    std::ostringstream out;
    write_checkpoint(p, out);
    std::istringstream in(out.str());
    const ModelParams q = read_checkpoint(in);
    CHECK(q == p);
    // Bit-identical params imply bit-identical scores.
    Rng query_rng(6);
    for (int i = 0; i < 100; ++i) {
      PathQuery query{static_cast<EntityId>(query_rng.below(10)),
                      {static_cast<RelationId>(query_rng.below(2)),
                       static_cast<RelationId>(query_rng.below(2))}};
      const EntityId t = static_cast<EntityId>(query_rng.below(10));
      CHECK(p.score(query, t) == q.score(query, t));
    }
  }
}

TEST_CASE("checkpoint: truncation and version errors") {
  Rng rng(7);
  const KnowledgeGraph g = random_graph(5, 1, 8, rng);
  Rng init(8);
  const ModelParams p = init_params(ModelKind::TransE, 3, g, 0.3, init);
  std::ostringstream out;
  write_checkpoint(p, out);
  std::string text = out.str();

  // Drop the last row.
  std::string truncated = text.substr(0, text.rfind("R\t"));
  std::istringstream t_in(truncated);
  CHECK_THROWS_AS(read_checkpoint(t_in), DataError);

  // Wrong version header.
  std::string wrong = "KGE v9" + text.substr(6);
  std::istringstream w_in(wrong);
  CHECK_THROWS_AS(read_checkpoint(w_in), DataError);

  // Non-finite value.
  std::string inf = text;
  inf.replace(inf.find("E\t"), 0, "");  // no-op anchor
  std::istringstream empty("");
  CHECK_THROWS_AS(read_checkpoint(empty), DataError);
}

TEST_CASE("key=value config parsing") {
  std::istringstream in("# comment\nstep_size=0.05\nseed=42\n");
  const auto kv = read_key_value(in);
  CHECK(kv.at("step_size") == "0.05");
  CHECK(kv.at("seed") == "42");
  std::istringstream bad("no_equals_here\n");
  CHECK_THROWS_AS(read_key_value(bad), DataError);
}

TEST_CASE("query string parsing") {
  const KnowledgeGraph g = make_graph("a r b\nb s c");
  const PathQuery q = parse_query_string(g, "a/r/s");
  CHECK(q.source == *g.find_entity("a"));
  CHECK(q.path.size() == 2);
  CHECK(query_to_string(g, q) == "a/r/s");
  CHECK_THROWS_AS(parse_query_string(g, "a"), DataError);
  CHECK_THROWS_AS(parse_query_string(g, "zzz/r"), DataError);
}
