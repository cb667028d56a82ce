#include "kgpath/pathgen.hpp"

#include <algorithm>
#include <unordered_set>

#include "kgpath/errors.hpp"
#include "kgpath/io.hpp"

namespace kgpath {

QueryExample sample_walk(const KnowledgeGraph& graph, int min_length,
                         int max_length, Rng& rng) {
  if (graph.num_triples() == 0) throw DataError("sample_walk: graph has no edges");
  if (min_length < 1 || max_length < min_length)
    throw UsageError("sample_walk: bad length bounds");
  const int length =
      min_length + static_cast<int>(rng.below(max_length - min_length + 1));
  for (;;) {
    EntityId current = static_cast<EntityId>(rng.below(graph.num_entities()));
    PathQuery q{current, {}};
    bool dead_end = false;
    for (int step = 0; step < length; ++step) {
      const auto rels = graph.outgoing_relations(current);
      if (rels.empty()) {
        dead_end = true;
        break;
      }
      const RelationId r = rels[rng.below(rels.size())];
      const std::vector<EntityId> next = graph.targets(current, r);
      current = next[rng.below(next.size())];
      q.path.push_back(r);
    }
    if (dead_end) continue;  // resample the whole walk
    return {std::move(q), current};
  }
}

namespace {

void sort_canonical(const KnowledgeGraph& graph,
                    std::vector<QueryExample>& examples) {
  std::vector<std::pair<std::string, size_t>> keys(examples.size());
  for (size_t i = 0; i < examples.size(); ++i)
    keys[i] = {query_to_string(graph, examples[i].query) + "\t" +
                   graph.entity_name(examples[i].answer),
               i};
  std::sort(keys.begin(), keys.end());
  std::vector<QueryExample> out;
  out.reserve(examples.size());
  for (const auto& [key, i] : keys) out.push_back(examples[i]);
  examples = std::move(out);
}

}  // namespace

GeneratedDatasets generate_datasets(const KnowledgeGraph& train_graph,
                                    const KnowledgeGraph& full_graph,
                                    const PathGenConfig& config) {
  if (!train_graph.is_subset_of(full_graph))
    throw DataError("train graph is not a triple subset of the full graph");

  GeneratedDatasets out;

  // Length-1 edges enter the train set directly; only longer paths are
  // sampled.
  for (const Triple& t : train_graph.triples())
    out.train.push_back({{t.source, {t.relation}}, t.target});

  Rng train_rng = Rng(config.seed).substream(1);
  if (config.train_count > 0 && config.max_length >= 2)
    for (long i = 0; i < config.train_count; ++i)
      out.train.push_back(
          sample_walk(train_graph, 2, config.max_length, train_rng));

  std::unordered_set<std::string> train_queries;
  for (const QueryExample& ex : out.train)
    train_queries.insert(query_to_string(train_graph, ex.query));

  Rng test_rng = Rng(config.seed).substream(2);
  for (long i = 0; i < config.test_count; ++i) {
    QueryExample ex = sample_walk(full_graph, 1, config.max_length, test_rng);
    if (train_queries.contains(query_to_string(full_graph, ex.query))) {
      ++out.test_removed_as_train_queries;
      continue;
    }
    out.test.push_back(std::move(ex));
  }

  sort_canonical(train_graph, out.train);
  sort_canonical(full_graph, out.test);
  return out;
}

}  // namespace kgpath
