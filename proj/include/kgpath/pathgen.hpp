#pragma once

#include <cstdint>
#include <vector>

#include "kgpath/graph.hpp"
#include "kgpath/rng.hpp"

namespace kgpath {

struct PathGenConfig {
  int max_length = 5;       // L_max
  long train_count = 0;     // sampled walks (length 2..L_max) added to train
  long test_count = 0;      // sampled walks (length 1..L_max) for test
  uint64_t seed = 0;
};

// One random walk: length uniform on {min_length..max_length}, start entity
// uniform over E, each step uniform over incident relations then uniform
// over targets. Walks hitting a dead end (or a start with no outgoing
// edges) are discarded and resampled whole. Throws on an edgeless graph.
QueryExample sample_walk(const KnowledgeGraph& graph, int min_length,
                         int max_length, Rng& rng);

struct GeneratedDatasets {
  std::vector<QueryExample> train;
  std::vector<QueryExample> test;
  long test_removed_as_train_queries = 0;
};

// Train set: every edge of train_graph as a length-1 example, plus
// train_count sampled walks of length 2..L_max on train_graph. Test set:
// test_count walks of length 1..L_max on full_graph, minus any example
// whose query (anchor + relation sequence) appears in the train set.
// Both splits are returned in canonical order (query string, then answer).
GeneratedDatasets generate_datasets(const KnowledgeGraph& train_graph,
                                    const KnowledgeGraph& full_graph,
                                    const PathGenConfig& config);

}  // namespace kgpath
