#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace kgpath {

using EntityId = int32_t;
using RelationId = int32_t;

struct Triple {
  EntityId source;
  RelationId relation;
  EntityId target;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Anchor entity plus a nonempty relation sequence s/r1/.../rk.
struct PathQuery {
  EntityId source;
  std::vector<RelationId> path;
  friend bool operator==(const PathQuery&, const PathQuery&) = default;
};

struct QueryExample {
  PathQuery query;
  EntityId answer;
  friend bool operator==(const QueryExample&, const QueryExample&) = default;
};

// Suffix appended to a base relation name to form its inverse.
inline constexpr const char* kInverseSuffix = "^-";

// Immutable indexed triple store. Entity and relation ids are dense and
// assigned in first-appearance order; derived graphs (inverse closure) are
// new values. Safe for concurrent reads after construction.
class KnowledgeGraph {
 public:
  KnowledgeGraph(std::vector<std::string> entity_names,
                 std::vector<std::string> relation_names,
                 std::vector<Triple> triples,
                 RelationId num_base_relations = -1);

  // Parses `source\trelation\ttarget` lines; duplicate lines collapse.
  // Throws DataError with a line number on malformed input.
  static KnowledgeGraph load_triples(std::istream& in);
  static KnowledgeGraph load_triples_file(const std::string& path);

  // Returns a new graph where every base relation r gains an inverse
  // named r + "^-" and every (s,r,t) gains (t,r^-,s). Throws if the graph
  // already carries inverses or a base name ends with the suffix.
  KnowledgeGraph close_inverses() const;

  size_t num_entities() const { return entity_names_.size(); }
  size_t num_relations() const { return relation_names_.size(); }
  size_t num_triples() const { return triples_.size(); }
  size_t duplicates_collapsed() const { return duplicates_collapsed_; }

  const std::string& entity_name(EntityId e) const { return entity_names_[e]; }
  const std::string& relation_name(RelationId r) const {
    return relation_names_[r];
  }
  const std::vector<std::string>& entity_names() const { return entity_names_; }
  const std::vector<std::string>& relation_names() const {
    return relation_names_;
  }

  std::optional<EntityId> find_entity(const std::string& name) const;
  std::optional<RelationId> find_relation(const std::string& name) const;

  const std::vector<Triple>& triples() const { return triples_; }
  bool has_triple(EntityId s, RelationId r, EntityId t) const;

  // Sorted distinct targets reachable from s via r.
  std::vector<EntityId> targets(EntityId s, RelationId r) const;
  // Sorted distinct targets participating in relation r anywhere.
  std::span<const EntityId> relation_targets(RelationId r) const;
  // Sorted distinct relations with at least one outgoing edge from e.
  std::span<const RelationId> outgoing_relations(EntityId e) const;

  // Exact traversal result of a path query (Eq. 1-2 recursion); sorted.
  std::vector<EntityId> denotation(const PathQuery& q) const;
  // Type-matching candidate set C(q): targets of the final relation; sorted.
  std::vector<EntityId> candidates(const PathQuery& q) const;
  // N(q) = C(q) \ denotation(q); sorted.
  std::vector<EntityId> incorrect_answers(const PathQuery& q) const;

  bool has_inverses() const { return num_base_relations_ >= 0; }
  RelationId num_base_relations() const {
    return num_base_relations_ >= 0
               ? num_base_relations_
               : static_cast<RelationId>(relation_names_.size());
  }
  // Partner id under inverse closure; only valid when has_inverses().
  RelationId inverse_of(RelationId r) const;

  // True iff every triple of this graph appears in `other` (by name).
  bool is_subset_of(const KnowledgeGraph& other) const;

 private:
  void build_indexes();

  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
  std::vector<Triple> triples_;  // sorted by (source, relation, target)
  std::vector<std::vector<EntityId>> relation_targets_;
  std::vector<std::vector<RelationId>> outgoing_relations_;
  RelationId num_base_relations_ = -1;  // -1: no inverse closure applied
  size_t duplicates_collapsed_ = 0;
};

// True iff the (closed) training graph already contains the test edge,
// equivalently its inverse; such test edges are dropped as trivial.
bool is_trivial_inverse_edge(const KnowledgeGraph& train, const Triple& edge);

enum class QueryClass { Deduction, Induction };

// Deduction iff the answer is reachable by exact traversal on the
// training graph; Induction otherwise.
QueryClass classify_deduction(const KnowledgeGraph& train,
                              const QueryExample& example);

}  // namespace kgpath
