#include "kgpath/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "kgpath/errors.hpp"

namespace kgpath {

namespace {

bool ends_with_inverse_suffix(const std::string& name) {
  const std::string suffix = kInverseSuffix;
  return name.size() >= suffix.size() &&
         name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

KnowledgeGraph::KnowledgeGraph(std::vector<std::string> entity_names,
                               std::vector<std::string> relation_names,
                               std::vector<Triple> triples,
                               RelationId num_base_relations)
    : entity_names_(std::move(entity_names)),
      relation_names_(std::move(relation_names)),
      triples_(std::move(triples)),
      num_base_relations_(num_base_relations) {
  for (size_t i = 0; i < entity_names_.size(); ++i)
    entity_ids_.emplace(entity_names_[i], static_cast<EntityId>(i));
  for (size_t i = 0; i < relation_names_.size(); ++i)
    relation_ids_.emplace(relation_names_[i], static_cast<RelationId>(i));
  build_indexes();
}

void KnowledgeGraph::build_indexes() {
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()),
                 triples_.end());
  for (const Triple& t : triples_) {
    if (t.source < 0 || static_cast<size_t>(t.source) >= num_entities() ||
        t.target < 0 || static_cast<size_t>(t.target) >= num_entities() ||
        t.relation < 0 || static_cast<size_t>(t.relation) >= num_relations())
      throw DataError("triple references an id outside the graph's tables");
  }
  relation_targets_.assign(num_relations(), {});
  outgoing_relations_.assign(num_entities(), {});
  for (const Triple& t : triples_) {
    relation_targets_[t.relation].push_back(t.target);
    outgoing_relations_[t.source].push_back(t.relation);
  }
  for (auto& v : relation_targets_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& v : outgoing_relations_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
}

KnowledgeGraph KnowledgeGraph::load_triples(std::istream& in) {
  std::vector<std::string> entity_names;
  std::vector<std::string> relation_names;
  std::unordered_map<std::string, EntityId> entity_ids;
  std::unordered_map<std::string, RelationId> relation_ids;
  std::vector<Triple> triples;

  auto intern_entity = [&](const std::string& name) {
    auto [it, inserted] =
        entity_ids.emplace(name, static_cast<EntityId>(entity_names.size()));
    if (inserted) entity_names.push_back(name);
    return it->second;
  };
  auto intern_relation = [&](const std::string& name) {
    auto [it, inserted] = relation_ids.emplace(
        name, static_cast<RelationId>(relation_names.size()));
    if (inserted) relation_names.push_back(name);
    return it->second;
  };

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t tab1 = line.find('\t');
    const size_t tab2 = tab1 == std::string::npos
                            ? std::string::npos
                            : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos ||
        line.find('\t', tab2 + 1) != std::string::npos)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 3 tab-separated fields");
    const std::string src = line.substr(0, tab1);
    const std::string rel = line.substr(tab1 + 1, tab2 - tab1 - 1);
    const std::string tgt = line.substr(tab2 + 1);
    if (src.empty() || rel.empty() || tgt.empty())
      throw DataError("line " + std::to_string(line_no) + ": empty field");
    triples.push_back(
        {intern_entity(src), intern_relation(rel), intern_entity(tgt)});
  }

  const size_t raw = triples.size();
  KnowledgeGraph g(std::move(entity_names), std::move(relation_names),
                   std::move(triples));
  g.duplicates_collapsed_ = raw - g.num_triples();
  return g;
}

KnowledgeGraph KnowledgeGraph::load_triples_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open triple file: " + path);
  return load_triples(in);
}

KnowledgeGraph KnowledgeGraph::close_inverses() const {
  if (has_inverses())
    throw DataError("graph already carries synthesized inverse relations");
  for (const std::string& name : relation_names_)
    if (ends_with_inverse_suffix(name))
      throw DataError("base relation name ends with inverse suffix: " + name);

  std::vector<std::string> relation_names = relation_names_;
  const RelationId base = static_cast<RelationId>(relation_names.size());
  for (RelationId r = 0; r < base; ++r)
    relation_names.push_back(relation_names_[r] + kInverseSuffix);

  std::vector<Triple> triples = triples_;
  triples.reserve(triples_.size() * 2);
  for (const Triple& t : triples_)
    triples.push_back({t.target, static_cast<RelationId>(t.relation + base),
                       t.source});

  return KnowledgeGraph(entity_names_, std::move(relation_names),
                        std::move(triples), base);
}

std::optional<EntityId> KnowledgeGraph::find_entity(
    const std::string& name) const {
  auto it = entity_ids_.find(name);
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(
    const std::string& name) const {
  auto it = relation_ids_.find(name);
  if (it == relation_ids_.end()) return std::nullopt;
  return it->second;
}

bool KnowledgeGraph::has_triple(EntityId s, RelationId r, EntityId t) const {
  return std::binary_search(triples_.begin(), triples_.end(), Triple{s, r, t});
}

std::vector<EntityId> KnowledgeGraph::targets(EntityId s, RelationId r) const {
  // Triples are sorted by (source, relation, target), so the block for
  // (s, r) is contiguous; targets within it are sorted and distinct.
  auto lo = std::lower_bound(
      triples_.begin(), triples_.end(), Triple{s, r, 0},
      [](const Triple& a, const Triple& b) {
        return std::tie(a.source, a.relation) < std::tie(b.source, b.relation);
      });
  std::vector<EntityId> out;
  for (auto it = lo;
       it != triples_.end() && it->source == s && it->relation == r; ++it)
    out.push_back(it->target);
  return out;
}

std::span<const EntityId> KnowledgeGraph::relation_targets(
    RelationId r) const {
  return relation_targets_[r];
}

std::span<const RelationId> KnowledgeGraph::outgoing_relations(
    EntityId e) const {
  return outgoing_relations_[e];
}

std::vector<EntityId> KnowledgeGraph::denotation(const PathQuery& q) const {
  std::vector<EntityId> frontier{q.source};
  for (RelationId r : q.path) {
    std::vector<EntityId> next;
    for (EntityId e : frontier) {
      auto lo = std::lower_bound(
          triples_.begin(), triples_.end(), Triple{e, r, 0},
          [](const Triple& a, const Triple& b) {
            return std::tie(a.source, a.relation) <
                   std::tie(b.source, b.relation);
          });
      for (auto it = lo;
           it != triples_.end() && it->source == e && it->relation == r; ++it)
        next.push_back(it->target);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  return frontier;
}

std::vector<EntityId> KnowledgeGraph::candidates(const PathQuery& q) const {
  if (q.path.empty()) throw DataError("path query has empty relation path");
  auto span = relation_targets(q.path.back());
  return {span.begin(), span.end()};
}

std::vector<EntityId> KnowledgeGraph::incorrect_answers(
    const PathQuery& q) const {
  const std::vector<EntityId> cand = candidates(q);
  const std::vector<EntityId> den = denotation(q);
  std::vector<EntityId> out;
  std::set_difference(cand.begin(), cand.end(), den.begin(), den.end(),
                      std::back_inserter(out));
  return out;
}

RelationId KnowledgeGraph::inverse_of(RelationId r) const {
  if (!has_inverses())
    throw DataError("inverse_of on a graph without inverse closure");
  return r < num_base_relations_ ? r + num_base_relations_
                                 : r - num_base_relations_;
}

bool KnowledgeGraph::is_subset_of(const KnowledgeGraph& other) const {
  for (const Triple& t : triples_) {
    auto s = other.find_entity(entity_name(t.source));
    auto r = other.find_relation(relation_name(t.relation));
    auto o = other.find_entity(entity_name(t.target));
    if (!s || !r || !o || !other.has_triple(*s, *r, *o)) return false;
  }
  return true;
}

bool is_trivial_inverse_edge(const KnowledgeGraph& train, const Triple& edge) {
  if (!train.has_inverses())
    throw DataError("trivial-inverse filter requires an inverse-closed graph");
  // After closure (s,r,t) is present iff (t,r^-,s) is, so one membership
  // test covers both directions.
  return train.has_triple(edge.source, edge.relation, edge.target);
}

QueryClass classify_deduction(const KnowledgeGraph& train,
                              const QueryExample& example) {
  const std::vector<EntityId> den = train.denotation(example.query);
  return std::binary_search(den.begin(), den.end(), example.answer)
             ? QueryClass::Deduction
             : QueryClass::Induction;
}

}  // namespace kgpath
