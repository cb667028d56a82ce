#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kgpath/graph.hpp"
#include "kgpath/model.hpp"

namespace kgpath {

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double value);
double parse_double(const std::string& text);

// Path-query files: `source\tr1,r2,...,rk\ttarget` per line, `#` comment
// header lines carrying generation provenance.

struct PathFileHeader {
  std::map<std::string, std::string> fields;  // seed, l_max, generator, ...
};

void write_path_queries(std::ostream& out, const KnowledgeGraph& graph,
                        const std::vector<QueryExample>& examples,
                        const PathFileHeader& header);

std::vector<QueryExample> read_path_queries(std::istream& in,
                                            const KnowledgeGraph& graph);
std::vector<QueryExample> read_path_queries_file(const std::string& path,
                                                 const KnowledgeGraph& graph);

// Canonical query string `source/r1/r2/.../rk` (entity and relation names).
std::string query_to_string(const KnowledgeGraph& graph, const PathQuery& q);
PathQuery parse_query_string(const KnowledgeGraph& graph,
                             const std::string& text);

// Checkpoint format (UTF-8 text):
//   KGE v1\t<kind>\t<d>\t<|E|>\t<|R|>
//   E\t<name>\t<d floats>
//   R\t<name>\t<d or d*d floats, row-major>
// Floats use shortest round-trip decimals, so read(write(p)) is bit-exact.
void write_checkpoint(const ModelParams& params, std::ostream& out);
void write_checkpoint_file(const ModelParams& params, const std::string& path);
ModelParams read_checkpoint(std::istream& in);
ModelParams read_checkpoint_file(const std::string& path);

// Flat key=value config text; '#' comments and blank lines skipped.
// Unknown keys are the caller's concern; duplicates take the last value.
std::map<std::string, std::string> read_key_value_file(const std::string& path);
std::map<std::string, std::string> read_key_value(std::istream& in);

void write_triples(std::ostream& out, const KnowledgeGraph& graph);

}  // namespace kgpath
