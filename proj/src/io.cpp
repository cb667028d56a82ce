#include "kgpath/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kgpath/errors.hpp"

namespace kgpath {

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw NumericError("float formatting failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw DataError("malformed float: '" + text + "'");
  return value;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

void write_path_queries(std::ostream& out, const KnowledgeGraph& graph,
                        const std::vector<QueryExample>& examples,
                        const PathFileHeader& header) {
  for (const auto& [key, value] : header.fields)
    out << "# " << key << "=" << value << "\n";
  for (const QueryExample& ex : examples) {
    out << graph.entity_name(ex.query.source) << "\t";
    for (size_t i = 0; i < ex.query.path.size(); ++i) {
      if (i > 0) out << ",";
      out << graph.relation_name(ex.query.path[i]);
    }
    out << "\t" << graph.entity_name(ex.answer) << "\n";
  }
}

std::vector<QueryExample> read_path_queries(std::istream& in,
                                            const KnowledgeGraph& graph) {
  std::vector<QueryExample> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != 3)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 3 tab-separated fields");
    auto source = graph.find_entity(fields[0]);
    if (!source)
      throw DataError("line " + std::to_string(line_no) +
                      ": unknown entity '" + fields[0] + "'");
    auto answer = graph.find_entity(fields[2]);
    if (!answer)
      throw DataError("line " + std::to_string(line_no) +
                      ": unknown entity '" + fields[2] + "'");
    PathQuery q;
    q.source = *source;
    for (const std::string& rel_name : split(fields[1], ',')) {
      auto rel = graph.find_relation(rel_name);
      if (!rel)
        throw DataError("line " + std::to_string(line_no) +
                        ": unknown relation '" + rel_name + "'");
      q.path.push_back(*rel);
    }
    if (q.path.empty())
      throw DataError("line " + std::to_string(line_no) + ": empty path");
    out.push_back({std::move(q), *answer});
  }
  return out;
}

std::vector<QueryExample> read_path_queries_file(const std::string& path,
                                                 const KnowledgeGraph& graph) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open path-query file: " + path);
  return read_path_queries(in, graph);
}

std::string query_to_string(const KnowledgeGraph& graph, const PathQuery& q) {
  std::string out = graph.entity_name(q.source);
  for (RelationId r : q.path) {
    out += '/';
    out += graph.relation_name(r);
  }
  return out;
}

PathQuery parse_query_string(const KnowledgeGraph& graph,
                             const std::string& text) {
  const std::vector<std::string> parts = split(text, '/');
  if (parts.size() < 2)
    throw DataError("query must be source/r1[/r2/...]: '" + text + "'");
  auto source = graph.find_entity(parts[0]);
  if (!source) throw DataError("unknown entity '" + parts[0] + "'");
  PathQuery q;
  q.source = *source;
  for (size_t i = 1; i < parts.size(); ++i) {
    auto rel = graph.find_relation(parts[i]);
    if (!rel) throw DataError("unknown relation '" + parts[i] + "'");
    q.path.push_back(*rel);
  }
  return q;
}

void write_checkpoint(const ModelParams& params, std::ostream& out) {
  out << "KGE v1\t" << model_kind_name(params.kind) << "\t" << params.dim
      << "\t" << params.entity_vecs.size() << "\t"
      << params.relation_params.size() << "\n";
  for (size_t e = 0; e < params.entity_vecs.size(); ++e) {
    out << "E\t" << params.entity_names[e];
    for (double x : params.entity_vecs[e]) out << "\t" << format_double(x);
    out << "\n";
  }
  for (size_t r = 0; r < params.relation_params.size(); ++r) {
    out << "R\t" << params.relation_names[r];
    for (double x : params.relation_params[r]) out << "\t" << format_double(x);
    out << "\n";
  }
}

void write_checkpoint_file(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  write_checkpoint(params, out);
}

ModelParams read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty checkpoint");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> head = split(line, '\t');
  if (head.size() != 5 || head[0] != "KGE v1")
    throw DataError("bad checkpoint header (expected 'KGE v1')");
  ModelParams p;
  p.kind = parse_model_kind(head[1]);
  p.dim = std::stoi(head[2]);
  const size_t n_entities = std::stoul(head[3]);
  const size_t n_relations = std::stoul(head[4]);
  if (p.dim < 1) throw DataError("checkpoint dim must be >= 1");

  auto read_row = [&](const char* tag, size_t expected_floats,
                      std::string& name, std::vector<double>& values) {
    if (!std::getline(in, line))
      throw DataError("checkpoint truncated: expected more rows");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != expected_floats + 2 || fields[0] != tag)
      throw DataError("checkpoint row count mismatch (tag " +
                      std::string(tag) + ")");
    name = fields[1];
    values.resize(expected_floats);
    for (size_t i = 0; i < expected_floats; ++i) {
      values[i] = parse_double(fields[i + 2]);
      if (!std::isfinite(values[i]))
        throw DataError("non-finite value in checkpoint");
    }
  };

  p.entity_names.resize(n_entities);
  p.entity_vecs.resize(n_entities);
  for (size_t e = 0; e < n_entities; ++e)
    read_row("E", p.dim, p.entity_names[e], p.entity_vecs[e]);
  p.relation_names.resize(n_relations);
  p.relation_params.resize(n_relations);
  for (size_t r = 0; r < n_relations; ++r)
    read_row("R", p.relation_param_size(), p.relation_names[r],
             p.relation_params[r]);
  if (std::getline(in, line) && !line.empty())
    throw DataError("trailing content after checkpoint rows");
  return p;
}

ModelParams read_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  return read_checkpoint(in);
}

std::map<std::string, std::string> read_key_value(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected key=value");
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

std::map<std::string, std::string> read_key_value_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  return read_key_value(in);
}

void write_triples(std::ostream& out, const KnowledgeGraph& graph) {
  for (const Triple& t : graph.triples())
    out << graph.entity_name(t.source) << "\t"
        << graph.relation_name(t.relation) << "\t"
        << graph.entity_name(t.target) << "\n";
}

}  // namespace kgpath
