// kgpath: knowledge-graph path-query pipeline.
//
// Subcommands:
//   ingest     read a triples file, report stats, optionally close inverses
//   gen-paths  sample train/test path-query datasets
//   train      curriculum training of an embedding model
//   eval       rank-based evaluation of a checkpoint on a path file
//   analyze    reconstruction-quality / composition diagnostics
//   query      rank candidates of one path query under a checkpoint
//   grid       end-to-end pipeline: single vs compositional per model kind

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kgpath/analysis.hpp"
#include "kgpath/errors.hpp"
#include "kgpath/eval.hpp"
#include "kgpath/graph.hpp"
#include "kgpath/io.hpp"
#include "kgpath/model.hpp"
#include "kgpath/pathgen.hpp"
#include "kgpath/train.hpp"

namespace fs = std::filesystem;
using namespace kgpath;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  return out;
}

TrainConfig load_train_config(const std::string& config_path) {
  if (config_path.empty()) return TrainConfig{};
  return parse_train_config(read_key_value_file(config_path));
}

struct CommonTrainFlags {
  std::string triples;
  std::string paths;
  std::string model = "bilinear";
  std::string config;
  std::string curriculum;
  int dim = -1;
  double aux_l2 = -1.0;
  std::optional<uint64_t> seed;
};

TrainResult run_training(const KnowledgeGraph& graph,
                         const std::vector<QueryExample>& examples,
                         const CommonTrainFlags& flags) {
  TrainConfig config = load_train_config(flags.config);
  if (flags.dim > 0) config.dim = flags.dim;
  if (flags.aux_l2 >= 0.0) config.aux_l2_weight = flags.aux_l2;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.curriculum == "single")
    config.curriculum = Curriculum::SingleEdgeOnly;
  else if (flags.curriculum == "comp")
    config.curriculum = Curriculum::Compositional;
  else if (!flags.curriculum.empty())
    throw UsageError("unknown curriculum: " + flags.curriculum);
  return train(graph, examples, parse_model_kind(flags.model), config);
}

EvalGraphPolicy parse_eval_graph(const std::string& name) {
  if (name == "full") return EvalGraphPolicy::FullGraph;
  if (name == "train") return EvalGraphPolicy::TrainGraph;
  throw UsageError("unknown eval graph policy: " + name);
}

void write_model_artifacts(const TrainResult& result, const fs::path& out_dir,
                           const std::string& stem) {
  write_checkpoint_file(result.params, (out_dir / (stem + ".ckpt")).string());
  auto log = open_out(out_dir / (stem + ".train.csv"));
  write_train_log(log, result.log);
}

struct GridCell {
  std::optional<double> mq, hits;
};

double pct_error_reduction(double err_single, double err_comp) {
  return 100.0 * (err_single - err_comp) / err_single;
}

int cmd_ingest(const std::string& triples, const std::string& out,
               bool close_inv) {
  KnowledgeGraph g = KnowledgeGraph::load_triples_file(triples);
  std::cout << "entities\t" << g.num_entities() << "\n"
            << "relations\t" << g.num_relations() << "\n"
            << "triples\t" << g.num_triples() << "\n"
            << "duplicates_collapsed\t" << g.duplicates_collapsed() << "\n";
  if (close_inv) {
    g = g.close_inverses();
    std::cout << "triples_closed\t" << g.num_triples() << "\n";
  }
  if (!out.empty()) {
    auto f = open_out(out);
    write_triples(f, g);
  }
  return 0;
}

int cmd_gen_paths(const std::string& triples, const std::string& full_triples,
                  const fs::path& out_dir, const PathGenConfig& config) {
  const KnowledgeGraph train_graph =
      KnowledgeGraph::load_triples_file(triples).close_inverses();
  const KnowledgeGraph full_graph =
      full_triples.empty()
          ? train_graph
          : KnowledgeGraph::load_triples_file(full_triples).close_inverses();
  if (!train_graph.is_subset_of(full_graph))
    throw DataError("train triples are not a subset of the full triples");

  const GeneratedDatasets data =
      generate_datasets(train_graph, full_graph, config);
  PathFileHeader header;
  header.fields["generator"] = "random-walk";
  header.fields["seed"] = std::to_string(config.seed);
  header.fields["l_max"] = std::to_string(config.max_length);
  auto train_out = open_out(out_dir / "train.paths");
  write_path_queries(train_out, full_graph, data.train, header);
  auto test_out = open_out(out_dir / "test.paths");
  write_path_queries(test_out, full_graph, data.test, header);
  std::cout << "train\t" << data.train.size() << "\n"
            << "test\t" << data.test.size() << "\n"
            << "test_removed_as_train_queries\t"
            << data.test_removed_as_train_queries << "\n";
  return 0;
}

int cmd_train(const CommonTrainFlags& flags, const std::string& checkpoint) {
  const KnowledgeGraph graph =
      KnowledgeGraph::load_triples_file(flags.triples).close_inverses();
  const auto examples = read_path_queries_file(flags.paths, graph);
  const TrainResult result = run_training(graph, examples, flags);
  write_checkpoint_file(result.params, checkpoint);
  write_train_log(std::cout, result.log);
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& triples,
             const std::string& full_triples, const std::string& paths,
             const std::string& eval_graph, int hits_k, int workers,
             const std::string& out) {
  const ModelParams params = read_checkpoint_file(checkpoint);
  const KnowledgeGraph train_graph =
      KnowledgeGraph::load_triples_file(triples).close_inverses();
  const KnowledgeGraph full_graph =
      full_triples.empty()
          ? train_graph
          : KnowledgeGraph::load_triples_file(full_triples).close_inverses();
  const auto examples = read_path_queries_file(paths, full_graph);
  EvalConfig config;
  config.hits_k = hits_k;
  config.workers = workers;
  config.eval_graph_policy = parse_eval_graph(eval_graph);
  const EvalReport report =
      evaluate(params, full_graph, train_graph, examples, config);
  print_eval_summary(std::cout, report);
  if (!out.empty()) {
    auto f = open_out(out);
    write_eval_report_csv(f, report);
  }
  return 0;
}

int cmd_query(const std::string& checkpoint, const std::string& triples,
              const std::string& query, int k) {
  const ModelParams params = read_checkpoint_file(checkpoint);
  const KnowledgeGraph graph =
      KnowledgeGraph::load_triples_file(triples).close_inverses();
  const PathQuery q = parse_query_string(graph, query);
  const auto ranked = rank_candidates(params, graph, q);
  const auto den = graph.denotation(q);
  const long limit = std::min<long>(k, static_cast<long>(ranked.size()));
  std::cout << "rank\tentity\tscore\tcorrect\n";
  for (long i = 0; i < limit; ++i) {
    const bool correct =
        std::binary_search(den.begin(), den.end(), ranked[i].first);
    std::cout << (i + 1) << "\t" << graph.entity_name(ranked[i].first) << "\t"
              << format_double(ranked[i].second) << "\t"
              << (correct ? "yes" : "no") << "\n";
  }
  return 0;
}

int cmd_analyze(const std::string& checkpoint, const std::string& single_ckpt,
                const std::string& triples, const std::string& query,
                const std::string& relation, const fs::path& out_dir,
                int workers) {
  const ModelParams comp = read_checkpoint_file(checkpoint);
  const KnowledgeGraph graph =
      KnowledgeGraph::load_triples_file(triples).close_inverses();
  if (!query.empty()) {
    const PathQuery q = parse_query_string(graph, query);
    const auto profile = rq_profile(comp, graph, q);
    auto f = open_out(out_dir / "rq_profile.csv");
    write_rq_profile_csv(f, graph, q, profile);
    write_rq_profile_csv(std::cout, graph, q, profile);
  }
  if (!relation.empty()) {
    if (single_ckpt.empty())
      throw UsageError("--single-checkpoint required with --relation");
    const ModelParams single = read_checkpoint_file(single_ckpt);
    const auto rel = graph.find_relation(relation);
    if (!rel) throw DataError("unknown relation: " + relation);
    const DeltaDistReport report =
        delta_dist_report(comp, single, graph, *rel, 0.3, workers);
    auto f = open_out(out_dir / "delta_dist.csv");
    write_delta_dist_csv(f, graph, report);
    auto summary = [](const char* name, const GroupSummary& s) {
      std::cout << name << "\tn=" << s.n;
      if (s.n > 0)
        std::cout << "\tmedian=" << format_double(s.median) << "\tq1="
                  << format_double(s.q1) << "\tq3=" << format_double(s.q3);
      std::cout << "\n";
    };
    summary("high_precision", report.high);
    summary("low_precision", report.low);
    summary("non_cooccurring", report.non_cooccurring);
  }
  return 0;
}

int cmd_grid(const std::string& triples, const std::string& full_triples,
             const std::string& config_path, const fs::path& out_dir,
             PathGenConfig gen_config, uint64_t seed, int workers) {
  const KnowledgeGraph train_graph =
      KnowledgeGraph::load_triples_file(triples).close_inverses();
  const KnowledgeGraph full_graph =
      full_triples.empty()
          ? train_graph
          : KnowledgeGraph::load_triples_file(full_triples).close_inverses();
  if (!train_graph.is_subset_of(full_graph))
    throw DataError("train triples are not a subset of the full triples");

  gen_config.seed = seed;
  const GeneratedDatasets data =
      generate_datasets(train_graph, full_graph, gen_config);
  PathFileHeader header;
  header.fields["generator"] = "random-walk";
  header.fields["seed"] = std::to_string(seed);
  header.fields["l_max"] = std::to_string(gen_config.max_length);
  {
    auto f = open_out(out_dir / "train.paths");
    write_path_queries(f, full_graph, data.train, header);
    auto g = open_out(out_dir / "test.paths");
    write_path_queries(g, full_graph, data.test, header);
  }

  TrainConfig base = load_train_config(config_path);
  base.seed = seed;

  EvalConfig eval_config;
  eval_config.workers = workers;

  auto grid_out = open_out(out_dir / "grid.csv");
  grid_out << "model,curriculum,mq,hits_at_10,red_mq_pct,red_hits_pct\n";
  std::cout << "model\tcurriculum\tmq\thits@10\n";

  for (ModelKind kind :
       {ModelKind::Bilinear, ModelKind::BilinearDiag, ModelKind::TransE}) {
    GridCell cells[2];
    for (int pass = 0; pass < 2; ++pass) {
      TrainConfig config = base;
      config.curriculum =
          pass == 0 ? Curriculum::SingleEdgeOnly : Curriculum::Compositional;
      const char* tag = pass == 0 ? "single" : "comp";
      const std::string stem =
          std::string(model_kind_name(kind)) + "." + tag;
      const TrainResult result = train(train_graph, data.train, kind, config);
      write_model_artifacts(result, out_dir, stem);
      const EvalReport report = evaluate(result.params, full_graph,
                                         train_graph, data.test, eval_config);
      {
        auto f = open_out(out_dir / (stem + ".eval.csv"));
        write_eval_report_csv(f, report);
      }
      cells[pass].mq = report.overall.mean_quantile();
      cells[pass].hits = report.overall.hits_pct();
      std::cout << model_kind_name(kind) << "\t" << tag << "\t"
                << (cells[pass].mq ? format_double(*cells[pass].mq) : "-")
                << "\t"
                << (cells[pass].hits ? format_double(*cells[pass].hits) : "-")
                << "\n";
    }
    for (int pass = 0; pass < 2; ++pass) {
      const GridCell& c = cells[pass];
      grid_out << model_kind_name(kind) << ","
               << (pass == 0 ? "single" : "comp") << ","
               << (c.mq ? format_double(*c.mq) : "") << ","
               << (c.hits ? format_double(*c.hits) : "") << ",";
      // Error reduction of comp relative to single, on the comp row only.
      if (pass == 1 && cells[0].mq && cells[1].mq && *cells[0].mq < 1.0)
        grid_out << format_double(
            pct_error_reduction(1.0 - *cells[0].mq, 1.0 - *cells[1].mq));
      grid_out << ",";
      if (pass == 1 && cells[0].hits && cells[1].hits && *cells[0].hits < 100)
        grid_out << format_double(pct_error_reduction(100.0 - *cells[0].hits,
                                                      100.0 - *cells[1].hits));
      grid_out << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-graph path-query engine"};
  app.require_subcommand(1);

  // ingest
  std::string in_triples, in_out;
  bool in_close = false;
  auto* ingest = app.add_subcommand("ingest", "load and validate a triples file");
  ingest->add_option("--triples", in_triples)->required();
  ingest->add_option("--out", in_out);
  ingest->add_flag("--close-inverses", in_close);

  // gen-paths
  std::string gp_triples, gp_full, gp_out_dir = ".";
  PathGenConfig gp_config;
  auto* gen = app.add_subcommand("gen-paths", "sample path-query datasets");
  gen->add_option("--triples", gp_triples)->required();
  gen->add_option("--full-triples", gp_full);
  gen->add_option("--out-dir", gp_out_dir);
  gen->add_option("--max-length", gp_config.max_length);
  gen->add_option("--train-count", gp_config.train_count);
  gen->add_option("--test-count", gp_config.test_count);
  gen->add_option("--seed", gp_config.seed);

  // train
  CommonTrainFlags tf;
  std::string tr_checkpoint;
  uint64_t tr_seed = 0;
  auto* tr = app.add_subcommand("train", "train an embedding model");
  tr->add_option("--triples", tf.triples)->required();
  tr->add_option("--paths", tf.paths)->required();
  tr->add_option("--model", tf.model);
  tr->add_option("--dim", tf.dim);
  tr->add_option("--config", tf.config);
  tr->add_option("--curriculum", tf.curriculum);
  tr->add_option("--aux-l2", tf.aux_l2);
  auto* tr_seed_opt = tr->add_option("--seed", tr_seed);
  tr->add_option("--checkpoint", tr_checkpoint)->required();

  // eval
  std::string ev_ckpt, ev_triples, ev_full, ev_paths, ev_out;
  std::string ev_graph = "full";
  int ev_k = 10, ev_workers = 1;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--triples", ev_triples)->required();
  ev->add_option("--full-triples", ev_full);
  ev->add_option("--paths", ev_paths)->required();
  ev->add_option("--eval-graph", ev_graph);
  ev->add_option("--hits-k", ev_k);
  ev->add_option("--workers", ev_workers);
  ev->add_option("--out", ev_out);

  // analyze
  std::string an_ckpt, an_single, an_triples, an_query, an_relation;
  std::string an_out_dir = ".";
  int an_workers = 1;
  auto* an = app.add_subcommand("analyze", "model diagnostics");
  an->add_option("--checkpoint", an_ckpt)->required();
  an->add_option("--single-checkpoint", an_single);
  an->add_option("--triples", an_triples)->required();
  an->add_option("--query", an_query);
  an->add_option("--relation", an_relation);
  an->add_option("--out-dir", an_out_dir);
  an->add_option("--workers", an_workers);

  // query
  std::string q_ckpt, q_triples, q_query;
  int q_k = 10;
  auto* qc = app.add_subcommand("query", "rank candidates of one query");
  qc->add_option("--checkpoint", q_ckpt)->required();
  qc->add_option("--triples", q_triples)->required();
  qc->add_option("--query", q_query)->required();
  qc->add_option("-k,--top-k", q_k);

  // grid
  std::string gr_triples, gr_full, gr_config, gr_out_dir = ".";
  PathGenConfig gr_gen;
  uint64_t gr_seed = 0;
  int gr_workers = 1;
  auto* gr = app.add_subcommand(
      "grid", "end-to-end single-vs-compositional comparison");
  gr->add_option("--triples", gr_triples)->required();
  gr->add_option("--full-triples", gr_full);
  gr->add_option("--config", gr_config);
  gr->add_option("--out-dir", gr_out_dir);
  gr->add_option("--max-length", gr_gen.max_length);
  gr->add_option("--train-count", gr_gen.train_count);
  gr->add_option("--test-count", gr_gen.test_count);
  gr->add_option("--seed", gr_seed);
  gr->add_option("--workers", gr_workers);

  try {
    app.parse(argc, argv);
    if (ingest->parsed()) return cmd_ingest(in_triples, in_out, in_close);
    if (gen->parsed())
      return cmd_gen_paths(gp_triples, gp_full, gp_out_dir, gp_config);
    if (tr->parsed()) {
      if (tr_seed_opt->count() > 0) tf.seed = tr_seed;
      return cmd_train(tf, tr_checkpoint);
    }
    if (ev->parsed())
      return cmd_eval(ev_ckpt, ev_triples, ev_full, ev_paths, ev_graph, ev_k,
                      ev_workers, ev_out);
    if (an->parsed())
      return cmd_analyze(an_ckpt, an_single, an_triples, an_query, an_relation,
                         an_out_dir, an_workers);
    if (qc->parsed()) return cmd_query(q_ckpt, q_triples, q_query, q_k);
    if (gr->parsed())
      return cmd_grid(gr_triples, gr_full, gr_config, gr_out_dir, gr_gen,
                      gr_seed, gr_workers);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
