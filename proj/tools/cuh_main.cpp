#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cuh/dataset.hpp"
#include "cuh/metrics.hpp"
#include "cuh/optimizer.hpp"
#include "cuh/serialize.hpp"

namespace {

using namespace cuh;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct TrainFlags {
  Hyperparams hp;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lambda", hp.lambda, "quantization-error weight")
        ->capture_default_str();
    cmd->add_option("--beta", hp.beta, "code-prototype weight")
        ->capture_default_str();
    cmd->add_option("--clusters", hp.num_clusters, "number of clusters")
        ->capture_default_str();
    cmd->add_option("--bits", hp.code_length, "code length in bits")
        ->capture_default_str();
    cmd->add_option("--max-iters", hp.max_outer_iters,
                    "cap on outer iterations")
        ->capture_default_str();
    cmd->add_option("--inner-w-iters", hp.inner_w_iters,
                    "Cayley steps per projection update")
        ->capture_default_str();
    cmd->add_option("--tol", hp.rel_tol, "relative objective tolerance")
        ->capture_default_str();
    cmd->add_option("--seed", hp.seed, "seed for all stochastic choices")
        ->capture_default_str();
  }
};

void write_trace_tsv(const std::string& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "iter\tobjective\talpha1\talpha2\tg_changes\tb_flips\n";
  out << "0\t" << fmt(trace.initial_objective) << "\t0.5\t0.5\t0\t0\n";
  for (const TrainTrace::Record& rec : trace.records) {
    out << rec.iter << '\t' << fmt(rec.objective) << '\t' << fmt(rec.alpha1)
        << '\t' << fmt(rec.alpha2) << '\t' << rec.g_changes << '\t'
        << rec.b_flips << '\n';
  }
}

struct SynthArgs {
  SynthConfig cfg;
  Index queries = 0;
  std::string out_prefix;
};

int cmd_synth(const SynthArgs& args) {
  if (args.queries < 0 || args.queries >= args.cfg.items) {
    throw std::invalid_argument("--queries must be in [0, items)");
  }
  const MultiViewDataset data = synth_generate(args.cfg);
  const Index db_count = args.cfg.items - args.queries;
  if (db_count < args.cfg.clusters) {
    throw std::invalid_argument(
        "database part smaller than the cluster count");
  }

  auto slice_labels = [&](Index from, Index len) {
    const auto& all = *data.labels;
    return std::vector<std::vector<int>>(
        all.begin() + from, all.begin() + from + len);
  };
  auto write_part = [&](const std::string& tag, Index from, Index len) {
    for (int k = 0; k < 2; ++k) {
      ViewMatrix part;
      part.data = data.views[k].data.middleCols(from, len);
      save_view(args.out_prefix + tag + "_view" + std::to_string(k + 1) +
                    ".cuhd",
                part);
    }
    save_labels(args.out_prefix + tag + "_labels.txt",
                slice_labels(from, len));
  };

  write_part("", 0, db_count);
  if (args.queries > 0) write_part("_query", db_count, args.queries);
  std::cout << "wrote " << db_count << " database items";
  if (args.queries > 0) std::cout << " and " << args.queries << " queries";
  std::cout << " under " << args.out_prefix << "*\n";
  return 0;
}

struct TrainArgs {
  TrainFlags flags;
  std::string view1, view2, out, trace;
};

int cmd_train(const TrainArgs& args) {
  MultiViewDataset data = load_dataset(args.view1, args.view2);
  center(data);
  const TrainResult result = train(data, args.flags.hp);
  save_model(args.out, result.model);
  if (!args.trace.empty()) write_trace_tsv(args.trace, result.trace);
  const TrainTrace& trace = result.trace;
  std::cout << "trained " << data.count() << " items in "
            << trace.records.size() << " iterations ("
            << (trace.converged ? "converged" : "iteration cap") << "), "
            << "objective " << fmt(trace.initial_objective) << " -> "
            << fmt(trace.records.empty() ? trace.initial_objective
                                         : trace.records.back().objective)
            << "\n";
  return 0;
}

struct EncodeArgs {
  std::string model, modality, view1, view2, out;
};

int cmd_encode(const EncodeArgs& args) {
  const CuhModel model = load_model(args.model);
  PackedCodeMatrix codes;
  if (args.modality == "1") {
    if (args.view1.empty()) {
      throw std::invalid_argument("--modality 1 needs --view1");
    }
    codes = encode_view(model, 0, load_view(args.view1));
  } else if (args.modality == "2") {
    if (args.view2.empty()) {
      throw std::invalid_argument("--modality 2 needs --view2");
    }
    codes = encode_view(model, 1, load_view(args.view2));
  } else if (args.modality == "both") {
    if (args.view1.empty() || args.view2.empty()) {
      throw std::invalid_argument("--modality both needs --view1 and --view2");
    }
    codes = encode_both(model, load_view(args.view1), load_view(args.view2));
  } else {
    throw std::invalid_argument("--modality must be 1, 2, or both");
  }
  export_codes(args.out, codes);
  std::cout << "encoded " << codes.count << " items at " << codes.code_length
            << " bits\n";
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string query_view1, query_view2, query_labels;
  std::string db_view1, db_view2, db_labels;
  std::string db_codes = "trained";
  std::string out_prefix;
  Index r_cut = kDefaultRCut;
  std::vector<Index> topn{1, 5, 10, 50, 100, 500, 1000};
};

struct DirectionReport {
  std::string tag;
  EvalReport report;
};

// One cross-modal direction: queries from `query_view` (0 = image-query-text)
// ranked against database codes.
EvalReport eval_direction(const CuhModel& model, const ViewMatrix& queries,
                          int query_view, const PackedCodeMatrix& db_codes,
                          const std::vector<std::vector<int>>& query_labels,
                          const std::vector<std::vector<int>>& db_labels,
                          Index r_cut, const std::vector<Index>& topn) {
  std::vector<SearchResult> rankings;
  rankings.reserve(static_cast<std::size_t>(queries.count()));
  for (Index i = 0; i < queries.count(); ++i) {
    const QueryCode code =
        encode_single(model, query_view, queries.data.col(i));
    rankings.push_back(search_topk(db_codes, code, db_codes.count));
  }
  const RelevanceJudge judge = make_label_judge(query_labels, db_labels);
  return evaluate(rankings, judge, r_cut, topn, db_codes.code_length);
}

int cmd_eval(const EvalArgs& args) {
  if (args.db_codes != "trained" && args.db_codes != "reencoded") {
    throw std::invalid_argument("--db-codes must be trained or reencoded");
  }
  const CuhModel model = load_model(args.model);
  const ViewMatrix q1 = load_view(args.query_view1);
  const ViewMatrix q2 = load_view(args.query_view2);
  const auto query_labels = load_labels(args.query_labels);
  const auto db_labels = load_labels(args.db_labels);
  if (q1.count() != q2.count() ||
      static_cast<Index>(query_labels.size()) != q1.count()) {
    throw std::invalid_argument(
        "query views and labels disagree on item count");
  }

  PerView<PackedCodeMatrix> db;  // db[k]: codes searched by view-k queries
  if (args.db_codes == "trained") {
    db[0] = pack(model.codes);
    db[1] = db[0];
  } else {
    if (args.db_view1.empty() || args.db_view2.empty()) {
      throw std::invalid_argument(
          "--db-codes reencoded needs --db-view1 and --db-view2");
    }
    // Image queries search re-encoded text codes and vice versa.
    db[0] = encode_view(model, 1, load_view(args.db_view2));
    db[1] = encode_view(model, 0, load_view(args.db_view1));
  }
  for (int k = 0; k < 2; ++k) {
    if (static_cast<Index>(db_labels.size()) != db[k].count) {
      throw std::invalid_argument("database labels cover " +
                                  std::to_string(db_labels.size()) +
                                  " items, codes cover " +
                                  std::to_string(db[k].count));
    }
  }

  const DirectionReport reports[2] = {
      {"i2t", eval_direction(model, q1, 0, db[0], query_labels, db_labels,
                             args.r_cut, args.topn)},
      {"t2i", eval_direction(model, q2, 1, db[1], query_labels, db_labels,
                             args.r_cut, args.topn)},
  };
  for (const DirectionReport& dir : reports) {
    std::cout << dir.tag << " mAP@" << args.r_cut << " = "
              << fmt(dir.report.map) << "\n";
  }
  if (!args.out_prefix.empty()) {
    std::ofstream map_out(args.out_prefix + "_map.tsv");
    if (!map_out) {
      throw std::runtime_error("cannot open " + args.out_prefix +
                               "_map.tsv for writing");
    }
    map_out << "direction\tmap\n";
    for (const DirectionReport& dir : reports) {
      map_out << dir.tag << '\t' << fmt(dir.report.map) << '\n';
      write_topn_tsv(args.out_prefix + "_" + dir.tag + "_topn.tsv",
                     dir.report);
      write_pr_tsv(args.out_prefix + "_" + dir.tag + "_pr.tsv", dir.report);
    }
  }
  return 0;
}

struct SweepArgs {
  TrainFlags flags;
  std::string param;
  std::vector<double> grid;
  std::string view1, view2;
  std::string query_view1, query_view2, query_labels, db_labels;
  std::string out;
  Index r_cut = kDefaultRCut;
};

int cmd_sweep(const SweepArgs& args) {
  if (args.param != "lambda" && args.param != "beta" &&
      args.param != "clusters") {
    throw std::invalid_argument("--param must be lambda, beta, or clusters");
  }
  if (args.grid.empty()) throw std::invalid_argument("--grid is empty");

  MultiViewDataset data = load_dataset(args.view1, args.view2);
  center(data);
  const ViewMatrix q1 = load_view(args.query_view1);
  const ViewMatrix q2 = load_view(args.query_view2);
  const auto query_labels = load_labels(args.query_labels);
  const auto db_labels = load_labels(args.db_labels);
  const std::vector<Index> topn{10};

  std::ofstream out;
  if (!args.out.empty()) {
    out.open(args.out);
    if (!out) {
      throw std::runtime_error("cannot open " + args.out + " for writing");
    }
    out << args.param << "\tmap_i2t\tmap_t2i\tmap_mean\n";
  }
  std::cout << args.param << "\tmap_i2t\tmap_t2i\tmap_mean\n";
  for (double value : args.grid) {
    Hyperparams hp = args.flags.hp;
    if (args.param == "lambda") {
      hp.lambda = value;
    } else if (args.param == "beta") {
      hp.beta = value;
    } else {
      hp.num_clusters = static_cast<int>(value);
      if (static_cast<double>(hp.num_clusters) != value) {
        throw std::invalid_argument("cluster grid values must be integers");
      }
    }
    const TrainResult result = train(data, hp);
    const PackedCodeMatrix codes = pack(result.model.codes);
    const double map_i2t =
        eval_direction(result.model, q1, 0, codes, query_labels, db_labels,
                       args.r_cut, topn)
            .map;
    const double map_t2i =
        eval_direction(result.model, q2, 1, codes, query_labels, db_labels,
                       args.r_cut, topn)
            .map;
    const double mean = 0.5 * (map_i2t + map_t2i);
    std::cout << fmt(value) << '\t' << fmt(map_i2t) << '\t' << fmt(map_t2i)
              << '\t' << fmt(mean) << "\n";
    if (out.is_open()) {
      out << fmt(value) << '\t' << fmt(map_i2t) << '\t' << fmt(map_t2i)
          << '\t' << fmt(mean) << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster-wise unsupervised hashing for cross-modal retrieval"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a clustered two-view dataset");
  synth_cmd->add_option("--clusters", synth.cfg.clusters, "planted clusters")
      ->capture_default_str();
  synth_cmd->add_option("--items", synth.cfg.items, "total items generated")
      ->capture_default_str();
  synth_cmd->add_option("--d1", synth.cfg.d1, "view-1 dimension")
      ->capture_default_str();
  synth_cmd->add_option("--d2", synth.cfg.d2, "view-2 dimension")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth.cfg.noise, "Gaussian noise sigma")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.cfg.seed, "generator seed")
      ->capture_default_str();
  synth_cmd
      ->add_option("--queries", synth.queries,
                   "hold out this many items as a query split")
      ->capture_default_str();
  synth_cmd->add_option("--out-prefix", synth.out_prefix, "output path prefix")
      ->required();

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train a model on a two-view dataset");
  train_cmd->add_option("--view1", train_args.view1, "view-1 CUHD file")
      ->required();
  train_cmd->add_option("--view2", train_args.view2, "view-2 CUHD file")
      ->required();
  train_cmd->add_option("--out", train_args.out, "model output path")
      ->required();
  train_cmd->add_option("--trace", train_args.trace,
                        "per-iteration trace TSV path");
  train_args.flags.attach(train_cmd);

  EncodeArgs encode_args;
  CLI::App* encode_cmd =
      app.add_subcommand("encode", "Encode items with a trained model");
  encode_cmd->add_option("--model", encode_args.model, "model file")
      ->required();
  encode_cmd
      ->add_option("--modality", encode_args.modality,
                   "input modality: 1, 2, or both")
      ->required();
  encode_cmd->add_option("--view1", encode_args.view1, "view-1 CUHD file");
  encode_cmd->add_option("--view2", encode_args.view2, "view-2 CUHD file");
  encode_cmd->add_option("--out", encode_args.out, "code output path")
      ->required();

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Evaluate cross-modal retrieval in both directions");
  eval_cmd->add_option("--model", eval_args.model, "model file")->required();
  eval_cmd
      ->add_option("--query-view1", eval_args.query_view1,
                   "query view-1 CUHD file")
      ->required();
  eval_cmd
      ->add_option("--query-view2", eval_args.query_view2,
                   "query view-2 CUHD file")
      ->required();
  eval_cmd
      ->add_option("--query-labels", eval_args.query_labels,
                   "query label file")
      ->required();
  eval_cmd->add_option("--db-labels", eval_args.db_labels,
                       "database label file")
      ->required();
  eval_cmd->add_option("--db-view1", eval_args.db_view1,
                       "database view-1 CUHD file (for --db-codes reencoded)");
  eval_cmd->add_option("--db-view2", eval_args.db_view2,
                       "database view-2 CUHD file (for --db-codes reencoded)");
  eval_cmd
      ->add_option("--db-codes", eval_args.db_codes,
                   "database code source: trained | reencoded")
      ->capture_default_str();
  eval_cmd->add_option("--r-cut", eval_args.r_cut, "mAP cutoff R")
      ->capture_default_str();
  eval_cmd->add_option("--topn", eval_args.topn, "top-n precision grid")
      ->delimiter(',');
  eval_cmd->add_option("--out-prefix", eval_args.out_prefix,
                       "prefix for metric TSV files");

  SweepArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Train and evaluate over a hyperparameter grid");
  sweep_cmd
      ->add_option("--param", sweep_args.param,
                   "swept parameter: lambda | beta | clusters")
      ->required();
  sweep_cmd->add_option("--grid", sweep_args.grid, "grid values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--view1", sweep_args.view1, "view-1 CUHD file")
      ->required();
  sweep_cmd->add_option("--view2", sweep_args.view2, "view-2 CUHD file")
      ->required();
  sweep_cmd
      ->add_option("--query-view1", sweep_args.query_view1,
                   "query view-1 CUHD file")
      ->required();
  sweep_cmd
      ->add_option("--query-view2", sweep_args.query_view2,
                   "query view-2 CUHD file")
      ->required();
  sweep_cmd
      ->add_option("--query-labels", sweep_args.query_labels,
                   "query label file")
      ->required();
  sweep_cmd
      ->add_option("--db-labels", sweep_args.db_labels, "database label file")
      ->required();
  sweep_cmd->add_option("--r-cut", sweep_args.r_cut, "mAP cutoff R")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_args.out, "result TSV path");
  sweep_args.flags.attach(sweep_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (encode_cmd->parsed()) return cmd_encode(encode_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
