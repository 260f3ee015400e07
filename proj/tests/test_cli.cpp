#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cuh/serialize.hpp"
#include "doctest.h"

using namespace cuh;
namespace fs = std::filesystem;

namespace {

std::string cli_binary() {
  const char* path = std::getenv("CUH_CLI");
  REQUIRE_MESSAGE(path != nullptr, "CUH_CLI must point at the cli binary");
  return path;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "cuh_cli_test";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// Runs the cli with `args`, captures combined output into `output`, and
// returns the process exit code.
int run(const std::string& args, std::string* output = nullptr) {
  static int counter = 0;
  const fs::path log =
      fs::temp_directory_path() / ("cuh_cli_log_" + std::to_string(counter++));
  const std::string cmd =
      "\"" + cli_binary() + "\" " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::stringstream buf;
    buf << in.rdbuf();
    *output = buf.str();
  }
  fs::remove(log);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), ("missing file " + path));
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("synth writes deterministic database and query splits") {
  TempDir dir;
  const std::string base =
      "synth --clusters 4 --items 300 --queries 60 --d1 24 --d2 16 "
      "--noise 0.1 --seed 13 --out-prefix ";
  CHECK(run(base + dir.file("a")) == 0);
  CHECK(run(base + dir.file("b")) == 0);

  const ViewMatrix db1 = load_view(dir.file("a_view1.cuhd"));
  CHECK(db1.dim() == 24);
  CHECK(db1.count() == 240);  // 300 items minus 60 queries
  const ViewMatrix q1 = load_view(dir.file("a_query_view1.cuhd"));
  CHECK(q1.count() == 60);
  CHECK(load_labels(dir.file("a_labels.txt")).size() == 240);
  CHECK(load_labels(dir.file("a_query_labels.txt")).size() == 60);

  CHECK(slurp(dir.file("a_view1.cuhd")) == slurp(dir.file("b_view1.cuhd")));
  CHECK(slurp(dir.file("a_view2.cuhd")) == slurp(dir.file("b_view2.cuhd")));
  CHECK(slurp(dir.file("a_query_view2.cuhd")) ==
        slurp(dir.file("b_query_view2.cuhd")));
}

TEST_CASE("usage errors exit nonzero with a diagnostic") {
  TempDir dir;
  std::string output;
  CHECK(run("", &output) != 0);  // a subcommand is required
  CHECK(run("--nonsense", &output) != 0);
  CHECK(run("synth --items 3 --clusters 5 --out-prefix " + dir.file("x"),
            &output) != 0);
  CHECK(output.find("error:") != std::string::npos);
  CHECK(run("train --view1 a.cuhd --view2 b.cuhd", &output) != 0);  // no --out
  CHECK(run("eval --model missing.cuhm --query-view1 q1 --query-view2 q2 "
            "--query-labels ql --db-labels dl --db-codes bogus",
            &output) != 0);
}

TEST_CASE("train, encode, and eval round a full retrieval pipeline") {
  TempDir dir;
  REQUIRE(run("synth --clusters 4 --items 300 --queries 60 --d1 24 --d2 16 "
              "--noise 0.1 --seed 13 --out-prefix " +
              dir.file("d")) == 0);

  const std::string train_cmd =
      "train --view1 " + dir.file("d_view1.cuhd") + " --view2 " +
      dir.file("d_view2.cuhd") + " --clusters 4 --bits 16 --max-iters 15 "
      "--seed 1 --trace " + dir.file("trace.tsv") + " --out ";
  std::string output;
  REQUIRE(run(train_cmd + dir.file("m1.cuhm"), &output) == 0);
  CHECK(output.find("trained 240 items") != std::string::npos);
  REQUIRE(run(train_cmd + dir.file("m2.cuhm")) == 0);
  CHECK(slurp(dir.file("m1.cuhm")) == slurp(dir.file("m2.cuhm")));

  const CuhModel model = load_model(dir.file("m1.cuhm"));
  CHECK(model.hyperparams.code_length == 16);  // --bits took effect
  CHECK(model.hyperparams.num_clusters == 4);
  CHECK(model.codes.count() == 240);

  // The trace has an initialization row and non-increasing objectives.
  std::ifstream trace(dir.file("trace.tsv"));
  REQUIRE(trace.good());
  std::string header;
  std::getline(trace, header);
  CHECK(header.find("objective") != std::string::npos);
  int iter;
  double objective, a1, a2;
  int g_changes, b_flips;
  double prev = std::numeric_limits<double>::infinity();
  int rows = 0;
  while (trace >> iter >> objective >> a1 >> a2 >> g_changes >> b_flips) {
    CHECK(iter == rows);
    CHECK(objective <= prev * (1.0 + 1e-9));
    prev = objective;
    ++rows;
  }
  CHECK(rows >= 2);

  // Encoding via the cli matches the packed codes the model carries.
  REQUIRE(run("encode --model " + dir.file("m1.cuhm") +
              " --modality both --view1 " + dir.file("d_query_view1.cuhd") +
              " --view2 " + dir.file("d_query_view2.cuhd") + " --out " +
              dir.file("q.cuhb")) == 0);
  const PackedCodeMatrix qcodes = load_codes(dir.file("q.cuhb"));
  CHECK(qcodes.count == 60);
  CHECK(qcodes.code_length == 16);

  CHECK(run("encode --model " + dir.file("m1.cuhm") +
            " --modality 1 --view1 " + dir.file("d_view1.cuhd") +
            " --out " + dir.file("v1.cuhb")) == 0);
  CHECK(run("encode --model " + dir.file("m1.cuhm") + " --modality 1 --out " +
            dir.file("nope.cuhb")) != 0);  // --view1 missing

  const std::string eval_base =
      "eval --model " + dir.file("m1.cuhm") + " --query-view1 " +
      dir.file("d_query_view1.cuhd") + " --query-view2 " +
      dir.file("d_query_view2.cuhd") + " --query-labels " +
      dir.file("d_query_labels.txt") + " --db-labels " +
      dir.file("d_labels.txt") + " --r-cut 100 ";
  REQUIRE(run(eval_base + "--out-prefix " + dir.file("e"), &output) == 0);
  CHECK(output.find("i2t mAP@100 = ") != std::string::npos);
  CHECK(output.find("t2i mAP@100 = ") != std::string::npos);

  std::ifstream map_in(dir.file("e_map.tsv"));
  REQUIRE(map_in.good());
  std::getline(map_in, header);
  std::map<std::string, double> maps;
  std::string tag;
  double value;
  while (map_in >> tag >> value) maps[tag] = value;
  REQUIRE(maps.size() == 2);
  for (const auto& [direction, map] : maps) {
    CHECK(map >= 0.0);
    CHECK(map <= 1.0);
  }
  CHECK(maps.at("i2t") > 0.5);  // clustered data retrieves well
  CHECK(maps.at("t2i") > 0.5);

  for (const std::string name : {"e_i2t_pr.tsv", "e_t2i_pr.tsv"}) {
    std::ifstream pr(dir.file(name));
    REQUIRE(pr.good());
    std::getline(pr, header);
    int radius;
    double precision, recall, last = -1.0;
    int count = 0;
    while (pr >> radius >> precision >> recall) {
      CHECK(recall >= last);
      last = recall;
      ++count;
    }
    CHECK(count == 17);  // radii 0..16
    CHECK(last == doctest::Approx(1.0));
  }
  CHECK(fs::exists(dir.file("e_i2t_topn.tsv")));
  CHECK(fs::exists(dir.file("e_t2i_topn.tsv")));

  // Re-encoded database codes give a working cross-direction evaluation too.
  CHECK(run(eval_base + "--db-codes reencoded --db-view1 " +
            dir.file("d_view1.cuhd") + " --db-view2 " +
            dir.file("d_view2.cuhd"),
            &output) == 0);
  CHECK(output.find("i2t mAP@100 = ") != std::string::npos);
}

TEST_CASE("sweep ranks the planted cluster count first") {
  TempDir dir;
  REQUIRE(run("synth --clusters 5 --items 480 --queries 80 --d1 16 --d2 12 "
              "--noise 0.8 --seed 11 --out-prefix " +
              dir.file("s")) == 0);
  const std::string sweep_cmd =
      "sweep --param clusters --grid 2,3,5,8,12 --view1 " +
      dir.file("s_view1.cuhd") + " --view2 " + dir.file("s_view2.cuhd") +
      " --query-view1 " + dir.file("s_query_view1.cuhd") + " --query-view2 " +
      dir.file("s_query_view2.cuhd") + " --query-labels " +
      dir.file("s_query_labels.txt") + " --db-labels " +
      dir.file("s_labels.txt") +
      " --bits 8 --max-iters 20 --r-cut 100 --seed 3 --out " +
      dir.file("sweep.tsv");
  REQUIRE(run(sweep_cmd) == 0);

  std::ifstream in(dir.file("sweep.tsv"));
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "clusters\tmap_i2t\tmap_t2i\tmap_mean");
  std::map<double, double> mean_by_value;
  double value, i2t, t2i, mean;
  while (in >> value >> i2t >> t2i >> mean) {
    CHECK(mean == doctest::Approx(0.5 * (i2t + t2i)));
    mean_by_value[value] = mean;
  }
  REQUIRE(mean_by_value.size() == 5);
  const double at_5 = mean_by_value.at(5.0);
  for (const auto& [v, m] : mean_by_value) {
    CHECK(at_5 >= m - 1e-12);
  }

  // Non-integer cluster values are rejected.
  std::string output;
  CHECK(run("sweep --param clusters --grid 2.5 --view1 " +
            dir.file("s_view1.cuhd") + " --view2 " + dir.file("s_view2.cuhd") +
            " --query-view1 " + dir.file("s_query_view1.cuhd") +
            " --query-view2 " + dir.file("s_query_view2.cuhd") +
            " --query-labels " + dir.file("s_query_labels.txt") +
            " --db-labels " + dir.file("s_labels.txt"),
            &output) != 0);
  CHECK(output.find("integer") != std::string::npos);
}
