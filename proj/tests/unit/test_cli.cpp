//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "commands.h"
#include "solvflow/digest.h"

using namespace solvflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "solvflow");
  std::vector<const char *> argv;
  for (const auto &a: args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  Outcome o;
  o.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / "solvflow_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path &p, const std::string &text) {
  std::ofstream(p, std::ios::binary) << text;
}

const std::vector<std::string> kTiny {
  "--synthetic", "--synthetic-solvents", "3", "--synthetic-points", "4",
  "--set", "gnn.hidden=16", "--set", "gnn.heads=2", "--set", "gnn.gat_layers=1",
  "--set", "gnn.mixture_hidden=8", "--set", "gnn.fusion_hidden1=8",
  "--set", "gnn.fusion_hidden2=4", "--set", "gnn_train.max_epochs=2",
  "--set", "deep_train.max_epochs=2", "--set", "gbdt.iterations=20",
  "--set", "gbdt.min_samples_leaf=2",
};

std::vector<std::string> with_tiny(std::vector<std::string> args) {
  args.insert(args.end(), kTiny.begin(), kTiny.end());
  return args;
}

}  // namespace

TEST_CASE("fingerprint command") {
  const auto dir = scratch("fingerprint");
  write(dir / "rxn.csv", "id,reaction\n1,CCO>>CCO\n2,C=CCOc1ccccc1O>>C=CCc1cccc(O)c1O\n");
  const auto out = dir / "fp.csv";
  auto r = run_cli({ "fingerprint", "--input", (dir / "rxn.csv").string(), "--output",
                     out.string() });
  REQUIRE(r.code == cli::kExitOk);
  const std::string first = slurp(out);
  CHECK(first.find("# tool_version=" + std::string(kToolVersion)) == 0);
  CHECK(first.find("# config_digest=") != std::string::npos);
  CHECK(first.find("# input_digest=") != std::string::npos);

  std::istringstream lines(first);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] != '#') {
      rows.push_back(line);
    }
  }
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "row,reaction,fingerprint");
  const std::string zero_hex = rows[1].substr(rows[1].rfind(',') + 1);
  CHECK(zero_hex.size() == 512);
  CHECK(zero_hex.find_first_not_of('0') == std::string::npos);
  const std::string hex = rows[2].substr(rows[2].rfind(',') + 1);
  CHECK(hex.size() == 512);
  CHECK(hex.find_first_not_of('0') != std::string::npos);

  r = run_cli({ "fingerprint", "--input", (dir / "rxn.csv").string(), "--output",
                out.string() });
  CHECK(r.code == cli::kExitOk);
  CHECK(slurp(out) == first);

  r = run_cli({ "fingerprint", "--input", (dir / "rxn.csv").string(), "--width", "1000" });
  CHECK(r.code == cli::kExitUsage);
  r = run_cli({ "fingerprint", "--input", (dir / "rxn.csv").string(), "--width", "64" });
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find(std::string(16, '0')) != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli({}).code == cli::kExitUsage);
  CHECK(run_cli({ "benchmark" }).code == cli::kExitUsage);
  CHECK(run_cli({ "train", "--method", "svm", "--synthetic" }).code == cli::kExitUsage);
  CHECK(run_cli({ "benchmark", "--data", "/nonexistent/file.csv" }).code == cli::kExitUsage);
  const auto r = run_cli({ "benchmark", "--synthetic", "--set", "gnn.nope=1" });
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("gnn.nope") != std::string::npos);
  CHECK(run_cli({ "benchmark", "--synthetic", "--methods", "svm" }).code
        == cli::kExitUsage);
}

TEST_CASE("runtime failures exit with 1") {
  const auto dir = scratch("failure");
  write(dir / "bad.csv", "solvent_a_name,temperature_c\nX,1\n");
  const auto r = run_cli({ "validate", "--data", (dir / "bad.csv").string(), "--out",
                           dir.string() });
  CHECK(r.code == cli::kExitFailure);
  CHECK(r.err.find("residence_time_s") != std::string::npos);
}

TEST_CASE("validate writes a report") {
  const auto dir = scratch("validate");
  const auto r = run_cli({ "validate", "--synthetic", "--out", dir.string() });
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "validation.json"));
  CHECK(j["clean"] == true);
  CHECK(j["rows"] == 60);
  CHECK(j["tool_version"] == std::string(kToolVersion));
}

TEST_CASE("train then predict from the checkpoint") {
  const auto dir = scratch("train");
  auto r = run_cli(with_tiny({ "train", "--method", "gbdt", "--seed", "3", "--out",
                               dir.string() }));
  REQUIRE(r.code == cli::kExitOk);
  CHECK(fs::exists(dir / "gbdt_seed3.svck"));
  const auto curve = slurp(dir / "gbdt_seed3_curve.csv");
  CHECK(curve.find("# seed=3") != std::string::npos);
  CHECK(curve.find("epoch,train_loss,val_loss,lr") != std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(dir / "gbdt_seed3_train.json"));
  const std::string digest = summary["config_digest"];

  r = run_cli(with_tiny({ "predict", "--checkpoint", (dir / "gbdt_seed3.svck").string(),
                          "--expect-digest", digest, "--out", dir.string() }));
  REQUIRE(r.code == cli::kExitOk);
  const auto pred = slurp(dir / "predictions.csv");
  CHECK(pred.find("row,yield_sm,yield_p2,yield_p3") != std::string::npos);
  CHECK(pred.find("# config_digest=" + digest) != std::string::npos);

  r = run_cli(with_tiny({ "predict", "--checkpoint", (dir / "gbdt_seed3.svck").string(),
                          "--expect-digest", "deadbeef", "--out", dir.string() }));
  CHECK(r.code == cli::kExitFailure);

  r = run_cli(with_tiny({ "train", "--method", "gnn", "--seed", "3", "--out",
                          dir.string() }));
  REQUIRE(r.code == cli::kExitOk);
  const auto gnn_curve = slurp(dir / "gnn_seed3_curve.csv");
  CHECK(gnn_curve.find("\n2,") != std::string::npos);
}

TEST_CASE("benchmark outputs are reproducible byte for byte") {
  const auto a = scratch("bench_a");
  const auto b = scratch("bench_b");
  const auto args = [&](const fs::path &dir) {
    return with_tiny({ "benchmark", "--methods", "gbdt,mlp,ensemble", "--seed", "5",
                       "--max-folds", "2", "--out", dir.string() });
  };
  REQUIRE(run_cli(args(a)).code == cli::kExitOk);
  REQUIRE(run_cli(args(b)).code == cli::kExitOk);
  for (const char *name: { "benchmark_loso_seed5.json", "benchmark_loso_seed5.txt",
                           "residuals_loso_seed5.csv" }) {
    CAPTURE(name);
    REQUIRE(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  const auto j = nlohmann::json::parse(slurp(a / "benchmark_loso_seed5.json"));
  CHECK(j["metadata"]["tool_version"] == std::string(kToolVersion));
  CHECK(j["seed"] == 5);
  CHECK(j["summary"].size() == 3);
  const auto residuals = slurp(a / "residuals_loso_seed5.csv");
  CHECK(residuals.find("# dataset_digest=") != std::string::npos);
  CHECK(residuals.find("# config_digest[ensemble]=") != std::string::npos);
}

TEST_CASE("ablate writes five rows") {
  const auto dir = scratch("ablate");
  const auto r = run_cli(with_tiny({ "ablate", "--max-folds", "1", "--seed", "1", "--out",
                                     dir.string() }));
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "ablation_loso_seed1.json"));
  CHECK(j["variants"].size() == 5);
  CHECK(fs::exists(dir / "ablation_loso_seed1.txt"));
}

TEST_CASE("installed binary returns the same exit codes") {
  const std::string exe = SOLVFLOW_CLI_PATH;
  CHECK(std::system((exe + " --version > /dev/null").c_str()) == 0);
  const int status = std::system((exe + " train > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == cli::kExitUsage);
}
