#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "memephys/cli/cli.hpp"

using namespace memephys;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

struct Workspace {
  fs::path dir = fs::temp_directory_path() / "memephys_test_cli";
  Workspace() {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string operator/(const std::string& p) const { return (dir / p).string(); }
};

}  // namespace

TEST_CASE("usage errors exit 1 with usage text") {
  auto r = run({"extract", "--manifest", "m.ndjson", "--out", "f.csv", "--bogus"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("Usage:") != std::string::npos);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"--precision", "f16", "extract", "--manifest", "m", "--out", "o"}).code == cli::kExitUsage);
  r = run({"--help"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("export-attn") != std::string::npos);
}

TEST_CASE("data errors exit 2 and name the file") {
  const Workspace ws;
  const auto r = run({"extract", "--manifest", ws / "missing.ndjson", "--out", ws / "f.csv"});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("missing.ndjson") != std::string::npos);
}

TEST_CASE("pipeline contract: one feature row per trial, ANOVA schema, resolved configs") {
  const Workspace ws;
  auto r = run({"--seed", "3", "gen-synth", "--out", ws / "data", "--n-memes", "30"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(ws / "data/run_config.json"));
  const auto manifest_lines = read_lines(ws / "data/manifest.ndjson");

  r = run({"--json", "extract", "--manifest", ws / "data/manifest.ndjson", "--out", ws / "feats.csv"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["rows"] == manifest_lines.size());
  const auto csv = read_lines(ws / "feats.csv");
  CHECK(csv.size() == manifest_lines.size() + 1);
  const auto resolved = nlohmann::json::parse(std::ifstream(ws / "feats.csv.run.json"));
  CHECK(resolved["subcommand"] == "extract");

  r = run({"analyze", "--features", ws / "feats.csv", "--by", "task2", "--metric", "rt_s", "--out", ws / "an"});
  REQUIRE(r.code == 0);
  const auto anova = read_lines(ws / "an/anova.csv");
  REQUIRE(anova.size() == 3);
  CHECK(anova[0] == "metric,group,n,mean,sd,F,df_between,df_within,p,significant");
  CHECK(anova[1].rfind("rt_s,direct,", 0) == 0);

  r = run({"analyze", "--features", ws / "feats.csv", "--contrast", "task2:x", "--out", ws / "an2"});
  CHECK(r.code != 0);

  const std::vector<std::string> model = {"--model-dim", "8", "--heads", "2", "--mlp-hidden", "8",
                                          "--phase1-epochs", "1", "--phase2-epochs", "1"};
  std::vector<std::string> train = {"train", "--features", ws / "feats.csv", "--manifest",
                                    ws / "data/manifest.ndjson", "--out", ws / "run"};
  train.insert(train.end(), model.begin(), model.end());
  REQUIRE(run(train).code == 0);
  for (const char* f : {"model.json", "model.bin", "model_config.json", "scaler.json", "split.json", "training_log.ndjson",
                        "harmonize_params.json", "run_config.json"}) {
    CHECK(fs::exists(ws.dir / "run" / f));
  }
  const auto split = nlohmann::json::parse(std::ifstream(ws / "run/split.json"));
  const std::string meme = split["val"][0];
  r = run({"export-attn", "--run", ws / "run", "--features", ws / "feats.csv", "--manifest",
           ws / "data/manifest.ndjson", "--meme", meme, "--out", ws / "attn.json"});
  REQUIRE(r.code == 0);
  const auto attn = nlohmann::json::parse(std::ifstream(ws / "attn.json"));
  CHECK(attn["meme_id"] == meme);
  CHECK(attn["modalities"].contains("eeg"));

  r = run({"export-attn", "--run", ws / "run", "--features", ws / "feats.csv", "--manifest",
           ws / "data/manifest.ndjson", "--meme", "no_such_meme", "--out", ws / "a2.json"});
  CHECK(r.code == cli::kExitData);

  std::ofstream(ws / "bad.json") << "{\"no_such_key\": 1}";
  train.push_back("--config");
  train.push_back(ws / "bad.json");
  CHECK(run(train).code == cli::kExitUsage);
}
