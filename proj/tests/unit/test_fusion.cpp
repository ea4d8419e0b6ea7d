#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "gradcheck.hpp"
#include "memephys/error.hpp"
#include "memephys/eval/metrics.hpp"
#include "memephys/fusion/train.hpp"

using namespace memephys;
using namespace memephys::fusion;

namespace {

// n memes, Dt-dim noise text, F-dim EEG rows whose feature 0 carries the
// label when `informative`, and 2-dim ET/HR rows of noise.
FusionDataset toy_data(std::size_t n, std::size_t Dt, std::size_t F, bool informative, std::uint64_t seed,
                       Task task = Task::T1) {
  Rng rng(seed);
  FusionDataset d;
  d.task = task;
  d.text_dim = Dt;
  for (std::size_t f = 0; f < F; ++f) d.eeg_features.push_back("eeg_f" + std::to_string(f));
  d.ethr_features = {"et_a", "hr_b"};
  const std::size_t C = num_outputs(task);
  for (std::size_t i = 0; i < n; ++i) {
    MemeExample ex;
    ex.meme_id = "m" + std::to_string(i);
    for (std::size_t c = 0; c < C; ++c) ex.targets.push_back(rng.uniform() < 0.5 ? 1.0 : 0.0);
    ex.n_tokens = 3 + rng.uniform_index(4);
    for (std::size_t k = 0; k < Dt; ++k) ex.cls.push_back(rng.normal());
    for (std::size_t k = 0; k < ex.n_tokens * Dt; ++k) ex.tokens.push_back(rng.normal());
    for (std::size_t t = 0; t < ex.n_tokens; ++t) ex.token_strings.push_back("w" + std::to_string(rng.uniform_index(50)));
    const std::size_t rows = 1 + rng.uniform_index(3);
    for (std::size_t s = 0; s < rows; ++s) {
      std::vector<double> r(F);
      for (auto& v : r) v = rng.normal();
      if (informative) r[0] = 2.0 * (2.0 * ex.targets[0] - 1.0) + 0.5 * rng.normal();
      ex.eeg.push_back(std::move(r));
    }
    ex.ethr.push_back({rng.normal(), rng.normal()});
    d.examples.push_back(std::move(ex));
  }
  return d;
}

FusionConfig small_config() {
  FusionConfig c;
  c.heads = 2;
  c.model_dim = 8;
  c.mlp_hidden = 6;
  c.seed = 5;
  return c;
}

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v;
  for (std::size_t i = a; i < b; ++i) v.push_back(i);
  return v;
}

void randomize(const FusionModel& m, std::uint64_t seed) {
  Rng r(seed);
  for (auto p : m.parameters()) {
    for (auto& v : p.tensor.mutable_values()) v = r.normal(0.0, 0.4);
  }
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("config JSON round trip and validation") {
  FusionConfig c;
  CHECK(c.heads == 4);
  CHECK(c.model_dim == 256);
  CHECK(c.mlp_hidden == 128);
  CHECK(c.phase1_epochs == 5);
  CHECK(c.phase2_epochs == 10);
  CHECK(c.phase1_lr == 5e-5);
  CHECK(c.lr_lower == 2e-6);
  CHECK(c.lr_upper == 1e-5);
  CHECK(c.lr_head == 5e-5);
  c.task = Task::T3;
  c.use_ethr = false;
  c.precision = Precision::F32;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));

  CHECK(code_of([] { config_from_json({{"heds", 4}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json({{"heads", 3}, {"model_dim", 8}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json({{"phase2_lrs", {{"head", 0.0}}}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json({{"task", "T4"}}); }) == ErrorCode::ConfigError);
}

TEST_CASE("parameter count follows the closed form") {
  auto c = small_config();
  const ModelDims dims{4, 3, 2};
  // adapter 4*8+8+8*8+8 = 112; eeg 3*8+8+32+4*72+8 = 360; ethr 2*8+8+32+288+8 = 352;
  // head 3*8*6+6+6*1+1 = 157
  CHECK(FusionModel(c, dims).parameter_count() == 981);
  CHECK(FusionModel::expected_parameter_count(c, dims) == 981);
  c.task = Task::T3;
  c.use_eeg = false;
  c.model_dim = 16;
  c.heads = 4;
  c.mlp_hidden = 10;
  CHECK(FusionModel(c, dims).parameter_count() == FusionModel::expected_parameter_count(c, dims));
  CHECK(num_outputs(Task::T3) == 5);
  c.use_eeg = true;
  CHECK(code_of([&] { FusionModel(c, ModelDims{4, 0, 2}); }) == ErrorCode::ConfigError);
}

TEST_CASE("T3 head has five outputs") {
  auto data = toy_data(4, 4, 3, false, 1, Task::T3);
  auto c = small_config();
  c.task = Task::T3;
  const FusionModel m(c, dims_of(data));
  const auto idx = range(0, 4);
  CHECK(m.forward(make_batch(data, idx)).logits.shape() == ad::Shape{4, 5});
}

TEST_CASE("zero-initialized physio branches reproduce the content-only model") {
  const auto data = toy_data(6, 4, 3, true, 2);
  auto c = small_config();
  c.use_eeg = c.use_ethr = false;
  const FusionModel base(c, dims_of(data));
  c.use_eeg = true;
  const FusionModel eeg(c, dims_of(data));
  c.use_ethr = true;
  const FusionModel both(c, dims_of(data));
  const auto idx = range(0, 6);
  const auto b = make_batch(data, idx);
  CHECK(base.forward(b).logits.values() == eeg.forward(b).logits.values());
  CHECK(base.forward(b).logits.values() == both.forward(b).logits.values());
}

TEST_CASE("subject row order does not matter") {
  auto data = toy_data(3, 4, 3, false, 3);
  auto c = small_config();
  const FusionModel m(c, dims_of(data));
  randomize(m, 11);
  data.examples[0].eeg = {{1, 2, 3}, {-1, 0.5, 2}, {0, 0, 1}};
  const auto idx = range(0, 3);
  const auto before = m.forward(make_batch(data, idx)).logits.values();
  std::reverse(data.examples[0].eeg.begin(), data.examples[0].eeg.end());
  const auto after = m.forward(make_batch(data, idx)).logits.values();
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] == doctest::Approx(before[i]).epsilon(1e-12));
}

TEST_CASE("full model gradient check on a two-meme batch") {
  const auto data = toy_data(2, 4, 3, false, 4, Task::T3);
  auto c = small_config();
  c.task = Task::T3;
  c.dropout = 0.0;
  const FusionModel m(c, dims_of(data));
  randomize(m, 12);
  const auto idx = range(0, 2);
  const auto batch = make_batch(data, idx);
  const std::vector<double> pw = {1.0, 2.0, 0.5, 1.5, 1.0};
  std::vector<ad::Tensor> params;
  for (const auto& p : m.parameters()) params.push_back(p.tensor);
  const auto gc = testing::grad_check(
      [&] { return ad::weighted_bce_with_logits(m.forward(batch).logits, batch.targets, pw); }, params);
  CHECK(gc.checked == m.parameter_count());
  CHECK(gc.max_rel_error < 1e-6);
}

TEST_CASE("a meme without physiological rows is rejected when physio is on") {
  auto data = toy_data(2, 4, 3, false, 5);
  data.examples[1].eeg.clear();
  data.examples[1].ethr.clear();
  const FusionModel m(small_config(), dims_of(data));
  const auto idx = range(0, 2);
  CHECK(code_of([&] { m.forward(make_batch(data, idx)); }) == ErrorCode::AllMasked);
  // One modality missing is fine: that branch pools to zeros.
  data.examples[1].ethr.push_back({0.1, 0.2});
  CHECK(m.forward(make_batch(data, idx)).logits.size() == 2);
}

TEST_CASE("inverse-odds pos weights") {
  auto data = toy_data(6, 2, 1, false, 6);
  for (std::size_t i = 0; i < 6; ++i) data.examples[i].targets = {i < 2 ? 1.0 : 0.0};
  const auto w = inverse_odds_pos_weights(data, range(0, 6));
  CHECK(w == std::vector<double>{2.0});
}

TEST_CASE("duplicating positives with half the pos weight keeps the loss gradient") {
  auto data = toy_data(8, 4, 3, false, 7);
  auto c = small_config();
  c.dropout = 0.0;
  const FusionModel m(c, dims_of(data));
  randomize(m, 13);
  std::vector<std::size_t> idx = range(0, 8), dup = idx;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    if (data.examples[i].targets[0] > 0.5) {
      dup.push_back(i);
      ++n_pos;
    }
  }
  REQUIRE(n_pos > 0);
  auto grads = [&](const std::vector<std::size_t>& rows, double w) {
    for (const auto& p : m.parameters()) p.tensor.node()->grad.clear();
    const auto b = make_batch(data, rows);
    ad::weighted_bce_with_logits(m.forward(b).logits, b.targets, {w}).backward();
    std::vector<double> g;
    for (const auto& p : m.parameters()) {
      const auto& pg = p.tensor.grad();
      if (pg.empty()) g.insert(g.end(), p.tensor.size(), 0.0);
      else g.insert(g.end(), pg.begin(), pg.end());
    }
    return g;
  };
  const auto g1 = grads(idx, 3.0), g2 = grads(dup, 1.5);
  // The loss is a mean, so compare the summed forms.
  const double n1 = 8.0, n2 = 8.0 + static_cast<double>(n_pos);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(std::fabs(g1[i] * n1 - g2[i] * n2) < 1e-9);
}

TEST_CASE("two-phase training: frozen adapter, learning-rate groups, determinism") {
  auto data = toy_data(40, 4, 3, true, 8);
  auto c = small_config();
  c.phase1_epochs = 2;
  c.phase2_epochs = 2;
  FusionModel m(c, dims_of(data));
  const auto adapter0 = std::vector<std::vector<double>>{m.group("lower")[0].values(), m.group("lower")[1].values(),
                                                         m.group("upper")[0].values(), m.group("upper")[1].values()};
  const auto head0 = m.group("fusion")[0].values();
  bool checked_phase1 = false;
  std::vector<std::pair<std::string, double>> p1, p2;
  TrainHooks hooks;
  hooks.on_phase_start = [&](int phase, const ad::AdamW& opt) {
    for (const auto& g : opt.groups()) (phase == 1 ? p1 : p2).push_back({g.name, g.lr});
    if (phase == 1) {
      for (const auto& g : opt.groups()) {
        for (const auto& t : g.params) {
          for (const auto& a : m.group("lower")) CHECK(t.node() != a.node());
          for (const auto& a : m.group("upper")) CHECK(t.node() != a.node());
        }
      }
    }
  };
  bool adapter_moved = false;
  hooks.on_epoch_end = [&](int phase, std::size_t) {
    if (phase == 2) {
      adapter_moved = adapter_moved || m.group("lower")[0].values() != adapter0[0];
      return;
    }
    CHECK(m.group("lower")[0].values() == adapter0[0]);
    CHECK(m.group("lower")[1].values() == adapter0[1]);
    CHECK(m.group("upper")[0].values() == adapter0[2]);
    CHECK(m.group("upper")[1].values() == adapter0[3]);
    CHECK(m.group("fusion")[0].values() != head0);
    checked_phase1 = true;
  };
  const auto res = train(m, data, range(0, 30), range(30, 40), hooks);
  CHECK(checked_phase1);
  CHECK(p1 == std::vector<std::pair<std::string, double>>{{"fusion", 5e-5}});
  CHECK(p2 == std::vector<std::pair<std::string, double>>{{"lower", 2e-6}, {"upper", 1e-5}, {"head", 5e-5}});
  CHECK(adapter_moved);
  CHECK(res.log.size() == 8);
  CHECK(res.best_epoch >= 1);

  FusionModel again(c, dims_of(data));
  const auto res2 = train(again, data, range(0, 30), range(30, 40));
  REQUIRE(res2.log.size() == res.log.size());
  for (std::size_t i = 0; i < res.log.size(); ++i) CHECK(res2.log[i].loss == res.log[i].loss);
  CHECK(again.snapshot() == m.snapshot());
}

TEST_CASE("informative EEG with noise text: physio model separates, content-only does not") {
  auto data = toy_data(1000, 8, 4, true, 9);
  const auto tr = range(0, 400), va = range(400, 500), te = range(500, 1000);
  FusionConfig c;
  c.heads = 4;
  c.model_dim = 32;
  c.mlp_hidden = 32;
  c.seed = 3;

  // Oracle: the informative feature alone (mean over a meme's rows).
  std::vector<double> oracle;
  std::vector<int> y;
  for (std::size_t i : te) {
    double s = 0.0;
    for (const auto& r : data.examples[i].eeg) s += r[0];
    oracle.push_back(s / static_cast<double>(data.examples[i].eeg.size()));
    y.push_back(data.examples[i].targets[0] > 0.5);
  }
  CHECK(eval::auc(oracle, y) >= 0.95);

  FusionModel physio(c, dims_of(data));
  train(physio, data, tr, va);
  const double auc_physio = eval::auc(physio.predict(data, te), y);
  CHECK(auc_physio >= 0.95);

  c.use_eeg = c.use_ethr = false;
  FusionModel content(c, dims_of(data));
  train(content, data, tr, va);
  const double auc_content = eval::auc(content.predict(data, te), y);
  CHECK(auc_content >= 0.4);
  CHECK(auc_content <= 0.6);
}

TEST_CASE("prediction is a deterministic sigmoid of the logits") {
  const auto data = toy_data(5, 4, 3, false, 10);
  const FusionModel m(small_config(), dims_of(data));
  randomize(m, 14);
  const auto idx = range(0, 5);
  const auto z = m.predict_logits(data, idx);
  const auto p = m.predict(data, idx);
  CHECK(m.predict(data, idx) == p);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(p[i] == ad::sigmoid(z[i]));
  CHECK(ad::sigmoid(0.0) == 0.5);
  double prev = 0.0;
  for (double s : {-30.0, -2.0, -0.1, 0.0, 0.1, 2.0, 30.0}) {
    CHECK(ad::sigmoid(s) > prev);
    prev = ad::sigmoid(s);
  }
}

TEST_CASE("a non-finite loss aborts training with DivergedLoss") {
  auto data = toy_data(8, 4, 3, false, 11);
  auto c = small_config();
  c.phase1_lr = 1e300;
  FusionModel m(c, dims_of(data));
  CHECK(code_of([&] { train(m, data, range(0, 8), {}); }) == ErrorCode::DivergedLoss);
}

TEST_CASE("attention export") {
  auto data = toy_data(2, 4, 3, false, 12);
  const FusionModel m(small_config(), dims_of(data));
  randomize(m, 15);
  const auto rec = export_attention(m, data, 0, data.examples[0].token_strings, 2);
  const auto& eeg = rec.at("modalities").at("eeg");
  REQUIRE(eeg.at("heads").size() == 2);
  for (const auto& head : eeg.at("heads")) {
    REQUIRE(head.size() == data.examples[0].eeg.size());
    for (const auto& row : head) {
      double s = 0.0;
      for (double w : row) s += w;
      CHECK(std::fabs(s - 1.0) < 1e-6);
    }
  }
  // Top-1 is the argmax of the head-averaged row.
  for (std::size_t r = 0; r < data.examples[0].eeg.size(); ++r) {
    std::vector<double> avg(data.examples[0].n_tokens, 0.0);
    for (const auto& head : eeg.at("heads")) {
      for (std::size_t t = 0; t < avg.size(); ++t) avg[t] += head[r][t].get<double>() / 2.0;
    }
    const auto best = static_cast<std::size_t>(std::max_element(avg.begin(), avg.end()) - avg.begin());
    CHECK(eeg.at("top_tokens")[r][0].at("index").get<std::size_t>() == best);
  }
  CHECK(rec.at("modalities").contains("ethr"));

  data.examples[1].n_tokens = 1;
  data.examples[1].tokens.resize(4);
  data.examples[1].token_strings = {"solo"};
  const auto one = export_attention(m, data, 1, {"solo"});
  for (const auto& head : one.at("modalities").at("eeg").at("heads")) {
    for (const auto& row : head) CHECK(row[0].get<double>() == 1.0);
  }
  CHECK(code_of([&] { export_attention(m, data, 0, {"a"}); }) == ErrorCode::TokenCountMismatch);
}

TEST_CASE("f32 checkpoints reload to bitwise-identical outputs") {
  auto data = toy_data(20, 4, 3, true, 13);
  auto c = small_config();
  c.precision = Precision::F32;
  c.phase1_epochs = 1;
  c.phase2_epochs = 1;
  FusionModel m(c, dims_of(data));
  train(m, data, range(0, 20), {});
  const auto idx = range(0, 20);
  const auto before = m.predict_logits(data, idx);
  const auto path = std::filesystem::temp_directory_path() / "memephys_fusion_ckpt" / "model";
  ad::save_checkpoint(path, m.parameters());
  c.seed = 99;
  FusionModel other(c, dims_of(data));
  ad::load_checkpoint(path, other.parameters());
  CHECK(other.predict_logits(data, idx) == before);
}
