// Copyright (c) 2026 The memephys Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "memephys/harmonize/harmonizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "memephys/error.hpp"

namespace memephys::harmonize {

namespace {

using nlohmann::json;
using Matrix = std::vector<std::vector<double>>;  // [row][feature]

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> column_of(const Matrix& m, std::size_t c) {
  std::vector<double> out(m.size());
  for (std::size_t r = 0; r < m.size(); ++r) out[r] = m[r][c];
  return out;
}

void set_column(Matrix& m, std::size_t c, const std::vector<double>& v) {
  for (std::size_t r = 0; r < m.size(); ++r) m[r][c] = v[r];
}

bool selected(const std::string& name, const HarmonizeOptions& opts) {
  return opts.include_behavioral || name.rfind("eeg_", 0) == 0;
}

json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double from_nullable(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

bool HarmonizeParams::is_dropped(const std::string& name) const {
  return std::find(dropped.begin(), dropped.end(), name) != dropped.end();
}

Matrix select_columns(const features::FeatureTable& table, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(table.require_column(n));
  Matrix out(table.size(), std::vector<double>(idx.size()));
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < idx.size(); ++c) out[r][c] = table.values[r][idx[c]];
  }
  return out;
}

std::vector<std::string> batch_labels(const features::FeatureTable& table) {
  std::vector<std::string> out;
  out.reserve(table.size());
  for (const auto& m : table.rows) out.push_back(m.subject_id);
  return out;
}

HarmonizeParams fit_harmonizer(const features::FeatureTable& train, const HarmonizeOptions& opts) {
  HarmonizeParams p;
  p.options = opts;
  for (const auto& c : train.columns) {
    if (selected(c, opts)) p.features.push_back(c);
  }
  const std::size_t nf = p.features.size();
  Matrix x = select_columns(train, p.features);
  const auto batch = batch_labels(train);
  std::vector<bool> drop(nf, false);

  p.boxcox.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    auto col = column_of(x, f);
    try {
      p.boxcox[f] = boxcox_fit(col);
      set_column(x, f, boxcox_apply(col, p.boxcox[f]));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateInput) throw;
      drop[f] = true;
      set_column(x, f, std::vector<double>(x.size(), kNaN));
    }
  }

  ComBatOptions co;
  co.skip_small_batches = true;
  p.combat = combat_fit(x, batch, co);
  x = combat_apply(p.combat, x, batch);

  p.winsor.resize(nf);
  p.robust.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    if (drop[f]) continue;
    auto col = column_of(x, f);
    p.winsor[f] = winsor_fit(col, opts.winsor_lo, opts.winsor_hi);
    col = winsor_apply(col, p.winsor[f]);
    try {
      p.robust[f] = robust_fit(col);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroMAD) throw;
      drop[f] = true;
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    if (drop[f]) p.dropped.push_back(p.features[f]);
  }
  return p;
}

features::FeatureTable apply_harmonizer(const HarmonizeParams& p, const features::FeatureTable& table) {
  const std::size_t nf = p.features.size();
  Matrix x = select_columns(table, p.features);
  for (std::size_t f = 0; f < nf; ++f) set_column(x, f, boxcox_apply(column_of(x, f), p.boxcox[f]));
  x = combat_apply(p.combat, x, batch_labels(table));
  for (std::size_t f = 0; f < nf; ++f) {
    auto col = winsor_apply(column_of(x, f), p.winsor[f]);
    set_column(x, f, robust_apply(col, p.robust[f]));
  }

  features::FeatureTable out;
  out.rows = table.rows;
  std::vector<std::ptrdiff_t> source;  // >= 0: harmonized index, < 0: -(table column + 1)
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto& name = table.columns[c];
    if (p.is_dropped(name)) continue;
    out.columns.push_back(name);
    const auto it = std::find(p.features.begin(), p.features.end(), name);
    source.push_back(it != p.features.end() ? it - p.features.begin() : -static_cast<std::ptrdiff_t>(c) - 1);
  }
  out.values.resize(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    out.values[r].reserve(source.size());
    for (const auto s : source) {
      out.values[r].push_back(s >= 0 ? x[r][static_cast<std::size_t>(s)]
                                     : table.values[r][static_cast<std::size_t>(-s - 1)]);
    }
  }
  return out;
}

json harmonize_params_to_json(const HarmonizeParams& p) {
  json j;
  j["version"] = 1;
  j["batch_key"] = "subject_id";
  j["include_behavioral"] = p.options.include_behavioral;
  j["winsor_percentiles"] = {p.options.winsor_lo, p.options.winsor_hi};
  j["features"] = p.features;
  j["dropped"] = p.dropped;
  j["batches"] = p.combat.batches;
  j["combat_iterations"] = p.combat.iterations;
  json per = json::object();
  for (std::size_t f = 0; f < p.features.size(); ++f) {
    json e;
    e["boxcox"] = {{"lambda", p.boxcox[f].lambda}, {"shift", p.boxcox[f].shift}, {"floor", p.boxcox[f].floor}};
    json gs = json::array(), ds = json::array();
    for (std::size_t b = 0; b < p.combat.batches.size(); ++b) {
      gs.push_back(p.combat.fitted[b][f] ? json(p.combat.gamma_star[b][f]) : json(nullptr));
      ds.push_back(p.combat.fitted[b][f] ? json(p.combat.delta_sq_star[b][f]) : json(nullptr));
    }
    e["combat"] = {{"grand_mean", p.combat.grand_mean[f]},
                   {"pooled_sd", p.combat.pooled_sd[f]},
                   {"gamma_star", gs},
                   {"delta_sq_star", ds}};
    e["winsor"] = {nullable(p.winsor[f].lo), nullable(p.winsor[f].hi)};
    e["robust"] = {{"center", p.robust[f].center}, {"scale", p.robust[f].scale}};
    per[p.features[f]] = e;
  }
  j["per_feature"] = per;
  return j;
}

HarmonizeParams harmonize_params_from_json(const json& j) {
  HarmonizeParams p;
  try {
    if (j.at("version").get<int>() != 1) throw Error(ErrorCode::ParseError, "unsupported params version");
    p.options.include_behavioral = j.at("include_behavioral").get<bool>();
    p.options.winsor_lo = j.at("winsor_percentiles").at(0).get<double>();
    p.options.winsor_hi = j.at("winsor_percentiles").at(1).get<double>();
    p.features = j.at("features").get<std::vector<std::string>>();
    p.dropped = j.at("dropped").get<std::vector<std::string>>();
    p.combat.batches = j.at("batches").get<std::vector<std::string>>();
    p.combat.iterations = j.at("combat_iterations").get<std::size_t>();
    if (!std::is_sorted(p.combat.batches.begin(), p.combat.batches.end())) {
      throw Error(ErrorCode::ParseError, "batches must be sorted");
    }
    const std::size_t nf = p.features.size(), nb = p.combat.batches.size();
    p.combat.gamma_star.assign(nb, std::vector<double>(nf, 0.0));
    p.combat.delta_sq_star.assign(nb, std::vector<double>(nf, 1.0));
    p.combat.fitted.assign(nb, std::vector<bool>(nf, false));
    const auto& per = j.at("per_feature");
    for (std::size_t f = 0; f < nf; ++f) {
      const auto& e = per.at(p.features[f]);
      const auto& bc = e.at("boxcox");
      p.boxcox.push_back({bc.at("lambda").get<double>(), bc.at("shift").get<double>(), bc.at("floor").get<double>()});
      const auto& cb = e.at("combat");
      p.combat.grand_mean.push_back(cb.at("grand_mean").get<double>());
      p.combat.pooled_sd.push_back(cb.at("pooled_sd").get<double>());
      const auto& gs = cb.at("gamma_star");
      const auto& ds = cb.at("delta_sq_star");
      if (gs.size() != nb || ds.size() != nb) throw Error(ErrorCode::ParseError, "combat arrays must match batches");
      for (std::size_t b = 0; b < nb; ++b) {
        if (gs[b].is_null()) continue;
        p.combat.fitted[b][f] = true;
        p.combat.gamma_star[b][f] = gs[b].get<double>();
        p.combat.delta_sq_star[b][f] = ds[b].get<double>();
        if (!(p.combat.delta_sq_star[b][f] > 0.0)) throw Error(ErrorCode::ParseError, "delta* must be positive");
      }
      p.winsor.push_back({from_nullable(e.at("winsor").at(0)), from_nullable(e.at("winsor").at(1))});
      p.robust.push_back({e.at("robust").at("center").get<double>(), e.at("robust").at("scale").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("harmonize params: ") + e.what());
  }
  return p;
}

void save_harmonize_params(const std::filesystem::path& path, const HarmonizeParams& p) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  out << harmonize_params_to_json(p).dump(1) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

HarmonizeParams load_harmonize_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return harmonize_params_from_json(j);
}

}  // namespace memephys::harmonize
