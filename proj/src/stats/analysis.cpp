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


#include "memephys/stats/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "memephys/eeg/features.hpp"
#include "memephys/error.hpp"

namespace memephys::stats {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return out;
}

std::string num(double v) { return features::format_number(v); }

std::array<int, 3> lerp_color(std::array<int, 3> from, std::array<int, 3> to, double t) {
  std::array<int, 3> c{};
  for (int i = 0; i < 3; ++i) c[i] = static_cast<int>(std::lround(from[i] + (to[i] - from[i]) * t));
  return c;
}

constexpr std::array<int, 3> kNeutral{247, 247, 247};
constexpr std::array<int, 3> kRed{178, 24, 43};
constexpr std::array<int, 3> kSequentialEnd{84, 39, 143};

std::string hex(std::array<int, 3> c) { return fmt::format("#{:02x}{:02x}{:02x}", c[0], c[1], c[2]); }

}  // namespace

RowGroups group_rows(const features::FeatureTable& table, const std::string& by) {
  RowGroups g;
  auto add = [&](std::size_t group, std::size_t row) { g.rows[group].push_back(row); };
  if (by == "task1") {
    g.names = {"non_sexist", "sexist"};
    g.rows.resize(2);
    for (std::size_t r = 0; r < table.size(); ++r) {
      const auto t1 = table.rows[r].labels.task1;
      if (t1 != Task1::Tie) add(t1 == Task1::Sexist ? 1 : 0, r);
    }
  } else if (by == "task2") {
    g.names = {"direct", "judgmental"};
    g.rows.resize(2);
    for (std::size_t r = 0; r < table.size(); ++r) {
      const auto& t2 = table.rows[r].labels.task2;
      if (t2) add(*t2 == Task2::Judgmental ? 1 : 0, r);
    }
  } else if (by == "level") {
    g.names = {"non_sexist", "direct", "judgmental"};
    g.rows.resize(3);
    for (std::size_t r = 0; r < table.size(); ++r) {
      const auto level = sexism_level(table.rows[r].labels);
      if (level) add(static_cast<std::size_t>(*level), r);
    }
  } else if (by.rfind("task3:", 0) == 0) {
    const auto cat = parse_category(by.substr(6));
    if (!cat) throw Error(ErrorCode::ConfigError, "unknown category in '" + by + "'");
    g.names = {"without_" + std::string(category_name(*cat)), std::string(category_name(*cat))};
    g.rows.resize(2);
    for (std::size_t r = 0; r < table.size(); ++r) {
      const auto& lab = table.rows[r].labels;
      if (lab.task1 == Task1::Sexist) add(lab.has(*cat) ? 1 : 0, r);
    }
  } else if (by == "emotion") {
    std::map<std::string, std::vector<std::size_t>> m;
    for (std::size_t r = 0; r < table.size(); ++r) {
      if (table.rows[r].emotion) m[*table.rows[r].emotion].push_back(r);
    }
    for (auto& [k, v] : m) {
      g.names.push_back(k);
      g.rows.push_back(std::move(v));
    }
  } else {
    throw Error(ErrorCode::ConfigError, "unknown grouping '" + by + "'");
  }
  return g;
}

AnovaResult anova_for(const features::FeatureTable& table, const RowGroups& groups, const std::string& metric) {
  const std::size_t c = table.require_column(metric);
  std::vector<std::vector<double>> values;
  for (const auto& rows : groups.rows) {
    std::vector<double> v;
    for (std::size_t r : rows) v.push_back(table.values[r][c]);
    values.push_back(std::move(v));
  }
  auto res = one_way_anova(values, groups.names);
  res.metric = metric;
  return res;
}

std::vector<ChannelContrast> channel_band_contrast(const std::vector<std::vector<double>>& a,
                                                   const std::vector<std::vector<double>>& b, bool fdr) {
  const auto& layout = ChannelLayout::standard16();
  std::vector<ChannelContrast> out;
  std::vector<double> ps;
  std::vector<double> xa(a.size()), xb(b.size());
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    for (std::size_t k = 0; k < kNumBands; ++k) {
      const std::size_t col = c * kNumBands + k;
      for (std::size_t r = 0; r < a.size(); ++r) xa[r] = a[r].at(col);
      for (std::size_t r = 0; r < b.size(); ++r) xb[r] = b[r].at(col);
      const auto t = welch_t_test(xa, xb);
      ChannelContrast cc;
      cc.channel = layout.names()[c];
      cc.band = static_cast<Band>(k);
      cc.mean_a = t.mean_a;
      cc.mean_b = t.mean_b;
      cc.diff = t.diff;
      cc.t = t.t;
      cc.df = t.df;
      cc.p = t.p;
      out.push_back(cc);
      ps.push_back(t.p);
    }
  }
  const auto q = fdr ? benjamini_hochberg(ps) : ps;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].p_adjusted = q[i];
    out[i].significant = q[i] < kAlpha;
  }
  return out;
}

std::vector<ChannelContrast> channel_band_contrast(const features::FeatureTable& table,
                                                   const std::vector<std::size_t>& rows_a,
                                                   const std::vector<std::size_t>& rows_b, bool fdr) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    for (std::size_t k = 0; k < kNumBands; ++k) {
      cols.push_back(table.require_column(eeg::eeg_power_feature_name(c, static_cast<Band>(k))));
    }
  }
  auto gather = [&](const std::vector<std::size_t>& rows) {
    std::vector<std::vector<double>> m;
    for (std::size_t r : rows) {
      std::vector<double> v;
      for (std::size_t c : cols) v.push_back(table.values[r][c]);
      m.push_back(std::move(v));
    }
    return m;
  };
  return channel_band_contrast(gather(rows_a), gather(rows_b), fdr);
}

void write_anova_csv(const std::filesystem::path& path, const std::vector<AnovaResult>& results) {
  auto out = open_out(path);
  out << "metric,group,n,mean,sd,F,df_between,df_within,p,significant\n";
  for (const auto& r : results) {
    for (const auto& g : r.groups) {
      out << r.metric << ',' << g.name << ',' << g.n << ',' << num(g.mean) << ',' << num(g.sd) << ',' << num(r.F)
          << ',' << num(r.df_between) << ',' << num(r.df_within) << ',' << num(r.p) << ','
          << (r.p < kAlpha ? "true" : "false") << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

void write_contrast_csv(const std::filesystem::path& path, const std::vector<ChannelContrast>& contrasts) {
  auto out = open_out(path);
  out << "channel,band,mean_a,mean_b,diff,t,df,p,p_adjusted,significant\n";
  for (const auto& c : contrasts) {
    out << c.channel << ',' << band_name(c.band) << ',' << num(c.mean_a) << ',' << num(c.mean_b) << ','
        << num(c.diff) << ',' << num(c.t) << ',' << num(c.df) << ',' << num(c.p) << ',' << num(c.p_adjusted) << ','
        << (c.significant ? "true" : "false") << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

namespace {

std::string xml_escape(const std::string& in) {
  std::string out;
  for (char ch : in) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::array<int, 3> diverging_color(double scaled) {
  const double t = std::clamp(std::fabs(scaled), 0.0, 1.0);
  auto c = lerp_color(kNeutral, kRed, t);
  if (scaled < 0.0) std::swap(c[0], c[2]);
  return c;
}

std::string emit_topomap(const std::vector<ChannelContrast>& contrasts, const ChannelLayout& layout,
                         const TopomapLabels& labels) {
  if (contrasts.size() != layout.size() * kNumBands) {
    throw Error(ErrorCode::ShapeMismatch, "topomap needs one contrast per channel and band");
  }
  constexpr double kPanel = 170.0, kHead = 62.0, kDisk = 9.0, kLeft = 110.0, kTop = 40.0;
  const auto at = [&](std::size_t ch, std::size_t band) -> const ChannelContrast& {
    return contrasts[ch * kNumBands + band];
  };
  std::string s;
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n",
      kLeft + kPanel * kNumBands, kTop + kPanel * 3);
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t b = 0; b < kNumBands; ++b) {
    s += fmt::format("<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\">{}</text>\n", kLeft + kPanel * (b + 0.5),
                     band_name(static_cast<Band>(b)));
  }
  const std::string row_names[3] = {labels.condition_a, labels.condition_b,
                                    labels.condition_b + " - " + labels.condition_a};
  for (std::size_t row = 0; row < 3; ++row) {
    s += fmt::format("<text x=\"8\" y=\"{:.1f}\">{}</text>\n", kTop + kPanel * (row + 0.5), xml_escape(row_names[row]));
    for (std::size_t b = 0; b < kNumBands; ++b) {
      const double cx = kLeft + kPanel * (b + 0.5), cy = kTop + kPanel * (row + 0.5);
      s += fmt::format("<g class=\"panel\" data-row=\"{}\" data-band=\"{}\">\n", row, band_name(static_cast<Band>(b)));
      s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"none\" stroke=\"#333333\"/>\n", cx, cy,
                       kHead);
      s += fmt::format("<path d=\"M{:.2f},{:.2f} L{:.2f},{:.2f} L{:.2f},{:.2f}\" fill=\"none\" stroke=\"#333333\"/>\n",
                       cx - 8, cy - kHead + 1, cx, cy - kHead - 10, cx + 8, cy - kHead + 1);
      double scale = 0.0;
      for (std::size_t c = 0; c < layout.size(); ++c) {
        const auto& cc = at(c, b);
        scale = std::max(scale, row == 2 ? std::fabs(cc.diff) : std::max(std::fabs(cc.mean_a), std::fabs(cc.mean_b)));
      }
      for (std::size_t c = 0; c < layout.size(); ++c) {
        const auto& cc = at(c, b);
        const auto& pos = layout.positions()[c];
        const double x = cx + pos.x * kHead, y = cy - pos.y * kHead;
        std::array<int, 3> color;
        if (row == 2) {
          color = diverging_color(scale > 0.0 ? cc.diff / scale : 0.0);
        } else {
          const double v = row == 0 ? cc.mean_a : cc.mean_b;
          color = lerp_color(kNeutral, kSequentialEnd, scale > 0.0 ? std::clamp(std::fabs(v) / scale, 0.0, 1.0) : 0.0);
        }
        s += fmt::format(
            "<circle class=\"{}\" data-channel=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\" "
            "stroke=\"#999999\"/>\n",
            row == 2 ? "diff" : "power", layout.names()[c], x, y, kDisk, hex(color));
        if (row == 2 && cc.significant) {
          s += fmt::format(
              "<text class=\"star\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" fill=\"#d7191c\" "
              "font-size=\"16\">*</text>\n",
              x, y - kDisk - 1);
        }
      }
      s += "</g>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace memephys::stats
