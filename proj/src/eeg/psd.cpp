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

#include "memephys/eeg/psd.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "memephys/error.hpp"

namespace memephys::eeg {

namespace {

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

std::vector<double> welch_one(std::span<const double> x, double fs, const std::vector<double>& window,
                              Eigen::FFT<double>& fft, std::size_t& n_segments) {
  const std::size_t n = window.size();
  const std::size_t hop = n / 2;
  const std::size_t bins = n / 2 + 1;
  double wpow = 0.0;
  for (double w : window) wpow += w * w;

  std::vector<double> acc(bins, 0.0);
  std::vector<double> seg(n);
  std::vector<std::complex<double>> spec;
  n_segments = 0;
  for (std::size_t start = 0; start + n <= x.size(); start += hop) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x[start + i];
    m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) seg[i] = (x[start + i] - m) * window[i];
    fft.fwd(spec, seg);
    for (std::size_t k = 0; k < bins; ++k) acc[k] += std::norm(spec[k]);
    ++n_segments;
  }
  const double scale = 1.0 / (fs * wpow * static_cast<double>(n_segments));
  for (std::size_t k = 0; k < bins; ++k) {
    acc[k] *= scale;
    if (k != 0 && !(n % 2 == 0 && k == bins - 1)) acc[k] *= 2.0;
  }
  return acc;
}

}  // namespace

PsdEstimate welch_psd(const std::vector<std::vector<double>>& channels, double fs) {
  PsdEstimate psd;
  psd.fs = fs;
  const std::size_t n = psd.window_len;
  for (const auto& ch : channels) {
    if (ch.size() < n) {
      throw Error(ErrorCode::TooShort, "Welch needs at least " + std::to_string(n) + " samples, got " +
                                           std::to_string(ch.size()));
    }
  }
  const auto window = periodic_hann(n);
  Eigen::FFT<double> fft;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    psd.freqs_hz.push_back(static_cast<double>(k) * fs / static_cast<double>(n));
  }
  for (const auto& ch : channels) psd.density.push_back(welch_one(ch, fs, window, fft, psd.n_segments));
  return psd;
}

PsdEstimate welch_psd(std::span<const double> signal, double fs) {
  std::vector<std::vector<double>> one(1);
  one[0].assign(signal.begin(), signal.end());
  return welch_psd(one, fs);
}

std::vector<double> integrate_density(const PsdEstimate& psd, double lo_hz, double hi_hz) {
  const double nyquist = psd.freqs_hz.back();
  if (!(lo_hz >= 0.0 && hi_hz <= nyquist && lo_hz <= hi_hz)) {
    throw Error(ErrorCode::BandOutOfRange, "band outside [0, fs/2]");
  }
  const auto& f = psd.freqs_hz;
  const double df = f[1] - f[0];
  std::vector<double> out;
  out.reserve(psd.density.size());
  for (const auto& d : psd.density) {
    auto value_at = [&](double hz) {
      const auto k = std::min(static_cast<std::size_t>(hz / df), f.size() - 2);
      const double t = (hz - f[k]) / df;
      return d[k] + t * (d[k + 1] - d[k]);
    };
    double total = 0.0;
    double x0 = lo_hz;
    double y0 = value_at(lo_hz);
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (f[k] <= lo_hz) continue;
      if (f[k] >= hi_hz) break;
      total += 0.5 * (y0 + d[k]) * (f[k] - x0);
      x0 = f[k];
      y0 = d[k];
    }
    total += 0.5 * (y0 + value_at(hi_hz)) * (hi_hz - x0);
    out.push_back(total);
  }
  return out;
}

std::vector<double> band_power(const PsdEstimate& psd, const FrequencyBand& band) {
  return integrate_density(psd, band.lo_hz, band.hi_hz);
}

}  // namespace memephys::eeg
