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

#include "memephys/eeg/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "memephys/error.hpp"

namespace memephys::eeg {

using cplx = std::complex<double>;

BandpassFilter BandpassFilter::design(const FilterSpec& spec, double fs) {
  if (spec.order < 1) throw Error(ErrorCode::ConfigError, "filter order must be positive");
  if (!(spec.lo_hz > 0.0 && spec.lo_hz < spec.hi_hz && spec.hi_hz < fs / 2.0)) {
    throw Error(ErrorCode::ConfigError, "band-pass edges must satisfy 0 < lo < hi < fs/2");
  }
  const int n = spec.order;
  const double fs2 = 2.0 * fs;
  const double w_lo = fs2 * std::tan(std::numbers::pi * spec.lo_hz / fs);
  const double w_hi = fs2 * std::tan(std::numbers::pi * spec.hi_hz / fs);
  const double bw = w_hi - w_lo;
  const double w0 = std::sqrt(w_lo * w_hi);

  // Prototype poles on the unit circle's left half.
  std::vector<cplx> analog;
  for (int k = 0; k < n; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n);
    const cplx p_lp = std::polar(1.0, theta) * (bw / 2.0);
    const cplx disc = std::sqrt(p_lp * p_lp - w0 * w0);
    analog.push_back(p_lp + disc);
    analog.push_back(p_lp - disc);
  }
  // n zeros at s = 0, gain bw^n; bilinear maps them to z = +1 and the n
  // zeros at infinity to z = -1.
  cplx gain_num = std::pow(fs2, n);  // prod(fs2 - 0)
  cplx gain_den = 1.0;
  BandpassFilter f;
  f.fs_ = fs;
  f.order_ = n;
  for (const cplx& p : analog) {
    gain_den *= (fs2 - p);
    f.poles_.push_back((fs2 + p) / (fs2 - p));
  }
  const double k = std::pow(bw, n) * (gain_num / gain_den).real();
  for (const cplx& p : f.poles_) {
    if (std::abs(p) >= 1.0) throw Error(ErrorCode::UnstableDesign, "digital pole outside unit circle");
  }

  // Pair conjugates: keep poles with positive imaginary part, sorted so the
  // section closest to the unit circle comes last.
  std::vector<cplx> upper;
  std::vector<double> real_poles;
  for (const cplx& p : f.poles_) {
    if (std::fabs(p.imag()) <= 1e-14 * std::abs(p)) real_poles.push_back(p.real());
    else if (p.imag() > 0) upper.push_back(p);
  }
  std::sort(upper.begin(), upper.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  std::sort(real_poles.begin(), real_poles.end());
  std::vector<std::array<double, 2>> denominators;
  for (const cplx& p : upper) denominators.push_back({-2.0 * p.real(), std::norm(p)});
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    denominators.push_back({-(real_poles[i] + real_poles[i + 1]), real_poles[i] * real_poles[i + 1]});
  }
  if (real_poles.size() % 2 == 1) denominators.push_back({-real_poles.back(), 0.0});

  // Each section gets one zero at +1 and one at -1: (1 - z^-2).
  for (std::size_t s = 0; s < denominators.size(); ++s) {
    Biquad q;
    q.b = {1.0, 0.0, -1.0};
    q.a = {1.0, denominators[s][0], denominators[s][1]};
    f.sections_.push_back(q);
  }
  for (double& c : f.sections_.front().b) c *= k;

  // Steady-state response to a unit step, chained through the cascade.
  double scale = 1.0;
  for (const auto& q : f.sections_) {
    const double b0 = q.b[0], b1 = q.b[1], b2 = q.b[2];
    const double a1 = q.a[1], a2 = q.a[2];
    const double B0 = b1 - a1 * b0;
    const double B1 = b2 - a2 * b0;
    const double z0 = (B0 + B1) / (1.0 + a1 + a2);
    const double z1 = B1 - a2 * z0;
    f.zi_.push_back({scale * z0, scale * z1});
    scale *= (b0 + b1 + b2) / (1.0 + a1 + a2);
  }
  return f;
}

double BandpassFilter::magnitude(double hz) const {
  const cplx z = std::polar(1.0, -2.0 * std::numbers::pi * hz / fs_);  // z^-1
  cplx h = 1.0;
  for (const auto& q : sections_) {
    const cplx num = q.b[0] + q.b[1] * z + q.b[2] * z * z;
    const cplx den = q.a[0] + q.a[1] * z + q.a[2] * z * z;
    h *= num / den;
  }
  return std::abs(h);
}

std::vector<double> BandpassFilter::filter(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& q : sections_) {
    double z0 = 0.0, z1 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = q.b[0] * in + z0;
      z0 = q.b[1] * in - q.a[1] * out + z1;
      z1 = q.b[2] * in - q.a[2] * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> BandpassFilter::filter_with_zi(std::span<const double> x, double x0) const {
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t s = 0; s < sections_.size(); ++s) {
    const auto& q = sections_[s];
    double z0 = zi_[s][0] * x0, z1 = zi_[s][1] * x0;
    for (double& v : y) {
      const double in = v;
      const double out = q.b[0] * in + z0;
      z0 = q.b[1] * in - q.a[1] * out + z1;
      z1 = q.b[2] * in - q.a[2] * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> BandpassFilter::filtfilt(std::span<const double> x) const {
  if (x.size() < static_cast<std::size_t>(3 * order_)) {
    throw Error(ErrorCode::TooShort, "series of " + std::to_string(x.size()) +
                                         " samples is shorter than 3 x filter order");
  }
  const std::size_t n = x.size();
  const std::size_t pad = std::min(pad_length(), n - 1);

  // Odd reflection about each endpoint.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<double> fwd = filter_with_zi(ext, ext.front());
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> back = filter_with_zi(fwd, fwd.front());
  std::reverse(back.begin(), back.end());
  return {back.begin() + static_cast<std::ptrdiff_t>(pad),
          back.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<double> butterworth_bandpass(std::span<const double> signal, double fs,
                                         const FilterSpec& spec) {
  if (signal.size() < static_cast<std::size_t>(3 * spec.order)) {
    throw Error(ErrorCode::TooShort, "series shorter than 3 x filter order");
  }
  return BandpassFilter::design(spec, fs).filtfilt(signal);
}

}  // namespace memephys::eeg
