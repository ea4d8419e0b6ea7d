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

#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace memephys::eeg {

struct FilterSpec {
  int order = 4;  // prototype order; the band-pass has 2 * order poles
  double lo_hz = 0.5;
  double hi_hz = 40.0;
};

/// One biquad in direct-form II transposed: b0 b1 b2 / 1 a1 a2.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

class BandpassFilter {
 public:
  /// Butterworth analog prototype, low-pass to band-pass transform, then
  /// bilinear transform with frequency prewarping. Throws UnstableDesign if
  /// any digital pole lands on or outside the unit circle.
  static BandpassFilter design(const FilterSpec& spec, double fs);

  const std::vector<Biquad>& sections() const { return sections_; }
  const std::vector<std::complex<double>>& poles() const { return poles_; }
  double sample_rate() const { return fs_; }

  /// |H(f)| of a single forward pass.
  double magnitude(double hz) const;

  /// Edge padding length: 3 * (number of taps of the equivalent
  /// transfer function), i.e. 3 * (2 * sections + 1).
  std::size_t pad_length() const { return 3 * (2 * sections_.size() + 1); }

  /// Single causal pass with zero initial state.
  std::vector<double> filter(std::span<const double> x) const;

  /// Forward-backward (zero-phase) application; effective response |H|^2.
  std::vector<double> filtfilt(std::span<const double> x) const;

 private:
  std::vector<double> filter_with_zi(std::span<const double> x, double x0) const;

  std::vector<Biquad> sections_;
  std::vector<std::array<double, 2>> zi_;  // unit-step steady state per section
  std::vector<std::complex<double>> poles_;
  double fs_ = 0.0;
  int order_ = 0;
};

/// Convenience wrapper: design + filtfilt. Throws TooShort when the series
/// has fewer than 3 * order samples.
std::vector<double> butterworth_bandpass(std::span<const double> signal, double fs,
                                         const FilterSpec& spec = {});

}  // namespace memephys::eeg
