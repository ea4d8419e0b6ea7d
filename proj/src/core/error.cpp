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

#include "memephys/error.hpp"

namespace memephys {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::UnstableDesign: return "UnstableDesign";
    case ErrorCode::BaselineLengthMismatch: return "BaselineLengthMismatch";
    case ErrorCode::BandOutOfRange: return "BandOutOfRange";
    case ErrorCode::WindowOutOfBounds: return "WindowOutOfBounds";
    case ErrorCode::NonPositiveRT: return "NonPositiveRT";
    case ErrorCode::UnsortedEvents: return "UnsortedEvents";
    case ErrorCode::InsufficientBeats: return "InsufficientBeats";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::SingletonBatch: return "SingletonBatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::ZeroMAD: return "ZeroMAD";
    case ErrorCode::DegenerateGroups: return "DegenerateGroups";
    case ErrorCode::InsufficientN: return "InsufficientN";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::AllMasked: return "AllMasked";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::TokenCountMismatch: return "TokenCountMismatch";
    case ErrorCode::TooFewExamples: return "TooFewExamples";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::TooFew: return "TooFew";
  }
  return "Unknown";
}

}  // namespace memephys
