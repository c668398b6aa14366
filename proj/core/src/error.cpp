// Copyright 2026 The instreg Authors
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

#include "instreg/error.hpp"

namespace instreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::NonPositiveVoxel: return "NonPositiveVoxel";
    case ErrorCode::EmptySuperpoints: return "EmptySuperpoints";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyFeatures: return "EmptyFeatures";
    case ErrorCode::EmptySide: return "EmptySide";
    case ErrorCode::TooFewCorrespondences: return "TooFewCorrespondences";
    case ErrorCode::EmptyCorrespondences: return "EmptyCorrespondences";
    case ErrorCode::ModelLoadFailure: return "ModelLoadFailure";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::NoNegatives: return "NoNegatives";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace instreg
