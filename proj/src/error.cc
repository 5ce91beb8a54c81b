// Copyright 2026 The Microdoom Authors.
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

#include "microdoom/error.h"

namespace microdoom {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kInputTooSmall: return "InputTooSmall";
    case ErrorKind::kInvalidFrame: return "InvalidFrame";
    case ErrorKind::kUnknownCharacter: return "UnknownCharacter";
    case ErrorKind::kInvalidId: return "InvalidId";
    case ErrorKind::kOddHeadDim: return "OddHeadDim";
    case ErrorKind::kEmptyRow: return "EmptyRow";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kNoForwardRecorded: return "NoForwardRecorded";
    case ErrorKind::kIdOutOfRange: return "IdOutOfRange";
    case ErrorKind::kBinOutOfRange: return "BinOutOfRange";
    case ErrorKind::kSequenceTooLong: return "SequenceTooLong";
    case ErrorKind::kAllMasked: return "AllMasked";
    case ErrorKind::kInvalidDistribution: return "InvalidDistribution";
    case ErrorKind::kEmptyHistory: return "EmptyHistory";
    case ErrorKind::kEmptyButtons: return "EmptyButtons";
    case ErrorKind::kEpisodeFinished: return "EpisodeFinished";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kSchema: return "SchemaError";
    case ErrorKind::kTooFewRecords: return "TooFewRecords";
    case ErrorKind::kEmptyDataset: return "EmptyDataset";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kEmptyResults: return "EmptyResults";
    case ErrorKind::kMissingConfig: return "MissingConfig";
    case ErrorKind::kAuth: return "AuthError";
    case ErrorKind::kHttp: return "HttpError";
    case ErrorKind::kTimeout: return "Timeout";
    case ErrorKind::kPortInUse: return "PortInUse";
    case ErrorKind::kCheckpoint: return "CheckpointError";
  }
  return "Unknown";
}

}  // namespace microdoom
