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

#ifndef MICRODOOM_ERROR_H_
#define MICRODOOM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace microdoom {

enum class ErrorKind {
  kInvalidArgument,
  kInputTooSmall,
  kInvalidFrame,
  kUnknownCharacter,
  kInvalidId,
  kOddHeadDim,
  kEmptyRow,
  kShapeMismatch,
  kNoForwardRecorded,
  kIdOutOfRange,
  kBinOutOfRange,
  kSequenceTooLong,
  kAllMasked,
  kInvalidDistribution,
  kEmptyHistory,
  kEmptyButtons,
  kEpisodeFinished,
  kIo,
  kSchema,
  kTooFewRecords,
  kEmptyDataset,
  kNonFinite,
  kEmptyResults,
  kMissingConfig,
  kAuth,
  kHttp,
  kTimeout,
  kPortInUse,
  kCheckpoint,
};

std::string_view ErrorKindName(ErrorKind kind);

// All library failures are reported through this one exception type; callers
// that need to branch inspect kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace microdoom

#endif  // MICRODOOM_ERROR_H_
