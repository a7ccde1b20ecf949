// Copyright 2026 The embshape Authors
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

#ifndef EMBSHAPE_COMMON_H_
#define EMBSHAPE_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace embshape {

// Sentence-level matrices (one row per sentence) are kept in double so that
// post-processing and metrics do not accumulate single-precision error.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Token-level storage matches the on-disk 32-bit layout.
using FloatRows =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using TokenId = std::uint32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed bytes or text in an input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Underlying stream failure.
class IoError : public Error {
 public:
  IoError(const std::string& what, std::uint64_t offset)
      : Error(what + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// Inconsistent experiment or pipeline configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Violated precondition on an argument.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Non-fatal conditions that belong in a report's provenance.
struct Warnings {
  std::vector<std::string> messages;

  void add(std::string message) { messages.push_back(std::move(message)); }
  bool empty() const { return messages.empty(); }
};

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->add(std::move(message));
}

// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
// visited exactly once, so results written to per-index slots do not depend
// on the worker count.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body);

// Worker cap from EMBSHAPE_THREADS, else hardware concurrency.
int default_worker_count();

}  // namespace embshape

#endif  // EMBSHAPE_COMMON_H_
