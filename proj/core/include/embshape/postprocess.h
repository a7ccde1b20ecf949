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

// Fitted sentence-vector transforms: centering, z-score, quantile mapping to
// uniform, whitening, all-but-the-top and unit normalization.

#ifndef EMBSHAPE_POSTPROCESS_H_
#define EMBSHAPE_POSTPROCESS_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embshape/common.h"

namespace embshape {

enum class TransformKind {
  kCenter,
  kZScore,
  kQuantileUniform,
  kWhiten,
  kAbtt,
  kNormalize,
};

// Data the parameters were learned from: the vectors being transformed, or
// an external corpus ("^W" in method names).
enum class FitSource { kTarget, kCorpus };

inline constexpr double kStddevFloor = 1e-12;
inline constexpr double kEigenvalueFloor = 1e-10;

// One pipeline step before fitting.
struct TransformStep {
  TransformKind kind = TransformKind::kNormalize;
  FitSource source = FitSource::kTarget;
  // Principal directions removed by kAbtt; nullopt picks max(1, dim/100).
  std::optional<int> components;

  std::string name() const;
};

// Comma-separated steps: "center", "zscore", "quantile-u", "whiten",
// "abtt" / "abtt:K", "normalize", each optionally suffixed with "^W".
// "" and "none" give an empty chain.
std::vector<TransformStep> parse_post_chain(std::string_view text);
std::string format_post_chain(const std::vector<TransformStep>& chain);

class Transform {
 public:
  // Learns parameters from the rows of `data`. Needs at least 2 rows for
  // statistical kinds and components + 1 rows for kAbtt; kNormalize needs
  // no data. Rank-deficient covariances are floored with a warning.
  static Transform fit(const TransformStep& step, const Matrix& data,
                       Warnings* warnings = nullptr);
  static Transform fit(TransformKind kind, const Matrix& data,
                       Warnings* warnings = nullptr) {
    return fit(TransformStep{kind, FitSource::kTarget, std::nullopt}, data,
               warnings);
  }

  // Throws InvalidArgument if the column count differs from the fit.
  Matrix apply(const Matrix& data, Warnings* warnings = nullptr) const;

  TransformKind kind() const { return kind_; }
  FitSource source() const { return source_; }
  std::size_t dim() const { return dim_; }
  const Vector& mean() const { return mean_; }
  const Vector& stddev() const { return stddev_; }
  const Matrix& quantiles() const { return quantiles_; }  // n_ref x dim
  const Matrix& whitening() const { return whitening_; }  // dim x dim
  const Matrix& components() const { return components_; }  // k x dim
  const std::string& corpus_label() const { return corpus_label_; }
  void set_corpus_label(std::string label) { corpus_label_ = std::move(label); }

  std::string name() const;

  // "TRF1" tagged section, little-endian like the dump formats.
  void write(std::ostream& out) const;
  static Transform read(std::istream& in);

 private:
  Transform() = default;

  TransformKind kind_ = TransformKind::kNormalize;
  FitSource source_ = FitSource::kTarget;
  std::size_t dim_ = 0;
  Vector mean_;
  Vector stddev_;
  Matrix quantiles_;
  Matrix whitening_;
  Matrix components_;
  std::string corpus_label_;
};

// Fits on `corpus` and applies to `target`; the transform records the corpus
// label.
Matrix fit_on_corpus(const TransformStep& step, const Matrix& corpus,
                     const Matrix& target, const std::string& corpus_label,
                     Warnings* warnings = nullptr);

// Runs a chain over `target`. Steps fitted on the corpus need `corpus`, which
// is carried through the earlier steps alongside the target.
Matrix run_post_chain(const std::vector<TransformStep>& chain,
                      const Matrix& target, const Matrix* corpus,
                      Warnings* warnings = nullptr);

}  // namespace embshape

#endif  // EMBSHAPE_POSTPROCESS_H_
