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

#include "embshape/postprocess.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fmt/core.h>

#include "byte_io.h"

namespace embshape {

namespace {

const char* kind_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::kCenter:
      return "center";
    case TransformKind::kZScore:
      return "zscore";
    case TransformKind::kQuantileUniform:
      return "quantile-u";
    case TransformKind::kWhiten:
      return "whiten";
    case TransformKind::kAbtt:
      return "abtt";
    case TransformKind::kNormalize:
      return "normalize";
  }
  return "?";
}

std::string step_name(TransformKind kind, FitSource source,
                      std::optional<int> components) {
  std::string name = kind_name(kind);
  if (kind == TransformKind::kAbtt && components) {
    name += ":" + std::to_string(*components);
  }
  if (source == FitSource::kCorpus) name += "^W";
  return name;
}

Vector column_means(const Matrix& x) { return x.colwise().mean().transpose(); }

// Position in [0, n-1] of a reference value, averaged over ties.
double tied_position(const double* first, const double* last, double value) {
  const double* lo = std::lower_bound(first, last, value);
  const double* hi = std::upper_bound(first, last, value);
  return 0.5 * static_cast<double>((lo - first) + (hi - first) - 1);
}

void require_rows(const Matrix& data, Eigen::Index min_rows,
                  TransformKind kind) {
  if (data.rows() < min_rows) {
    throw InvalidArgument(fmt::format("fit {}: needs at least {} rows, got {}",
                                      kind_name(kind), min_rows, data.rows()));
  }
}

}  // namespace

std::string TransformStep::name() const {
  return step_name(kind, source, components);
}

std::vector<TransformStep> parse_post_chain(std::string_view text) {
  std::vector<TransformStep> chain;
  if (text.empty() || text == "none") return chain;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string_view part = text.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    TransformStep step;
    if (part.ends_with("^W")) {
      step.source = FitSource::kCorpus;
      part.remove_suffix(2);
    }
    if (part == "center") {
      step.kind = TransformKind::kCenter;
    } else if (part == "zscore") {
      step.kind = TransformKind::kZScore;
    } else if (part == "quantile-u") {
      step.kind = TransformKind::kQuantileUniform;
    } else if (part == "whiten") {
      step.kind = TransformKind::kWhiten;
    } else if (part == "normalize") {
      step.kind = TransformKind::kNormalize;
    } else if (part == "abtt" || part.starts_with("abtt:")) {
      step.kind = TransformKind::kAbtt;
      if (part.size() > 5) {
        int k = -1;
        std::string_view num = part.substr(5);
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), k);
        if (ec != std::errc() || ptr != num.data() + num.size() || k < 0) {
          throw ConfigError(fmt::format("post chain: bad abtt count '{}'", num));
        }
        step.components = k;
      }
    } else {
      throw ConfigError(fmt::format("post chain: unknown step '{}'", part));
    }
    if (step.kind == TransformKind::kNormalize &&
        step.source == FitSource::kCorpus) {
      throw ConfigError("post chain: normalize has nothing to fit");
    }
    chain.push_back(step);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return chain;
}

std::string format_post_chain(const std::vector<TransformStep>& chain) {
  if (chain.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i > 0) out += ',';
    out += chain[i].name();
  }
  return out;
}

// --- fit ---

Transform Transform::fit(const TransformStep& step, const Matrix& data,
                         Warnings* warnings) {
  Transform t;
  t.kind_ = step.kind;
  t.source_ = step.source;
  t.dim_ = static_cast<std::size_t>(data.cols());
  const double n = static_cast<double>(data.rows());

  switch (step.kind) {
    case TransformKind::kNormalize:
      return t;

    case TransformKind::kCenter:
      require_rows(data, 2, step.kind);
      t.mean_ = column_means(data);
      return t;

    case TransformKind::kZScore: {
      require_rows(data, 2, step.kind);
      t.mean_ = column_means(data);
      Matrix centered = data.rowwise() - t.mean_.transpose();
      t.stddev_ = (centered.colwise().squaredNorm().transpose() / n).cwiseSqrt();
      std::size_t floored = 0;
      for (Eigen::Index j = 0; j < t.stddev_.size(); ++j) {
        if (t.stddev_(j) < kStddevFloor) {
          t.stddev_(j) = kStddevFloor;
          ++floored;
        }
      }
      if (floored > 0) {
        warn(warnings,
             fmt::format("zscore: {} constant dimension(s) floored", floored));
      }
      return t;
    }

    case TransformKind::kQuantileUniform: {
      require_rows(data, 2, step.kind);
      t.quantiles_ = data;
      for (Eigen::Index j = 0; j < data.cols(); ++j) {
        auto col = t.quantiles_.col(j);
        std::sort(col.begin(), col.end());
      }
      return t;
    }

    case TransformKind::kWhiten: {
      require_rows(data, 2, step.kind);
      t.mean_ = column_means(data);
      Matrix centered = data.rowwise() - t.mean_.transpose();
      Matrix cov = (centered.transpose() * centered) / n;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
      if (eig.info() != Eigen::Success) {
        throw Error("whiten: eigendecomposition failed");
      }
      Vector lambda = eig.eigenvalues();
      std::size_t floored = 0;
      for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < kEigenvalueFloor) {
          lambda(i) = kEigenvalueFloor;
          ++floored;
        }
      }
      if (floored > 0) {
        warn(warnings, fmt::format("whiten: covariance is rank deficient, {} "
                                   "eigenvalue(s) floored at {}",
                                   floored, kEigenvalueFloor));
      }
      // Symmetric (ZCA) form: unique for a given covariance, so no sign
      // convention is needed.
      const Matrix& vecs = eig.eigenvectors();
      t.whitening_ = vecs * lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
                     vecs.transpose();
      return t;
    }

    case TransformKind::kAbtt: {
      int k = step.components.value_or(
          std::max<int>(1, static_cast<int>(std::lround(data.cols() / 100.0))));
      if (k > data.cols()) {
        throw InvalidArgument(fmt::format(
            "fit abtt: {} components exceed dimension {}", k, data.cols()));
      }
      require_rows(data, std::max<Eigen::Index>(2, k + 1), step.kind);
      t.mean_ = column_means(data);
      t.components_ = Matrix::Zero(k, data.cols());
      if (k > 0) {
        Matrix centered = data.rowwise() - t.mean_.transpose();
        Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
        const Matrix& v = svd.matrixV();
        for (int c = 0; c < k; ++c) {
          Vector dir = v.col(c);
          Eigen::Index arg = 0;
          dir.cwiseAbs().maxCoeff(&arg);
          if (dir(arg) < 0) dir = -dir;
          t.components_.row(c) = dir.transpose();
        }
      }
      return t;
    }
  }
  throw InvalidArgument("fit: unknown transform kind");
}

// --- apply ---

Matrix Transform::apply(const Matrix& data, Warnings* warnings) const {
  if (kind_ != TransformKind::kNormalize &&
      static_cast<std::size_t>(data.cols()) != dim_) {
    throw InvalidArgument(fmt::format("{}: fitted on dimension {}, got {}",
                                      name(), dim_, data.cols()));
  }
  switch (kind_) {
    case TransformKind::kCenter:
      return data.rowwise() - mean_.transpose();

    case TransformKind::kZScore: {
      Matrix out = data.rowwise() - mean_.transpose();
      return out.array().rowwise() / stddev_.transpose().array();
    }

    case TransformKind::kQuantileUniform: {
      Matrix out(data.rows(), data.cols());
      const Eigen::Index n_ref = quantiles_.rows();
      const double span = static_cast<double>(n_ref - 1);
      for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const double* first = quantiles_.col(j).data();
        const double* last = first + n_ref;
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
          double x = data(i, j);
          double pos;
          if (x <= first[0]) {
            pos = x < first[0] ? 0.0 : tied_position(first, last, x);
          } else if (x >= last[-1]) {
            pos = x > last[-1] ? span : tied_position(first, last, x);
          } else {
            const double* hi = std::upper_bound(first, last, x);
            if (hi[-1] == x) {
              pos = tied_position(first, last, x);
            } else {
              double x0 = hi[-1];
              double x1 = hi[0];
              double p0 = tied_position(first, last, x0);
              double p1 = tied_position(first, last, x1);
              pos = p0 + (p1 - p0) * (x - x0) / (x1 - x0);
            }
          }
          out(i, j) = std::clamp(pos / span, 0.0, 1.0);
        }
      }
      return out;
    }

    case TransformKind::kWhiten: {
      Matrix centered = data.rowwise() - mean_.transpose();
      return centered * whitening_;
    }

    case TransformKind::kAbtt: {
      Matrix centered = data.rowwise() - mean_.transpose();
      if (components_.rows() == 0) return centered;
      return centered - (centered * components_.transpose()) * components_;
    }

    case TransformKind::kNormalize: {
      Matrix out = data;
      std::size_t zero_rows = 0;
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        double norm = out.row(i).norm();
        if (norm > 0.0) {
          out.row(i) /= norm;
        } else {
          ++zero_rows;
        }
      }
      if (zero_rows > 0) {
        warn(warnings,
             fmt::format("normalize: {} zero row(s) left unchanged", zero_rows));
      }
      return out;
    }
  }
  throw InvalidArgument("apply: unknown transform kind");
}

std::string Transform::name() const {
  std::optional<int> k;
  if (kind_ == TransformKind::kAbtt) k = static_cast<int>(components_.rows());
  return step_name(kind_, source_, k);
}

// --- serialization ---

namespace {

constexpr char kTransformMagic[4] = {'T', 'R', 'F', '1'};

void write_matrix(ByteWriter& w, const Matrix& m) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
  }
}

void write_vector(ByteWriter& w, const Vector& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v(i));
}

Vector read_vector(ByteReader& r) {
  Vector v(r.u32("vector length"));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = r.f64("vector data");
  return v;
}

Matrix read_matrix(ByteReader& r) {
  std::uint32_t rows = r.u32("matrix rows");
  std::uint32_t cols = r.u32("matrix cols");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64("matrix data");
  }
  return m;
}

}  // namespace

void Transform::write(std::ostream& out) const {
  ByteWriter w(out);
  w.bytes(kTransformMagic, 4);
  w.u32(static_cast<std::uint32_t>(kind_));
  w.u32(static_cast<std::uint32_t>(source_));
  w.u32(static_cast<std::uint32_t>(dim_));
  w.u32(static_cast<std::uint32_t>(corpus_label_.size()));
  w.bytes(corpus_label_.data(), corpus_label_.size());
  write_vector(w, mean_);
  write_vector(w, stddev_);
  write_matrix(w, quantiles_);
  write_matrix(w, whitening_);
  write_matrix(w, components_);
  w.flush();
}

Transform Transform::read(std::istream& in) {
  ByteReader r(in, "TRF1");
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kTransformMagic, 4) != 0) {
    throw FormatError("TRF1: bad magic");
  }
  Transform t;
  std::uint32_t kind = r.u32("kind");
  if (kind > static_cast<std::uint32_t>(TransformKind::kNormalize)) {
    throw FormatError(fmt::format("TRF1: unknown kind {}", kind));
  }
  t.kind_ = static_cast<TransformKind>(kind);
  std::uint32_t source = r.u32("source");
  if (source > 1) throw FormatError("TRF1: unknown fit source");
  t.source_ = static_cast<FitSource>(source);
  t.dim_ = r.u32("dim");
  t.corpus_label_.resize(r.u32("label length"));
  r.bytes(t.corpus_label_.data(), t.corpus_label_.size(), "label");
  t.mean_ = read_vector(r);
  t.stddev_ = read_vector(r);
  t.quantiles_ = read_matrix(r);
  t.whitening_ = read_matrix(r);
  t.components_ = read_matrix(r);
  return t;
}

// --- pipelines ---

Matrix fit_on_corpus(const TransformStep& step, const Matrix& corpus,
                     const Matrix& target, const std::string& corpus_label,
                     Warnings* warnings) {
  TransformStep s = step;
  s.source = FitSource::kCorpus;
  Transform t = Transform::fit(s, corpus, warnings);
  t.set_corpus_label(corpus_label);
  return t.apply(target, warnings);
}

Matrix run_post_chain(const std::vector<TransformStep>& chain,
                      const Matrix& target, const Matrix* corpus,
                      Warnings* warnings) {
  Matrix current = target;
  std::optional<Matrix> corpus_current;
  if (corpus != nullptr) corpus_current = *corpus;
  for (const TransformStep& step : chain) {
    const Matrix* fit_data = &current;
    if (step.source == FitSource::kCorpus) {
      if (!corpus_current) {
        throw ConfigError(step.name() + ": no corpus vectors to fit on");
      }
      fit_data = &*corpus_current;
    }
    Transform t = Transform::fit(step, *fit_data, warnings);
    if (corpus_current) corpus_current = t.apply(*corpus_current);
    current = t.apply(current, warnings);
  }
  return current;
}

}  // namespace embshape
