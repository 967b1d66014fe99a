// Copyright 2026 The ProCC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "procc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace procc {

Tensor2::Tensor2(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Tensor2: data length " + std::to_string(data_.size()) +
                     " does not match shape (" + std::to_string(rows_) + "x" +
                     std::to_string(cols_) + ")");
  }
}

Tensor2 Tensor2::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Tensor2::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor2(r, c, std::move(data));
}

Tensor2 Tensor2::row_vector(std::span<const double> values) {
  return Tensor2(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Tensor2 Tensor2::identity(std::size_t n) {
  Tensor2 t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

bool Tensor2::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor2::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

void Tensor2::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void require_finite(const Tensor2& t, const char* what) {
  if (!t.all_finite()) throw NonFiniteError(std::string(what) + ": non-finite value");
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: shape mismatch " + a.shape_string() + " x " + b.shape_string());
  }
  Tensor2 out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.data().data() + i * n;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* b_row = b.data().data() + k * n;
      for (std::size_t j = 0; j < n; ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Tensor2 transpose(const Tensor2& a) {
  Tensor2 out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Tensor2 add(const Tensor2& a, const Tensor2& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add: shape mismatch " + a.shape_string() + " + " + b.shape_string());
  }
  Tensor2 out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Tensor2 scale(const Tensor2& a, double s) {
  Tensor2 out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

Tensor2 relu(const Tensor2& x) {
  Tensor2 out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

namespace {

// Softmax over `n` values spaced `stride` apart.
void softmax_strided(const double* in, double* out, std::size_t n, std::size_t stride) {
  double max_value = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) max_value = std::max(max_value, in[i * stride]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i * stride] = std::exp(in[i * stride] - max_value);
    total += out[i * stride];
  }
  for (std::size_t i = 0; i < n; ++i) out[i * stride] /= total;
}

}  // namespace

Tensor2 softmax(const Tensor2& logits, Axis axis) {
  require_finite(logits, "softmax");
  Tensor2 out(logits.rows(), logits.cols());
  const double* in = logits.data().data();
  double* dst = out.data().data();
  if (axis == Axis::kRow) {
    for (std::size_t r = 0; r < logits.rows(); ++r)
      softmax_strided(in + r * logits.cols(), dst + r * logits.cols(), logits.cols(), 1);
  } else {
    for (std::size_t c = 0; c < logits.cols(); ++c)
      softmax_strided(in + c, dst + c, logits.rows(), logits.cols());
  }
  return out;
}

std::vector<double> conv1d_same(std::span<const double> x, std::span<const double> kernel) {
  if (x.empty()) throw std::invalid_argument("conv1d_same: empty input");
  if (kernel.empty() || kernel.size() % 2 == 0) {
    throw std::invalid_argument("conv1d_same: kernel length must be odd, got " +
                                std::to_string(kernel.size()));
  }
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto k = static_cast<std::ptrdiff_t>(kernel.size());
  const std::ptrdiff_t pad = k / 2;
  std::vector<double> out(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < k; ++j) {
      const std::ptrdiff_t src = i + j - pad;
      if (src >= 0 && src < n) acc += kernel[j] * x[src];
    }
    out[i] = acc;
  }
  return out;
}

double cross_entropy(const Tensor2& probs, std::span<const int> labels,
                     const std::vector<bool>& mask) {
  if (labels.size() != probs.rows() || mask.size() != probs.rows()) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels and " +
                     std::to_string(mask.size()) + " mask entries for probs " +
                     probs.shape_string());
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    if (!mask[r]) continue;
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= probs.cols()) {
      throw std::out_of_range("cross_entropy: label " + std::to_string(label) +
                              " out of range for " + std::to_string(probs.cols()) +
                              " classes");
    }
    total -= std::log(std::max(probs(r, static_cast<std::size_t>(label)), kProbabilityFloor));
    ++count;
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

}  // namespace procc
