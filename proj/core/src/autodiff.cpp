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

#include "procc/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace procc {

namespace {

void accumulate(Tensor2& adjoint, const Tensor2& delta) {
  if (adjoint.empty()) {
    adjoint = delta;
    return;
  }
  for (std::size_t i = 0; i < adjoint.size(); ++i) adjoint.data()[i] += delta.data()[i];
}

}  // namespace

Var Tape::push(Tensor2 value, bool requires_grad,
               std::function<void(std::vector<Node>&, std::size_t)> pull) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.pull = std::move(pull);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.index >= nodes_.size()) throw std::logic_error("Tape: variable not recorded on this tape");
  return nodes_[v.index];
}

const Tensor2& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
  const Tensor2& t = value(v);
  if (t.size() != 1) throw ShapeError("Tape::scalar: node has shape " + t.shape_string());
  return t.data()[0];
}

Var Tape::constant(Tensor2 value) { return push(std::move(value), false, nullptr); }

Var Tape::param(const std::string& name) {
  Var v = push(store_->value(name), true, nullptr);
  nodes_[v.index].param_name = name;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  Tensor2 out = procc::matmul(value(a), value(b));
  const bool rg = needs(a) || needs(b);
  return push(std::move(out), rg, [a, b](std::vector<Node>& nodes, std::size_t self) {
    const Tensor2& g = nodes[self].adjoint;
    if (nodes[a.index].requires_grad)
      accumulate(nodes[a.index].adjoint, procc::matmul(g, transpose(nodes[b.index].value)));
    if (nodes[b.index].requires_grad)
      accumulate(nodes[b.index].adjoint, procc::matmul(transpose(nodes[a.index].value), g));
  });
}

Var Tape::add(Var a, Var b) {
  Tensor2 out = procc::add(value(a), value(b));
  const bool rg = needs(a) || needs(b);
  return push(std::move(out), rg, [a, b](std::vector<Node>& nodes, std::size_t self) {
    const Tensor2 g = nodes[self].adjoint;
    if (nodes[a.index].requires_grad) accumulate(nodes[a.index].adjoint, g);
    if (nodes[b.index].requires_grad) accumulate(nodes[b.index].adjoint, g);
  });
}

Var Tape::add_row_bias(Var x, Var bias) {
  const Tensor2& xv = value(x);
  const Tensor2& bv = value(bias);
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw ShapeError("add_row_bias: bias " + bv.shape_string() + " for input " +
                     xv.shape_string());
  }
  Tensor2 out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
  const bool rg = needs(x) || needs(bias);
  return push(std::move(out), rg, [x, bias](std::vector<Node>& nodes, std::size_t self) {
    const Tensor2 g = nodes[self].adjoint;
    if (nodes[x.index].requires_grad) accumulate(nodes[x.index].adjoint, g);
    if (nodes[bias.index].requires_grad) {
      Tensor2 col_sums(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) col_sums(0, c) += g(r, c);
      accumulate(nodes[bias.index].adjoint, col_sums);
    }
  });
}

Var Tape::scale(Var x, double s) {
  return push(procc::scale(value(x), s), needs(x),
              [x, s](std::vector<Node>& nodes, std::size_t self) {
                accumulate(nodes[x.index].adjoint, procc::scale(nodes[self].adjoint, s));
              });
}

Var Tape::relu(Var x) {
  return push(procc::relu(value(x)), needs(x), [x](std::vector<Node>& nodes, std::size_t self) {
    Tensor2 g = nodes[self].adjoint;
    const Tensor2& in = nodes[x.index].value;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!(in.data()[i] > 0.0)) g.data()[i] = 0.0;
    accumulate(nodes[x.index].adjoint, g);
  });
}

Var Tape::softmax_rows(Var x) {
  return push(softmax(value(x), Axis::kRow), needs(x),
              [x](std::vector<Node>& nodes, std::size_t self) {
                const Tensor2& p = nodes[self].value;
                const Tensor2& gp = nodes[self].adjoint;
                Tensor2 g(p.rows(), p.cols());
                for (std::size_t r = 0; r < p.rows(); ++r) {
                  double dot = 0.0;
                  for (std::size_t c = 0; c < p.cols(); ++c) dot += gp(r, c) * p(r, c);
                  for (std::size_t c = 0; c < p.cols(); ++c) g(r, c) = p(r, c) * (gp(r, c) - dot);
                }
                accumulate(nodes[x.index].adjoint, g);
              });
}

Var Tape::conv1d_rows(Var x, Var kernel) {
  const Tensor2& xv = value(x);
  const Tensor2& kv = value(kernel);
  if (kv.rows() != 1) throw ShapeError("conv1d_rows: kernel must be 1xk, got " + kv.shape_string());
  Tensor2 out(xv.rows(), xv.cols());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    const std::vector<double> y = conv1d_same(xv.row(r), kv.row(0));
    std::copy(y.begin(), y.end(), out.row(r).begin());
  }
  const bool rg = needs(x) || needs(kernel);
  return push(std::move(out), rg, [x, kernel](std::vector<Node>& nodes, std::size_t self) {
    const Tensor2& g = nodes[self].adjoint;
    const Tensor2& xv = nodes[x.index].value;
    const Tensor2& kv = nodes[kernel.index].value;
    const auto n = static_cast<std::ptrdiff_t>(xv.cols());
    const auto k = static_cast<std::ptrdiff_t>(kv.cols());
    const std::ptrdiff_t pad = k / 2;
    const bool want_x = nodes[x.index].requires_grad;
    const bool want_k = nodes[kernel.index].requires_grad;
    Tensor2 gx(xv.rows(), xv.cols());
    Tensor2 gk(1, kv.cols());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double gi = g(r, static_cast<std::size_t>(i));
        if (gi == 0.0) continue;
        for (std::ptrdiff_t j = 0; j < k; ++j) {
          const std::ptrdiff_t src = i + j - pad;
          if (src < 0 || src >= n) continue;
          const auto s = static_cast<std::size_t>(src);
          const auto jj = static_cast<std::size_t>(j);
          if (want_x) gx(r, s) += kv(0, jj) * gi;
          if (want_k) gk(0, jj) += xv(r, s) * gi;
        }
      }
    }
    if (want_x) accumulate(nodes[x.index].adjoint, gx);
    if (want_k) accumulate(nodes[kernel.index].adjoint, gk);
  });
}

Var Tape::detach(Var x) { return push(value(x), false, nullptr); }

Var Tape::sum(Var x) {
  const Tensor2& xv = value(x);
  double total = 0.0;
  for (double v : xv.data()) total += v;
  return push(Tensor2(1, 1, total), needs(x), [x](std::vector<Node>& nodes, std::size_t self) {
    const double g = nodes[self].adjoint.data()[0];
    const Tensor2& xv = nodes[x.index].value;
    accumulate(nodes[x.index].adjoint, Tensor2(xv.rows(), xv.cols(), g));
  });
}

Var Tape::cross_entropy(Var probs, std::vector<int> labels, std::vector<bool> mask) {
  const double loss = procc::cross_entropy(value(probs), labels, mask);
  return push(Tensor2(1, 1, loss), needs(probs),
              [probs, labels = std::move(labels), mask = std::move(mask)](
                  std::vector<Node>& nodes, std::size_t self) {
                const Tensor2& p = nodes[probs.index].value;
                const double g = nodes[self].adjoint.data()[0];
                const auto count = static_cast<double>(std::count(mask.begin(), mask.end(), true));
                Tensor2 gp(p.rows(), p.cols());
                if (count > 0) {
                  for (std::size_t r = 0; r < p.rows(); ++r) {
                    if (!mask[r]) continue;
                    const auto c = static_cast<std::size_t>(labels[r]);
                    const double pr = p(r, c);
                    if (pr > kProbabilityFloor) gp(r, c) = -g / (count * pr);
                  }
                }
                accumulate(nodes[probs.index].adjoint, gp);
              });
}

void Tape::backward(Var loss) {
  if (grads_ == nullptr) throw std::logic_error("Tape::backward: tape is read-only");
  if (nodes_.empty()) throw std::logic_error("Tape::backward: no forward pass recorded");
  const Node& root = node(loss);
  if (root.value.size() != 1) {
    throw ShapeError("Tape::backward: loss must be 1x1, got " + root.value.shape_string());
  }
  for (auto& [name, entry] : *grads_) {
    entry.grad = Tensor2(entry.value.rows(), entry.value.cols());
    entry.has_grad = true;
  }
  for (Node& n : nodes_) n.adjoint = Tensor2();
  nodes_[loss.index].adjoint = Tensor2(1, 1, 1.0);
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.adjoint.empty()) continue;
    if (n.pull) n.pull(nodes_, i);
    if (n.param_name) accumulate(grads_->at(*n.param_name).grad, n.adjoint);
  }
}

}  // namespace procc
