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

#ifndef PROCC_AUTODIFF_HPP_
#define PROCC_AUTODIFF_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "procc/param_store.hpp"
#include "procc/tensor.hpp"

namespace procc {

/// Handle to a node recorded on a Tape.
struct Var {
  std::size_t index = static_cast<std::size_t>(-1);
};

/// Reverse-mode tape over Tensor2 values.
///
/// Every op evaluates eagerly and records a closure that pushes the output
/// adjoint back to its inputs. Parameter leaves are bound by name to a
/// ParamStore; backward() writes their gradients there and zeroes every other
/// entry of the store.
class Tape {
 public:
  explicit Tape(ParamStore& store) : store_(&store), grads_(&store) {}
  // Read-only tape: forward only, backward() throws.
  explicit Tape(const ParamStore& store) : store_(&store), grads_(nullptr) {}

  Var constant(Tensor2 value);
  Var param(const std::string& name);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var add_row_bias(Var x, Var bias);  // bias is 1×cols, broadcast over rows
  Var scale(Var x, double s);
  Var relu(Var x);
  Var softmax_rows(Var x);
  Var conv1d_rows(Var x, Var kernel);  // kernel is 1×k, applied to every row
  Var detach(Var x);
  Var sum(Var x);
  /// Masked mean cross-entropy of a probability matrix; a 1×1 node.
  Var cross_entropy(Var probs, std::vector<int> labels, std::vector<bool> mask);

  const Tensor2& value(Var v) const;
  double scalar(Var v) const;

  /// Propagate d(loss)/d(node) for a 1×1 loss node into the parameter store.
  void backward(Var loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor2 value;
    Tensor2 adjoint;
    std::optional<std::string> param_name;
    bool requires_grad = false;
    std::function<void(std::vector<Node>&, std::size_t)> pull;
  };

  Var push(Tensor2 value, bool requires_grad,
           std::function<void(std::vector<Node>&, std::size_t)> pull);
  const Node& node(Var v) const;
  bool needs(Var v) const { return node(v).requires_grad; }

  const ParamStore* store_;
  ParamStore* grads_;
  std::vector<Node> nodes_;
};

}  // namespace procc

#endif  // PROCC_AUTODIFF_HPP_
