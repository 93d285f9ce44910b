#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace surgift {

// Dense 64-bit float tensor with an optional gradient buffer. Data is
// row-major; shape extents are all positive. Doubles throughout: the
// conservation-law checks need drift at discretization level, not at
// float32 rounding level.
struct tensor {
  std::vector<size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;  // same length as data once backward touches it

  tensor() = default;
  tensor(std::vector<size_t> s, double fill = 0.0);

  size_t size() const { return data.size(); }
  size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& at(size_t r, size_t c) { return data[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data[r * cols() + c]; }
  void ensure_grad();
  void zero_grad();
};

using tensor_ptr = std::shared_ptr<tensor>;

tensor_ptr make_tensor(std::vector<size_t> shape, double fill = 0.0);
tensor_ptr make_tensor(std::vector<size_t> shape, std::vector<double> values);
tensor_ptr make_scalar(double v);

std::string shape_str(const tensor& t);
bool same_shape(const tensor& a, const tensor& b);
// throws if any entry is non-finite; `who` names the offending operation
void check_finite(const tensor& t, const char* who);

// Reverse-mode tape: append-only list of backward closures recorded by the
// forward primitives. One backward pass per recording; reuse is an error.
struct tape {
  std::vector<std::function<void()>> nodes;
  bool used = false;

  void record(std::function<void()> fn) { nodes.push_back(std::move(fn)); }
  // seeds d(loss)/d(loss)=1 and propagates to every tensor on the tape
  void backward(const tensor_ptr& loss);
  void reset() {
    nodes.clear();
    used = false;
  }
};

// forward primitives; every result is finite-checked and recorded on the tape
tensor_ptr matmul(tape& tp, const tensor_ptr& a, const tensor_ptr& b);
tensor_ptr add(tape& tp, const tensor_ptr& a, const tensor_ptr& b);
tensor_ptr sub(tape& tp, const tensor_ptr& a, const tensor_ptr& b);
tensor_ptr scalar_mul(tape& tp, double c, const tensor_ptr& a);
tensor_ptr relu(tape& tp, const tensor_ptr& a);
tensor_ptr identity(tape& tp, const tensor_ptr& a);
tensor_ptr sum(tape& tp, const tensor_ptr& a);
tensor_ptr mean(tape& tp, const tensor_ptr& a);
tensor_ptr square(tape& tp, const tensor_ptr& a);
// row-wise softmax with max-subtraction stabilization
tensor_ptr softmax(tape& tp, const tensor_ptr& logits);

// adds a bias vector [m] to every row of an [n,m] tensor (the only
// broadcast linear layers need beyond scalar-with-tensor)
tensor_ptr add_rowvec(tape& tp, const tensor_ptr& a, const tensor_ptr& bias);

}  // namespace surgift
