#include "surgift/tensor.h"

#include <cmath>

namespace surgift {

tensor::tensor(std::vector<size_t> s, double fill) : shape(std::move(s)) {
  size_t n = 1;
  for (size_t e : shape) {
    if (e == 0) throw std::invalid_argument("tensor: zero extent in shape");
    n *= e;
  }
  data.assign(n, fill);
}

void tensor::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void tensor::zero_grad() { grad.assign(data.size(), 0.0); }

tensor_ptr make_tensor(std::vector<size_t> shape, double fill) {
  return std::make_shared<tensor>(std::move(shape), fill);
}

tensor_ptr make_tensor(std::vector<size_t> shape, std::vector<double> values) {
  auto t = std::make_shared<tensor>(std::move(shape));
  if (values.size() != t->data.size())
    throw std::invalid_argument("make_tensor: " + std::to_string(values.size()) +
                                " values for shape " + shape_str(*t));
  t->data = std::move(values);
  return t;
}

tensor_ptr make_scalar(double v) { return make_tensor({1}, std::vector<double>{v}); }

std::string shape_str(const tensor& t) {
  std::string s = "[";
  for (size_t i = 0; i < t.shape.size(); ++i)
    s += (i ? "," : "") + std::to_string(t.shape[i]);
  return s + "]";
}

bool same_shape(const tensor& a, const tensor& b) { return a.shape == b.shape; }

void check_finite(const tensor& t, const char* who) {
  for (double v : t.data)
    if (!std::isfinite(v))
      throw std::runtime_error(std::string(who) + ": non-finite entry");
}

void tape::backward(const tensor_ptr& loss) {
  if (used) throw std::runtime_error("tape: backward on a stale tape; re-record first");
  if (loss->size() != 1)
    throw std::invalid_argument("tape: backward needs a scalar loss, got shape " +
                                shape_str(*loss));
  used = true;
  loss->ensure_grad();
  loss->grad[0] = 1.0;
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) (*it)();
}

namespace {

void require_finite_input(const tensor_ptr& t, const char* who) { check_finite(*t, who); }

}  // namespace

tensor_ptr matmul(tape& tp, const tensor_ptr& a, const tensor_ptr& b) {
  require_finite_input(a, "matmul");
  require_finite_input(b, "matmul");
  if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[0])
    throw std::invalid_argument("matmul: shapes " + shape_str(*a) + " x " + shape_str(*b));
  size_t n = a->shape[0], k = a->shape[1], m = b->shape[1];
  auto out = make_tensor({n, m});
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += a->data[i * k + p] * b->data[p * m + j];
      out->data[i * m + j] = acc;
    }
  check_finite(*out, "matmul");
  tp.record([a, b, out, n, k, m] {
    a->ensure_grad();
    b->ensure_grad();
    // dA = dOut * B^T, dB = A^T * dOut; fixed loop order for reproducibility
    for (size_t i = 0; i < n; ++i)
      for (size_t p = 0; p < k; ++p) {
        double acc = 0.0;
        for (size_t j = 0; j < m; ++j) acc += out->grad[i * m + j] * b->data[p * m + j];
        a->grad[i * k + p] += acc;
      }
    for (size_t p = 0; p < k; ++p)
      for (size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) acc += a->data[i * k + p] * out->grad[i * m + j];
        b->grad[p * m + j] += acc;
      }
  });
  return out;
}

namespace {

// elementwise combine with optional scalar ([1]) broadcast on either side
tensor_ptr ew_binary(tape& tp, const tensor_ptr& a, const tensor_ptr& b, double sign,
                     const char* who) {
  require_finite_input(a, who);
  require_finite_input(b, who);
  bool a_scalar = a->size() == 1, b_scalar = b->size() == 1;
  if (!same_shape(*a, *b) && !a_scalar && !b_scalar)
    throw std::invalid_argument(std::string(who) + ": shapes " + shape_str(*a) + " vs " +
                                shape_str(*b));
  const tensor_ptr& big = (a_scalar && !b_scalar) ? b : a;
  auto out = make_tensor(big->shape);
  size_t n = out->size();
  for (size_t i = 0; i < n; ++i) {
    double av = a_scalar ? a->data[0] : a->data[i];
    double bv = b_scalar ? b->data[0] : b->data[i];
    out->data[i] = av + sign * bv;
  }
  check_finite(*out, who);
  tp.record([a, b, out, a_scalar, b_scalar, sign, n] {
    a->ensure_grad();
    b->ensure_grad();
    for (size_t i = 0; i < n; ++i) {
      a->grad[a_scalar ? 0 : i] += out->grad[i];
      b->grad[b_scalar ? 0 : i] += sign * out->grad[i];
    }
  });
  return out;
}

}  // namespace

tensor_ptr add(tape& tp, const tensor_ptr& a, const tensor_ptr& b) {
  return ew_binary(tp, a, b, 1.0, "add");
}

tensor_ptr sub(tape& tp, const tensor_ptr& a, const tensor_ptr& b) {
  return ew_binary(tp, a, b, -1.0, "sub");
}

tensor_ptr scalar_mul(tape& tp, double c, const tensor_ptr& a) {
  require_finite_input(a, "scalar_mul");
  if (!std::isfinite(c)) throw std::runtime_error("scalar_mul: non-finite scalar");
  auto out = make_tensor(a->shape);
  size_t n = out->size();
  for (size_t i = 0; i < n; ++i) out->data[i] = c * a->data[i];
  check_finite(*out, "scalar_mul");
  tp.record([a, out, c, n] {
    a->ensure_grad();
    for (size_t i = 0; i < n; ++i) a->grad[i] += c * out->grad[i];
  });
  return out;
}

tensor_ptr relu(tape& tp, const tensor_ptr& a) {
  require_finite_input(a, "relu");
  auto out = make_tensor(a->shape);
  size_t n = out->size();
  for (size_t i = 0; i < n; ++i) out->data[i] = a->data[i] > 0.0 ? a->data[i] : 0.0;
  tp.record([a, out, n] {
    a->ensure_grad();
    // subgradient at 0 is 0
    for (size_t i = 0; i < n; ++i)
      if (a->data[i] > 0.0) a->grad[i] += out->grad[i];
  });
  return out;
}

tensor_ptr identity(tape& tp, const tensor_ptr& a) {
  require_finite_input(a, "identity");
  auto out = make_tensor(a->shape, a->data);
  size_t n = out->size();
  tp.record([a, out, n] {
    a->ensure_grad();
    for (size_t i = 0; i < n; ++i) a->grad[i] += out->grad[i];
  });
  return out;
}

tensor_ptr sum(tape& tp, const tensor_ptr& a) {
  require_finite_input(a, "sum");
  double acc = 0.0;
  for (double v : a->data) acc += v;
  auto out = make_scalar(acc);
  check_finite(*out, "sum");
  size_t n = a->size();
  tp.record([a, out, n] {
    a->ensure_grad();
    for (size_t i = 0; i < n; ++i) a->grad[i] += out->grad[0];
  });
  return out;
}

tensor_ptr mean(tape& tp, const tensor_ptr& a) {
  require_finite_input(a, "mean");
  double acc = 0.0;
  for (double v : a->data) acc += v;
  size_t n = a->size();
  auto out = make_scalar(acc / double(n));
  check_finite(*out, "mean");
  tp.record([a, out, n] {
    a->ensure_grad();
    double g = out->grad[0] / double(n);
    for (size_t i = 0; i < n; ++i) a->grad[i] += g;
  });
  return out;
}

tensor_ptr square(tape& tp, const tensor_ptr& a) {
  require_finite_input(a, "square");
  auto out = make_tensor(a->shape);
  size_t n = out->size();
  for (size_t i = 0; i < n; ++i) out->data[i] = a->data[i] * a->data[i];
  check_finite(*out, "square");
  tp.record([a, out, n] {
    a->ensure_grad();
    for (size_t i = 0; i < n; ++i) a->grad[i] += 2.0 * a->data[i] * out->grad[i];
  });
  return out;
}

tensor_ptr softmax(tape& tp, const tensor_ptr& logits) {
  require_finite_input(logits, "softmax");
  if (logits->shape.size() != 2)
    throw std::invalid_argument("softmax: need [n,c] logits, got " + shape_str(*logits));
  size_t n = logits->shape[0], c = logits->shape[1];
  auto out = make_tensor({n, c});
  for (size_t i = 0; i < n; ++i) {
    double mx = logits->data[i * c];
    for (size_t j = 1; j < c; ++j) mx = std::max(mx, logits->data[i * c + j]);
    double z = 0.0;
    for (size_t j = 0; j < c; ++j) {
      double e = std::exp(logits->data[i * c + j] - mx);
      out->data[i * c + j] = e;
      z += e;
    }
    for (size_t j = 0; j < c; ++j) out->data[i * c + j] /= z;
  }
  check_finite(*out, "softmax");
  tp.record([logits, out, n, c] {
    logits->ensure_grad();
    // dz = p .* (dout - (dout . p))
    for (size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (size_t j = 0; j < c; ++j) dot += out->grad[i * c + j] * out->data[i * c + j];
      for (size_t j = 0; j < c; ++j)
        logits->grad[i * c + j] += out->data[i * c + j] * (out->grad[i * c + j] - dot);
    }
  });
  return out;
}

tensor_ptr add_rowvec(tape& tp, const tensor_ptr& a, const tensor_ptr& bias) {
  require_finite_input(a, "add_rowvec");
  require_finite_input(bias, "add_rowvec");
  if (a->shape.size() != 2 || bias->size() != a->shape[1])
    throw std::invalid_argument("add_rowvec: shapes " + shape_str(*a) + " vs " +
                                shape_str(*bias));
  size_t n = a->shape[0], m = a->shape[1];
  auto out = make_tensor({n, m});
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) out->data[i * m + j] = a->data[i * m + j] + bias->data[j];
  check_finite(*out, "add_rowvec");
  tp.record([a, bias, out, n, m] {
    a->ensure_grad();
    bias->ensure_grad();
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < m; ++j) {
        a->grad[i * m + j] += out->grad[i * m + j];
        bias->grad[j] += out->grad[i * m + j];
      }
  });
  return out;
}

}  // namespace surgift
