#include "surgift/model.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace surgift {

named_tensor* model::find(const std::string& name) {
  for (auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

const named_tensor* model::find(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

std::vector<std::string> model::param_names() const {
  std::vector<std::string> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.name);
  return out;
}

std::vector<std::string> model::block_param_names(int block_index) const {
  std::vector<std::string> out;
  for (const auto& p : params)
    if (p.block_index == block_index) out.push_back(p.name);
  return out;
}

model make_mlp(const mlp_spec& spec, uint64_t seed) {
  if (spec.blocks < 1 || spec.hidden_layers < size_t(spec.blocks))
    throw std::invalid_argument("make_mlp: need hidden_layers >= blocks >= 1");
  if (spec.hidden_layers % spec.blocks != 0)
    throw std::invalid_argument("make_mlp: hidden_layers must split evenly into blocks");
  model m;
  m.num_blocks = spec.blocks;
  rng r(seed);
  size_t per_block = spec.hidden_layers / spec.blocks;
  size_t in = spec.in_dim;
  auto add_linear = [&](size_t out_dim, int block, const std::string& prefix) {
    layer_desc ld;
    ld.kind = layer_desc::linear;
    ld.in = in;
    ld.out = out_dim;
    ld.has_bias = spec.bias;
    m.layers.push_back(ld);
    m.layer_blocks.push_back(block);
    double sigma = 1.0 / std::sqrt(double(in));
    auto w = make_tensor({in, out_dim});
    for (auto& v : w->data) v = r.normal() * sigma;
    m.params.push_back({prefix + ".weight", w, block});
    if (spec.bias) {
      auto b = make_tensor({out_dim}, 0.0);
      m.params.push_back({prefix + ".bias", b, block});
    }
    in = out_dim;
  };
  for (int bi = 0; bi < spec.blocks; ++bi)
    for (size_t j = 0; j < per_block; ++j) {
      add_linear(spec.hidden_width, bi,
                 "block" + std::to_string(bi) + ".layer" + std::to_string(j));
      layer_desc act;
      act.kind = layer_desc::activation;
      act.act = spec.act;
      m.layers.push_back(act);
    }
  add_linear(spec.out_dim, last_block, "last");
  return m;
}

tensor_ptr forward(tape& tp, model& m, const tensor_ptr& x) {
  if (x->shape.size() != 2 || x->shape[1] != m.layers.front().in)
    throw std::invalid_argument("forward: input shape " + shape_str(*x) + " vs layer in=" +
                                std::to_string(m.layers.front().in));
  tensor_ptr h = x;
  size_t pi = 0;  // index into params, advanced per linear layer
  for (const auto& ld : m.layers) {
    if (ld.kind == layer_desc::linear) {
      const tensor_ptr& w = m.params[pi].value;
      ++pi;
      h = matmul(tp, h, w);
      if (ld.has_bias) {
        const tensor_ptr& b = m.params[pi].value;
        ++pi;
        h = add_rowvec(tp, h, b);
      }
    } else {
      h = ld.act == layer_desc::relu_act ? relu(tp, h) : identity(tp, h);
    }
  }
  return h;
}

tensor_ptr forward_eval(model& m, const tensor_ptr& x) {
  tape tp;
  return forward(tp, m, x);
}

tensor_ptr squared_loss(tape& tp, const tensor_ptr& pred, const tensor_ptr& y) {
  if (pred->size() != y->size())
    throw std::invalid_argument("squared_loss: shapes " + shape_str(*pred) + " vs " +
                                shape_str(*y));
  return mean(tp, square(tp, sub(tp, pred, y)));
}

tensor_ptr cross_entropy_loss(tape& tp, const tensor_ptr& logits,
                              const std::vector<int>& labels) {
  check_finite(*logits, "cross_entropy_loss");
  if (logits->shape.size() != 2 || logits->shape[0] != labels.size())
    throw std::invalid_argument("cross_entropy_loss: logits " + shape_str(*logits) +
                                " vs " + std::to_string(labels.size()) + " labels");
  size_t n = logits->shape[0], c = logits->shape[1];
  for (int l : labels)
    if (l < 0 || size_t(l) >= c)
      throw std::invalid_argument("cross_entropy_loss: label " + std::to_string(l) +
                                  " out of range [0," + std::to_string(c) + ")");
  // fused primitive: softmax + nll with hand-written backward
  auto probs = std::make_shared<tensor>(std::vector<size_t>{n, c});
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double mx = logits->data[i * c];
    for (size_t j = 1; j < c; ++j) mx = std::max(mx, logits->data[i * c + j]);
    double z = 0.0;
    for (size_t j = 0; j < c; ++j) {
      double e = std::exp(logits->data[i * c + j] - mx);
      probs->data[i * c + j] = e;
      z += e;
    }
    for (size_t j = 0; j < c; ++j) probs->data[i * c + j] /= z;
    acc -= std::log(probs->data[i * c + size_t(labels[i])] + 1e-300);
  }
  auto out = make_scalar(acc / double(n));
  check_finite(*out, "cross_entropy_loss");
  auto labels_copy = labels;
  tp.record([logits, probs, out, labels_copy, n, c] {
    logits->ensure_grad();
    double g = out->grad[0] / double(n);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < c; ++j) {
        double ind = size_t(labels_copy[i]) == j ? 1.0 : 0.0;
        logits->grad[i * c + j] += g * (probs->data[i * c + j] - ind);
      }
  });
  return out;
}

tensor_ptr marginal_entropy(tape& tp, const tensor_ptr& probs) {
  check_finite(*probs, "marginal_entropy");
  if (probs->shape.size() != 2)
    throw std::invalid_argument("marginal_entropy: need [k,c] probabilities, got " +
                                shape_str(*probs));
  size_t k = probs->shape[0], c = probs->shape[1];
  for (size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (size_t j = 0; j < c; ++j) {
      double v = probs->data[i * c + j];
      if (v < 0.0)
        throw std::invalid_argument("marginal_entropy: negative probability entry");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("marginal_entropy: row " + std::to_string(i) +
                                  " sums to " + std::to_string(s));
  }
  std::vector<double> pbar(c, 0.0);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < c; ++j) pbar[j] += probs->data[i * c + j];
  for (auto& v : pbar) v /= double(k);
  double h = 0.0;
  for (double v : pbar)
    if (v > 0.0) h -= v * std::log(v);
  auto out = make_scalar(h);
  tp.record([probs, out, pbar, k, c] {
    probs->ensure_grad();
    // dH/dp[i][j] = -(ln pbar_j + 1)/k; pbar_j == 0 rows contribute 0
    for (size_t j = 0; j < c; ++j) {
      if (pbar[j] <= 0.0) continue;
      double g = -out->grad[0] * (std::log(pbar[j]) + 1.0) / double(k);
      for (size_t i = 0; i < k; ++i) probs->grad[i * c + j] += g;
    }
  });
  return out;
}

double accuracy(model& m, const tensor_ptr& x, const std::vector<int>& labels) {
  tape tp;
  auto logits = forward(tp, m, x);
  size_t n = logits->shape[0], c = logits->shape[1];
  size_t correct = 0;
  for (size_t i = 0; i < n; ++i) {
    size_t best = 0;
    for (size_t j = 1; j < c; ++j)
      if (logits->data[i * c + j] > logits->data[i * c + best]) best = j;
    if (int(best) == labels[i]) ++correct;
  }
  return double(correct) / double(n);
}

checkpoint checkpoint::capture(const model& m) {
  checkpoint c;
  for (const auto& p : m.params) c.params.push_back({p.name, p.value->shape, p.value->data});
  return c;
}

void checkpoint::restore(model& m) const {
  if (params.size() != m.params.size())
    throw std::invalid_argument("checkpoint: parameter count mismatch");
  for (const auto& e : params) {
    auto* p = m.find(e.name);
    if (!p || p->value->shape != e.shape)
      throw std::invalid_argument("checkpoint: no matching tensor for " + e.name);
    p->value->data = e.values;
  }
}

const checkpoint::entry* checkpoint::find(const std::string& name) const {
  for (const auto& e : params)
    if (e.name == name) return &e;
  return nullptr;
}

namespace {
constexpr const char* ckpt_magic = "SURGIFT-CKPT-1\n";
}

void save_checkpoint(const checkpoint& c, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write(ckpt_magic, std::strlen(ckpt_magic));
  auto put_u64 = [&](uint64_t v) { f.write(reinterpret_cast<const char*>(&v), 8); };
  auto put_f64 = [&](double v) { f.write(reinterpret_cast<const char*>(&v), 8); };
  put_u64(c.seed);
  put_u64(uint64_t(c.step_count));
  put_f64(c.source_loss);
  put_u64(c.params.size());
  for (const auto& e : c.params) {
    put_u64(e.name.size());
    f.write(e.name.data(), std::streamsize(e.name.size()));
    put_u64(e.shape.size());
    for (size_t s : e.shape) put_u64(s);
    put_u64(e.values.size());
    f.write(reinterpret_cast<const char*>(e.values.data()),
            std::streamsize(e.values.size() * 8));
  }
  if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string magic(std::strlen(ckpt_magic), '\0');
  f.read(magic.data(), std::streamsize(magic.size()));
  if (magic != ckpt_magic)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  auto get_u64 = [&] {
    uint64_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  auto get_f64 = [&] {
    double v = 0;
    f.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  checkpoint c;
  c.seed = get_u64();
  c.step_count = int64_t(get_u64());
  c.source_loss = get_f64();
  size_t np = get_u64();
  for (size_t i = 0; i < np && f; ++i) {
    checkpoint::entry e;
    e.name.resize(get_u64());
    f.read(e.name.data(), std::streamsize(e.name.size()));
    e.shape.resize(get_u64());
    for (auto& s : e.shape) s = get_u64();
    e.values.resize(get_u64());
    f.read(reinterpret_cast<char*>(e.values.data()), std::streamsize(e.values.size() * 8));
    c.params.push_back(std::move(e));
  }
  if (!f) throw std::runtime_error("load_checkpoint: truncated file " + path);
  return c;
}

uint64_t param_hash(const model& m) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& p : m.params) {
    h = fnv1a64(p.name.data(), p.name.size(), h);
    h = fnv1a64(p.value->data.data(), p.value->data.size() * 8, h);
  }
  return h;
}

}  // namespace surgift
