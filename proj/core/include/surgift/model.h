#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surgift/rng.h"
#include "surgift/tensor.h"

namespace surgift {

// block index of the final classifier layer
inline constexpr int last_block = -1;

struct named_tensor {
  std::string name;  // "block{i}.layer{j}.weight" / ".bias", or "last.*"
  tensor_ptr value;
  int block_index = 0;  // >= 0, or last_block
};

struct layer_desc {
  enum kind_t { linear, activation } kind = linear;
  size_t in = 0, out = 0;          // linear
  bool has_bias = true;            // linear
  enum act_t { relu_act, identity_act } act = relu_act;  // activation
};

// Sequential feed-forward net: f = f_n ∘ … ∘ f_1. Parameterized layers are
// partitioned into contiguous blocks; the final linear layer forms its own
// "last" block of size 1.
struct model {
  std::vector<layer_desc> layers;
  std::vector<named_tensor> params;
  // per-parameterized-layer (weight,bias share an entry) block index
  std::vector<int> layer_blocks;
  int num_blocks = 0;  // trunk blocks, excluding "last"

  named_tensor* find(const std::string& name);
  const named_tensor* find(const std::string& name) const;
  std::vector<std::string> param_names() const;
  std::vector<std::string> block_param_names(int block_index) const;
};

struct mlp_spec {
  size_t in_dim = 0;
  size_t hidden_width = 64;
  size_t hidden_layers = 3;  // total trunk depth, split evenly into blocks
  size_t out_dim = 1;
  int blocks = 3;
  bool bias = true;
  layer_desc::act_t act = layer_desc::relu_act;
};

// weights ~ N(0, 1/fan_in), biases 0
model make_mlp(const mlp_spec& spec, uint64_t seed);

// runs the layer chain on the tape; x is [batch, in_dim]
tensor_ptr forward(tape& tp, model& m, const tensor_ptr& x);
// convenience forward without gradient recording
tensor_ptr forward_eval(model& m, const tensor_ptr& x);

// mean over batch of squared residuals
tensor_ptr squared_loss(tape& tp, const tensor_ptr& pred, const tensor_ptr& y);
// mean negative log-softmax of the true class, max-subtraction stabilized
tensor_ptr cross_entropy_loss(tape& tp, const tensor_ptr& logits,
                              const std::vector<int>& labels);
// H(mean of rows) with 0 ln 0 := 0; rows of `probs` must each sum to 1
tensor_ptr marginal_entropy(tape& tp, const tensor_ptr& probs);

double accuracy(model& m, const tensor_ptr& x, const std::vector<int>& labels);

struct checkpoint {
  struct entry {
    std::string name;
    std::vector<size_t> shape;
    std::vector<double> values;
  };
  std::vector<entry> params;
  uint64_t seed = 0;
  int64_t step_count = 0;
  double source_loss = 0.0;

  static checkpoint capture(const model& m);
  // restores values into a model with identical names/shapes
  void restore(model& m) const;
  const entry* find(const std::string& name) const;
};

// binary format, versioned by the leading magic string "SURGIFT-CKPT-1"
void save_checkpoint(const checkpoint& c, const std::string& path);
checkpoint load_checkpoint(const std::string& path);

// FNV-1a over the raw bytes of every parameter in declaration order
uint64_t param_hash(const model& m);

}  // namespace surgift
