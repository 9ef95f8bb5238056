#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "config.hpp"
#include "tensor.hpp"

namespace cspan {

// Named model parameters in a fixed iteration order. The order pins both the
// initialization draw sequence and the checkpoint layout.
class ParamStore {
 public:
  void add(const std::string& name, Tensor t);
  bool has(const std::string& name) const { return tensors_.count(name) > 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Tensor> tensors_;
};

// Widths derived from the run configuration.
struct ModelDims {
  int emb = 0;          // fixed token embedding width
  int hidden = 0;       // recurrent state width per direction
  int feat = 0;         // span feature stub width
  int attn = 0;         // refinement attention width
  int ffnn_hidden = 0;
  int ffnn_depth = 0;
  int feat_emb = 0;     // width per learned categorical pair feature
  bool char_cnn = false;
  int char_dim = 0;
  int char_filters = 0;

  int token_dim() const { return emb + (char_cnn ? 3 * char_filters : 0); }
  int span_dim() const { return 4 * hidden + token_dim() + feat; }
  int pair_dim() const { return 3 * span_dim() + 3 * feat_emb; }
};

ModelDims dims_from(const RunConfig& config);

// Glorot-uniform matrices, zero biases, drawn in name order from one seed.
ParamStore init_params(const ModelDims& dims, std::uint64_t seed);

// Binary checkpoint: magic "CSPN", u32 format version, u32 tensor count, then
// per tensor: u16 name length, name bytes, u8 rank, u32 dims, row-major f32
// little-endian payload.
void save_checkpoint(const ParamStore& params, const std::string& path);

// Loads into an existing store: the file must cover exactly the store's
// tensor names with matching shapes; violations name the tensor.
void load_checkpoint(const std::string& path, ParamStore& into);

}  // namespace cspan
