#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "tensor.hpp"

namespace cspan {

// Fixed (non-trained) token vectors. Hash mode derives each vector from a
// seeded hash of the token text; file mode looks tokens up in a text table
// (`token v1 v2 ... vd` per line) and maps unknown tokens to the zero vector.
class EmbeddingProvider {
 public:
  static EmbeddingProvider hashed(int dim, std::uint64_t seed);
  static EmbeddingProvider from_file(const std::string& path);

  int dim() const { return dim_; }

  // (dim) vector; deterministic per token.
  Tensor lookup(const std::string& token) const;

 private:
  EmbeddingProvider() = default;

  bool file_mode_ = false;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::unordered_map<std::string, std::vector<float>> table_;
};

// One row per token: (n_tokens x dim).
Tensor embed_tokens(const Document& doc, const EmbeddingProvider& provider);

}  // namespace cspan
