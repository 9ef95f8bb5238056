#include "embedding.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "rng.hpp"

namespace cspan {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

EmbeddingProvider EmbeddingProvider::hashed(int dim, std::uint64_t seed) {
  if (dim <= 0) throw DataError("embedding dim must be positive");
  EmbeddingProvider p;
  p.dim_ = dim;
  p.seed_ = seed;
  return p;
}

EmbeddingProvider EmbeddingProvider::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);
  EmbeddingProvider p;
  p.file_mode_ = true;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string token;
    is >> token;
    std::vector<float> v;
    double x;
    while (is >> x) v.push_back(static_cast<float>(x));
    if (!is.eof())
      throw DataError("embedding file line " + std::to_string(line_no) +
                      ": malformed number");
    if (token.empty() || v.empty())
      throw DataError("embedding file line " + std::to_string(line_no) +
                      ": expected 'token v1 ... vd'");
    if (p.dim_ == 0)
      p.dim_ = static_cast<int>(v.size());
    else if (static_cast<int>(v.size()) != p.dim_)
      throw DataError("embedding file line " + std::to_string(line_no) + ": width " +
                      std::to_string(v.size()) + " != " + std::to_string(p.dim_));
    p.table_[token] = std::move(v);
  }
  if (p.dim_ == 0) throw DataError("embedding file is empty: " + path);
  return p;
}

Tensor EmbeddingProvider::lookup(const std::string& token) const {
  Tensor out = Tensor::zeros({dim_});
  if (file_mode_) {
    auto it = table_.find(token);
    if (it == table_.end()) return out;  // unknown token: zero vector
    for (int i = 0; i < dim_; ++i) out.at(i) = it->second[static_cast<std::size_t>(i)];
    return out;
  }
  // Hash mode: a per-token SplitMix64 stream, scaled so coordinates have
  // variance 1/dim.
  std::uint64_t state = fnv1a(token) ^ seed_;
  const float s = static_cast<float>(std::sqrt(3.0 / dim_));
  for (int i = 0; i < dim_; ++i) {
    state = splitmix64(state);
    double u = static_cast<double>(state >> 11) * 0x1.0p-53;  // [0,1)
    out.at(i) = s * static_cast<float>(2.0 * u - 1.0);
  }
  return out;
}

Tensor embed_tokens(const Document& doc, const EmbeddingProvider& provider) {
  const int n = static_cast<int>(doc.tokens.size());
  if (n == 0) throw DataError("cannot embed an empty document: " + doc.doc_id);
  Tensor out = Tensor::zeros({n, provider.dim()});
  for (int t = 0; t < n; ++t) {
    Tensor v = provider.lookup(doc.tokens[static_cast<std::size_t>(t)]);
    for (int d = 0; d < provider.dim(); ++d) out.at(t, d) = v.at(d);
  }
  return out;
}

}  // namespace cspan
