#include "params.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "errors.hpp"
#include "nn.hpp"
#include "rng.hpp"

namespace cspan {

void ParamStore::add(const std::string& name, Tensor t) {
  if (has(name)) throw DataError("duplicate parameter name: " + name);
  names_.push_back(name);
  tensors_[name] = std::move(t);
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw DataError("unknown parameter name: " + name);
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw DataError("unknown parameter name: " + name);
  return it->second;
}

ModelDims dims_from(const RunConfig& config) {
  ModelDims d;
  d.emb = config.embedding_dim;
  d.hidden = config.hidden_dim;
  d.feat = config.feat_dim;
  d.attn = config.attention_dim;
  d.ffnn_hidden = config.ffnn_hidden;
  d.ffnn_depth = config.ffnn_depth;
  d.feat_emb = config.feature_embedding_dim;
  d.char_cnn = config.char_cnn;
  d.char_dim = config.char_dim;
  d.char_filters = config.char_filters;
  return d;
}

ParamStore init_params(const ModelDims& dims, std::uint64_t seed) {
  Rng rng(seed);
  ParamStore p;
  const int X = dims.token_dim();
  const int H = dims.hidden;
  const int S = dims.span_dim();
  const int F = dims.ffnn_hidden;

  if (dims.char_cnn) {
    p.add("char.emb", glorot_matrix(256, dims.char_dim, 256, dims.char_dim, rng));
    for (int w : {3, 4, 5}) {
      int in = w * dims.char_dim;
      p.add("char.conv" + std::to_string(w) + ".w",
            glorot_matrix(in, dims.char_filters, in, dims.char_filters, rng));
      p.add("char.conv" + std::to_string(w) + ".b", Tensor::zeros({dims.char_filters}));
    }
  }

  for (const char* dir : {"fwd", "bwd"}) {
    std::string base = std::string("lstm.") + dir;
    p.add(base + ".w_input", glorot_matrix(4 * H, X, X, 4 * H, rng));
    p.add(base + ".w_hidden", glorot_matrix(4 * H, H, H, 4 * H, rng));
    p.add(base + ".bias", Tensor::zeros({4 * H}));
  }

  p.add("head.w", glorot_vector(2 * H, 2 * H, 1, rng));

  for (int l = 0; l < dims.ffnn_depth; ++l) {
    int in = (l == 0) ? S : F;
    p.add("mention.ffnn.w" + std::to_string(l), glorot_matrix(in, F, in, F, rng));
    p.add("mention.ffnn.b" + std::to_string(l), Tensor::zeros({F}));
  }
  p.add("mention.out", glorot_vector(F, F, 1, rng));

  p.add("refine.w1", glorot_matrix(S, dims.attn, S, dims.attn, rng));
  p.add("refine.w2", glorot_matrix(S, dims.attn, S, dims.attn, rng));
  p.add("refine.v", glorot_vector(dims.attn, dims.attn, 1, rng));
  p.add("fuse.w", glorot_matrix(2 * S, S, 2 * S, S, rng));

  p.add("pair.dist_emb", glorot_matrix(9, dims.feat_emb, 9, dims.feat_emb, rng));
  p.add("pair.speaker_emb", glorot_matrix(2, dims.feat_emb, 2, dims.feat_emb, rng));
  p.add("pair.genre_emb", glorot_matrix(7, dims.feat_emb, 7, dims.feat_emb, rng));

  const int PD = dims.pair_dim();
  for (int l = 0; l < dims.ffnn_depth; ++l) {
    int in = (l == 0) ? PD : F;
    p.add("ante.ffnn.w" + std::to_string(l), glorot_matrix(in, F, in, F, rng));
    p.add("ante.ffnn.b" + std::to_string(l), Tensor::zeros({F}));
  }
  p.add("ante.out", glorot_vector(F, F, 1, rng));

  return p;
}

namespace {

constexpr char kMagic[4] = {'C', 'S', 'P', 'N'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("checkpoint truncated");
  return v;
}

}  // namespace

void save_checkpoint(const ParamStore& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(params.size()));
  for (const std::string& name : params.names()) {
    const Tensor& t = params.at(name);
    write_pod(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod(out, static_cast<std::uint8_t>(t.rank()));
    for (int d : t.shape) write_pod(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!out) throw DataError("checkpoint write failed: " + path);
}

void load_checkpoint(const std::string& path, ParamStore& into) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("checkpoint version check failed: bad magic bytes");
  std::uint32_t version = read_pod<std::uint32_t>(in);
  if (version != kVersion)
    throw DataError("checkpoint version mismatch: file has " + std::to_string(version) +
                    ", expected " + std::to_string(kVersion));
  std::uint32_t count = read_pod<std::uint32_t>(in);

  std::set<std::string> pending(into.names().begin(), into.names().end());
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint16_t name_len = read_pod<std::uint16_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError("checkpoint truncated");
    if (!into.has(name)) throw DataError("checkpoint contains unknown tensor: " + name);
    Tensor& dst = into.at(name);
    std::uint8_t rank = read_pod<std::uint8_t>(in);
    std::vector<int> shape;
    for (int r = 0; r < rank; ++r)
      shape.push_back(static_cast<int>(read_pod<std::uint32_t>(in)));
    if (shape != dst.shape) {
      Tensor probe;
      probe.shape = shape;
      throw DataError("checkpoint tensor '" + name + "' has shape " + probe.shape_str() +
                      ", model expects " + dst.shape_str());
    }
    in.read(reinterpret_cast<char*>(dst.data.data()),
            static_cast<std::streamsize>(dst.data.size() * sizeof(float)));
    if (!in) throw DataError("checkpoint truncated in tensor: " + name);
    pending.erase(name);
  }
  if (!pending.empty())
    throw DataError("checkpoint is missing tensor: " + *pending.begin());
}

}  // namespace cspan
