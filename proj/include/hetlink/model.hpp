#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hetlink/dense.hpp"
#include "hetlink/graph.hpp"

namespace hetlink {

enum class EncoderKind { NoGNN, GCN, SAGE, SIGN, LinearGNN };
enum class DecoderKind { DOT, DistMult, MLP };

const char* encoder_name(EncoderKind k);
const char* decoder_name(DecoderKind k);
EncoderKind parse_encoder(const std::string& s);
DecoderKind parse_decoder(const std::string& s);

// Architecture description. `in_dim` is the feature dimension and must be
// set before building a ParamStore. embed_dim 0 derives the default (hidden
// for GCN/SAGE/SIGN, in_dim for NoGNN/LinearGNN); decoder_hidden 0 derives
// embed_dim.
struct ModelSpec {
  EncoderKind encoder = EncoderKind::NoGNN;
  DecoderKind decoder = DecoderKind::DistMult;
  int layers = 2;        // GCN / SAGE
  int hidden = 256;      // hidden width of all neural layers
  int powers = 2;        // SIGN propagation depth P
  int embed_dim = 0;     // encoder output dimension
  int decoder_hidden = 0;
  int in_dim = 0;

  int resolved_embed_dim() const;
  int resolved_decoder_hidden() const;
  // Throws InputError listing every violated field.
  void validate() const;
  std::string describe() const;
};

// Named tensors over one flat parameter vector, with a same-layout gradient
// buffer. Tensor views alias the flat storage.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    std::size_t offset = 0, rows = 0, cols = 0;
    std::size_t numel() const { return rows * cols; }
  };

  struct View {
    double* data = nullptr;
    std::size_t rows = 0, cols = 0;
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  };

  struct ConstView {
    const double* data = nullptr;
    std::size_t rows = 0, cols = 0;
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  };

  static ParamStore build(const ModelSpec& spec);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> grad() { return grad_; }
  std::span<const double> grad() const { return grad_; }

  bool has(const std::string& name) const;
  View view(const std::string& name);
  ConstView view(const std::string& name) const;
  View grad_view(const std::string& name);

  void zero_grad();
  std::uint64_t checksum() const;

  // Checkpoint format: magic "HLPP", u64 LE tensor count, per tensor
  // (u64 name length, name bytes, u64 rows, u64 cols), then the flat f64
  // vector little-endian.
  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  std::vector<Entry> entries_;
  std::vector<double> values_;
  std::vector<double> grad_;
  View make_view(std::vector<double>& buf, const std::string& name);
};

// Forward stashes needed by reverse mode; filled by encode() when requested.
struct EncodeCache {
  std::vector<Mat> layer_in;    // input H of each layer
  std::vector<Mat> layer_agg;   // aggregated input (GCN: A_hat*H; SAGE: mean_nb H)
  std::vector<Mat> layer_pre;   // pre-activation
  std::vector<Mat> sign_powers; // A_hat^p X for p = 0..P
  Mat sign_concat;
  Mat sign_hidden_pre;
};

// Node embeddings (n x embed_dim). ReLU on hidden layers, identity on the
// final encoder layer. NoGNN returns the features unchanged; LinearGNN is
// the weightless self-loop mean.
Mat encode(const ModelSpec& spec, const ParamStore& params, const Graph& g, const Mat& X,
           EncodeCache* cache = nullptr);

// Pair score from two embeddings. DOT: <zi,zj>. DistMult: sum_d w_d zi_d zj_d + b.
// MLP: 0.5*[f(zi||zj) + f(zj||zi)] with f a one-hidden-layer ReLU MLP to a
// scalar. All three are symmetric in (i, j).
double decode(const ModelSpec& spec, const ParamStore& params, std::span<const double> zi,
              std::span<const double> zj);

// Batched decoding context. For the MLP decoder the first layer factors
// through per-node projections ZA = Z*W1[:d,:], ZB = Z*W1[d:,:], making each
// pair O(decoder_hidden) instead of O(embed_dim * decoder_hidden). Scores are
// identical to decode() on the same embeddings.
struct DecodeContext {
  const ModelSpec* spec = nullptr;
  const ParamStore* params = nullptr;
  const Mat* Z = nullptr;
  Mat ZA, ZB;  // MLP only

  double score(NodeId i, NodeId j) const;
};

DecodeContext make_decode_context(const ModelSpec& spec, const ParamStore& params, const Mat& Z);

// encode-then-decode with one shared encoding pass.
std::vector<double> score_pairs(const ModelSpec& spec, const ParamStore& params, const Graph& g,
                                const Mat& X, std::span<const Edge> pairs);

}  // namespace hetlink
