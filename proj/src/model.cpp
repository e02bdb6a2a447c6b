#include "hetlink/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "hetlink/common.hpp"
#include "hetlink/kernels.hpp"

namespace hetlink {

const char* encoder_name(EncoderKind k) {
  switch (k) {
    case EncoderKind::NoGNN: return "nognn";
    case EncoderKind::GCN: return "gcn";
    case EncoderKind::SAGE: return "sage";
    case EncoderKind::SIGN: return "sign";
    default: return "lineargnn";
  }
}

const char* decoder_name(DecoderKind k) {
  switch (k) {
    case DecoderKind::DOT: return "dot";
    case DecoderKind::DistMult: return "distmult";
    default: return "mlp";
  }
}

EncoderKind parse_encoder(const std::string& s) {
  if (s == "nognn") return EncoderKind::NoGNN;
  if (s == "gcn") return EncoderKind::GCN;
  if (s == "sage") return EncoderKind::SAGE;
  if (s == "sign") return EncoderKind::SIGN;
  if (s == "lineargnn") return EncoderKind::LinearGNN;
  throw InputError("unknown encoder: " + s);
}

DecoderKind parse_decoder(const std::string& s) {
  if (s == "dot") return DecoderKind::DOT;
  if (s == "distmult") return DecoderKind::DistMult;
  if (s == "mlp") return DecoderKind::MLP;
  throw InputError("unknown decoder: " + s);
}

int ModelSpec::resolved_embed_dim() const {
  if (encoder == EncoderKind::NoGNN || encoder == EncoderKind::LinearGNN) return in_dim;
  return embed_dim > 0 ? embed_dim : hidden;
}

int ModelSpec::resolved_decoder_hidden() const {
  return decoder_hidden > 0 ? decoder_hidden : resolved_embed_dim();
}

void ModelSpec::validate() const {
  std::string bad;
  auto flag = [&](const char* f) {
    if (!bad.empty()) bad += ", ";
    bad += f;
  };
  if (in_dim < 1) flag("in_dim");
  if ((encoder == EncoderKind::GCN || encoder == EncoderKind::SAGE) && layers < 1) flag("layers");
  if (encoder == EncoderKind::SIGN && powers < 1) flag("powers");
  const bool neural = encoder == EncoderKind::GCN || encoder == EncoderKind::SAGE ||
                      encoder == EncoderKind::SIGN;
  if (neural && hidden < 1) flag("hidden");
  if (resolved_embed_dim() < 1) flag("embed_dim");
  if (decoder == DecoderKind::MLP && resolved_decoder_hidden() < 1) flag("decoder_hidden");
  if (!bad.empty()) throw InputError("invalid ModelSpec fields: " + bad);
}

std::string ModelSpec::describe() const {
  return std::string(encoder_name(encoder)) + "+" + decoder_name(decoder);
}

namespace {

// (in, out) per GCN/SAGE layer; ReLU on all but the last.
std::vector<std::pair<int, int>> layer_dims(const ModelSpec& spec) {
  std::vector<std::pair<int, int>> dims;
  int in = spec.in_dim;
  for (int l = 0; l < spec.layers; ++l) {
    int out = (l == spec.layers - 1) ? spec.resolved_embed_dim() : spec.hidden;
    dims.emplace_back(in, out);
    in = out;
  }
  return dims;
}

}  // namespace

ParamStore ParamStore::build(const ModelSpec& spec) {
  spec.validate();
  ParamStore ps;
  std::size_t offset = 0;
  auto add = [&](const std::string& name, std::size_t r, std::size_t c) {
    ps.entries_.push_back({name, offset, r, c});
    offset += r * c;
  };

  switch (spec.encoder) {
    case EncoderKind::GCN: {
      auto dims = layer_dims(spec);
      for (std::size_t l = 0; l < dims.size(); ++l) {
        add("gcn.l" + std::to_string(l) + ".W", dims[l].first, dims[l].second);
        add("gcn.l" + std::to_string(l) + ".b", 1, dims[l].second);
      }
      break;
    }
    case EncoderKind::SAGE: {
      auto dims = layer_dims(spec);
      for (std::size_t l = 0; l < dims.size(); ++l) {
        add("sage.l" + std::to_string(l) + ".W_self", dims[l].first, dims[l].second);
        add("sage.l" + std::to_string(l) + ".W_nb", dims[l].first, dims[l].second);
        add("sage.l" + std::to_string(l) + ".b", 1, dims[l].second);
      }
      break;
    }
    case EncoderKind::SIGN: {
      for (int p = 0; p <= spec.powers; ++p) {
        add("sign.p" + std::to_string(p) + ".W", spec.in_dim, spec.hidden);
        add("sign.p" + std::to_string(p) + ".b", 1, spec.hidden);
      }
      add("sign.mlp.W1", static_cast<std::size_t>(spec.powers + 1) * spec.hidden, spec.hidden);
      add("sign.mlp.b1", 1, spec.hidden);
      add("sign.mlp.W2", spec.hidden, spec.resolved_embed_dim());
      add("sign.mlp.b2", 1, spec.resolved_embed_dim());
      break;
    }
    default:
      break;  // NoGNN / LinearGNN have no encoder parameters
  }

  const std::size_t d = static_cast<std::size_t>(spec.resolved_embed_dim());
  switch (spec.decoder) {
    case DecoderKind::DistMult:
      add("dec.w", 1, d);
      add("dec.b", 1, 1);
      break;
    case DecoderKind::MLP: {
      const std::size_t hd = static_cast<std::size_t>(spec.resolved_decoder_hidden());
      add("dec.W1", 2 * d, hd);
      add("dec.b1", 1, hd);
      add("dec.w2", 1, hd);
      add("dec.b2", 1, 1);
      break;
    }
    default:
      break;  // DOT has no parameters
  }

  ps.values_.assign(offset, 0.0);
  ps.grad_.assign(offset, 0.0);
  return ps;
}

bool ParamStore::has(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

ParamStore::View ParamStore::make_view(std::vector<double>& buf, const std::string& name) {
  for (const auto& e : entries_)
    if (e.name == name) return View{buf.data() + e.offset, e.rows, e.cols};
  throw InputError("ParamStore: unknown tensor " + name);
}

ParamStore::View ParamStore::view(const std::string& name) { return make_view(values_, name); }

ParamStore::ConstView ParamStore::view(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return ConstView{values_.data() + e.offset, e.rows, e.cols};
  throw InputError("ParamStore: unknown tensor " + name);
}

ParamStore::View ParamStore::grad_view(const std::string& name) { return make_view(grad_, name); }

void ParamStore::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

std::uint64_t ParamStore::checksum() const {
  return fnv1a(values_.data(), values_.size() * sizeof(double));
}

namespace {

void write_u64_le(std::ostream& out, std::uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | b[i];
  return x;
}

constexpr char kParamMagic[4] = {'H', 'L', 'P', 'P'};

}  // namespace

void ParamStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("ParamStore::save: cannot open " + path);
  out.write(kParamMagic, 4);
  write_u64_le(out, entries_.size());
  for (const auto& e : entries_) {
    write_u64_le(out, e.name.size());
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    write_u64_le(out, e.rows);
    write_u64_le(out, e.cols);
  }
  // f64 little-endian flat vector; this code targets little-endian hosts.
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(values_.size() * sizeof(double)));
  if (!out) throw InputError("ParamStore::save: write failed for " + path);
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("ParamStore::load: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kParamMagic, 4) != 0)
    throw InputError("ParamStore::load: bad magic in " + path);
  ParamStore ps;
  const std::uint64_t count = read_u64_le(in);
  std::size_t offset = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    Entry e;
    const std::uint64_t len = read_u64_le(in);
    e.name.resize(len);
    in.read(e.name.data(), static_cast<std::streamsize>(len));
    e.offset = offset;
    e.rows = read_u64_le(in);
    e.cols = read_u64_le(in);
    offset += e.numel();
    ps.entries_.push_back(std::move(e));
  }
  if (!in) throw InputError("ParamStore::load: truncated header in " + path);
  ps.values_.assign(offset, 0.0);
  in.read(reinterpret_cast<char*>(ps.values_.data()),
          static_cast<std::streamsize>(offset * sizeof(double)));
  if (!in) throw InputError("ParamStore::load: truncated data in " + path);
  ps.grad_.assign(offset, 0.0);
  return ps;
}

namespace {

void add_bias_rows(Mat& M, const ParamStore::ConstView& b) {
  const std::int64_t n = static_cast<std::int64_t>(M.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double* mi = M.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < M.cols; ++j) mi[j] += b.data[j];
  }
}

Mat relu(const Mat& M) {
  Mat out(M.rows, M.cols);
  const std::int64_t n = static_cast<std::int64_t>(M.v.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    out.v[static_cast<std::size_t>(i)] = std::max(0.0, M.v[static_cast<std::size_t>(i)]);
  return out;
}

Mat linear(const Mat& X, ParamStore::ConstView W, ParamStore::ConstView b) {
  Mat out(X.rows, W.cols);
  kernels::gemm_nn(X.v.data(), X.rows, X.cols, W.data, W.cols, out.v.data());
  add_bias_rows(out, b);
  return out;
}

}  // namespace

Mat encode(const ModelSpec& spec, const ParamStore& params, const Graph& g, const Mat& X,
           EncodeCache* cache) {
  if (X.rows != g.n_nodes()) throw InputError("encode: feature rows != n_nodes");
  if (static_cast<int>(X.cols) != spec.in_dim)
    throw InputError("encode: feature dimension does not match spec.in_dim");
  const ParamStore& ps = params;

  switch (spec.encoder) {
    case EncoderKind::NoGNN:
      return X;
    case EncoderKind::LinearGNN:
      return selfloop_mean_apply(g, X);
    case EncoderKind::GCN: {
      Mat h = X;
      for (int l = 0; l < spec.layers; ++l) {
        const std::string p = "gcn.l" + std::to_string(l);
        Mat agg = normalized_adjacency_apply(g, h);
        Mat pre = linear(agg, ps.view(p + ".W"), ps.view(p + ".b"));
        if (cache) {
          cache->layer_in.push_back(std::move(h));
          cache->layer_agg.push_back(std::move(agg));
          cache->layer_pre.push_back(pre);
        }
        h = (l == spec.layers - 1) ? std::move(pre) : relu(pre);
      }
      return h;
    }
    case EncoderKind::SAGE: {
      Mat h = X;
      for (int l = 0; l < spec.layers; ++l) {
        const std::string p = "sage.l" + std::to_string(l);
        Mat nb = mean_neighbor_apply(g, h);
        Mat pre = linear(h, ps.view(p + ".W_self"), ps.view(p + ".b"));
        auto wnb = ps.view(p + ".W_nb");
        kernels::gemm_nn(nb.v.data(), nb.rows, nb.cols, wnb.data, wnb.cols, pre.v.data(),
                         /*accumulate=*/true);
        if (cache) {
          cache->layer_in.push_back(std::move(h));
          cache->layer_agg.push_back(std::move(nb));
          cache->layer_pre.push_back(pre);
        }
        h = (l == spec.layers - 1) ? std::move(pre) : relu(pre);
      }
      return h;
    }
    case EncoderKind::SIGN: {
      std::vector<Mat> powers;
      powers.push_back(X);
      for (int p = 1; p <= spec.powers; ++p)
        powers.push_back(normalized_adjacency_apply(g, powers.back()));
      const std::size_t h = static_cast<std::size_t>(spec.hidden);
      Mat concat(X.rows, static_cast<std::size_t>(spec.powers + 1) * h);
      for (int p = 0; p <= spec.powers; ++p) {
        const std::string pn = "sign.p" + std::to_string(p);
        Mat up = linear(powers[static_cast<std::size_t>(p)], ps.view(pn + ".W"), ps.view(pn + ".b"));
        const std::size_t col0 = static_cast<std::size_t>(p) * h;
        for (std::size_t i = 0; i < X.rows; ++i)
          std::memcpy(concat.row(i) + col0, up.row(i), h * sizeof(double));
      }
      Mat hidden_pre = linear(concat, ps.view("sign.mlp.W1"), ps.view("sign.mlp.b1"));
      Mat hidden = relu(hidden_pre);
      Mat z = linear(hidden, ps.view("sign.mlp.W2"), ps.view("sign.mlp.b2"));
      if (cache) {
        cache->sign_powers = std::move(powers);
        cache->sign_concat = std::move(concat);
        cache->sign_hidden_pre = std::move(hidden_pre);
      }
      return z;
    }
  }
  throw InputError("encode: unknown encoder");
}

double decode(const ModelSpec& spec, const ParamStore& params, std::span<const double> zi,
              std::span<const double> zj) {
  const std::size_t d = static_cast<std::size_t>(spec.resolved_embed_dim());
  if (zi.size() != d || zj.size() != d) throw InputError("decode: embedding dimension mismatch");
  const ParamStore& ps = params;
  switch (spec.decoder) {
    case DecoderKind::DOT: {
      double s = 0.0;
      for (std::size_t t = 0; t < d; ++t) s += zi[t] * zj[t];
      return s;
    }
    case DecoderKind::DistMult: {
      auto w = ps.view("dec.w");
      auto b = ps.view("dec.b");
      double s = b.data[0];
      for (std::size_t t = 0; t < d; ++t) s += w.data[t] * zi[t] * zj[t];
      return s;
    }
    case DecoderKind::MLP: {
      auto w1 = ps.view("dec.W1");
      auto b1 = ps.view("dec.b1");
      auto w2 = ps.view("dec.w2");
      auto b2 = ps.view("dec.b2");
      const std::size_t hd = w1.cols;
      auto f = [&](std::span<const double> a, std::span<const double> b_) {
        double s = b2.data[0];
        for (std::size_t t = 0; t < hd; ++t) {
          double pre = b1.data[t];
          for (std::size_t r = 0; r < d; ++r) pre += w1(r, t) * a[r];
          for (std::size_t r = 0; r < d; ++r) pre += w1(d + r, t) * b_[r];
          s += w2.data[t] * std::max(0.0, pre);
        }
        return s;
      };
      return 0.5 * (f(zi, zj) + f(zj, zi));
    }
  }
  throw InputError("decode: unknown decoder");
}

DecodeContext make_decode_context(const ModelSpec& spec, const ParamStore& params, const Mat& Z) {
  DecodeContext ctx;
  ctx.spec = &spec;
  ctx.params = &params;
  ctx.Z = &Z;
  if (spec.decoder == DecoderKind::MLP) {
    auto w1 = params.view("dec.W1");
    const std::size_t d = static_cast<std::size_t>(spec.resolved_embed_dim());
    const std::size_t hd = w1.cols;
    ctx.ZA = Mat(Z.rows, hd);
    ctx.ZB = Mat(Z.rows, hd);
    kernels::gemm_nn(Z.v.data(), Z.rows, d, w1.data, hd, ctx.ZA.v.data());
    kernels::gemm_nn(Z.v.data(), Z.rows, d, w1.data + d * hd, hd, ctx.ZB.v.data());
  }
  return ctx;
}

double DecodeContext::score(NodeId i, NodeId j) const {
  const std::size_t d = static_cast<std::size_t>(spec->resolved_embed_dim());
  const ParamStore& ps = *params;
  const double* zi = Z->row(i);
  const double* zj = Z->row(j);
  switch (spec->decoder) {
    case DecoderKind::DOT: {
      double s = 0.0;
      for (std::size_t t = 0; t < d; ++t) s += zi[t] * zj[t];
      return s;
    }
    case DecoderKind::DistMult: {
      auto w = ps.view("dec.w");
      double s = ps.view("dec.b").data[0];
      for (std::size_t t = 0; t < d; ++t) s += w.data[t] * zi[t] * zj[t];
      return s;
    }
    case DecoderKind::MLP: {
      auto b1 = ps.view("dec.b1");
      auto w2 = ps.view("dec.w2");
      const double b2 = ps.view("dec.b2").data[0];
      const std::size_t hd = ZA.cols;
      const double* ai = ZA.row(i);
      const double* bi = ZB.row(i);
      const double* aj = ZA.row(j);
      const double* bj = ZB.row(j);
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t t = 0; t < hd; ++t) {
        s1 += w2.data[t] * std::max(0.0, ai[t] + bj[t] + b1.data[t]);
        s2 += w2.data[t] * std::max(0.0, aj[t] + bi[t] + b1.data[t]);
      }
      return 0.5 * (s1 + s2) + b2;
    }
  }
  throw InputError("DecodeContext: unknown decoder");
}

std::vector<double> score_pairs(const ModelSpec& spec, const ParamStore& params, const Graph& g,
                                const Mat& X, std::span<const Edge> pairs) {
  for (const auto& [u, v] : pairs)
    if (u >= g.n_nodes() || v >= g.n_nodes()) throw InputError("score_pairs: node id out of range");
  Mat z = encode(spec, params, g, X);
  DecodeContext ctx = make_decode_context(spec, params, z);
  std::vector<double> out(pairs.size());
  const std::int64_t m = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i)
    out[static_cast<std::size_t>(i)] =
        ctx.score(pairs[static_cast<std::size_t>(i)].first, pairs[static_cast<std::size_t>(i)].second);
  return out;
}

}  // namespace hetlink
