#include "hetlink/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

#include "hetlink/common.hpp"
#include "hetlink/eval.hpp"
#include "hetlink/kernels.hpp"
#include "hetlink/rng.hpp"

namespace hetlink {

LossKind parse_loss(const std::string& s) {
  if (s == "hinge") return LossKind::Hinge;
  if (s == "logistic") return LossKind::Logistic;
  throw InputError("unknown loss: " + s);
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::SGD;
  if (s == "adam") return OptimizerKind::Adam;
  throw InputError("unknown optimizer: " + s);
}

void TrainConfig::validate() const {
  std::string bad;
  auto flag = [&](const char* f) {
    if (!bad.empty()) bad += ", ";
    bad += f;
  };
  if (epochs < 1) flag("epochs");
  if (!(learning_rate >= 0.0)) flag("learning_rate");
  if (k_neg < 1) flag("k_neg");
  if (l2_weight < 0.0) flag("l2_weight");
  if (eval_every < 1) flag("eval_every");
  if (!bad.empty()) throw InputError("invalid TrainConfig fields: " + bad);
}

LossGrad hinge_loss(double score, int y) {
  if (y != 0 && y != 1) throw InputError("hinge_loss: label must be 0 or 1");
  LossGrad out;
  if (y == 1) {
    out.loss = std::max(0.0, -score);
    out.dscore = score < 0.0 ? -1.0 : 0.0;  // subgradient at 0 is 0
  } else {
    out.loss = std::max(0.0, score);
    out.dscore = score > 0.0 ? 1.0 : 0.0;
  }
  return out;
}

LossGrad logistic_loss(double score, int y) {
  if (y != 0 && y != 1) throw InputError("logistic_loss: label must be 0 or 1");
  LossGrad out;
  const double softplus = std::max(score, 0.0) + std::log1p(std::exp(-std::abs(score)));
  out.loss = softplus - y * score;
  const double sigmoid = 1.0 / (1.0 + std::exp(-score));
  out.dscore = sigmoid - y;
  return out;
}

std::vector<Edge> sample_negatives(const Graph& reject, std::span<const Edge> positives, int k_neg,
                                   std::uint64_t seed) {
  if (k_neg < 1) throw InputError("sample_negatives: k_neg must be >= 1");
  const std::size_t n = reject.n_nodes();
  std::vector<Edge> negs(positives.size() * static_cast<std::size_t>(k_neg));
  const std::int64_t m = static_cast<std::int64_t>(positives.size());
  bool cap_exceeded = false;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(i), /*tag=*/0xA3));
    const NodeId u = positives[static_cast<std::size_t>(i)].first;
    for (int k = 0; k < k_neg; ++k) {
      bool ok = false;
      for (int attempt = 0; attempt < 10000; ++attempt) {
        const NodeId cand = static_cast<NodeId>(rng.uniform_index(n));
        if (cand == u || reject.has_edge(u, cand)) continue;
        negs[static_cast<std::size_t>(i) * k_neg + static_cast<std::size_t>(k)] = {u, cand};
        ok = true;
        break;
      }
      if (!ok) {
#pragma omp atomic write
        cap_exceeded = true;
      }
    }
  }
  if (cap_exceeded)
    throw ResourceError("sample_negatives: rejection sampling exceeded retry cap (graph too dense)");
  return negs;
}

namespace {

LossGrad eval_loss(LossKind kind, double score, int y) {
  return kind == LossKind::Hinge ? hinge_loss(score, y) : logistic_loss(score, y);
}

// Node -> (pair index, endpoint role) incidence, in pair order per node, so
// scattering per-pair gradient rows into node rows is deterministic and
// parallel over nodes.
struct ScatterIndex {
  std::vector<std::uint64_t> offsets;  // n+1
  std::vector<std::uint64_t> slots;    // (pair << 1) | role

  static ScatterIndex build(std::size_t n, std::span<const Edge> pairs) {
    ScatterIndex idx;
    idx.offsets.assign(n + 1, 0);
    for (const auto& [u, v] : pairs) {
      ++idx.offsets[u + 1];
      ++idx.offsets[v + 1];
    }
    for (std::size_t i = 1; i <= n; ++i) idx.offsets[i] += idx.offsets[i - 1];
    idx.slots.assign(idx.offsets[n], 0);
    std::vector<std::uint64_t> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      idx.slots[cursor[pairs[p].first]++] = (static_cast<std::uint64_t>(p) << 1) | 0u;
      idx.slots[cursor[pairs[p].second]++] = (static_cast<std::uint64_t>(p) << 1) | 1u;
    }
    return idx;
  }
};

void colsum_into(const Mat& M, double* out, bool accumulate) {
  const std::int64_t cols = static_cast<std::int64_t>(M.cols);
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < M.rows; ++i) acc += M(i, static_cast<std::size_t>(j));
    if (accumulate)
      out[static_cast<std::size_t>(j)] += acc;
    else
      out[static_cast<std::size_t>(j)] = acc;
  }
}

void relu_backward_inplace(Mat& grad, const Mat& pre) {
  const std::int64_t n = static_cast<std::int64_t>(grad.v.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    if (pre.v[static_cast<std::size_t>(i)] <= 0.0) grad.v[static_cast<std::size_t>(i)] = 0.0;
}

void add_inplace(Mat& a, const Mat& b) {
  const std::int64_t n = static_cast<std::int64_t>(a.v.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    a.v[static_cast<std::size_t>(i)] += b.v[static_cast<std::size_t>(i)];
}

// Decoder backward over the batch. Writes decoder parameter grads, returns
// the per-pair losses and dL/dZ (and for MLP the dZA/dZB node grads used for
// the first-layer weight). Pair loops run over fixed chunks; chunk partials
// merge in chunk order.
struct DecoderBackwardResult {
  std::vector<double> losses;
  Mat dZ;  // n x d
};

DecoderBackwardResult decoder_backward(const ModelSpec& spec, ParamStore& params, const Mat& Z,
                                       const Batch& batch, LossKind loss_kind) {
  const std::size_t B = batch.pairs.size();
  const std::size_t d = static_cast<std::size_t>(spec.resolved_embed_dim());
  const std::size_t n = Z.rows;
  const double inv_b = 1.0 / static_cast<double>(B);
  const DecodeContext ctx = make_decode_context(spec, params, Z);
  const ScatterIndex scatter = ScatterIndex::build(n, batch.pairs);
  const std::size_t n_chunks = (B + kernels::kChunk - 1) / kernels::kChunk;

  DecoderBackwardResult out;
  out.losses.assign(B, 0.0);
  out.dZ = Mat(n, d);

  switch (spec.decoder) {
    case DecoderKind::DOT: {
      Mat left(B, d), right(B, d);
      const std::int64_t nc = static_cast<std::int64_t>(n_chunks);
#pragma omp parallel for schedule(static)
      for (std::int64_t c = 0; c < nc; ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kernels::kChunk;
        const std::size_t hi = std::min(lo + kernels::kChunk, B);
        for (std::size_t p = lo; p < hi; ++p) {
          const auto [i, j] = batch.pairs[p];
          const double* zi = Z.row(i);
          const double* zj = Z.row(j);
          double s = 0.0;
          for (std::size_t t = 0; t < d; ++t) s += zi[t] * zj[t];
          const LossGrad lg = eval_loss(loss_kind, s, batch.labels[p]);
          out.losses[p] = lg.loss;
          const double ds = lg.dscore * inv_b;
          double* gl = left.row(p);
          double* gr = right.row(p);
          for (std::size_t t = 0; t < d; ++t) {
            gl[t] = ds * zj[t];
            gr[t] = ds * zi[t];
          }
        }
      }
      const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
      for (std::int64_t v = 0; v < ni; ++v) {
        double* dzv = out.dZ.row(static_cast<std::size_t>(v));
        for (std::uint64_t s = scatter.offsets[static_cast<std::size_t>(v)];
             s < scatter.offsets[static_cast<std::size_t>(v) + 1]; ++s) {
          const std::uint64_t slot = scatter.slots[s];
          const double* g = (slot & 1u) ? right.row(slot >> 1) : left.row(slot >> 1);
          for (std::size_t t = 0; t < d; ++t) dzv[t] += g[t];
        }
      }
      break;
    }
    case DecoderKind::DistMult: {
      auto w = params.view("dec.w");
      Mat left(B, d), right(B, d);
      Mat chunk_w(n_chunks, d);
      std::vector<double> chunk_b(n_chunks, 0.0);
      const std::int64_t nc = static_cast<std::int64_t>(n_chunks);
#pragma omp parallel for schedule(static)
      for (std::int64_t c = 0; c < nc; ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kernels::kChunk;
        const std::size_t hi = std::min(lo + kernels::kChunk, B);
        double* cw = chunk_w.row(static_cast<std::size_t>(c));
        double& cb = chunk_b[static_cast<std::size_t>(c)];
        for (std::size_t p = lo; p < hi; ++p) {
          const auto [i, j] = batch.pairs[p];
          const double* zi = Z.row(i);
          const double* zj = Z.row(j);
          double s = params.view("dec.b").data[0];
          for (std::size_t t = 0; t < d; ++t) s += w.data[t] * zi[t] * zj[t];
          const LossGrad lg = eval_loss(loss_kind, s, batch.labels[p]);
          out.losses[p] = lg.loss;
          const double ds = lg.dscore * inv_b;
          cb += ds;
          double* gl = left.row(p);
          double* gr = right.row(p);
          for (std::size_t t = 0; t < d; ++t) {
            cw[t] += ds * zi[t] * zj[t];
            gl[t] = ds * w.data[t] * zj[t];
            gr[t] = ds * w.data[t] * zi[t];
          }
        }
      }
      auto gw = params.grad_view("dec.w");
      auto gb = params.grad_view("dec.b");
      for (std::size_t c = 0; c < n_chunks; ++c) {
        const double* cw = chunk_w.row(c);
        for (std::size_t t = 0; t < d; ++t) gw.data[t] += cw[t];
        gb.data[0] += chunk_b[c];
      }
      const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
      for (std::int64_t v = 0; v < ni; ++v) {
        double* dzv = out.dZ.row(static_cast<std::size_t>(v));
        for (std::uint64_t s = scatter.offsets[static_cast<std::size_t>(v)];
             s < scatter.offsets[static_cast<std::size_t>(v) + 1]; ++s) {
          const std::uint64_t slot = scatter.slots[s];
          const double* g = (slot & 1u) ? right.row(slot >> 1) : left.row(slot >> 1);
          for (std::size_t t = 0; t < d; ++t) dzv[t] += g[t];
        }
      }
      break;
    }
    case DecoderKind::MLP: {
      auto b1 = params.view("dec.b1");
      auto w2 = params.view("dec.w2");
      auto b2 = params.view("dec.b2");
      const std::size_t hd = ctx.ZA.cols;
      // Per-pair hidden grads for both concatenation orders.
      Mat dh_fwd(B, hd), dh_rev(B, hd);
      Mat chunk_w2(n_chunks, hd), chunk_b1(n_chunks, hd);
      std::vector<double> chunk_b2(n_chunks, 0.0);
      const std::int64_t nc = static_cast<std::int64_t>(n_chunks);
#pragma omp parallel for schedule(static)
      for (std::int64_t c = 0; c < nc; ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kernels::kChunk;
        const std::size_t hi = std::min(lo + kernels::kChunk, B);
        double* cw2 = chunk_w2.row(static_cast<std::size_t>(c));
        double* cb1 = chunk_b1.row(static_cast<std::size_t>(c));
        double& cb2 = chunk_b2[static_cast<std::size_t>(c)];
        for (std::size_t p = lo; p < hi; ++p) {
          const auto [i, j] = batch.pairs[p];
          const double* ai = ctx.ZA.row(i);
          const double* bi = ctx.ZB.row(i);
          const double* aj = ctx.ZA.row(j);
          const double* bj = ctx.ZB.row(j);
          double s_fwd = 0.0, s_rev = 0.0;
          for (std::size_t t = 0; t < hd; ++t) {
            s_fwd += w2.data[t] * std::max(0.0, ai[t] + bj[t] + b1.data[t]);
            s_rev += w2.data[t] * std::max(0.0, aj[t] + bi[t] + b1.data[t]);
          }
          const double score = 0.5 * (s_fwd + s_rev) + b2.data[0];
          const LossGrad lg = eval_loss(loss_kind, score, batch.labels[p]);
          out.losses[p] = lg.loss;
          const double ds = lg.dscore * inv_b;
          cb2 += ds;
          const double ds_half = 0.5 * ds;
          double* gf = dh_fwd.row(p);
          double* gr = dh_rev.row(p);
          for (std::size_t t = 0; t < hd; ++t) {
            const double pre_f = ai[t] + bj[t] + b1.data[t];
            const double pre_r = aj[t] + bi[t] + b1.data[t];
            const double hf = std::max(0.0, pre_f);
            const double hr = std::max(0.0, pre_r);
            cw2[t] += ds_half * (hf + hr);
            gf[t] = pre_f > 0.0 ? ds_half * w2.data[t] : 0.0;
            gr[t] = pre_r > 0.0 ? ds_half * w2.data[t] : 0.0;
            cb1[t] += gf[t] + gr[t];
          }
        }
      }
      auto gw2 = params.grad_view("dec.w2");
      auto gb1 = params.grad_view("dec.b1");
      auto gb2 = params.grad_view("dec.b2");
      for (std::size_t c = 0; c < n_chunks; ++c) {
        const double* cw2 = chunk_w2.row(c);
        const double* cb1 = chunk_b1.row(c);
        for (std::size_t t = 0; t < hd; ++t) {
          gw2.data[t] += cw2[t];
          gb1.data[t] += cb1[t];
        }
        gb2.data[0] += chunk_b2[c];
      }

      // Node-level grads of the per-node projections: for pair (i,j),
      // dZA[i] += dh_fwd, dZB[j] += dh_fwd, dZA[j] += dh_rev, dZB[i] += dh_rev.
      Mat dZA(n, hd), dZB(n, hd);
      const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
      for (std::int64_t v = 0; v < ni; ++v) {
        double* da = dZA.row(static_cast<std::size_t>(v));
        double* db = dZB.row(static_cast<std::size_t>(v));
        for (std::uint64_t s = scatter.offsets[static_cast<std::size_t>(v)];
             s < scatter.offsets[static_cast<std::size_t>(v) + 1]; ++s) {
          const std::uint64_t slot = scatter.slots[s];
          const std::size_t p = slot >> 1;
          const double* a_contrib = (slot & 1u) ? dh_rev.row(p) : dh_fwd.row(p);
          const double* b_contrib = (slot & 1u) ? dh_fwd.row(p) : dh_rev.row(p);
          for (std::size_t t = 0; t < hd; ++t) {
            da[t] += a_contrib[t];
            db[t] += b_contrib[t];
          }
        }
      }

      // dW1 = [Z^T dZA ; Z^T dZB]; dZ = dZA A^T + dZB B^T.
      auto gw1 = params.grad_view("dec.W1");
      kernels::gemm_at_b(Z.v.data(), n, d, dZA.v.data(), hd, gw1.data, /*accumulate=*/true);
      kernels::gemm_at_b(Z.v.data(), n, d, dZB.v.data(), hd, gw1.data + d * hd,
                         /*accumulate=*/true);
      auto w1 = params.view("dec.W1");
      kernels::gemm_a_bt(dZA.v.data(), n, hd, w1.data, d, out.dZ.v.data(), /*accumulate=*/false);
      kernels::gemm_a_bt(dZB.v.data(), n, hd, w1.data + d * hd, d, out.dZ.v.data(),
                         /*accumulate=*/true);
      break;
    }
  }
  return out;
}

void encoder_backward(const ModelSpec& spec, ParamStore& params, const Graph& g,
                      const EncodeCache& cache, Mat dZ) {
  switch (spec.encoder) {
    case EncoderKind::NoGNN:
    case EncoderKind::LinearGNN:
      return;  // no encoder parameters
    case EncoderKind::GCN: {
      Mat dh = std::move(dZ);
      for (int l = spec.layers - 1; l >= 0; --l) {
        const std::string p = "gcn.l" + std::to_string(l);
        Mat dpre = std::move(dh);
        if (l != spec.layers - 1) relu_backward_inplace(dpre, cache.layer_pre[static_cast<std::size_t>(l)]);
        auto gw = params.grad_view(p + ".W");
        auto gb = params.grad_view(p + ".b");
        const Mat& agg = cache.layer_agg[static_cast<std::size_t>(l)];
        kernels::gemm_at_b(agg.v.data(), agg.rows, agg.cols, dpre.v.data(), dpre.cols, gw.data,
                           /*accumulate=*/true);
        colsum_into(dpre, gb.data, /*accumulate=*/true);
        if (l > 0) {
          auto w = params.view(p + ".W");
          Mat dagg(dpre.rows, agg.cols);
          kernels::gemm_a_bt(dpre.v.data(), dpre.rows, dpre.cols, w.data, w.rows, dagg.v.data());
          dh = normalized_adjacency_apply(g, dagg);  // symmetric operator
        }
      }
      return;
    }
    case EncoderKind::SAGE: {
      Mat dh = std::move(dZ);
      for (int l = spec.layers - 1; l >= 0; --l) {
        const std::string p = "sage.l" + std::to_string(l);
        Mat dpre = std::move(dh);
        if (l != spec.layers - 1) relu_backward_inplace(dpre, cache.layer_pre[static_cast<std::size_t>(l)]);
        const Mat& hin = cache.layer_in[static_cast<std::size_t>(l)];
        const Mat& nb = cache.layer_agg[static_cast<std::size_t>(l)];
        auto gws = params.grad_view(p + ".W_self");
        auto gwn = params.grad_view(p + ".W_nb");
        auto gb = params.grad_view(p + ".b");
        kernels::gemm_at_b(hin.v.data(), hin.rows, hin.cols, dpre.v.data(), dpre.cols, gws.data,
                           /*accumulate=*/true);
        kernels::gemm_at_b(nb.v.data(), nb.rows, nb.cols, dpre.v.data(), dpre.cols, gwn.data,
                           /*accumulate=*/true);
        colsum_into(dpre, gb.data, /*accumulate=*/true);
        if (l > 0) {
          auto ws = params.view(p + ".W_self");
          auto wn = params.view(p + ".W_nb");
          Mat dself(dpre.rows, hin.cols);
          kernels::gemm_a_bt(dpre.v.data(), dpre.rows, dpre.cols, ws.data, ws.rows, dself.v.data());
          Mat dnb(dpre.rows, hin.cols);
          kernels::gemm_a_bt(dpre.v.data(), dpre.rows, dpre.cols, wn.data, wn.rows, dnb.v.data());
          dh = mean_neighbor_apply_transpose(g, dnb);
          add_inplace(dh, dself);
        }
      }
      return;
    }
    case EncoderKind::SIGN: {
      const std::size_t h = static_cast<std::size_t>(spec.hidden);
      Mat hidden(cache.sign_hidden_pre.rows, cache.sign_hidden_pre.cols);
      for (std::size_t i = 0; i < hidden.v.size(); ++i)
        hidden.v[i] = std::max(0.0, cache.sign_hidden_pre.v[i]);
      auto gw2 = params.grad_view("sign.mlp.W2");
      auto gb2 = params.grad_view("sign.mlp.b2");
      kernels::gemm_at_b(hidden.v.data(), hidden.rows, hidden.cols, dZ.v.data(), dZ.cols, gw2.data,
                         /*accumulate=*/true);
      colsum_into(dZ, gb2.data, /*accumulate=*/true);
      auto w2 = params.view("sign.mlp.W2");
      Mat dhidden(dZ.rows, h);
      kernels::gemm_a_bt(dZ.v.data(), dZ.rows, dZ.cols, w2.data, w2.rows, dhidden.v.data());
      relu_backward_inplace(dhidden, cache.sign_hidden_pre);
      auto gw1 = params.grad_view("sign.mlp.W1");
      auto gb1 = params.grad_view("sign.mlp.b1");
      const Mat& concat = cache.sign_concat;
      kernels::gemm_at_b(concat.v.data(), concat.rows, concat.cols, dhidden.v.data(), dhidden.cols,
                         gw1.data, /*accumulate=*/true);
      colsum_into(dhidden, gb1.data, /*accumulate=*/true);
      auto w1 = params.view("sign.mlp.W1");
      Mat dconcat(dZ.rows, concat.cols);
      kernels::gemm_a_bt(dhidden.v.data(), dhidden.rows, dhidden.cols, w1.data, w1.rows,
                         dconcat.v.data());
      for (int p = 0; p <= spec.powers; ++p) {
        const std::string pn = "sign.p" + std::to_string(p);
        const Mat& xp = cache.sign_powers[static_cast<std::size_t>(p)];
        // Column slice of dconcat for this power's linear map.
        Mat dup(dZ.rows, h);
        const std::size_t col0 = static_cast<std::size_t>(p) * h;
        for (std::size_t i = 0; i < dZ.rows; ++i)
          std::memcpy(dup.row(i), dconcat.row(i) + col0, h * sizeof(double));
        auto gw = params.grad_view(pn + ".W");
        auto gb = params.grad_view(pn + ".b");
        kernels::gemm_at_b(xp.v.data(), xp.rows, xp.cols, dup.v.data(), dup.cols, gw.data,
                           /*accumulate=*/true);
        colsum_into(dup, gb.data, /*accumulate=*/true);
      }
      return;
    }
  }
}

}  // namespace

double backward(const ModelSpec& spec, ParamStore& params, const Graph& g, const Mat& X,
                const Batch& batch, LossKind loss, double l2_weight) {
  if (batch.pairs.size() != batch.labels.size())
    throw InputError("backward: pairs/labels size mismatch");
  params.zero_grad();

  double objective = 0.0;
  if (!batch.pairs.empty()) {
    EncodeCache cache;
    Mat Z = encode(spec, params, g, X, &cache);
    DecoderBackwardResult dec = decoder_backward(spec, params, Z, batch, loss);
    objective = kernels::fixed_order_sum(dec.losses) / static_cast<double>(batch.pairs.size());
    encoder_backward(spec, params, g, cache, std::move(dec.dZ));
  }

  if (l2_weight != 0.0) {
    auto values = params.values();
    auto grad = params.grad();
    std::vector<double> sq(values.size());
    const std::int64_t n = static_cast<std::int64_t>(values.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const std::size_t iu = static_cast<std::size_t>(i);
      sq[iu] = values[iu] * values[iu];
      grad[iu] += 2.0 * l2_weight * values[iu];
    }
    objective += l2_weight * kernels::fixed_order_sum(sq);
  }
  return objective;
}

void init_params(const ModelSpec& spec, ParamStore& params, std::uint64_t seed) {
  std::size_t entry_index = 0;
  for (const auto& e : params.entries()) {
    auto v = params.view(e.name);
    SplitMix64 rng(mix_seed(seed, entry_index++, /*tag=*/0x17));
    const bool is_bias = e.name.ends_with(".b") || e.name.ends_with(".b1") || e.name.ends_with(".b2");
    if (is_bias && e.name != "dec.b" && e.name != "dec.b2") {
      for (std::size_t i = 0; i < e.numel(); ++i) v.data[i] = 0.0;
    } else if (e.name == "dec.b" || e.name == "dec.b2") {
      v.data[0] = 0.0;
    } else if (e.name == "dec.w" && spec.decoder == DecoderKind::DistMult) {
      // DOT-like start: all-ones scaled by 1/embed_dim.
      for (std::size_t i = 0; i < e.numel(); ++i)
        v.data[i] = 1.0 / static_cast<double>(e.numel());
    } else {
      const double s = std::sqrt(6.0 / static_cast<double>(e.rows + e.cols));
      for (std::size_t i = 0; i < e.numel(); ++i) v.data[i] = (2.0 * rng.uniform01() - 1.0) * s;
    }
  }
}

namespace {

struct Optimizer {
  OptimizerKind kind;
  double lr, beta1, beta2, eps;
  std::vector<double> m, v;
  long t = 0;

  void step(std::span<double> values, std::span<const double> grad) {
    const std::int64_t n = static_cast<std::int64_t>(values.size());
    if (kind == OptimizerKind::SGD) {
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < n; ++i)
        values[static_cast<std::size_t>(i)] -= lr * grad[static_cast<std::size_t>(i)];
      return;
    }
    if (m.empty()) {
      m.assign(values.size(), 0.0);
      v.assign(values.size(), 0.0);
    }
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const std::size_t iu = static_cast<std::size_t>(i);
      m[iu] = beta1 * m[iu] + (1.0 - beta1) * grad[iu];
      v[iu] = beta2 * v[iu] + (1.0 - beta2) * grad[iu] * grad[iu];
      values[iu] -= lr * (m[iu] / bc1) / (std::sqrt(v[iu] / bc2) + eps);
    }
  }
};

}  // namespace

TrainTrace train(const ModelSpec& spec, ParamStore& params, const Graph& g_train, const Mat& X,
                 const EdgeSplit& split, const TrainConfig& cfg, const Graph& g_reject) {
  cfg.validate();
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Batch batch;
  batch.pairs = split.train;
  auto negs = sample_negatives(g_train, split.train, cfg.k_neg, mix_seed(cfg.seed, 0, 0xB0));
  batch.labels.assign(split.train.size(), 1);
  batch.pairs.insert(batch.pairs.end(), negs.begin(), negs.end());
  batch.labels.insert(batch.labels.end(), negs.size(), 0);

  Optimizer opt{cfg.optimizer, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps, {}, {}, 0};

  TrainTrace trace;
  std::vector<double> best_params;
  EvalConfig val_cfg;
  val_cfg.metric = MetricKind::MRR;
  val_cfg.n_neg = cfg.val_n_neg;
  val_cfg.seed = mix_seed(cfg.seed, 1, 0xB1);
  std::span<const Edge> val_pairs(split.valid.data(),
                                  std::min<std::size_t>(split.valid.size(),
                                                        static_cast<std::size_t>(cfg.val_max_positives)));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double loss = backward(spec, params, g_train, X, batch, cfg.loss, cfg.l2_weight);
    if (!std::isfinite(loss))
      throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
    if (loss > 1e6)
      throw NumericError("train: divergence (loss " + std::to_string(loss) + ") at epoch " +
                         std::to_string(epoch));
    trace.epoch_loss.push_back(loss);

    // Once the loss target is met, keep the parameters that met it: an Adam
    // step with nonzero momentum would move them even at zero gradient.
    const bool stop = cfg.stop_below_loss >= 0.0 && loss <= cfg.stop_below_loss;
    if (!stop) opt.step(params.values(), params.grad());

    if (!val_pairs.empty() && (epoch % cfg.eval_every == 0 || epoch == cfg.epochs || stop)) {
      const double val = mrr(spec, params, g_train, X, val_pairs, val_cfg, g_reject);
      trace.val_mrr.emplace_back(epoch, val);
      if (val > trace.best_val_mrr) {
        trace.best_val_mrr = val;
        trace.best_epoch = epoch;
        best_params.assign(params.values().begin(), params.values().end());
      }
    }

    if (stop) break;
  }

  // Model selection by best validation MRR; without a validation set the
  // final parameters stand.
  if (!best_params.empty())
    std::copy(best_params.begin(), best_params.end(), params.values().begin());
  if (trace.best_epoch < 0) trace.best_epoch = cfg.epochs;

  trace.final_checksum = params.checksum();
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

}  // namespace hetlink
