// SPDX-License-Identifier: Apache-2.0
//
// Manual reverse-mode gradients for the toy model and the training loop.
#include <cmath>
#include <stdexcept>

#include "lat/model.hpp"
#include "model_internal.hpp"

namespace lat {

namespace {

using detail::AttentionCache;
using detail::DecoderCache;
using detail::EncoderCache;
using detail::FfnCache;
using detail::LayerNormCache;
using detail::LstmStepCache;

struct PositionLoss {
  std::vector<LstmStepCache> steps;    // executed steps (stops before PAD gold)
  std::vector<TokenId> gold;           // gold token per executed step
  std::vector<double> weight;          // loss weight per executed step
};

// teacher-forced local-head forward for one decoder position
double position_forward(const ModelParams& params, const TrainExample& ex, int pos,
                        const Matrix& pos_states, double alpha, PositionLoss* out) {
  const ModelConfig& cfg = params.config;
  const int n = static_cast<int>(ex.target_full.size());
  const int orig = ex.orig_index[static_cast<std::size_t>(pos)];
  double loss = 0.0;
  Vector h = pos_states.row(pos).transpose();
  Vector c = Vector::Zero(cfg.d_model);
  TokenId input = kSopId;
  for (int j = 0; j < cfg.k_steps; ++j) {
    const int gold_idx = orig + j;
    const TokenId gold = gold_idx < n ? ex.target_full[static_cast<std::size_t>(gold_idx)] : kPadId;
    if (gold == kPadId) break;  // past the terminator: no further loss
    LstmStepCache step;
    detail::lstm_step(params.local, params.tok_emb.row(input).transpose(), h, c, step);
    step.input_token = input;
    const double w = ex.is_masked[static_cast<std::size_t>(gold_idx)] ? 1.0 : alpha;
    loss -= w * step.log_probs(gold);
    h = step.h;
    c = step.c;
    input = gold;
    if (out) {
      out->steps.push_back(std::move(step));
      out->gold.push_back(gold);
      out->weight.push_back(w);
    }
  }
  return loss;
}

// backpropagate one position's local head; returns d(pos vector)
Vector position_backward(const ModelParams& params, const PositionLoss& pl, ModelParams& grads) {
  const Eigen::Index d = params.config.d_model;
  Vector dh = Vector::Zero(d);
  Vector dc = Vector::Zero(d);
  for (int j = static_cast<int>(pl.steps.size()) - 1; j >= 0; --j) {
    const LstmStepCache& s = pl.steps[static_cast<std::size_t>(j)];
    // softmax cross-entropy at this step
    Vector dz = (s.log_probs.array().exp() * pl.weight[static_cast<std::size_t>(j)]).matrix();
    dz(pl.gold[static_cast<std::size_t>(j)]) -= pl.weight[static_cast<std::size_t>(j)];
    grads.local.w_out += s.h * dz.transpose();
    grads.local.b_out += dz;
    dh += params.local.w_out * dz;

    Vector do_ = dh.cwiseProduct(s.tanh_c);
    dc += dh.cwiseProduct(s.go).cwiseProduct(
        (1.0 - s.tanh_c.array().square()).matrix());
    Vector di = dc.cwiseProduct(s.gg);
    Vector df = dc.cwiseProduct(s.c_prev);
    Vector dg = dc.cwiseProduct(s.gi);
    Vector da(4 * d);
    da.segment(0, d) = di.array() * s.gi.array() * (1.0 - s.gi.array());
    da.segment(d, d) = df.array() * s.gf.array() * (1.0 - s.gf.array());
    da.segment(2 * d, d) = dg.array() * (1.0 - s.gg.array().square());
    da.segment(3 * d, d) = do_.array() * s.go.array() * (1.0 - s.go.array());

    grads.local.wx += s.x * da.transpose();
    grads.local.wh += s.h_prev * da.transpose();
    grads.local.b += da;
    grads.tok_emb.row(s.input_token) += (params.local.wx * da).transpose();
    dh = params.local.wh * da;
    dc = dc.cwiseProduct(s.gf);
  }
  return dh;  // gradient w.r.t. h0 = pos vector
}

struct ExampleLosses {
  double token = 0.0;
  double length = 0.0;
};

ExampleLosses example_pass(const ModelParams& params, const TrainExample& ex, double alpha,
                           ModelParams* grads) {
  const ModelConfig& cfg = params.config;
  ExampleLosses losses;

  EncoderCache enc;
  detail::encoder_forward(params, ex.source, enc);

  const int n_full = static_cast<int>(ex.target_full.size());
  if (n_full > cfg.max_len) throw std::runtime_error("target too long");
  // length label is the content length: the merger's output has the EOS
  // truncated away, so this is the length the decoder converges to
  const int length_class = std::max(1, n_full - 1);
  // plain log-softmax: every length class is legal
  const double len_max = enc.length_logits.maxCoeff();
  const double len_lse =
      len_max + std::log((enc.length_logits.array() - len_max).exp().sum());
  Vector len_logp = enc.length_logits.array() - len_lse;
  losses.length = -len_logp(length_class - 1);

  DecoderCache dec;
  detail::decoder_forward(params, ex.decoder_input, enc.out, dec);

  const int positions = static_cast<int>(ex.decoder_input.size());
  std::vector<PositionLoss> position_caches;
  if (grads) position_caches.resize(static_cast<std::size_t>(positions));
  for (int p = 0; p < positions; ++p) {
    losses.token += position_forward(params, ex, p, dec.out, alpha,
                                     grads ? &position_caches[static_cast<std::size_t>(p)]
                                           : nullptr);
  }
  if (!grads) return losses;

  ModelParams& g = *grads;

  // length head
  Vector dlen = len_logp.array().exp();
  dlen(length_class - 1) -= 1.0;
  g.length.w += enc.out.row(0).transpose() * dlen.transpose();
  g.length.b += dlen;
  Matrix denc_out = Matrix::Zero(enc.out.rows(), cfg.d_model);
  denc_out.row(0) += (params.length.w * dlen).transpose();

  // local heads -> pos vectors
  Matrix dpos = Matrix::Zero(positions, cfg.d_model);
  for (int p = 0; p < positions; ++p) {
    dpos.row(p) = position_backward(params, position_caches[static_cast<std::size_t>(p)], g)
                      .transpose();
  }

  // decoder stack
  if (positions > 0) {
    Matrix dr3 = detail::layer_norm_backward(params.decoder.ln_ffn, dec.ln_ffn, dpos,
                                             g.decoder.ln_ffn);
    Matrix dn2 = dr3;
    dn2 += detail::ffn_backward(params.decoder.ffn, dec.ffn, dr3, g.decoder.ffn);
    Matrix dr2 = detail::layer_norm_backward(params.decoder.ln_cross, dec.ln_cross, dn2,
                                             g.decoder.ln_cross);
    Matrix dn1 = dr2;
    dn1 += detail::attention_backward(params.decoder.cross_attn, cfg.heads, dec.cross_attn, dr2,
                                      g.decoder.cross_attn, denc_out);
    Matrix dr1 = detail::layer_norm_backward(params.decoder.ln_self, dec.ln_self, dn1,
                                             g.decoder.ln_self);
    Matrix dy0 = dr1;
    Matrix dy0_kv = Matrix::Zero(positions, cfg.d_model);
    dy0 += detail::attention_backward(params.decoder.self_attn, cfg.heads, dec.self_attn, dr1,
                                      g.decoder.self_attn, dy0_kv);
    dy0 += dy0_kv;
    for (int p = 0; p < positions; ++p) {
      g.tok_emb.row(dec.input[static_cast<std::size_t>(p)]) += dy0.row(p);
      g.pos_emb.row(p) += dy0.row(p);
    }
  }

  // encoder stack
  Matrix der2 = detail::layer_norm_backward(params.encoder.ln_ffn, enc.ln2, denc_out,
                                            g.encoder.ln_ffn);
  Matrix den1 = der2;
  den1 += detail::ffn_backward(params.encoder.ffn, enc.ffn, der2, g.encoder.ffn);
  Matrix der1 = detail::layer_norm_backward(params.encoder.ln_attn, enc.ln1, den1,
                                            g.encoder.ln_attn);
  Matrix dx0 = der1;
  Matrix dx0_kv = Matrix::Zero(enc.x0.rows(), cfg.d_model);
  dx0 += detail::attention_backward(params.encoder.self_attn, cfg.heads, enc.attn, der1,
                                    g.encoder.self_attn, dx0_kv);
  dx0 += dx0_kv;
  for (Eigen::Index r = 0; r < dx0.rows(); ++r) {
    g.tok_emb.row(enc.input[static_cast<std::size_t>(r)]) += dx0.row(r);
    g.pos_emb.row(r) += dx0.row(r);
  }
  return losses;
}

}  // namespace

LossResult training_loss(const ModelParams& params, const std::vector<TrainExample>& batch,
                         double alpha) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  LossResult result;
  result.grads = zeros_like(params.config);
  for (const TrainExample& ex : batch) {
    ExampleLosses l = example_pass(params, ex, alpha, &result.grads);
    result.token_loss += l.token;
    result.length_loss += l.length;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  result.token_loss *= inv;
  result.length_loss *= inv;
  result.loss = result.token_loss + result.length_loss;
  for (ArrayRef& a : array_refs(result.grads)) {
    Eigen::Map<Eigen::ArrayXd>(a.data, a.size()) *= inv;
  }
  if (!std::isfinite(result.loss)) throw std::runtime_error("numerical divergence");
  return result;
}

double training_loss_value(const ModelParams& params, const std::vector<TrainExample>& batch,
                           double alpha) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  double total = 0.0;
  for (const TrainExample& ex : batch) {
    ExampleLosses l = example_pass(params, ex, alpha, nullptr);
    total += l.token + l.length;
  }
  total /= static_cast<double>(batch.size());
  if (!std::isfinite(total)) throw std::runtime_error("numerical divergence");
  return total;
}

std::vector<TraceEntry> train(ModelParams& params, const std::vector<SentencePair>& pairs,
                              const TrainConfig& cfg) {
  const ModelConfig& mc = params.config;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [src, tgt] = pairs[i];
    if (static_cast<int>(src.size()) + 1 <= mc.max_len &&
        static_cast<int>(tgt.size()) + 1 <= mc.max_len) {
      usable.push_back(i);
    }
  }
  if (usable.empty()) throw std::runtime_error("empty corpus");

  std::mt19937_64 rng(cfg.seed);
  ModelParams m1 = zeros_like(mc);
  ModelParams m2 = zeros_like(mc);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  std::vector<TraceEntry> trace;
  std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
  for (int step = 1; step <= cfg.steps; ++step) {
    std::vector<TrainExample> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto& [src, tgt] = pairs[usable[pick(rng)]];
      batch.push_back(make_train_example(rng, src, tgt, cfg.delete_frac));
    }
    LossResult res = training_loss(params, batch, cfg.alpha);

    std::vector<ArrayRef> grad_refs = array_refs(res.grads);
    double sq_norm = 0.0;
    for (ArrayRef& a : grad_refs) {
      sq_norm += Eigen::Map<Eigen::ArrayXd>(a.data, a.size()).square().sum();
    }
    const double norm = std::sqrt(sq_norm);
    if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip) {
      const double scale = cfg.grad_clip / norm;
      for (ArrayRef& a : grad_refs) {
        Eigen::Map<Eigen::ArrayXd>(a.data, a.size()) *= scale;
      }
    }

    std::vector<ArrayRef> param_refs = array_refs(params);
    std::vector<ArrayRef> m1_refs = array_refs(m1);
    std::vector<ArrayRef> m2_refs = array_refs(m2);
    const double bc1 = 1.0 - std::pow(kBeta1, step);
    const double bc2 = 1.0 - std::pow(kBeta2, step);
    for (std::size_t a = 0; a < param_refs.size(); ++a) {
      Eigen::Map<Eigen::ArrayXd> p(param_refs[a].data, param_refs[a].size());
      Eigen::Map<Eigen::ArrayXd> g(grad_refs[a].data, grad_refs[a].size());
      Eigen::Map<Eigen::ArrayXd> mo(m1_refs[a].data, m1_refs[a].size());
      Eigen::Map<Eigen::ArrayXd> va(m2_refs[a].data, m2_refs[a].size());
      mo = kBeta1 * mo + (1.0 - kBeta1) * g;
      va = kBeta2 * va + (1.0 - kBeta2) * g.square();
      p -= cfg.lr * (mo / bc1) / ((va / bc2).sqrt() + kEps);
      if (!p.isFinite().all()) throw std::runtime_error("numerical divergence");
    }

    if (step % std::max(1, cfg.log_every) == 0 || step == cfg.steps) {
      trace.push_back({step, res.loss});
    }
  }
  return trace;
}

}  // namespace lat
