// SPDX-License-Identifier: Apache-2.0
#include "lat/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "model_internal.hpp"

namespace lat {

namespace {

void validate(const ModelConfig& c) {
  if (c.d_model < 1 || c.d_model % c.heads != 0) {
    throw std::invalid_argument("d_model must be a positive multiple of heads");
  }
  if (c.enc_layers != 1 || c.dec_layers != 1) {
    throw std::invalid_argument("toy model is single-layer");
  }
  if (c.k_steps < 1) throw std::invalid_argument("k_steps must be >= 1");
  if (c.vocab_size <= kNumReserved) throw std::invalid_argument("vocab too small");
  if (c.max_len < 2) throw std::invalid_argument("max_len too small");
}

void ref_attention(std::vector<ArrayRef>& out, const char* const names[8], AttentionParams& a) {
  out.push_back({names[0], a.wq.data(), a.wq.rows(), a.wq.cols()});
  out.push_back({names[1], a.bq.data(), a.bq.size(), 1});
  out.push_back({names[2], a.wk.data(), a.wk.rows(), a.wk.cols()});
  out.push_back({names[3], a.bk.data(), a.bk.size(), 1});
  out.push_back({names[4], a.wv.data(), a.wv.rows(), a.wv.cols()});
  out.push_back({names[5], a.bv.data(), a.bv.size(), 1});
  out.push_back({names[6], a.wo.data(), a.wo.rows(), a.wo.cols()});
  out.push_back({names[7], a.bo.data(), a.bo.size(), 1});
}

}  // namespace

std::vector<ArrayRef> array_refs(ModelParams& p) {
  std::vector<ArrayRef> out;
  out.push_back({"tok_emb", p.tok_emb.data(), p.tok_emb.rows(), p.tok_emb.cols()});
  out.push_back({"pos_emb", p.pos_emb.data(), p.pos_emb.rows(), p.pos_emb.cols()});

  static const char* enc_attn[8] = {"enc.attn.wq", "enc.attn.bq", "enc.attn.wk", "enc.attn.bk",
                                    "enc.attn.wv", "enc.attn.bv", "enc.attn.wo", "enc.attn.bo"};
  ref_attention(out, enc_attn, p.encoder.self_attn);
  out.push_back({"enc.ln_attn.gain", p.encoder.ln_attn.gain.data(), p.encoder.ln_attn.gain.size(), 1});
  out.push_back({"enc.ln_attn.bias", p.encoder.ln_attn.bias.data(), p.encoder.ln_attn.bias.size(), 1});
  out.push_back({"enc.ffn.w1", p.encoder.ffn.w1.data(), p.encoder.ffn.w1.rows(), p.encoder.ffn.w1.cols()});
  out.push_back({"enc.ffn.b1", p.encoder.ffn.b1.data(), p.encoder.ffn.b1.size(), 1});
  out.push_back({"enc.ffn.w2", p.encoder.ffn.w2.data(), p.encoder.ffn.w2.rows(), p.encoder.ffn.w2.cols()});
  out.push_back({"enc.ffn.b2", p.encoder.ffn.b2.data(), p.encoder.ffn.b2.size(), 1});
  out.push_back({"enc.ln_ffn.gain", p.encoder.ln_ffn.gain.data(), p.encoder.ln_ffn.gain.size(), 1});
  out.push_back({"enc.ln_ffn.bias", p.encoder.ln_ffn.bias.data(), p.encoder.ln_ffn.bias.size(), 1});

  static const char* dec_self[8] = {"dec.self.wq", "dec.self.bq", "dec.self.wk", "dec.self.bk",
                                    "dec.self.wv", "dec.self.bv", "dec.self.wo", "dec.self.bo"};
  ref_attention(out, dec_self, p.decoder.self_attn);
  out.push_back({"dec.ln_self.gain", p.decoder.ln_self.gain.data(), p.decoder.ln_self.gain.size(), 1});
  out.push_back({"dec.ln_self.bias", p.decoder.ln_self.bias.data(), p.decoder.ln_self.bias.size(), 1});
  static const char* dec_cross[8] = {"dec.cross.wq", "dec.cross.bq", "dec.cross.wk", "dec.cross.bk",
                                     "dec.cross.wv", "dec.cross.bv", "dec.cross.wo", "dec.cross.bo"};
  ref_attention(out, dec_cross, p.decoder.cross_attn);
  out.push_back({"dec.ln_cross.gain", p.decoder.ln_cross.gain.data(), p.decoder.ln_cross.gain.size(), 1});
  out.push_back({"dec.ln_cross.bias", p.decoder.ln_cross.bias.data(), p.decoder.ln_cross.bias.size(), 1});
  out.push_back({"dec.ffn.w1", p.decoder.ffn.w1.data(), p.decoder.ffn.w1.rows(), p.decoder.ffn.w1.cols()});
  out.push_back({"dec.ffn.b1", p.decoder.ffn.b1.data(), p.decoder.ffn.b1.size(), 1});
  out.push_back({"dec.ffn.w2", p.decoder.ffn.w2.data(), p.decoder.ffn.w2.rows(), p.decoder.ffn.w2.cols()});
  out.push_back({"dec.ffn.b2", p.decoder.ffn.b2.data(), p.decoder.ffn.b2.size(), 1});
  out.push_back({"dec.ln_ffn.gain", p.decoder.ln_ffn.gain.data(), p.decoder.ln_ffn.gain.size(), 1});
  out.push_back({"dec.ln_ffn.bias", p.decoder.ln_ffn.bias.data(), p.decoder.ln_ffn.bias.size(), 1});

  out.push_back({"local.wx", p.local.wx.data(), p.local.wx.rows(), p.local.wx.cols()});
  out.push_back({"local.wh", p.local.wh.data(), p.local.wh.rows(), p.local.wh.cols()});
  out.push_back({"local.b", p.local.b.data(), p.local.b.size(), 1});
  out.push_back({"local.w_out", p.local.w_out.data(), p.local.w_out.rows(), p.local.w_out.cols()});
  out.push_back({"local.b_out", p.local.b_out.data(), p.local.b_out.size(), 1});

  out.push_back({"len.w", p.length.w.data(), p.length.w.rows(), p.length.w.cols()});
  out.push_back({"len.b", p.length.b.data(), p.length.b.size(), 1});
  return out;
}

std::vector<ArrayRef> array_refs(const ModelParams& p) {
  return array_refs(const_cast<ModelParams&>(p));
}

namespace {

ModelParams allocate(const ModelConfig& c) {
  validate(c);
  const int d = c.d_model, f = c.ffn_dim, v = c.vocab_size, ml = c.max_len;
  ModelParams p;
  p.config = c;
  p.tok_emb = Matrix::Zero(v, d);
  p.pos_emb = Matrix::Zero(ml, d);
  auto attn = [&] {
    AttentionParams a;
    a.wq = a.wk = a.wv = a.wo = Matrix::Zero(d, d);
    a.bq = a.bk = a.bv = a.bo = Vector::Zero(d);
    return a;
  };
  auto ln = [&] { return LayerNormParams{Vector::Zero(d), Vector::Zero(d)}; };
  auto ffn = [&] {
    return FfnParams{Matrix::Zero(d, f), Vector::Zero(f), Matrix::Zero(f, d), Vector::Zero(d)};
  };
  p.encoder = {attn(), ln(), ffn(), ln()};
  p.decoder = {attn(), ln(), attn(), ln(), ffn(), ln()};
  p.local.wx = Matrix::Zero(d, 4 * d);
  p.local.wh = Matrix::Zero(d, 4 * d);
  p.local.b = Vector::Zero(4 * d);
  p.local.w_out = Matrix::Zero(d, v);
  p.local.b_out = Vector::Zero(v);
  p.length.w = Matrix::Zero(d, ml);
  p.length.b = Vector::Zero(ml);
  return p;
}

}  // namespace

ModelParams zeros_like(const ModelConfig& c) { return allocate(c); }

ModelParams init_params(const ModelConfig& c) {
  ModelParams p = allocate(c);
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  // fan-in scaled weights; biases zero, layer-norm gains one. The signal
  // must survive the LSTM's gated first step, so tiny uniform init is out.
  auto fill = [&](Matrix& m, double std_dev) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = std_dev * unit(rng);
    }
  };
  auto xavier = [&](Matrix& m) { fill(m, 1.0 / std::sqrt(static_cast<double>(m.rows()))); };
  fill(p.tok_emb, 0.1);
  fill(p.pos_emb, 0.1);
  for (AttentionParams* a : {&p.encoder.self_attn, &p.decoder.self_attn, &p.decoder.cross_attn}) {
    xavier(a->wq), xavier(a->wk), xavier(a->wv), xavier(a->wo);
  }
  for (FfnParams* f : {&p.encoder.ffn, &p.decoder.ffn}) xavier(f->w1), xavier(f->w2);
  for (LayerNormParams* l : {&p.encoder.ln_attn, &p.encoder.ln_ffn, &p.decoder.ln_self,
                             &p.decoder.ln_cross, &p.decoder.ln_ffn}) {
    l->gain.setOnes();
  }
  xavier(p.local.wx), xavier(p.local.wh), xavier(p.local.w_out);
  xavier(p.length.w);
  return p;
}

long long parameter_count(const ModelConfig& c) {
  const long long d = c.d_model, f = c.ffn_dim, v = c.vocab_size, ml = c.max_len;
  const long long attn = 4 * (d * d + d);
  const long long ln = 2 * d;
  const long long ffn = d * f + f + f * d + d;
  const long long enc = c.enc_layers * (attn + ln + ffn + ln);
  const long long dec = c.dec_layers * (attn + ln + attn + ln + ffn + ln);
  const long long local = d * 4 * d + d * 4 * d + 4 * d + d * v + v;
  const long long len = d * ml + ml;
  return v * d + ml * d + enc + dec + local + len;
}

// ---------------------------------------------------------------------------
// forward building blocks
// ---------------------------------------------------------------------------

namespace detail {

Matrix layer_norm(const LayerNormParams& p, const Matrix& x, LayerNormCache* cache) {
  const Eigen::Index rows = x.rows(), d = x.cols();
  Matrix xhat(rows, d);
  Vector inv_sigma(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLnEps);
    xhat.row(r) = (x.row(r).array() - mu) * inv;
    inv_sigma(r) = inv;
  }
  Matrix y = (xhat.array().rowwise() * p.gain.transpose().array()).rowwise() +
             p.bias.transpose().array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_sigma = std::move(inv_sigma);
  }
  return y;
}

Matrix layer_norm_backward(const LayerNormParams& p, const LayerNormCache& cache,
                           const Matrix& dy, LayerNormParams& grad) {
  const Eigen::Index rows = dy.rows(), d = dy.cols();
  grad.gain += (dy.array() * cache.xhat.array()).colwise().sum().matrix().transpose();
  grad.bias += dy.colwise().sum().transpose();
  Matrix dx(rows, d);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto dxhat = (dy.row(r).array() * p.gain.transpose().array()).eval();
    const double mean_dxhat = dxhat.mean();
    const double mean_dxhat_xhat = (dxhat * cache.xhat.row(r).array()).mean();
    dx.row(r) = cache.inv_sigma(r) *
                (dxhat - mean_dxhat - cache.xhat.row(r).array() * mean_dxhat_xhat);
  }
  return dx;
}

Matrix attention(const AttentionParams& p, int heads, const Matrix& xq, const Matrix& xkv,
                 AttentionCache* cache) {
  const Eigen::Index d = p.wq.rows();
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix q = (xq * p.wq).rowwise() + p.bq.transpose();
  Matrix k = (xkv * p.wk).rowwise() + p.bk.transpose();
  Matrix v = (xkv * p.wv).rowwise() + p.bv.transpose();
  Matrix concat(xq.rows(), d);
  std::vector<Matrix> probs(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    auto qh = q.middleCols(h * dh, dh);
    auto kh = k.middleCols(h * dh, dh);
    auto vh = v.middleCols(h * dh, dh);
    Matrix scores = qh * kh.transpose() * scale;
    Matrix& a = probs[static_cast<std::size_t>(h)];
    a.resize(scores.rows(), scores.cols());
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
      const double m = scores.row(r).maxCoeff();
      a.row(r) = (scores.row(r).array() - m).exp();
      a.row(r) /= a.row(r).sum();
    }
    concat.middleCols(h * dh, dh) = a * vh;
  }
  Matrix out = (concat * p.wo).rowwise() + p.bo.transpose();
  if (cache) {
    cache->xq = xq;
    cache->xkv = xkv;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
    cache->concat = std::move(concat);
  }
  return out;
}

Matrix attention_backward(const AttentionParams& p, int heads, const AttentionCache& c,
                          const Matrix& dout, AttentionParams& grad, Matrix& dxkv) {
  const Eigen::Index d = p.wq.rows();
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  grad.wo += c.concat.transpose() * dout;
  grad.bo += dout.colwise().sum().transpose();
  Matrix dconcat = dout * p.wo.transpose();

  Matrix dq = Matrix::Zero(c.q.rows(), d);
  Matrix dk = Matrix::Zero(c.k.rows(), d);
  Matrix dv = Matrix::Zero(c.v.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const Matrix& a = c.probs[static_cast<std::size_t>(h)];
    auto vh = c.v.middleCols(h * dh, dh);
    auto qh = c.q.middleCols(h * dh, dh);
    auto kh = c.k.middleCols(h * dh, dh);
    Matrix doh = dconcat.middleCols(h * dh, dh);
    Matrix da = doh * vh.transpose();
    dv.middleCols(h * dh, dh) += a.transpose() * doh;
    Matrix dscores(a.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const double dot = (da.row(r).array() * a.row(r).array()).sum();
      dscores.row(r) = a.row(r).array() * (da.row(r).array() - dot);
    }
    dq.middleCols(h * dh, dh) += dscores * kh * scale;
    dk.middleCols(h * dh, dh) += dscores.transpose() * qh * scale;
  }

  grad.wq += c.xq.transpose() * dq;
  grad.bq += dq.colwise().sum().transpose();
  grad.wk += c.xkv.transpose() * dk;
  grad.bk += dk.colwise().sum().transpose();
  grad.wv += c.xkv.transpose() * dv;
  grad.bv += dv.colwise().sum().transpose();
  dxkv += dk * p.wk.transpose() + dv * p.wv.transpose();
  return dq * p.wq.transpose();
}

namespace {
// gaussian error linear unit; smooth everywhere, so finite-difference
// gradient checks converge at h = 1e-4
inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }
inline double gelu_grad(double x) {
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * phi;
}
}  // namespace

Matrix ffn_forward(const FfnParams& p, const Matrix& x, FfnCache* cache) {
  Matrix pre = (x * p.w1).rowwise() + p.b1.transpose();
  Matrix act = pre.unaryExpr([](double v) { return gelu(v); });
  Matrix out = (act * p.w2).rowwise() + p.b2.transpose();
  if (cache) {
    cache->x = x;
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return out;
}

Matrix ffn_backward(const FfnParams& p, const FfnCache& c, const Matrix& dout, FfnParams& grad) {
  grad.w2 += c.act.transpose() * dout;
  grad.b2 += dout.colwise().sum().transpose();
  Matrix dact = dout * p.w2.transpose();
  Matrix dpre = dact.cwiseProduct(c.pre.unaryExpr([](double v) { return gelu_grad(v); }));
  grad.w1 += c.x.transpose() * dpre;
  grad.b1 += dpre.colwise().sum().transpose();
  return dpre * p.w1.transpose();
}

void encoder_forward(const ModelParams& params, const std::vector<TokenId>& source,
                     EncoderCache& cache) {
  const ModelConfig& cfg = params.config;
  const int src_len = static_cast<int>(source.size());
  if (src_len + 1 > cfg.max_len) throw std::runtime_error("source too long");

  cache.input.clear();
  cache.input.push_back(kLengthId);
  cache.input.insert(cache.input.end(), source.begin(), source.end());

  const int rows = src_len + 1;
  cache.x0.resize(rows, cfg.d_model);
  for (int r = 0; r < rows; ++r) {
    cache.x0.row(r) = params.tok_emb.row(cache.input[static_cast<std::size_t>(r)]) +
                      params.pos_emb.row(r);
  }
  Matrix attn_out = attention(params.encoder.self_attn, cfg.heads, cache.x0, cache.x0, &cache.attn);
  cache.r1 = cache.x0 + attn_out;
  cache.n1 = layer_norm(params.encoder.ln_attn, cache.r1, &cache.ln1);
  Matrix ffn_out = ffn_forward(params.encoder.ffn, cache.n1, &cache.ffn);
  cache.r2 = cache.n1 + ffn_out;
  cache.out = layer_norm(params.encoder.ln_ffn, cache.r2, &cache.ln2);
  cache.length_logits =
      (cache.out.row(0) * params.length.w).transpose() + params.length.b;
}

void decoder_forward(const ModelParams& params, const std::vector<TokenId>& target_input,
                     const Matrix& encoder_states, DecoderCache& cache) {
  const ModelConfig& cfg = params.config;
  const int len = static_cast<int>(target_input.size());
  if (len > cfg.max_len) throw std::runtime_error("target too long");

  cache.input = target_input;
  cache.y0.resize(len, cfg.d_model);
  for (int r = 0; r < len; ++r) {
    cache.y0.row(r) = params.tok_emb.row(target_input[static_cast<std::size_t>(r)]) +
                      params.pos_emb.row(r);
  }
  Matrix sa = attention(params.decoder.self_attn, cfg.heads, cache.y0, cache.y0, &cache.self_attn);
  cache.r1 = cache.y0 + sa;
  cache.n1 = layer_norm(params.decoder.ln_self, cache.r1, &cache.ln_self);
  Matrix ca = attention(params.decoder.cross_attn, cfg.heads, cache.n1, encoder_states,
                        &cache.cross_attn);
  cache.r2 = cache.n1 + ca;
  cache.n2 = layer_norm(params.decoder.ln_cross, cache.r2, &cache.ln_cross);
  Matrix f = ffn_forward(params.decoder.ffn, cache.n2, &cache.ffn);
  cache.r3 = cache.n2 + f;
  cache.out = layer_norm(params.decoder.ln_ffn, cache.r3, &cache.ln_ffn);
}

Vector log_softmax_masked(const Vector& logits) {
  Vector z = logits;
  z(kMaskId) = -std::numeric_limits<double>::infinity();
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return z.array() - lse;
}

void lstm_step(const LocalHeadParams& p, const Vector& x, const Vector& h_prev,
               const Vector& c_prev, LstmStepCache& cache) {
  const Eigen::Index d = p.wx.rows();
  Vector a = p.wx.transpose() * x + p.wh.transpose() * h_prev + p.b;
  auto sigmoid = [](const auto& v) { return (1.0 / (1.0 + (-v.array()).exp())).matrix(); };
  cache.gi = sigmoid(a.segment(0, d));
  cache.gf = sigmoid(a.segment(d, d));
  cache.gg = a.segment(2 * d, d).array().tanh();
  cache.go = sigmoid(a.segment(3 * d, d));
  cache.c = cache.gf.cwiseProduct(c_prev) + cache.gi.cwiseProduct(cache.gg);
  cache.tanh_c = cache.c.array().tanh();
  cache.h = cache.go.cwiseProduct(cache.tanh_c);
  cache.x = x;
  cache.h_prev = h_prev;
  cache.c_prev = c_prev;
  Vector logits = p.w_out.transpose() * cache.h + p.b_out;
  cache.log_probs = log_softmax_masked(logits);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// public forward surface
// ---------------------------------------------------------------------------

EncodeResult encode(const ModelParams& params, const std::vector<TokenId>& source) {
  detail::EncoderCache cache;
  detail::encoder_forward(params, source, cache);
  return {std::move(cache.out), std::move(cache.length_logits)};
}

Matrix decode_positions(const ModelParams& params, const std::vector<TokenId>& target_input,
                        const Matrix& encoder_states) {
  if (target_input.empty()) return Matrix(0, params.config.d_model);
  detail::DecoderCache cache;
  detail::decoder_forward(params, target_input, encoder_states, cache);
  return std::move(cache.out);
}

Piece local_translate_greedy(const ModelParams& params, const Vector& pos_vec, int anchor) {
  const ModelConfig& cfg = params.config;
  Piece piece;
  piece.anchor = anchor;
  Vector h = pos_vec;
  Vector c = Vector::Zero(cfg.d_model);
  TokenId input = kSopId;
  for (int j = 0; j < cfg.k_steps; ++j) {
    detail::LstmStepCache step;
    detail::lstm_step(params.local, params.tok_emb.row(input).transpose(), h, c, step);
    int best = -1;
    for (int t = 0; t < cfg.vocab_size; ++t) {
      if (t == kMaskId) continue;
      if (best < 0 || step.log_probs(t) > step.log_probs(best)) best = t;
    }
    if (best == kEosId || best == kPadId) break;  // terminator, not emitted
    piece.tokens.push_back({best, step.log_probs(best), whole(anchor + j)});
    h = step.h;
    c = step.c;
    input = best;
  }
  return piece;
}

Vector local_translate_teacher(const ModelParams& params, const Vector& pos_vec,
                               const std::vector<TokenId>& gold) {
  const ModelConfig& cfg = params.config;
  if (static_cast<int>(gold.size()) != cfg.k_steps) {
    throw std::invalid_argument("gold length must equal k_steps");
  }
  Vector out(cfg.k_steps);
  Vector h = pos_vec;
  Vector c = Vector::Zero(cfg.d_model);
  TokenId input = kSopId;
  for (int j = 0; j < cfg.k_steps; ++j) {
    detail::LstmStepCache step;
    detail::lstm_step(params.local, params.tok_emb.row(input).transpose(), h, c, step);
    out(j) = step.log_probs(gold[static_cast<std::size_t>(j)]);
    h = step.h;
    c = step.c;
    input = gold[static_cast<std::size_t>(j)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// training data
// ---------------------------------------------------------------------------

namespace {

// partial Fisher-Yates: m distinct values from 0..n-1, order-stable for a
// given rng state
std::vector<int> sample_distinct(std::mt19937_64& rng, int n, int m) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(m));
  return pool;
}

}  // namespace

MaskSampleResult mask_sample(std::mt19937_64& rng, const std::vector<TokenId>& target_full) {
  const int n = static_cast<int>(target_full.size());
  if (n < 1) throw std::invalid_argument("mask_sample on empty target");
  std::uniform_int_distribution<int> size_dist(1, n);
  const int m = size_dist(rng);
  MaskSampleResult out;
  out.input = target_full;
  out.is_masked.assign(static_cast<std::size_t>(n), 0);
  for (int idx : sample_distinct(rng, n, m)) {
    out.input[static_cast<std::size_t>(idx)] = kMaskId;
    out.is_masked[static_cast<std::size_t>(idx)] = 1;
  }
  return out;
}

DeletionResult deletion_augment(std::mt19937_64& rng, const std::vector<TokenId>& masked_input,
                                double delete_frac) {
  const int n = static_cast<int>(masked_input.size());
  if (n < 2) throw std::invalid_argument("deletion_augment needs length >= 2");
  const int hi = std::max(1, static_cast<int>(delete_frac * n));
  std::uniform_int_distribution<int> count_dist(1, hi);
  const int d = count_dist(rng);
  std::vector<int> doomed = sample_distinct(rng, n, d);
  std::vector<char> gone(static_cast<std::size_t>(n), 0);
  for (int idx : doomed) gone[static_cast<std::size_t>(idx)] = 1;
  DeletionResult out;
  for (int i = 0; i < n; ++i) {
    if (gone[static_cast<std::size_t>(i)]) continue;
    out.input.push_back(masked_input[static_cast<std::size_t>(i)]);
    out.orig_index.push_back(i);
  }
  return out;
}

std::vector<TokenId> gold_sequence(const std::vector<TokenId>& target_full, int orig_index,
                                   int k_steps) {
  std::vector<TokenId> gold(static_cast<std::size_t>(k_steps), kPadId);
  const int n = static_cast<int>(target_full.size());
  for (int j = 0; j < k_steps; ++j) {
    const int idx = orig_index + j;
    if (idx < n) gold[static_cast<std::size_t>(j)] = target_full[static_cast<std::size_t>(idx)];
  }
  return gold;
}

TrainExample make_train_example(std::mt19937_64& rng, const std::vector<TokenId>& source,
                                const std::vector<TokenId>& target_raw, double delete_frac,
                                bool with_deletion) {
  TrainExample ex;
  ex.source = source;
  ex.target_full = target_raw;
  ex.target_full.push_back(kEosId);
  MaskSampleResult masked = mask_sample(rng, ex.target_full);
  ex.is_masked = std::move(masked.is_masked);
  if (with_deletion && masked.input.size() >= 2) {
    DeletionResult del = deletion_augment(rng, masked.input, delete_frac);
    ex.decoder_input = std::move(del.input);
    ex.orig_index = std::move(del.orig_index);
  } else {
    ex.decoder_input = std::move(masked.input);
    ex.orig_index.resize(ex.decoder_input.size());
    for (std::size_t i = 0; i < ex.orig_index.size(); ++i) {
      ex.orig_index[i] = static_cast<int>(i);
    }
  }
  return ex;
}

}  // namespace lat
