// SPDX-License-Identifier: Apache-2.0
//
// Forward-pass caches shared between the inference surface (model.cpp) and
// the manual backward pass (training.cpp). Not part of the public API.
#pragma once

#include <vector>

#include "lat/model.hpp"

namespace lat::detail {

inline constexpr double kLnEps = 1e-5;

struct LayerNormCache {
  Matrix xhat;       // rows normalized
  Vector inv_sigma;  // per row
};

struct AttentionCache {
  Matrix xq, xkv;
  Matrix q, k, v;
  std::vector<Matrix> probs;  // per head, L x S
  Matrix concat;
};

struct FfnCache {
  Matrix x, pre, act;
};

struct EncoderCache {
  std::vector<TokenId> input;  // LENGTH + source ids
  Matrix x0;
  AttentionCache attn;
  Matrix r1, n1;
  LayerNormCache ln1;
  FfnCache ffn;
  Matrix r2;
  LayerNormCache ln2;
  Matrix out;
  Vector length_logits;
};

struct DecoderCache {
  std::vector<TokenId> input;
  Matrix y0;
  AttentionCache self_attn;
  Matrix r1, n1;
  LayerNormCache ln_self;
  AttentionCache cross_attn;
  Matrix r2, n2;
  LayerNormCache ln_cross;
  FfnCache ffn;
  Matrix r3;
  LayerNormCache ln_ffn;
  Matrix out;  // pos vectors, L x d
};

struct LstmStepCache {
  TokenId input_token = 0;  // embedding row fed at this step
  Vector x, h_prev, c_prev;
  Vector gi, gf, gg, go;  // post-nonlinearity gates
  Vector c, tanh_c, h;
  Vector log_probs;  // over vocab, MASK = -inf
};

Matrix layer_norm(const LayerNormParams& p, const Matrix& x, LayerNormCache* cache);
Matrix layer_norm_backward(const LayerNormParams& p, const LayerNormCache& cache,
                           const Matrix& dy, LayerNormParams& grad);

Matrix attention(const AttentionParams& p, int heads, const Matrix& xq, const Matrix& xkv,
                 AttentionCache* cache);
// returns dXq and adds the key/value path into dxkv
Matrix attention_backward(const AttentionParams& p, int heads, const AttentionCache& cache,
                          const Matrix& dout, AttentionParams& grad, Matrix& dxkv);

Matrix ffn_forward(const FfnParams& p, const Matrix& x, FfnCache* cache);
Matrix ffn_backward(const FfnParams& p, const FfnCache& cache, const Matrix& dout,
                    FfnParams& grad);

void encoder_forward(const ModelParams& params, const std::vector<TokenId>& source,
                     EncoderCache& cache);
void decoder_forward(const ModelParams& params, const std::vector<TokenId>& target_input,
                     const Matrix& encoder_states, DecoderCache& cache);

/// One LSTM step from (x, h_prev, c_prev); fills the cache including
/// MASK-excluded log-probabilities.
void lstm_step(const LocalHeadParams& p, const Vector& x, const Vector& h_prev,
               const Vector& c_prev, LstmStepCache& cache);

Vector log_softmax_masked(const Vector& logits);

}  // namespace lat::detail
