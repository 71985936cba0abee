// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lat/types.hpp"

namespace lat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ModelConfig {
  int d_model = 32;
  int heads = 2;
  int ffn_dim = 64;
  int enc_layers = 1;  // single-layer toy encoder
  int dec_layers = 1;  // single-layer toy decoder
  int k_steps = 3;     // K, local translation steps
  int max_len = 64;    // bounds source (incl. LENGTH slot) and target
  int vocab_size = 0;
  std::uint64_t seed = 1;
};

struct AttentionParams {
  Matrix wq, wk, wv, wo;  // d x d
  Vector bq, bk, bv, bo;  // d
};

struct LayerNormParams {
  Vector gain, bias;  // d
};

struct FfnParams {
  Matrix w1;  // d x ffn
  Vector b1;  // ffn
  Matrix w2;  // ffn x d
  Vector b2;  // d
};

struct EncoderParams {
  AttentionParams self_attn;
  LayerNormParams ln_attn;
  FfnParams ffn;
  LayerNormParams ln_ffn;
};

struct DecoderParams {
  AttentionParams self_attn;
  LayerNormParams ln_self;
  AttentionParams cross_attn;
  LayerNormParams ln_cross;
  FfnParams ffn;
  LayerNormParams ln_ffn;
};

struct LocalHeadParams {
  Matrix wx, wh;  // d x 4d, gate order [input, forget, cell, output]
  Vector b;       // 4d
  Matrix w_out;   // d x vocab
  Vector b_out;   // vocab
};

struct LengthHeadParams {
  Matrix w;  // d x max_len, class c predicts length c+1
  Vector b;  // max_len
};

/// All trainable arrays. The same struct doubles as a gradient /
/// optimizer-moment buffer via zeros_like.
struct ModelParams {
  ModelConfig config;
  Matrix tok_emb;  // vocab x d
  Matrix pos_emb;  // max_len x d
  EncoderParams encoder;
  DecoderParams decoder;
  LocalHeadParams local;
  LengthHeadParams length;
};

/// Named view of one parameter array; the enumeration order is the
/// checkpoint serialization order.
struct ArrayRef {
  const char* name;
  double* data;
  Eigen::Index rows, cols;
  Eigen::Index size() const { return rows * cols; }
};

std::vector<ArrayRef> array_refs(ModelParams& params);
std::vector<ArrayRef> array_refs(const ModelParams& params);  // const-cast view

ModelParams init_params(const ModelConfig& config);
ModelParams zeros_like(const ModelConfig& config);

/// Closed-form trainable-array element count for a config.
long long parameter_count(const ModelConfig& config);

// ---------------------------------------------------------------------------
// forward ops (inference surface)
// ---------------------------------------------------------------------------

struct EncodeResult {
  Matrix states;         // (|source|+1) x d, row 0 is the LENGTH slot
  Vector length_logits;  // max_len classes for lengths 1..max_len
};

/// Runs the encoder over LENGTH + source. Throws on overlength input.
EncodeResult encode(const ModelParams& params, const std::vector<TokenId>& source);

/// Bidirectional decoder: one hidden vector per target position.
Matrix decode_positions(const ModelParams& params, const std::vector<TokenId>& target_input,
                        const Matrix& encoder_states);

/// Greedy K-step local translation from one position vector. The piece is
/// truncated at the first EOS/PAD (terminator not emitted) and may come
/// back empty. MASK is excluded from the output support.
Piece local_translate_greedy(const ModelParams& params, const Vector& pos_vec, int anchor);

/// Teacher-forced log-probabilities of a K-token gold sequence.
Vector local_translate_teacher(const ModelParams& params, const Vector& pos_vec,
                               const std::vector<TokenId>& gold);

// ---------------------------------------------------------------------------
// training data
// ---------------------------------------------------------------------------

struct MaskSampleResult {
  std::vector<TokenId> input;    // target with sampled positions masked
  std::vector<char> is_masked;   // per original index: in T_mask?
};

/// Masking size m ~ Uniform{1..N}, m distinct positions replaced by MASK.
MaskSampleResult mask_sample(std::mt19937_64& rng, const std::vector<TokenId>& target_full);

struct DeletionResult {
  std::vector<TokenId> input;   // decoder input with d positions removed
  std::vector<int> orig_index;  // surviving position -> original index
};

/// Deletes d ~ Uniform{1..max(1, floor(delete_frac*N))} distinct input
/// positions; gold sequences realign through orig_index. Requires N >= 2.
DeletionResult deletion_augment(std::mt19937_64& rng, const std::vector<TokenId>& masked_input,
                                double delete_frac);

/// Gold local sequence for the position anchored at original target index:
/// the next K labels of target_full, PAD past the end (PAD steps carry no
/// loss; the appended EOS is the terminator the head learns).
std::vector<TokenId> gold_sequence(const std::vector<TokenId>& target_full, int orig_index,
                                   int k_steps);

struct TrainExample {
  std::vector<TokenId> source;
  std::vector<TokenId> target_full;    // target ids with EOS appended
  std::vector<TokenId> decoder_input;  // masked (and possibly shortened)
  std::vector<int> orig_index;         // decoder position -> original index
  std::vector<char> is_masked;         // per original index
};

TrainExample make_train_example(std::mt19937_64& rng, const std::vector<TokenId>& source,
                                const std::vector<TokenId>& target_raw, double delete_frac,
                                bool with_deletion = true);

// ---------------------------------------------------------------------------
// loss / training
// ---------------------------------------------------------------------------

struct LossResult {
  double loss = 0.0;        // (token + length) averaged over the batch
  double token_loss = 0.0;  // batch mean
  double length_loss = 0.0;
  ModelParams grads;
};

/// Masked-weighted token loss plus length cross-entropy, with gradients
/// for every parameter array. Gold steps are weighted 1 when the gold
/// token's original index was masked and alpha otherwise.
/// Throws std::runtime_error("numerical divergence") on non-finite loss.
LossResult training_loss(const ModelParams& params, const std::vector<TrainExample>& batch,
                         double alpha);

/// Forward-only variant (no gradients), for tests and pilots.
double training_loss_value(const ModelParams& params, const std::vector<TrainExample>& batch,
                           double alpha);

struct TrainConfig {
  double alpha = 0.1;
  double delete_frac = 0.15;
  double lr = 1e-3;
  int batch_size = 32;
  int steps = 1000;
  double grad_clip = 1.0;
  int log_every = 50;
  std::uint64_t seed = 1;
};

struct TraceEntry {
  int step = 0;
  double loss = 0.0;
};

using SentencePair = std::pair<std::vector<TokenId>, std::vector<TokenId>>;

/// Seeded deterministic training loop: adaptive-moment gradient descent
/// with global-norm clipping. Returns the loss trace (one entry per
/// log_every steps plus the final step).
std::vector<TraceEntry> train(ModelParams& params, const std::vector<SentencePair>& pairs,
                              const TrainConfig& cfg);

}  // namespace lat
