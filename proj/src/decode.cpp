// SPDX-License-Identifier: Apache-2.0
#include "lat/decode.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace lat {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int predict_length(const Vector& length_logits, int offset, int max_len) {
  Eigen::Index best = 0;
  length_logits.maxCoeff(&best);
  const int predicted = static_cast<int>(best) + 1 + offset;
  return std::clamp(predicted, 1, max_len);
}

std::vector<ScoredToken> mask_lowest(std::vector<ScoredToken> seq, int n_lowest) {
  if (n_lowest <= 0) return seq;
  std::vector<int> order(seq.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return seq[static_cast<std::size_t>(a)].score < seq[static_cast<std::size_t>(b)].score;
  });
  const int n = std::min<int>(n_lowest, static_cast<int>(seq.size()));
  for (int i = 0; i < n; ++i) {
    seq[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].token = kMaskId;
  }
  return seq;
}

std::vector<TokenId> iterative_decode(const ModelParams& params,
                                      const std::vector<TokenId>& source,
                                      const DecodeConfig& cfg, DecodeStageTimes* times) {
  const ModelConfig& mc = params.config;
  const int k = cfg.k > 0 ? cfg.k : mc.k_steps;
  MergeConfig merge_cfg{k, cfg.empty_span_score};
  DecodeStageTimes t{};

  auto start = Clock::now();
  const EncodeResult enc = encode(params, source);
  const int target_len = predict_length(enc.length_logits, cfg.length_offset, mc.max_len);
  t.model_s += seconds_since(start);

  std::vector<ScoredToken> seq(static_cast<std::size_t>(target_len));
  for (int i = 0; i < target_len; ++i) {
    seq[static_cast<std::size_t>(i)] = {kMaskId, 0.0, whole(i)};
  }

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    if (seq.empty()) break;  // degenerate: nothing left to refine

    start = Clock::now();
    std::vector<TokenId> input = token_ids(seq);
    if (static_cast<int>(input.size()) > mc.max_len) input.resize(static_cast<std::size_t>(mc.max_len));
    const Matrix pos = decode_positions(params, input, enc.states);
    std::vector<Piece> pieces;
    pieces.reserve(static_cast<std::size_t>(pos.rows()));
    for (Eigen::Index i = 0; i < pos.rows(); ++i) {
      Piece piece = local_translate_greedy(params, pos.row(i).transpose(), static_cast<int>(i));
      if (k < static_cast<int>(piece.tokens.size())) {
        piece.tokens.resize(static_cast<std::size_t>(k));
      }
      pieces.push_back(std::move(piece));
    }
    t.model_s += seconds_since(start);

    start = Clock::now();
    seq = merge_all(pieces, merge_cfg).tokens;
    t.merge_s += seconds_since(start);

    if (iter < cfg.iterations) {
      start = Clock::now();
      const int n_mask = static_cast<int>(seq.size()) * (cfg.iterations - iter) / cfg.iterations;
      seq = mask_lowest(std::move(seq), n_mask);
      seq = adjust_length(seq, target_len, cfg.adjust);
      t.adjust_s += seconds_since(start);
    }
  }

  std::vector<TokenId> out;
  out.reserve(seq.size());
  for (const ScoredToken& tok : seq) {
    if (tok.token == kMaskId || tok.token == kSopId || tok.token == kPadId ||
        tok.token == kLengthId || tok.token == kEosId) {
      continue;
    }
    out.push_back(tok.token);
  }
  if (times) *times = t;
  return out;
}

}  // namespace lat
