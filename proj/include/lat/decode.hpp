// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "lat/length_adjust.hpp"
#include "lat/merge.hpp"
#include "lat/model.hpp"

namespace lat {

struct DecodeConfig {
  int iterations = 4;     // T
  int k = 0;              // 0 = use the model's trained K
  int length_offset = 0;  // signed, added to the predicted length
  std::uint64_t seed = 0;
  AdjustConfig adjust;
  double empty_span_score = std::log(0.25);
};

/// Per-sentence wall-clock breakdown, batch size 1.
struct DecodeStageTimes {
  double model_s = 0.0;   // encoder + decoder + local pieces
  double merge_s = 0.0;
  double adjust_s = 0.0;  // masking + length adjustment
};

/// Argmax length class (+offset), clamped to [1, max_len]. One candidate.
int predict_length(const Vector& length_logits, int offset, int max_len);

/// Replaces the n_lowest lowest-scoring tokens by MASK; ties mask the
/// leftmost first. Scores and positions of replaced slots are retained.
std::vector<ScoredToken> mask_lowest(std::vector<ScoredToken> seq, int n_lowest);

/// Mask-predict iterative decoding: predict length, generate a K-token
/// piece at every position, merge, re-mask the least confident tokens,
/// adjust the length toward the initial prediction, iterate. The final
/// iteration keeps the merged output as is (reserved ids stripped).
std::vector<TokenId> iterative_decode(const ModelParams& params,
                                      const std::vector<TokenId>& source,
                                      const DecodeConfig& cfg,
                                      DecodeStageTimes* times = nullptr);

}  // namespace lat
