// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lat/types.hpp"

namespace lat {

struct MergeConfig {
  int k = 3;                                  // local translation steps
  double empty_span_score = std::log(0.25);   // score of an empty span
};

/// Arithmetic mean of token scores; empty spans get cfg.empty_span_score.
double span_score(std::span<const ScoredToken> span, const MergeConfig& cfg);

/// Aligns two matched tokens: keep the higher score, average the positions.
/// Throws std::invalid_argument("align on unequal tokens") on id mismatch.
ScoredToken align_token(const ScoredToken& t1, const ScoredToken& t2);

/// Merges two pieces: LCS-match, resolve conflicting spans by score
/// (ties keep the left sequence), align matched tokens. No match at all
/// falls back to plain concatenation.
std::vector<ScoredToken> merge_two(std::span<const ScoredToken> s1,
                                   std::span<const ScoredToken> s2,
                                   const MergeConfig& cfg);

/// Left-to-right scan over all pieces. Each step merges the last K tokens
/// of the running output with the first K tokens of the next piece; tokens
/// outside those windows are copied through. Empty pieces are skipped.
/// Throws std::runtime_error("no pieces") on an empty piece list.
MergedSequence merge_all(const std::vector<Piece>& pieces, const MergeConfig& cfg);

}  // namespace lat
