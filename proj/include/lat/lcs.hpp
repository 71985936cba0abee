// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "lat/types.hpp"

namespace lat {

/// Matched index pairs, strictly increasing in both coordinates.
using MatchedPairs = std::vector<std::pair<int, int>>;

/// Longest common subsequence of two id sequences as index pairs.
///
/// Deterministic backtrack: a match is taken whenever tokens are equal
/// (this always preserves optimality); on a tie between the two
/// non-matching moves, the s2 index is decremented first. That order makes
/// the windowed merge reconstruct overlapping pieces exactly, including
/// periodic token patterns.
MatchedPairs lcs(std::span<const TokenId> s1, std::span<const TokenId> s2,
                 int cap = 64);

}  // namespace lat
