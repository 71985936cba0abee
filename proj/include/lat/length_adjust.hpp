// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "lat/types.hpp"

namespace lat {

/// Position gap between two adjacent unmasked tokens; masks in between
/// belong to this gap.
struct GapEntry {
  Fraction gap;
  int left_index = 0;   // current sequence index of the left unmasked token
  int mask_count = 0;
};

struct AdjustConfig {
  double rel_tolerance = 0.05;
};

std::vector<GapEntry> compute_gaps(const std::vector<ScoredToken>& seq);

/// Intermediate-iteration length adjustment: bring |seq| to target_len by
/// inserting MASK tokens into maximal gaps or deleting MASKs from minimal
/// gaps. Within-tolerance inputs come back unchanged, as do sequences with
/// fewer than two unmasked tokens. Deletion never removes a non-MASK token
/// and stops once every gap runs out of masks.
std::vector<ScoredToken> adjust_length(const std::vector<ScoredToken>& seq,
                                       int target_len, const AdjustConfig& cfg);

}  // namespace lat
