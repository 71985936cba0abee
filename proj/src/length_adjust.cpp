// SPDX-License-Identifier: Apache-2.0
#include "lat/length_adjust.hpp"

#include <cmath>
#include <cstdlib>

namespace lat {

namespace {

std::vector<int> unmasked_indices(const std::vector<ScoredToken>& seq) {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(seq.size()); ++i) {
    if (seq[i].token != kMaskId) idx.push_back(i);
  }
  return idx;
}

}  // namespace

std::vector<GapEntry> compute_gaps(const std::vector<ScoredToken>& seq) {
  const std::vector<int> idx = unmasked_indices(seq);
  std::vector<GapEntry> gaps;
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    GapEntry e;
    e.gap = difference(seq[idx[k]].position, seq[idx[k + 1]].position);
    e.left_index = idx[k];
    e.mask_count = idx[k + 1] - idx[k] - 1;
    gaps.push_back(e);
  }
  return gaps;
}

std::vector<ScoredToken> adjust_length(const std::vector<ScoredToken>& seq,
                                       int target_len, const AdjustConfig& cfg) {
  const int current_len = static_cast<int>(seq.size());
  if (target_len < 1) return seq;
  if (std::abs(current_len - target_len) <=
      cfg.rel_tolerance * static_cast<double>(target_len)) {
    return seq;
  }

  const std::vector<int> idx = unmasked_indices(seq);
  // edge gaps do not exist; nothing to steer by with < 2 unmasked tokens
  if (idx.size() < 2) return seq;

  // segment view: leading masks, then unmasked tokens with the mask
  // cluster of the gap to their right
  struct Segment {
    Fraction gap{0, 1};
    std::vector<ScoredToken> masks;  // masks inside this gap
    Fraction left_pos{0, 1}, right_pos{0, 1};
  };
  const std::size_t n_gaps = idx.size() - 1;
  std::vector<Segment> segs(n_gaps);
  for (std::size_t k = 0; k < n_gaps; ++k) {
    segs[k].left_pos = seq[idx[k]].position;
    segs[k].right_pos = seq[idx[k + 1]].position;
    segs[k].gap = difference(segs[k].left_pos, segs[k].right_pos);
    segs[k].masks.assign(seq.begin() + idx[k] + 1, seq.begin() + idx[k + 1]);
  }

  if (target_len > current_len) {
    // insertion: repeatedly drop one mask into the currently maximal gap,
    // then shrink that gap by 1 (ties keep the leftmost gap)
    for (int step = 0; step < target_len - current_len; ++step) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < n_gaps; ++k) {
        if (segs[k].gap > segs[best].gap) best = k;
      }
      ScoredToken mask;
      mask.token = kMaskId;
      mask.score = 0.0;
      mask.position = midpoint(segs[best].left_pos, segs[best].right_pos);
      segs[best].masks.push_back(mask);
      segs[best].gap.num -= segs[best].gap.den;
    }
  } else {
    // deletion: take the minimal gap still under consideration, remove its
    // leftmost mask and grow the gap by 1; maskless gaps leave the queue
    std::vector<char> live(n_gaps, 1);
    int remaining = current_len - target_len;
    while (remaining > 0) {
      int best = -1;
      for (std::size_t k = 0; k < n_gaps; ++k) {
        if (!live[k]) continue;
        if (best < 0 || segs[k].gap < segs[static_cast<std::size_t>(best)].gap) {
          best = static_cast<int>(k);
        }
      }
      if (best < 0) break;  // queue exhausted: accept the longer sequence
      Segment& s = segs[static_cast<std::size_t>(best)];
      if (s.masks.empty()) {
        live[static_cast<std::size_t>(best)] = 0;
        continue;
      }
      s.masks.erase(s.masks.begin());
      s.gap.num += s.gap.den;
      --remaining;
    }
  }

  std::vector<ScoredToken> out;
  out.reserve(seq.size());
  out.insert(out.end(), seq.begin(), seq.begin() + idx.front());
  for (std::size_t k = 0; k < n_gaps; ++k) {
    out.push_back(seq[idx[k]]);
    out.insert(out.end(), segs[k].masks.begin(), segs[k].masks.end());
  }
  out.push_back(seq[idx.back()]);
  out.insert(out.end(), seq.begin() + idx.back() + 1, seq.end());
  return out;
}

}  // namespace lat
