// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "lat/length_adjust.hpp"

using namespace lat;

namespace {

ScoredToken tok(TokenId id, long long pos_num, long long pos_den = 1, double score = -0.1) {
  return {id, score, {pos_num, pos_den}};
}

ScoredToken mask(long long pos_num = 0) { return {kMaskId, 0.0, whole(pos_num)}; }

std::vector<TokenId> unmasked_ids(const std::vector<ScoredToken>& seq) {
  std::vector<TokenId> out;
  for (const auto& t : seq) {
    if (t.token != kMaskId) out.push_back(t.token);
  }
  return out;
}

bool identical(const std::vector<ScoredToken>& a, const std::vector<ScoredToken>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_content(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("compute_gaps") {
  // unit gaps
  std::vector<ScoredToken> plain{tok(10, 0), tok(11, 1), tok(12, 2)};
  auto gaps = compute_gaps(plain);
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[0].gap.value() == doctest::Approx(1.0));
  CHECK(gaps[1].gap.value() == doctest::Approx(1.0));
  CHECK(gaps[0].left_index == 0);
  CHECK(gaps[1].left_index == 1);
  CHECK(gaps[0].mask_count == 0);

  // single gap of 3 containing one mask
  std::vector<ScoredToken> gapped{tok(10, 0), mask(), tok(11, 3)};
  gaps = compute_gaps(gapped);
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].gap.value() == doctest::Approx(3.0));
  CHECK(gaps[0].mask_count == 1);

  // fractional positions compare exactly
  std::vector<ScoredToken> frac{tok(10, 3, 2), tok(11, 7, 2)};
  gaps = compute_gaps(frac);
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].gap == Fraction{8, 4});

  CHECK(compute_gaps({mask(), mask()}).empty());
  CHECK(compute_gaps({}).empty());
}

TEST_CASE("within-tolerance calls are byte-identical no-ops") {
  AdjustConfig cfg;
  std::vector<ScoredToken> seq;
  for (int i = 0; i < 100; ++i) seq.push_back(tok(10 + i, i));
  CHECK(identical(adjust_length(seq, 100, cfg), seq));  // equal lengths
  CHECK(identical(adjust_length(seq, 103, cfg), seq));  // 3/103 < 5%
  CHECK(identical(adjust_length(seq, 105, cfg), seq));  // 5/105 < 5%
  CHECK_FALSE(identical(adjust_length(seq, 106, cfg), seq));
}

TEST_CASE("priority-queue insertion example: gaps 5 and 1") {
  // unmasked tokens at positions 0, 5, 6; two masks to insert
  std::vector<ScoredToken> seq{tok(10, 0), tok(11, 5), tok(12, 6)};
  auto out = adjust_length(seq, 5, {});
  REQUIRE(out.size() == 5);
  // both masks land in the (0,5) gap: 5 -> 4 -> 3 stays maximal
  CHECK(out[0].token == 10);
  CHECK(out[1].token == kMaskId);
  CHECK(out[2].token == kMaskId);
  CHECK(out[3].token == 11);
  CHECK(out[4].token == 12);
  // inserted masks carry the gap midpoint
  CHECK(out[1].position.value() == doctest::Approx(2.5));
  CHECK(out[2].position.value() == doctest::Approx(2.5));
}

TEST_CASE("equal gaps insert into the leftmost") {
  std::vector<ScoredToken> seq{tok(10, 0), tok(11, 3), tok(12, 6)};
  auto out = adjust_length(seq, 4, {});
  REQUIRE(out.size() == 4);
  CHECK(out[1].token == kMaskId);  // first gap wins the tie
  CHECK(out[2].token == 11);
}

TEST_CASE("fewer than two unmasked tokens: skipped entirely") {
  std::vector<ScoredToken> lonely{mask(0), tok(10, 1), mask(2)};
  CHECK(identical(adjust_length(lonely, 10, {}), lonely));
  std::vector<ScoredToken> all_masks{mask(0), mask(1), mask(2), mask(3), mask(4), mask(5)};
  CHECK(identical(adjust_length(all_masks, 1, {}), all_masks));
}

TEST_CASE("insertion property: exact target length, untouched real tokens") {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<int> n_tokens(2, 12), extra(1, 10), gap_step(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredToken> seq;
    long long pos = 0;
    const int n = n_tokens(rng);
    for (int i = 0; i < n; ++i) {
      seq.push_back(tok(100 + i, pos));
      pos += gap_step(rng);
    }
    const int target = static_cast<int>(seq.size()) + extra(rng);
    auto out = adjust_length(seq, target, {});
    CHECK(static_cast<int>(out.size()) == target);
    CHECK(unmasked_ids(out) == unmasked_ids(seq));
    // inserted masks lie strictly between the unmasked endpoints
    CHECK(out.front().token != kMaskId);
    CHECK(out.back().token != kMaskId);
  }
}

TEST_CASE("deletion property: only masks go, queue exhaustion accepted") {
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<int> n_tokens(2, 10), n_masks(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredToken> seq;
    long long pos = 0;
    const int n = n_tokens(rng);
    int total_masks = 0;
    for (int i = 0; i < n; ++i) {
      seq.push_back(tok(100 + i, pos++));
      if (i + 1 < n) {
        const int m = n_masks(rng);
        total_masks += m;
        for (int j = 0; j < m; ++j) seq.push_back(mask(pos)), ++pos;
      }
    }
    std::uniform_int_distribution<int> want(1, static_cast<int>(seq.size()) - 1);
    const int target = want(rng);
    auto out = adjust_length(seq, target, {});
    CHECK(unmasked_ids(out) == unmasked_ids(seq));  // no real token removed
    CHECK(static_cast<int>(out.size()) >= std::min<int>(target, n));
    const int deletable = total_masks;
    const int requested = static_cast<int>(seq.size()) - target;
    if (requested <= deletable) {
      const double tol = 0.05 * target;
      const bool within =
          std::abs(static_cast<int>(seq.size()) - target) <= tol;  // no-op case
      if (!within) CHECK(static_cast<int>(out.size()) == target);
    }
  }
}

TEST_CASE("deletion walks gaps from the minimum upward") {
  // gaps: (0,1) of size 1 with one mask, (1,5) of size 4 with one mask
  std::vector<ScoredToken> seq{tok(10, 0), mask(0), tok(11, 1), mask(2), tok(12, 5)};
  auto out = adjust_length(seq, 4, {});
  REQUIRE(out.size() == 4);
  // the size-1 gap is minimal: its mask goes first
  CHECK(out[0].token == 10);
  CHECK(out[1].token == 11);
  CHECK(out[2].token == kMaskId);
  CHECK(out[3].token == 12);
}

TEST_CASE("determinism: identical inputs give identical outputs") {
  std::vector<ScoredToken> seq{tok(10, 0), mask(1), tok(11, 4), tok(12, 8), mask(9)};
  auto a = adjust_length(seq, 9, {});
  auto b = adjust_length(seq, 9, {});
  CHECK(identical(a, b));
}
