// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <random>

#include "lat/lcs.hpp"

using namespace lat;

namespace {

// brute-force oracle: longest common subsequence length by enumerating
// every subsequence of a and testing it against b
bool is_subsequence(const std::vector<TokenId>& needle, const std::vector<TokenId>& hay) {
  std::size_t i = 0;
  for (TokenId t : hay) {
    if (i < needle.size() && needle[i] == t) ++i;
  }
  return i == needle.size();
}

int brute_force_lcs_len(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
  REQUIRE(a.size() <= 8);
  int best = 0;
  for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
    std::vector<TokenId> sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(a[i]);
    }
    if (is_subsequence(sub, b)) best = std::max(best, static_cast<int>(sub.size()));
  }
  return best;
}

void check_valid(const MatchedPairs& pairs, const std::vector<TokenId>& a,
                 const std::vector<TokenId>& b) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [i1, i2] = pairs[i];
    CHECK(a[static_cast<std::size_t>(i1)] == b[static_cast<std::size_t>(i2)]);
    if (i > 0) {
      CHECK(pairs[i - 1].first < i1);
      CHECK(pairs[i - 1].second < i2);
    }
  }
}

}  // namespace

TEST_CASE("worked example") {
  const std::vector<TokenId> a{10, 11, 12}, b{11, 12, 13};
  MatchedPairs pairs = lcs(a, b);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::pair<int, int>{1, 0});
  CHECK(pairs[1] == std::pair<int, int>{2, 1});
}

TEST_CASE("identity, disjoint and empty inputs") {
  const std::vector<TokenId> x{5, 6, 7, 8};
  MatchedPairs self = lcs(x, x);
  REQUIRE(self.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(self[i] == std::pair<int, int>{static_cast<int>(i), static_cast<int>(i)});
  }
  CHECK(lcs(std::vector<TokenId>{1}, std::vector<TokenId>{2}).empty());
  CHECK(lcs(x, std::vector<TokenId>{}).empty());
  CHECK(lcs(std::vector<TokenId>{}, std::vector<TokenId>{}).empty());
}

TEST_CASE("length cap is enforced") {
  std::vector<TokenId> big(65, 1);
  CHECK_THROWS_AS(lcs(big, big), std::invalid_argument);
  std::vector<TokenId> ok(64, 1);
  CHECK(lcs(ok, ok).size() == 64);
}

TEST_CASE("matches brute force on 500 random small-alphabet pairs") {
  std::mt19937_64 rng(20261);
  std::uniform_int_distribution<int> len(0, 8);
  std::uniform_int_distribution<TokenId> tok(0, 2);  // alphabet 3 stresses ties
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<TokenId> a(static_cast<std::size_t>(len(rng)));
    std::vector<TokenId> b(static_cast<std::size_t>(len(rng)));
    for (auto& t : a) t = tok(rng);
    for (auto& t : b) t = tok(rng);
    MatchedPairs ab = lcs(a, b);
    check_valid(ab, a, b);
    CHECK(static_cast<int>(ab.size()) == brute_force_lcs_len(a, b));
    CHECK(lcs(b, a).size() == ab.size());  // |lcs| is symmetric
  }
}
