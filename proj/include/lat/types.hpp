// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace lat {

using TokenId = std::int32_t;

// Reserved ids occupy the lowest id range, in this fixed order.
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kSopId = 1;
inline constexpr TokenId kMaskId = 2;
inline constexpr TokenId kEosId = 3;
inline constexpr TokenId kUnkId = 4;
inline constexpr TokenId kLengthId = 5;
inline constexpr TokenId kNumReserved = 6;

/// Exact rational value num/den with den > 0. Kept unnormalized so that
/// position averaging stays associative and bit-reproducible.
struct Fraction {
  long long num = 0;
  long long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// dens are positive, so cross-multiplication preserves order
inline int compare(Fraction a, Fraction b) {
  const long long lhs = a.num * b.den;
  const long long rhs = b.num * a.den;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

inline bool operator==(Fraction a, Fraction b) { return compare(a, b) == 0; }
inline bool operator<(Fraction a, Fraction b) { return compare(a, b) < 0; }
inline bool operator>(Fraction a, Fraction b) { return compare(a, b) > 0; }
inline bool operator<=(Fraction a, Fraction b) { return compare(a, b) <= 0; }
inline bool operator>=(Fraction a, Fraction b) { return compare(a, b) >= 0; }

/// A token's position is the average of all source input positions it came
/// from; merging two tokens unions those multisets (sums and counts add).
inline Fraction merge_positions(Fraction a, Fraction b) {
  return {a.num + b.num, a.den + b.den};
}

inline Fraction midpoint(Fraction a, Fraction b) {
  return {a.num * b.den + b.num * a.den, 2 * a.den * b.den};
}

/// right - left, as an exact value.
inline Fraction difference(Fraction left, Fraction right) {
  return {right.num * left.den - left.num * right.den, left.den * right.den};
}

inline Fraction whole(long long n) { return {n, 1}; }

/// A vocabulary id together with its log-probability and fractional position.
struct ScoredToken {
  TokenId token = 0;
  double score = 0.0;    // natural log-probability
  Fraction position{0, 1};
};

inline bool same_content(const ScoredToken& a, const ScoredToken& b) {
  return a.token == b.token && a.score == b.score && a.position.num == b.position.num &&
         a.position.den == b.position.den;
}

/// The K-step local autoregressive output anchored at one decoder position.
/// Token j carries position anchor + j until merging averages it.
struct Piece {
  int anchor = 0;
  std::vector<ScoredToken> tokens;
};

inline Piece make_piece(int anchor, const std::vector<TokenId>& ids,
                        const std::vector<double>& scores) {
  Piece p;
  p.anchor = anchor;
  p.tokens.reserve(ids.size());
  for (std::size_t j = 0; j < ids.size(); ++j) {
    p.tokens.push_back({ids[j], scores[j], whole(anchor + static_cast<long long>(j))});
  }
  return p;
}

/// Scored, positioned output of the merger. Position values are NOT
/// guaranteed monotone: conflict resolution may pick either span.
struct MergedSequence {
  std::vector<ScoredToken> tokens;
};

inline std::vector<TokenId> token_ids(const std::vector<ScoredToken>& seq) {
  std::vector<TokenId> ids;
  ids.reserve(seq.size());
  for (const auto& t : seq) ids.push_back(t.token);
  return ids;
}

}  // namespace lat
