// SPDX-License-Identifier: Apache-2.0
#include "lat/merge.hpp"

#include <algorithm>
#include <stdexcept>

#include "lat/lcs.hpp"

namespace lat {

double span_score(std::span<const ScoredToken> span, const MergeConfig& cfg) {
  if (span.empty()) return cfg.empty_span_score;
  double sum = 0.0;
  for (const auto& t : span) sum += t.score;
  return sum / static_cast<double>(span.size());
}

ScoredToken align_token(const ScoredToken& t1, const ScoredToken& t2) {
  if (t1.token != t2.token) throw std::invalid_argument("align on unequal tokens");
  ScoredToken out;
  out.token = t1.token;
  out.score = std::max(t1.score, t2.score);
  out.position = merge_positions(t1.position, t2.position);
  return out;
}

std::vector<ScoredToken> merge_two(std::span<const ScoredToken> s1,
                                   std::span<const ScoredToken> s2,
                                   const MergeConfig& cfg) {
  std::vector<TokenId> ids1, ids2;
  ids1.reserve(s1.size());
  ids2.reserve(s2.size());
  for (const auto& t : s1) ids1.push_back(t.token);
  for (const auto& t : s2) ids2.push_back(t.token);
  MatchedPairs pairs = lcs(ids1, ids2);

  if (pairs.empty()) {
    std::vector<ScoredToken> out(s1.begin(), s1.end());
    out.insert(out.end(), s2.begin(), s2.end());
    return out;
  }

  // sentinel pair runs both trailing spans to the sequence ends
  const int n1 = static_cast<int>(s1.size());
  const int n2 = static_cast<int>(s2.size());
  pairs.emplace_back(n1, n2);

  std::vector<ScoredToken> out;
  out.reserve(s1.size() + s2.size());
  int p1 = -1, p2 = -1;
  for (const auto& [i1, i2] : pairs) {
    auto span1 = s1.subspan(p1 + 1, i1 - p1 - 1);
    auto span2 = s2.subspan(p2 + 1, i2 - p2 - 1);
    if (span_score(span1, cfg) >= span_score(span2, cfg)) {
      out.insert(out.end(), span1.begin(), span1.end());
    } else {
      out.insert(out.end(), span2.begin(), span2.end());
    }
    if (i1 != n1) {
      out.push_back(align_token(s1[i1], s2[i2]));
    }
    p1 = i1, p2 = i2;
  }
  return out;
}

MergedSequence merge_all(const std::vector<Piece>& pieces, const MergeConfig& cfg) {
  if (pieces.empty()) throw std::runtime_error("no pieces");
  const std::size_t window = static_cast<std::size_t>(cfg.k);

  MergedSequence result;
  for (const Piece& piece : pieces) {
    if (piece.tokens.empty()) continue;
    auto& run = result.tokens;
    if (run.empty()) {
      run = piece.tokens;
      continue;
    }
    const std::size_t tail_start = run.size() > window ? run.size() - window : 0;
    std::span<const ScoredToken> tail{run.data() + tail_start, run.size() - tail_start};
    const std::size_t head_len = std::min(window, piece.tokens.size());
    std::span<const ScoredToken> head{piece.tokens.data(), head_len};

    std::vector<ScoredToken> mid = merge_two(tail, head, cfg);
    run.resize(tail_start);
    run.insert(run.end(), mid.begin(), mid.end());
    run.insert(run.end(), piece.tokens.begin() + static_cast<std::ptrdiff_t>(head_len),
               piece.tokens.end());
  }
  return result;
}

}  // namespace lat
