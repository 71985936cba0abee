// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lat {

struct NrrConfig {
  int n = 1;
  int window = 0;  // 0 = default to n ("nearby" = start distance <= window)
};

/// Percentage of n-grams repeated by an identical n-gram starting at most
/// `window` positions later in the same sentence, pooled over the corpus.
template <class Tok>
double ngram_repeat_rate(const std::vector<std::vector<Tok>>& corpus,
                         const NrrConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("nrr: n must be >= 1");
  const int w = cfg.window > 0 ? cfg.window : cfg.n;
  long long repeated = 0, total = 0;
  for (const auto& sent : corpus) {
    const int starts = static_cast<int>(sent.size()) - cfg.n + 1;
    for (int i = 0; i < starts; ++i) {
      ++total;
      for (int j = i + 1; j <= i + w && j < starts; ++j) {
        if (std::equal(sent.begin() + i, sent.begin() + i + cfg.n, sent.begin() + j)) {
          ++repeated;
          break;
        }
      }
    }
  }
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(repeated) / static_cast<double>(total);
}

/// Corpus BLEU: geometric mean of modified n-gram precisions times the
/// brevity penalty, no smoothing; zero if any used precision is zero. The
/// order is capped at the largest n for which the corpus has any
/// hypothesis n-gram at all.
template <class Tok>
double corpus_bleu(const std::vector<std::vector<Tok>>& hyps,
                   const std::vector<std::vector<Tok>>& refs, int max_n = 4) {
  if (hyps.size() != refs.size()) throw std::runtime_error("corpus length mismatch");
  std::vector<long long> matched(static_cast<std::size_t>(max_n) + 1, 0);
  std::vector<long long> candidates(static_cast<std::size_t>(max_n) + 1, 0);
  long long hyp_len = 0, ref_len = 0;
  using Gram = std::vector<Tok>;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const auto& h = hyps[s];
    const auto& r = refs[s];
    hyp_len += static_cast<long long>(h.size());
    ref_len += static_cast<long long>(r.size());
    for (int n = 1; n <= max_n; ++n) {
      std::map<Gram, long long> hyp_counts, ref_counts;
      for (std::size_t i = 0; i + n <= h.size(); ++i) {
        ++hyp_counts[Gram(h.begin() + i, h.begin() + i + n)];
      }
      for (std::size_t i = 0; i + n <= r.size(); ++i) {
        ++ref_counts[Gram(r.begin() + i, r.begin() + i + n)];
      }
      for (const auto& [gram, count] : hyp_counts) {
        candidates[n] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matched[n] += std::min(count, it->second);
      }
    }
  }
  int order = max_n;
  while (order > 1 && candidates[order] == 0) --order;
  if (candidates[order] == 0) return 0.0;
  double log_precisions = 0.0;
  for (int n = 1; n <= order; ++n) {
    if (matched[n] == 0) return 0.0;
    log_precisions += std::log(static_cast<double>(matched[n]) /
                               static_cast<double>(candidates[n])) /
                      order;
  }
  const double bp =
      hyp_len >= ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return 100.0 * bp * std::exp(log_precisions);
}

/// Token-level edit distance, unit costs.
template <class Tok>
std::size_t levenshtein(const std::vector<Tok>& a, const std::vector<Tok>& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      diag = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
    }
  }
  return row[b.size()];
}

struct BucketRow {
  int lo = 0;                                  // inclusive reference length
  int hi = std::numeric_limits<int>::max();    // exclusive
  std::size_t count = 0;
  double bleu = 0.0;
  bool has_value = false;  // empty buckets report n/a, not 0
};

/// Groups sentence pairs by reference length into buckets split at the
/// given edges and scores each non-empty bucket with corpus_bleu.
template <class Tok>
std::vector<BucketRow> bucket_report(const std::vector<std::vector<Tok>>& refs,
                                     const std::vector<std::vector<Tok>>& hyps,
                                     const std::vector<int>& edges, int max_n = 4) {
  if (hyps.size() != refs.size()) throw std::runtime_error("corpus length mismatch");
  std::vector<BucketRow> rows(edges.size() + 1);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    rows[b].lo = b == 0 ? 0 : edges[b - 1];
    rows[b].hi = b < edges.size() ? edges[b] : std::numeric_limits<int>::max();
  }
  std::vector<std::vector<std::size_t>> members(rows.size());
  for (std::size_t s = 0; s < refs.size(); ++s) {
    const int len = static_cast<int>(refs[s].size());
    std::size_t b = 0;
    while (b < edges.size() && len >= edges[b]) ++b;
    members[b].push_back(s);
    ++rows[b].count;
  }
  for (std::size_t b = 0; b < rows.size(); ++b) {
    if (members[b].empty()) continue;
    std::vector<std::vector<Tok>> bucket_hyps, bucket_refs;
    for (std::size_t s : members[b]) {
      bucket_hyps.push_back(hyps[s]);
      bucket_refs.push_back(refs[s]);
    }
    rows[b].bleu = corpus_bleu(bucket_hyps, bucket_refs, max_n);
    rows[b].has_value = true;
  }
  return rows;
}

}  // namespace lat
