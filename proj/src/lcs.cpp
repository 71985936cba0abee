// SPDX-License-Identifier: Apache-2.0
#include "lat/lcs.hpp"

#include <algorithm>
#include <stdexcept>

namespace lat {

MatchedPairs lcs(std::span<const TokenId> s1, std::span<const TokenId> s2, int cap) {
  const int n1 = static_cast<int>(s1.size());
  const int n2 = static_cast<int>(s2.size());
  if (n1 > cap || n2 > cap) throw std::invalid_argument("lcs: sequence longer than cap");
  if (n1 == 0 || n2 == 0) return {};

  // classic O(n1*n2) table
  std::vector<int> table(static_cast<std::size_t>(n1 + 1) * (n2 + 1), 0);
  auto at = [&](int i, int j) -> int& { return table[static_cast<std::size_t>(i) * (n2 + 1) + j]; };
  for (int i = 1; i <= n1; ++i) {
    for (int j = 1; j <= n2; ++j) {
      at(i, j) = s1[i - 1] == s2[j - 1] ? at(i - 1, j - 1) + 1
                                        : std::max(at(i - 1, j), at(i, j - 1));
    }
  }

  MatchedPairs pairs;
  int i = n1, j = n2;
  while (i > 0 && j > 0) {
    if (s1[i - 1] == s2[j - 1]) {
      pairs.emplace_back(i - 1, j - 1);
      --i, --j;
    } else if (at(i, j - 1) >= at(i - 1, j)) {
      --j;
    } else {
      --i;
    }
  }
  std::reverse(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace lat
