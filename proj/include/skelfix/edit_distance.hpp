#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace skelfix {

// Levenshtein distance over token sequences, unit-cost insert/delete/
// substitute. Two-row dynamic program.
inline std::size_t token_edit_distance(const std::vector<std::string>& a,
                                       const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace skelfix
