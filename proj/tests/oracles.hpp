#pragma once

// Brute-force reference computations. They share no code with the library
// and favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace vdup::oracle {

using Matrix = std::vector<std::vector<double>>;

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

/// Best accumulated similarity over every pair of equal-length contiguous
/// windows whose frames all match (s >= tau). `weighted` scales each match
/// by (i/m)(j/n) with 1-based positions.
inline double best_window(const Matrix& sim, double tau, bool weighted) {
  const int m = static_cast<int>(sim.size());
  const int n = m ? static_cast<int>(sim[0].size()) : 0;
  double best = 0;
  for (int i0 = 0; i0 < m; ++i0) {
    for (int j0 = 0; j0 < n; ++j0) {
      for (int len = 1; i0 + len <= m && j0 + len <= n; ++len) {
        double total = 0;
        bool ok = true;
        for (int t = 0; t < len; ++t) {
          const double s = sim[i0 + t][j0 + t];
          if (s < tau) {
            ok = false;
            break;
          }
          total += weighted ? s * (double(i0 + t + 1) / m) * (double(j0 + t + 1) / n) : s;
        }
        if (ok) best = std::max(best, total);
      }
    }
  }
  return best;
}

/// Weighted-LCS denominator sum_{i=1..min} i*(max-i) / (min*max), accumulated
/// in integers first.
inline double printed_denominator(int min_len, int max_len) {
  long long numer = 0;
  for (int i = 1; i <= min_len; ++i) numer += static_cast<long long>(i) * (max_len - i);
  return static_cast<double>(numer) / (static_cast<double>(min_len) * max_len);
}

struct Metrics {
  std::size_t rank = 0;
  double rr = 0;
  double ap = 0;
  std::vector<bool> hit;  // hit[k-1], k = 1..10
};

/// Metrics from an explicit ranked list, via precision at every cut-off.
inline Metrics metrics(const std::vector<std::string>& ranked, const std::set<std::string>& relevant) {
  Metrics m;
  double precision_sum = 0;
  for (std::size_t k = 1; k <= ranked.size(); ++k) {
    if (!relevant.count(ranked[k - 1])) continue;
    if (m.rank == 0) m.rank = k;
    std::size_t found = 0;
    for (std::size_t i = 0; i < k; ++i) found += relevant.count(ranked[i]);
    precision_sum += static_cast<double>(found) / static_cast<double>(k);
  }
  m.rr = 1.0 / static_cast<double>(m.rank);
  m.ap = precision_sum / static_cast<double>(relevant.size());
  for (std::size_t k = 1; k <= 10; ++k) m.hit.push_back(m.rank <= k);
  return m;
}

/// Document frequency by set membership.
inline std::map<std::int64_t, std::int64_t> document_frequency(const std::vector<std::vector<std::int64_t>>& docs) {
  std::map<std::int64_t, std::int64_t> df;
  for (const auto& d : docs) {
    for (auto w : std::set<std::int64_t>(d.begin(), d.end())) ++df[w];
  }
  return df;
}

/// Within-cluster sum of squares for a labelling, using cluster means.
inline double inertia(const std::vector<std::vector<double>>& points, const std::vector<int>& labels, int k) {
  const std::size_t dim = points.front().size();
  std::vector<std::vector<double>> sum(k, std::vector<double>(dim, 0));
  std::vector<int> count(k, 0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    ++count[labels[p]];
    for (std::size_t d = 0; d < dim; ++d) sum[labels[p]][d] += points[p][d];
  }
  double total = 0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const int c = labels[p];
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = points[p][d] - sum[c][d] / count[c];
      total += diff * diff;
    }
  }
  return total;
}

/// Lowest inertia over `trials` uniformly random labellings.
inline double best_random_inertia(const std::vector<std::vector<double>>& points, int k, int trials,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, k - 1);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> labels(points.size());
  for (int t = 0; t < trials; ++t) {
    for (auto& l : labels) l = pick(rng);
    best = std::min(best, inertia(points, labels, k));
  }
  return best;
}

}  // namespace vdup::oracle
