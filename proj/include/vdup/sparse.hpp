#pragma once

#include <cmath>
#include <cstdint>
#include <map>

namespace vdup {

using TermId = std::int64_t;

/// Term id -> nonnegative weight; zero weights are never stored. Ordered so
/// that iteration (and therefore floating-point summation) is deterministic.
class SparseVector {
 public:
  using Map = std::map<TermId, double>;

  SparseVector() = default;

  void set(TermId term, double weight);
  void add(TermId term, double weight);
  double get(TermId term) const;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const Map& entries() const { return entries_; }

  double norm() const;
  SparseVector scaled(double factor) const;

  bool operator==(const SparseVector&) const = default;

 private:
  Map entries_;
};

/// Cosine over shared term ids; 0 when either side is empty or all-zero.
double cosine(const SparseVector& a, const SparseVector& b);

}  // namespace vdup
