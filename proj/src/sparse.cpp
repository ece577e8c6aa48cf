#include "vdup/sparse.hpp"

#include "vdup/error.hpp"

#include <algorithm>

namespace vdup {

void SparseVector::set(TermId term, double weight) {
  if (!std::isfinite(weight) || weight < 0.0) {
    fail(ErrorKind::Validation, "sparse weights must be finite and nonnegative");
  }
  if (weight == 0.0) {
    entries_.erase(term);
  } else {
    entries_[term] = weight;
  }
}

void SparseVector::add(TermId term, double weight) { set(term, get(term) + weight); }

double SparseVector::get(TermId term) const {
  auto it = entries_.find(term);
  return it == entries_.end() ? 0.0 : it->second;
}

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& [t, w] : entries_) s += w * w;
  return std::sqrt(s);
}

SparseVector SparseVector::scaled(double factor) const {
  SparseVector out;
  for (const auto& [t, w] : entries_) out.set(t, w * factor);
  return out;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  if (a == b) return 1.0;
  // Merge walk over the two sorted maps.
  double dot = 0.0;
  auto ia = a.entries().begin();
  auto ib = b.entries().begin();
  while (ia != a.entries().end() && ib != b.entries().end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  const double c = dot / (na * nb);
  return std::clamp(c, 0.0, 1.0);
}

}  // namespace vdup
