#include "orim/interval_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "orim/errors.hpp"

namespace orim {

IntervalSet::IntervalSet(std::vector<HalfOpen> parts) : parts_(std::move(parts)) {
  for (const auto& p : parts_) {
    if (!(p.a <= p.b) || !std::isfinite(p.a) || !std::isfinite(p.b)) {
      throw DomainError("IntervalSet: endpoints must be finite with a <= b");
    }
  }
  normalize();
}

IntervalSet IntervalSet::full() { return single(0.0, 1.0); }

IntervalSet IntervalSet::single(double a, double b) {
  if (b < a) throw DomainError("IntervalSet::single: b < a");
  IntervalSet s;
  s.parts_.push_back({a, b});
  s.normalize();
  return s;
}

void IntervalSet::normalize() {
  std::sort(parts_.begin(), parts_.end(),
            [](const HalfOpen& x, const HalfOpen& y) { return x.a < y.a; });
  std::vector<HalfOpen> merged;
  for (const auto& p : parts_) {
    if (p.b - p.a < kLengthFloor) continue;
    if (!merged.empty() && p.a - merged.back().b <= kEndpointTol) {
      merged.back().b = std::max(merged.back().b, p.b);
    } else {
      merged.push_back(p);
    }
  }
  parts_ = std::move(merged);
}

double IntervalSet::total_length() const {
  double sum = 0.0;
  for (const auto& p : parts_) sum += p.b - p.a;
  return sum;
}

double IntervalSet::min_component_length() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : parts_) m = std::min(m, p.b - p.a);
  return m;
}

bool IntervalSet::contains(double x) const {
  // parts_ sorted by a: first part with a > x cannot contain x.
  for (const auto& p : parts_) {
    if (p.a > x) break;
    if (x < p.b) return true;
  }
  return false;
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  IntervalSet out;
  std::size_t i = 0, j = 0;
  while (i < parts_.size() && j < other.parts_.size()) {
    const HalfOpen& p = parts_[i];
    const HalfOpen& q = other.parts_[j];
    double lo = std::max(p.a, q.a);
    double hi = std::min(p.b, q.b);
    if (hi - lo >= kLengthFloor) out.parts_.push_back({lo, hi});
    if (p.b < q.b) {
      ++i;
    } else {
      ++j;
    }
  }
  out.normalize();
  return out;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  IntervalSet out;
  out.parts_ = parts_;
  out.parts_.insert(out.parts_.end(), other.parts_.begin(), other.parts_.end());
  out.normalize();
  return out;
}

IntervalSet IntervalSet::complement() const {
  IntervalSet out;
  double cursor = 0.0;
  for (const auto& p : parts_) {
    if (p.a > cursor) out.parts_.push_back({cursor, std::min(p.a, 1.0)});
    cursor = std::max(cursor, p.b);
    if (cursor >= 1.0) break;
  }
  if (cursor < 1.0) out.parts_.push_back({cursor, 1.0});
  out.normalize();
  return out;
}

IntervalSet IntervalSet::affine_image(double slope, double intercept) const {
  if (slope == 0.0) throw DomainError("affine_image: zero slope");
  IntervalSet out;
  out.parts_.reserve(parts_.size());
  for (const auto& p : parts_) {
    double u = slope * p.a + intercept;
    double v = slope * p.b + intercept;
    if (slope < 0.0) std::swap(u, v);
    out.parts_.push_back({u, v});
  }
  out.normalize();
  return out;
}

double IntervalSet::overlap_length(double a, double b) const {
  double sum = 0.0;
  for (const auto& p : parts_) {
    if (p.a >= b) break;
    double lo = std::max(p.a, a);
    double hi = std::min(p.b, b);
    if (hi > lo) sum += hi - lo;
  }
  return sum;
}

std::size_t IntervalSet::box_count(double eps) const {
  if (!(eps > 0.0)) throw DomainError("box_count: eps must be positive");
  std::size_t count = 0;
  std::int64_t last_counted = -1;
  for (const auto& p : parts_) {
    auto first = static_cast<std::int64_t>(std::floor(p.a / eps));
    // The right endpoint is excluded; a part ending exactly on a box boundary
    // does not touch the next box.
    double top = p.b - p.a < kLengthFloor ? p.a : p.b;
    auto last = static_cast<std::int64_t>(std::ceil(top / eps)) - 1;
    if (last < first) last = first;
    if (first <= last_counted) first = last_counted + 1;
    if (last >= first) {
      count += static_cast<std::size_t>(last - first + 1);
      last_counted = last;
    }
  }
  return count;
}

bool IntervalSet::approx_equal(const IntervalSet& other) const {
  if (parts_.size() != other.parts_.size()) return false;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (std::fabs(parts_[i].a - other.parts_[i].a) > kEndpointTol) return false;
    if (std::fabs(parts_[i].b - other.parts_[i].b) > kEndpointTol) return false;
  }
  return true;
}

}  // namespace orim
