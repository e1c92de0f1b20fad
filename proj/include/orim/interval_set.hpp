#pragma once

#include <cstddef>
#include <vector>

namespace orim {

// One half-open interval [a, b). Endpoint conventions: a <= b; zero-length
// intervals are legal inputs but are dropped on normalization.
struct HalfOpen {
  double a = 0.0;
  double b = 0.0;
  double length() const { return b - a; }
};

// Sorted list of disjoint half-open intervals inside [0, 1). Set operations
// (intersect, unite, complement) only select among existing endpoints and
// never create new floating-point values, so identities built from them hold
// bitwise. Arithmetic enters only through affine images.
//
// Endpoints closer than kEndpointTol are treated as equal when merging and
// comparing; components shorter than kLengthFloor are discarded.
class IntervalSet {
 public:
  static constexpr double kEndpointTol = 1e-13;
  static constexpr double kLengthFloor = 1e-15;

  IntervalSet() = default;
  explicit IntervalSet(std::vector<HalfOpen> parts);

  static IntervalSet full();                       // [0, 1)
  static IntervalSet single(double a, double b);   // throws DomainError if b < a

  const std::vector<HalfOpen>& parts() const { return parts_; }
  std::size_t components() const { return parts_.size(); }
  bool empty() const { return parts_.empty(); }
  double total_length() const;
  double min_component_length() const;
  bool contains(double x) const;

  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet unite(const IntervalSet& other) const;
  // Complement within [0, 1).
  IntervalSet complement() const;

  // Image under x -> slope * x + intercept. Decreasing maps flip interval
  // orientation; results are re-normalized to half-open form (single points
  // carry no mass, so the convention change is harmless).
  IntervalSet affine_image(double slope, double intercept) const;

  // Lebesgue measure of the overlap with [a, b).
  double overlap_length(double a, double b) const;

  // Number of distinct boxes [k*eps, (k+1)*eps) meeting the set.
  std::size_t box_count(double eps) const;

  // Component-count equality plus per-endpoint agreement within kEndpointTol.
  bool approx_equal(const IntervalSet& other) const;

 private:
  void normalize();
  std::vector<HalfOpen> parts_;
};

}  // namespace orim
