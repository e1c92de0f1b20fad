#include "orim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "orim/errors.hpp"

namespace orim {

namespace {

constexpr double kTol = 1e-12;

bool covers_unit(const IntervalSet& s) {
  return s.complement().total_length() <= kTol;
}

// Pulls z back through the branch word (most recent branch last). Clamping
// inside Branch::invert absorbs the one-ulp drift at piece boundaries.
double invert_chain(const RandomOpenSystem& system, const Orbit& orbit,
                    long position, const std::vector<int>& word, double z) {
  for (std::size_t j = word.size(); j-- > 0;) {
    const Branch& b =
        system.fiber(orbit.symbol(position + static_cast<long>(j)))
            .branches()[static_cast<std::size_t>(word[j])];
    double lo = b.image_lo(), hi = b.image_hi();
    auto x = b.invert_closure(std::clamp(z, lo, hi));
    if (!x) {
      throw NumericsError("invert_chain: preimage lost at branch boundary");
    }
    z = *x;
  }
  return z;
}

void branch_weight_bounds(const Potential& pot, int symbol, const Branch& b,
                          double c, double d, double* w_lo, double* w_hi) {
  if (pot.kind() == PotentialKind::tabulated) {
    throw ConfigError("oracle: cylinder weights support geometric potentials only");
  }
  if (b.is_affine()) {
    double w = pot.weight(std::fabs(b.slope()), symbol, -1);
    *w_lo = w;
    *w_hi = w;
    return;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double z : {c, 0.5 * (c + d), d}) {
    double w = pot.weight(b.derivative_abs_closure(z), symbol, -1);
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  *w_lo = lo;
  *w_hi = hi;
}

}  // namespace

IntervalSet fiber_pullback(const RandomOpenSystem& system, int symbol,
                           const IntervalSet& set, bool open_flag) {
  std::vector<HalfOpen> parts;
  for (const auto& branch : system.fiber(symbol).branches()) {
    for (const auto& p : set.parts()) {
      double c = std::max(p.a, branch.image_lo());
      double d = std::min(p.b, branch.image_hi());
      if (!(d - c > IntervalSet::kLengthFloor)) continue;
      auto x1 = branch.invert_closure(c);
      auto x2 = branch.invert_closure(d);
      if (!x1 || !x2) {
        throw NumericsError("fiber_pullback: branch inversion failed");
      }
      parts.push_back({std::min(*x1, *x2), std::max(*x1, *x2)});
    }
  }
  IntervalSet out(std::move(parts));
  if (open_flag) out = out.intersect(system.surviving_domain(symbol));
  return out;
}

IntervalSet survivor_intervals(const RandomOpenSystem& system, const Orbit& orbit,
                               long position, int depth,
                               std::size_t component_cap) {
  if (depth < 0) throw DomainError("survivor_intervals: negative depth");
  IntervalSet x = system.surviving_domain(orbit.symbol(position + depth));
  for (long j = position + depth - 1; j >= position; --j) {
    x = fiber_pullback(system, orbit.symbol(j), x, true);
    if (x.components() > component_cap) {
      throw DepthError("survivor_intervals: component cap exceeded at offset " +
                       std::to_string(j - position));
    }
  }
  return x;
}

double point_transfer(const RandomOpenSystem& system, const Orbit& orbit,
                      long position, int depth,
                      const std::function<double(double)>& f, double y,
                      bool open_flag) {
  if (depth < 0) throw DomainError("point_transfer: negative depth");
  if (depth > 15) {
    throw DepthError("point_transfer: preimage tree capped at depth 15");
  }
  if (depth == 0) return f(y);
  double sum = 0.0;
  // The outermost factor of the n-step operator acts at position + depth - 1.
  for (const auto& pre :
       fiber_preimages(system, orbit.symbol(position + depth - 1), y, open_flag)) {
    sum += pre.weight *
           point_transfer(system, orbit, position, depth - 1, f, pre.x, open_flag);
  }
  return sum;
}

std::vector<Cylinder> enumerate_cylinders(const RandomOpenSystem& system,
                                          const Orbit& orbit, long position,
                                          int depth, bool open_flag,
                                          std::size_t component_cap) {
  if (depth < 1) throw DomainError("enumerate_cylinders: depth must be >= 1");
  std::vector<Cylinder> out;
  std::size_t nodes = 0;

  struct Frame {
    double xa, xb;   // x-interval of the partial cylinder
    double u, v;     // current image
    double wlo, whi; // accumulated weight bounds
    std::vector<int> word;
  };

  // Depth-first refinement; recursion depth equals the cylinder depth.
  std::function<void(int, const Frame&)> refine = [&](int k, const Frame& fr) {
    if (k == depth) {
      Cylinder c;
      c.a = fr.xa;
      c.b = fr.xb;
      c.img_lo = fr.u;
      c.img_hi = fr.v;
      c.weight_lo = fr.wlo;
      c.weight_hi = fr.whi;
      c.full = fr.u <= kTol && fr.v >= 1.0 - kTol;
      c.word = fr.word;
      out.push_back(std::move(c));
      return;
    }
    int symbol = orbit.symbol(position + k);
    const FiberMap& fiber = system.fiber(symbol);
    IntervalSet active =
        open_flag ? system.surviving_domain(symbol) : IntervalSet::full();
    IntervalSet img = IntervalSet::single(fr.u, fr.v);
    for (int bi = 0; bi < fiber.branch_count(); ++bi) {
      const Branch& branch = fiber.branches()[static_cast<std::size_t>(bi)];
      IntervalSet pieces = branch.domain_set().intersect(active).intersect(img);
      for (const auto& piece : pieces.parts()) {
        if (++nodes > component_cap) {
          throw DepthError("enumerate_cylinders: node cap exceeded");
        }
        Frame child;
        child.word = fr.word;
        child.word.push_back(bi);
        if (k == 0) {
          child.xa = piece.a;
          child.xb = piece.b;
        } else {
          double x1 = invert_chain(system, orbit, position, fr.word, piece.a);
          double x2 = invert_chain(system, orbit, position, fr.word, piece.b);
          child.xa = std::max(fr.xa, std::min(x1, x2));
          child.xb = std::min(fr.xb, std::max(x1, x2));
        }
        double t1 = branch.value_closure(piece.a);
        double t2 = branch.value_closure(piece.b);
        child.u = std::clamp(std::min(t1, t2), 0.0, 1.0);
        child.v = std::clamp(std::max(t1, t2), 0.0, 1.0);
        double blo, bhi;
        branch_weight_bounds(system.potential(), symbol, branch, piece.a, piece.b,
                             &blo, &bhi);
        child.wlo = fr.wlo * blo;
        child.whi = fr.whi * bhi;
        if (child.xb - child.xa > IntervalSet::kLengthFloor &&
            child.v - child.u > IntervalSet::kLengthFloor) {
          refine(k + 1, child);
        }
      }
    }
  };

  Frame root{0.0, 1.0, 0.0, 1.0, 1.0, 1.0, {}};
  refine(0, root);
  std::sort(out.begin(), out.end(),
            [](const Cylinder& l, const Cylinder& r) { return l.a < r.a; });
  return out;
}

int contiguous_nonfull_count(const RandomOpenSystem& system, const Orbit& orbit,
                             long position, int depth,
                             std::size_t component_cap) {
  auto cylinders =
      enumerate_cylinders(system, orbit, position, depth, true, component_cap);
  int best = 0, run = 0;
  for (const auto& c : cylinders) {
    run = c.full ? 0 : run + 1;
    best = std::max(best, run);
  }
  return best;
}

int min_preimage_count(const RandomOpenSystem& system, const Orbit& orbit,
                       long position, int depth, std::size_t component_cap) {
  auto cylinders =
      enumerate_cylinders(system, orbit, position, depth, true, component_cap);
  std::vector<double> cuts{0.0, 1.0};
  for (const auto& c : cylinders) {
    cuts.push_back(c.img_lo);
    cuts.push_back(c.img_hi);
  }
  std::sort(cuts.begin(), cuts.end());
  int best = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= kTol) continue;
    double m = 0.5 * (cuts[i] + cuts[i + 1]);
    if (m < 0.0 || m >= 1.0) continue;
    int cover = 0;
    for (const auto& c : cylinders) {
      if (c.img_lo <= m && m < c.img_hi) ++cover;
    }
    best = std::min(best, cover);
  }
  return best == std::numeric_limits<int>::max() ? 0 : best;
}

double analytic_pressure(const RandomOpenSystem& system, double t, bool open_flag) {
  if (!system.analytic()) {
    throw NotAnalyticError(
        "analytic_pressure: system is not full-branch affine with whole-branch holes");
  }
  double ep = 0.0;
  for (int s = 0; s < system.symbols(); ++s) {
    double w = 0.0;
    for (const auto& b : system.fiber(s).branches()) {
      if (open_flag) {
        double covered = system.hole(s).set().overlap_length(b.lo(), b.hi());
        double width = b.hi() - b.lo();
        if (covered >= width - kTol) continue;  // branch swallowed by the hole
        if (covered > kTol) {
          throw NotAnalyticError("analytic_pressure: hole cuts a branch");
        }
      }
      w += std::pow(std::fabs(b.slope()), -t);
    }
    if (w <= 0.0) {
      throw DegenerateSystemError("analytic_pressure: fiber " + std::to_string(s) +
                                  " retains no branch");
    }
    ep += system.driving().symbol_measure(s) * std::log(w);
  }
  return ep;
}

AnalyticRoot analytic_root(const RandomOpenSystem& system) {
  AnalyticRoot out;
  out.ep_at_0 = analytic_pressure(system, 0.0, true);
  out.ep_at_1 = analytic_pressure(system, 1.0, true);
  if (out.ep_at_0 <= 0.0) {
    out.h = 0.0;
    out.at_lower = true;
    return out;
  }
  if (out.ep_at_1 >= 0.0) {
    out.h = 1.0;
    out.at_upper = true;
    return out;
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    double mid = 0.5 * (lo + hi);
    (analytic_pressure(system, mid, true) > 0.0 ? lo : hi) = mid;
  }
  out.h = 0.5 * (lo + hi);
  return out;
}

LinearFit box_count_dimension(const std::vector<IntervalSet>& survivor_sets) {
  std::vector<double> xs, ys;
  for (const auto& s : survivor_sets) {
    if (s.empty()) continue;
    double eps = s.min_component_length();
    auto n = static_cast<double>(s.box_count(eps));
    xs.push_back(std::log(1.0 / eps));
    ys.push_back(std::log(n));
  }
  if (xs.size() < 3) {
    throw InsufficientDataError("box_count_dimension: need at least 3 usable depths");
  }
  return linear_fit(xs, ys);
}

std::vector<double> cylinder_conformal_masses(const RandomOpenSystem& system,
                                              const Orbit& orbit, long position,
                                              int depth,
                                              std::vector<Cylinder>* cylinders) {
  if (!system.analytic()) {
    throw NotAnalyticError("cylinder_conformal_masses: analytic systems only");
  }
  double t = system.potential().t();
  double log_norm = 0.0;
  for (int k = 0; k < depth; ++k) {
    int s = orbit.symbol(position + k);
    double w = 0.0;
    for (const auto& b : system.fiber(s).branches()) {
      if (system.hole(s).set().overlap_length(b.lo(), b.hi()) > kTol) continue;
      w += std::pow(std::fabs(b.slope()), -t);
    }
    if (w <= 0.0) {
      throw DegenerateSystemError("cylinder_conformal_masses: dead fiber");
    }
    log_norm += std::log(w);
  }
  auto cyls = enumerate_cylinders(system, orbit, position, depth, true);
  std::vector<double> masses;
  masses.reserve(cyls.size());
  for (const auto& c : cyls) {
    masses.push_back(c.weight_lo * std::exp(-log_norm));
  }
  if (cylinders) *cylinders = std::move(cyls);
  return masses;
}

std::vector<int> covering_time_table(const RandomOpenSystem& system, int depth_max,
                                     int k_cap, std::size_t state_cap) {
  const DrivingSystem& driving = system.driving();
  const int S = driving.symbols();

  auto allowed = [&](int last) {
    std::vector<int> next;
    for (int s = 0; s < S; ++s) {
      double p = driving.kind() == DrivingKind::iid
                     ? driving.symbol_measure(s)
                     : driving.transition()[static_cast<std::size_t>(last)]
                                           [static_cast<std::size_t>(s)];
      if (p > 0.0) next.push_back(s);
    }
    return next;
  };

  auto forward_image = [&](const IntervalSet& j, int symbol) {
    std::vector<HalfOpen> parts;
    for (const auto& b : system.fiber(symbol).branches()) {
      IntervalSet cut = j.intersect(b.domain_set());
      for (const auto& p : cut.parts()) {
        double u = b.value_closure(p.a), v = b.value_closure(p.b);
        parts.push_back({std::clamp(std::min(u, v), 0.0, 1.0),
                         std::clamp(std::max(u, v), 0.0, 1.0)});
      }
    }
    return IntervalSet(std::move(parts));
  };

  using Key = std::pair<int, std::vector<long long>>;
  std::map<Key, int> memo;
  std::map<Key, bool> on_stack;
  std::size_t states = 0;

  auto key_of = [](const IntervalSet& j, int last) {
    Key k;
    k.first = last;
    for (const auto& p : j.parts()) {
      k.second.push_back(std::llround(p.a * 1e12));
      k.second.push_back(std::llround(p.b * 1e12));
    }
    return k;
  };

  // Worst-case covering time from image set j after symbol `last`; -1 when a
  // continuation cycles without covering or a budget is exhausted.
  std::function<int(const IntervalSet&, int)> worst = [&](const IntervalSet& j,
                                                          int last) -> int {
    if (covers_unit(j)) return 0;
    Key key = key_of(j, last);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (on_stack[key]) return -1;
    if (++states > state_cap) return -1;
    on_stack[key] = true;
    int best = 0;
    for (int s : allowed(last)) {
      int r = worst(forward_image(j, s), s);
      if (r < 0 || 1 + r > k_cap) {
        best = -1;
        break;
      }
      best = std::max(best, 1 + r);
    }
    on_stack[key] = false;
    memo[key] = best;
    return best;
  };

  std::vector<int> table;
  for (int n = 1; n <= depth_max; ++n) {
    int worst_n = 0;
    // Enumerate positive-probability words of length n.
    std::vector<int> word;
    std::function<bool(int)> run_words = [&](int k) -> bool {
      if (k == n) {
        Orbit orbit(word, 0, 0);
        for (const auto& c : enumerate_cylinders(system, orbit, 0, n, false)) {
          int r = worst(IntervalSet::single(c.img_lo, c.img_hi), word.back());
          if (r < 0) {
            worst_n = -1;
            return false;
          }
          worst_n = std::max(worst_n, r);
        }
        return true;
      }
      for (int s = 0; s < S; ++s) {
        double p = k == 0 ? driving.symbol_measure(s)
                   : driving.kind() == DrivingKind::iid
                       ? driving.symbol_measure(s)
                       : driving.transition()[static_cast<std::size_t>(word.back())]
                                             [static_cast<std::size_t>(s)];
        if (p <= 0.0) continue;
        word.push_back(s);
        bool ok = run_words(k + 1);
        word.pop_back();
        if (!ok) return false;
      }
      return true;
    };
    run_words(0);
    table.push_back(worst_n);
  }
  return table;
}

}  // namespace orim
