#include "orim/driving.hpp"

#include <cmath>
#include <random>
#include <string>

#include "orim/errors.hpp"

namespace orim {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

void check_probability_vector(const std::vector<double>& p, double tol,
                              const std::string& what) {
  if (p.empty()) throw ConfigError(what + ": empty probability vector");
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw ConfigError(what + ": negative entry");
    sum += x;
  }
  if (std::fabs(sum - 1.0) > tol) {
    throw ConfigError(what + ": entries sum to " + std::to_string(sum) +
                      ", expected 1");
  }
}

// Draws an index from a probability vector using one uniform variate. The CDF
// walk makes the draw reproducible across platforms for a fixed engine.
int draw_index(std::mt19937_64& eng, const std::vector<double>& p) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(eng);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

}  // namespace

DrivingSystem DrivingSystem::iid(std::vector<double> probabilities) {
  check_probability_vector(probabilities, 1e-12, "iid driving");
  DrivingSystem d;
  d.kind_ = DrivingKind::iid;
  d.stationary_ = std::move(probabilities);
  return d;
}

DrivingSystem DrivingSystem::markov(std::vector<std::vector<double>> transition,
                                    std::vector<double> stationary) {
  const std::size_t n = transition.size();
  if (n == 0 || stationary.size() != n) {
    throw ConfigError("markov driving: transition and stationary sizes disagree");
  }
  for (const auto& row : transition) {
    if (row.size() != n) throw ConfigError("markov driving: non-square transition");
    check_probability_vector(row, 1e-12, "markov transition row");
  }
  check_probability_vector(stationary, 1e-12, "markov stationary vector");
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) col += stationary[i] * transition[i][j];
    if (std::fabs(col - stationary[j]) > 1e-10) {
      throw ConfigError("markov driving: vector is not stationary for the transition");
    }
    if (!(stationary[j] > 0.0)) {
      throw ConfigError("markov driving: stationary entries must be positive");
    }
  }
  DrivingSystem d;
  d.kind_ = DrivingKind::markov;
  d.stationary_ = std::move(stationary);
  d.transition_ = std::move(transition);
  d.reversed_.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      d.reversed_[i][j] =
          d.stationary_[j] * d.transition_[j][i] / d.stationary_[i];
    }
  }
  return d;
}

Orbit::Orbit(std::vector<int> symbols, long lo, std::uint64_t seed)
    : symbols_(std::move(symbols)), lo_(lo), seed_(seed) {
  if (symbols_.empty()) throw OrbitError("Orbit: empty symbol window");
}

int Orbit::symbol(long k) const {
  if (k < lo() || k > hi()) {
    throw OrbitError("Orbit: index " + std::to_string(k) + " outside window [" +
                     std::to_string(lo()) + ", " + std::to_string(hi()) + "]");
  }
  return symbols_[static_cast<std::size_t>(k - lo_)];
}

Orbit Orbit::shift(long p) const {
  Orbit out = *this;
  out.lo_ = lo_ - p;
  return out;
}

Orbit sample_orbit(const DrivingSystem& driving, std::uint64_t seed, int n_back,
                   int n_fwd) {
  if (n_back < 0 || n_fwd < 0) throw OrbitError("sample_orbit: negative window");
  std::mt19937_64 eng(seed);
  std::vector<int> fwd(static_cast<std::size_t>(n_fwd) + 1);
  std::vector<int> back(static_cast<std::size_t>(n_back));
  const auto& marginal = driving.marginal();
  fwd[0] = draw_index(eng, marginal);
  for (int k = 1; k <= n_fwd; ++k) {
    fwd[k] = driving.kind() == DrivingKind::iid
                 ? draw_index(eng, marginal)
                 : draw_index(eng, driving.transition()[fwd[k - 1]]);
  }
  int prev = fwd[0];
  for (int k = 0; k < n_back; ++k) {
    prev = driving.kind() == DrivingKind::iid
               ? draw_index(eng, marginal)
               : draw_index(eng, driving.reversed()[prev]);
    back[k] = prev;
  }
  std::vector<int> all;
  all.reserve(back.size() + fwd.size());
  for (auto it = back.rbegin(); it != back.rend(); ++it) all.push_back(*it);
  for (int s : fwd) all.push_back(s);
  return Orbit(std::move(all), -static_cast<long>(n_back), seed);
}

}  // namespace orim
