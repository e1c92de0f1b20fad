#pragma once

#include <cstdint>
#include <vector>

namespace orim {

// splitmix64 step; used to derive per-orbit seeds from the run seed so that
// orbit ensembles are reproducible and order-independent.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

enum class DrivingKind { iid, markov };

// Base measure on the two-sided shift over kSymbols symbols. For iid driving
// the symbol law is a fixed probability vector; for markov driving a
// row-stochastic transition matrix with its stationary vector. Backward
// extension of markov orbits uses the reversed chain
//   Phat[i][j] = stationary[j] * P[j][i] / stationary[i].
class DrivingSystem {
 public:
  static DrivingSystem iid(std::vector<double> probabilities);
  static DrivingSystem markov(std::vector<std::vector<double>> transition,
                              std::vector<double> stationary);

  DrivingKind kind() const { return kind_; }
  int symbols() const { return static_cast<int>(stationary_.size()); }
  // Marginal law of a single coordinate (iid probabilities or stationary).
  double symbol_measure(int s) const { return stationary_.at(s); }
  const std::vector<double>& marginal() const { return stationary_; }
  const std::vector<std::vector<double>>& transition() const { return transition_; }
  const std::vector<std::vector<double>>& reversed() const { return reversed_; }

 private:
  DrivingSystem() = default;
  DrivingKind kind_ = DrivingKind::iid;
  std::vector<double> stationary_;
  std::vector<std::vector<double>> transition_;  // empty for iid
  std::vector<std::vector<double>> reversed_;    // empty for iid
};

// Finite window of one point of the shift space: symbols at indices
// lo() <= k <= hi() with index 0 at the sampling origin. shift(p) re-indexes
// the same symbol data so that the new index k reads the old index p + k.
class Orbit {
 public:
  Orbit(std::vector<int> symbols, long lo, std::uint64_t seed);

  int symbol(long k) const;  // throws OrbitError outside [lo, hi]
  long lo() const { return lo_; }
  long hi() const { return lo_ + static_cast<long>(symbols_.size()) - 1; }
  std::uint64_t seed() const { return seed_; }

  Orbit shift(long p) const;

 private:
  std::vector<int> symbols_;
  long lo_ = 0;
  std::uint64_t seed_ = 0;
};

// Draws symbols at indices -n_back..n_fwd. Index 0 is sampled from the
// marginal law, indices 1..n_fwd from the forward chain, indices -1..-n_back
// from the reversed chain (iid driving draws all coordinates independently).
// The draw order is fixed, so equal seeds give equal windows.
Orbit sample_orbit(const DrivingSystem& driving, std::uint64_t seed, int n_back,
                   int n_fwd);

}  // namespace orim
