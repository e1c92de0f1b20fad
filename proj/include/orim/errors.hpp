#pragma once

#include <stdexcept>
#include <string>

namespace orim {

// Exit codes used by the CLI. Library code throws; only main() maps to codes.
enum class ExitCode : int {
  ok = 0,
  failure = 1,
  config = 2,
  numerics = 3,
  inconclusive = 4,
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Domain/state violations: invalid interval endpoints, point outside a branch
// domain, non-monotone branch data.
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Orbit window too short for the requested position/depth.
struct OrbitError : std::runtime_error {
  explicit OrbitError(const std::string& what) : std::runtime_error(what) {}
};

// Grid construction failures: duplicate breakpoints after snapping, cell
// below the minimum width, composition size gate.
struct GridError : std::runtime_error {
  explicit GridError(const std::string& what) : std::runtime_error(what) {}
};

// Quadrature non-convergence and other floating-point breakdowns.
struct NumericsError : std::runtime_error {
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

// The open cocycle lost all mass: empty support mask where a ratio is needed.
struct DegenerateSystemError : std::runtime_error {
  explicit DegenerateSystemError(const std::string& what)
      : std::runtime_error(what) {}
};

// A statistical decision could not be made within the sampling cap.
struct InconclusiveError : std::runtime_error {
  explicit InconclusiveError(const std::string& what)
      : std::runtime_error(what) {}
};

// Exact enumeration exceeded its component/node budget.
struct DepthError : std::runtime_error {
  explicit DepthError(const std::string& what) : std::runtime_error(what) {}
};

// Fewer data points than a fit requires.
struct InsufficientDataError : std::runtime_error {
  explicit InsufficientDataError(const std::string& what)
      : std::runtime_error(what) {}
};

// Hilbert metric requested for functions vanishing identically on the mask.
struct UndefinedMetric : std::runtime_error {
  explicit UndefinedMetric(const std::string& what)
      : std::runtime_error(what) {}
};

// Analytic formulas requested for a system outside the closed-form class.
struct NotAnalyticError : std::runtime_error {
  explicit NotAnalyticError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace orim
