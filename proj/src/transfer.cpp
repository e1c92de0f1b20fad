#include "orim/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include "orim/errors.hpp"

namespace orim {

namespace {

constexpr double kSimpsonTol = 1e-10;
constexpr int kSimpsonMaxDepth = 20;
constexpr std::size_t kComposeGate = 512;

double simpson_panel(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double fa, double b, double fb, double m, double fm,
                        double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson_panel(a, fa, m, fm, flm);
  double right = simpson_panel(m, fm, b, fb, frm);
  double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  if (depth >= kSimpsonMaxDepth) {
    throw NumericsError("ulam_matrix: quadrature panel did not converge");
  }
  return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
         adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = simpson_panel(a, fa, b, fb, fm);
  return adaptive_simpson(f, a, fa, b, fb, m, fm, whole, kSimpsonTol, 0);
}

// Half-open overlap length.
double overlap(double a1, double b1, double a2, double b2) {
  return std::max(0.0, std::min(b1, b2) - std::max(a1, a2));
}

}  // namespace

TransferMatrix ulam_matrix(const RandomOpenSystem& system, int symbol,
                           const GridPtr& grid, bool open) {
  const FiberMap& fiber = system.fiber(symbol);
  const Potential& pot = system.potential();
  const std::size_t n = grid->cells();
  std::vector<Eigen::Triplet<double>> trip;

  IntervalSet active = open ? system.surviving_domain(symbol) : IntervalSet::full();

  for (const auto& branch : fiber.branches()) {
    IntervalSet dom = branch.domain_set().intersect(active);
    for (const auto& piece : dom.parts()) {
      std::size_t j_first = grid->cell_index(piece.a);
      // piece.b can be 1.0; the last involved cell is the one containing any
      // point strictly inside.
      std::size_t j_last = grid->cell_index(std::max(piece.a, std::nextafter(piece.b, piece.a)));
      for (std::size_t j = j_first; j <= j_last; ++j) {
        double xa = std::max(piece.a, grid->left(j));
        double xb = std::min(piece.b, grid->right(j));
        if (!(xb > xa)) continue;
        if (branch.is_affine()) {
          double u = branch.slope() * xa + branch.intercept();
          double v = branch.slope() * xb + branch.intercept();
          if (u > v) std::swap(u, v);
          u = std::clamp(u, 0.0, 1.0);
          v = std::clamp(v, 0.0, 1.0);
          if (!(v > u)) continue;
          double g = pot.weight(std::fabs(branch.slope()), symbol,
                                static_cast<long>(j));
          std::size_t i_first = grid->cell_index(u);
          std::size_t i_last = grid->cell_index(std::max(u, std::nextafter(v, u)));
          for (std::size_t i = i_first; i <= i_last; ++i) {
            double len = overlap(u, v, grid->left(i), grid->right(i));
            if (len > 0.0) {
              trip.emplace_back(static_cast<int>(i), static_cast<int>(j),
                                g * len / grid->width(i));
            }
          }
        } else {
          double tu = branch.value_closure(xa);
          double tv = branch.value_closure(xb);
          if (tu > tv) std::swap(tu, tv);
          tu = std::clamp(tu, 0.0, 1.0);
          tv = std::clamp(tv, 0.0, 1.0);
          if (!(tv > tu)) continue;
          std::size_t i_first = grid->cell_index(tu);
          std::size_t i_last = grid->cell_index(std::max(tu, std::nextafter(tv, tu)));
          const bool tabulated = pot.kind() == PotentialKind::tabulated;
          double scale = tabulated ? pot.weight(1.0, symbol, static_cast<long>(j)) : 1.0;
          double t_exp = tabulated ? 1.0 : 1.0 - pot.t();
          auto integrand = [&branch, t_exp](double x) {
            return std::pow(branch.derivative_abs_closure(x), t_exp);
          };
          for (std::size_t i = i_first; i <= i_last; ++i) {
            double ya = std::max(tu, grid->left(i));
            double yb = std::min(tv, grid->right(i));
            if (!(yb > ya)) continue;
            auto pa = branch.invert_closure(ya);
            auto pb = branch.invert_closure(yb);
            if (!pa || !pb) continue;
            double x1 = std::min(*pa, *pb), x2 = std::max(*pa, *pb);
            x1 = std::max(x1, xa);
            x2 = std::min(x2, xb);
            double mass = scale * integrate(integrand, x1, x2);
            if (mass > 0.0) {
              trip.emplace_back(static_cast<int>(i), static_cast<int>(j),
                                mass / grid->width(i));
            }
          }
        }
      }
    }
  }

  TransferMatrix out;
  out.grid = grid;
  out.symbol = symbol;
  out.open = open;
  out.mat.resize(static_cast<int>(n), static_cast<int>(n));
  out.mat.setFromTriplets(trip.begin(), trip.end());
  out.mat.makeCompressed();
  return out;
}

GridFunction apply(const TransferMatrix& m, const GridFunction& f) {
  if (f.grid() != m.grid) {
    throw GridError("apply: function and matrix live on different grids");
  }
  Eigen::Map<const Eigen::VectorXd> v(f.values().data(),
                                      static_cast<long>(f.size()));
  Eigen::VectorXd w = m.mat * v;
  return GridFunction(m.grid, std::vector<double>(w.data(), w.data() + w.size()));
}

double lebesgue_duality_defect(const TransferMatrix& m) {
  const Grid& g = *m.grid;
  std::vector<double> col_mass(g.cells(), 0.0);
  for (int row = 0; row < m.mat.outerSize(); ++row) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m.mat, row);
         it; ++it) {
      col_mass[static_cast<std::size_t>(it.col())] +=
          g.width(static_cast<std::size_t>(row)) * it.value();
    }
  }
  double defect = 0.0;
  for (std::size_t j = 0; j < g.cells(); ++j) {
    defect = std::max(defect, std::fabs(col_mass[j] - g.width(j)));
  }
  return defect;
}

void dump_matrix(const TransferMatrix& m, std::ostream& os) {
  os << "{\"cells\": " << m.grid->cells() << ", \"symbol\": " << m.symbol
     << ", \"open\": " << (m.open ? "true" : "false")
     << ", \"nnz\": " << m.mat.nonZeros() << "}\n";
  for (int row = 0; row < m.mat.outerSize(); ++row) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m.mat, row);
         it; ++it) {
      os << row << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

MatrixCache::MatrixCache(const RandomOpenSystem& system, GridPtr grid)
    : system_(&system), grid_(std::move(grid)) {
  open_.reserve(system.symbols());
  closed_.reserve(system.symbols());
  for (int s = 0; s < system.symbols(); ++s) {
    open_.push_back(ulam_matrix(system, s, grid_, true));
    closed_.push_back(ulam_matrix(system, s, grid_, false));
  }
}

const TransferMatrix& MatrixCache::matrix(int symbol, bool open) const {
  const auto& bank = open ? open_ : closed_;
  if (symbol < 0 || symbol >= static_cast<int>(bank.size())) {
    throw ConfigError("MatrixCache: symbol out of range");
  }
  return bank[static_cast<std::size_t>(symbol)];
}

TransferMatrix compose_cocycle(const MatrixCache& cache, const Orbit& orbit,
                               long position, int steps, bool open) {
  if (steps < 0) throw OrbitError("compose_cocycle: negative step count");
  const GridPtr& grid = cache.grid();
  if (grid->cells() > kComposeGate) {
    throw GridError("compose_cocycle: explicit products restricted to grids of "
                    "at most 512 cells");
  }
  TransferMatrix out;
  out.grid = grid;
  out.symbol = steps > 0 ? orbit.symbol(position) : -1;
  out.open = open;
  auto n = static_cast<int>(grid->cells());
  out.mat.resize(n, n);
  out.mat.setIdentity();
  for (int k = 0; k < steps; ++k) {
    out.mat = (cache.at(orbit, position + k, open).mat * out.mat).pruned();
  }
  out.mat.makeCompressed();
  return out;
}

}  // namespace orim
