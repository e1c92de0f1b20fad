#pragma once

#include <Eigen/SparseCore>
#include <iosfwd>
#include <vector>

#include "orim/driving.hpp"
#include "orim/grid.hpp"
#include "orim/system.hpp"

namespace orim {

// Cell-averaged projection of one fiber's weighted transfer operator. Entries
// are nonnegative; column j of the open matrix is zero whenever cell j lies
// in the fiber's hole. Affine branches assemble in closed form:
//   M[i][j] += g_b * |T_b(cell_j ∩ domain_b) ∩ cell_i| / width_i,
// generic branches integrate g |T'| over the preimage slice by adaptive
// Simpson (abs tol 1e-10, depth 20; non-convergent panels raise
// NumericsError).
struct TransferMatrix {
  Eigen::SparseMatrix<double, Eigen::RowMajor> mat;
  GridPtr grid;
  int symbol = 0;
  bool open = false;
};

TransferMatrix ulam_matrix(const RandomOpenSystem& system, int symbol,
                           const GridPtr& grid, bool open);

GridFunction apply(const TransferMatrix& m, const GridFunction& f);

// Max over columns of |sum_i width_i M[i][j] - survivor width of cell j|.
// Zero (to round-off) for closed affine matrices at t = 1.
double lebesgue_duality_defect(const TransferMatrix& m);

// Writes a one-line JSON header followed by "row col value" triplets.
void dump_matrix(const TransferMatrix& m, std::ostream& os);

// Eagerly built per-symbol matrices for one grid, open and closed variants.
// Read-only after construction, safe to share across threads.
class MatrixCache {
 public:
  MatrixCache(const RandomOpenSystem& system, GridPtr grid);

  const TransferMatrix& matrix(int symbol, bool open) const;
  const TransferMatrix& at(const Orbit& orbit, long position, bool open) const {
    return matrix(orbit.symbol(position), open);
  }
  const GridPtr& grid() const { return grid_; }
  const RandomOpenSystem& system() const { return *system_; }

 private:
  const RandomOpenSystem* system_;
  GridPtr grid_;
  std::vector<TransferMatrix> open_;
  std::vector<TransferMatrix> closed_;
};

// Explicit n-step cocycle product M_{p+n-1} ... M_p. Reserved for diagnostics:
// grids above 512 cells raise GridError (estimators use repeated apply).
TransferMatrix compose_cocycle(const MatrixCache& cache, const Orbit& orbit,
                               long position, int steps, bool open);

}  // namespace orim
