#include "wecs/control/riccati.hpp"

#include <lapacke.h>

#include <Eigen/LU>
#include <cmath>
#include <vector>

namespace wecs::control {
namespace {

lapack_logical select_open_lhp(const double* re, const double* /*im*/) {
  return *re < 0.0 ? 1 : 0;
}

// ‖H21 + H22 X − X H11 − X H12 X‖_F for the Riccati equation of H.
Matrix hamiltonian_residual(const Matrix& h, const Matrix& x) {
  const Index n = x.rows();
  return h.bottomLeftCorner(n, n) + h.bottomRightCorner(n, n) * x - x * h.topLeftCorner(n, n) -
         x * h.topRightCorner(n, n) * x;
}

// Newton steps on the Riccati equation: with Ac = H11 + H12 X solve
// Acᵀ Δ + Δ Ac = R (Kronecker form), X += Δ. Kept only while the residual drops.
// Assumes H is Hamiltonian (H12, H21 symmetric, H22 = −H11ᵀ).
Matrix newton_refine(const Matrix& h, Matrix x, int max_steps) {
  const Index n = x.rows();
  if (n > 24) return x;
  Matrix res = hamiltonian_residual(h, x);
  for (int it = 0; it < max_steps && res.norm() > 0.0; ++it) {
    const Matrix ac = h.topLeftCorner(n, n) + h.topRightCorner(n, n) * x;
    // vec(Acᵀ Δ + Δ Ac) = (I ⊗ Acᵀ + Acᵀ ⊗ I) vec(Δ)
    Matrix k = Matrix::Zero(n * n, n * n);
    for (Index i = 0; i < n; ++i) {
      k.block(i * n, i * n, n, n) += ac.transpose();
      for (Index j = 0; j < n; ++j) k.block(j * n, i * n, n, n).diagonal().array() += ac(i, j);
    }
    Eigen::PartialPivLU<Matrix> lu(k);
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(res.data(), n * n);
    const Eigen::VectorXd d = lu.solve(rhs);
    Matrix candidate = x + Eigen::Map<const Matrix>(d.data(), n, n);
    candidate = 0.5 * (candidate + candidate.transpose());
    const Matrix next = hamiltonian_residual(h, candidate);
    if (!candidate.allFinite() || !(next.norm() < res.norm())) break;
    x = candidate;
    res = next;
  }
  return x;
}

}  // namespace

OrderedSchur ordered_schur(const Matrix& h) {
  if (h.rows() != h.cols()) throw DimensionError("ordered_schur: matrix must be square");
  const lapack_int n = static_cast<lapack_int>(h.rows());
  OrderedSchur out;
  out.T = h;  // column-major, overwritten by the Schur form
  out.Z.resize(n, n);
  std::vector<double> wr(n), wi(n);
  lapack_int sdim = 0;
  const lapack_int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', select_open_lhp, n, out.T.data(), n, &sdim,
                    wr.data(), wi.data(), out.Z.data(), n);
  if (info == n + 1 || info == n + 2)
    out.ordered = false;
  else if (info != 0)
    throw NumericError("ordered_schur: dgees failed with info " + std::to_string(info));
  out.stable_count = sdim;
  out.eigenvalues.resize(n);
  for (lapack_int i = 0; i < n; ++i) out.eigenvalues(i) = Complex(wr[i], wi[i]);
  return out;
}

Matrix riccati_from_hamiltonian(const Matrix& h) {
  if (h.rows() % 2 != 0) throw DimensionError("Hamiltonian must be 2n x 2n");
  const Index n = h.rows() / 2;
  if (n == 0) return Matrix(0, 0);
  if (!h.allFinite()) throw NoStabilizingSolution("Hamiltonian has non-finite entries");
  const OrderedSchur schur = ordered_schur(h);
  if (!schur.ordered)
    throw NoStabilizingSolution("stable eigenvalues could not be separated");
  for (Index i = 0; i < schur.eigenvalues.size(); ++i) {
    const Complex lambda = schur.eigenvalues(i);
    if (std::abs(lambda.real()) <= 1e-9 * std::max(1.0, std::abs(lambda)))
      throw NoStabilizingSolution("Hamiltonian has an eigenvalue on the imaginary axis");
  }
  if (schur.stable_count != n)
    throw NoStabilizingSolution("Hamiltonian stable subspace has dimension " +
                                std::to_string(schur.stable_count) + ", expected " +
                                std::to_string(n));
  const Matrix x1 = schur.Z.topLeftCorner(n, n);
  const Matrix x2 = schur.Z.bottomLeftCorner(n, n);
  Eigen::FullPivLU<Matrix> lu(x1.transpose());
  if (!lu.isInvertible() || lu.rcond() < 1e-12)
    throw NoStabilizingSolution("stable subspace is not a graph (X1 singular)");
  const Matrix x = lu.solve(x2.transpose()).transpose();
  return newton_refine(h, 0.5 * (x + x.transpose()), 3);
}

Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
  const Index n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != b.cols() || r.cols() != b.cols())
    throw DimensionError("solve_care: dimension mismatch");
  Eigen::FullPivLU<Matrix> r_lu(r);
  if (!r_lu.isInvertible()) throw SingularError("solve_care: R is singular");
  const Matrix g = b * r_lu.solve(b.transpose());
  Matrix h(2 * n, 2 * n);
  h << a, -g, -q, -a.transpose();
  return riccati_from_hamiltonian(h);
}

double care_residual(const Matrix& a, const Matrix& g, const Matrix& q, const Matrix& x) {
  const Matrix res = a.transpose() * x + x * a - x * g * x + q;
  return res.norm() / (1.0 + x.norm());
}

}  // namespace wecs::control
