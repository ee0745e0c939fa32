#pragma once

#include "wecs/control/state_space.hpp"
#include "wecs/error.hpp"

namespace wecs::control {

/// Raised when a Hamiltonian has eigenvalues on (or numerically at) the
/// imaginary axis, or its stable subspace is not a graph.
class NoStabilizingSolution : public Error {
 public:
  using Error::Error;
};

/// Ordered real Schur form H = Z T Zᵀ with the open-left-half-plane
/// eigenvalues leading.
struct OrderedSchur {
  Matrix Z;
  Matrix T;
  Eigen::VectorXcd eigenvalues;
  Index stable_count = 0;
  /// False when LAPACK could not move the selected eigenvalues to the front
  /// (clustered or ill-conditioned eigenvalues); T and Z are then unordered.
  bool ordered = true;
};

OrderedSchur ordered_schur(const Matrix& h);

/// Stabilizing solution X = X₂X₁⁻¹ of the Riccati equation associated with a
/// 2n×2n Hamiltonian, i.e. Ric(H). Requires no eigenvalue within
/// 1e-9·max(1, |λ|) of the imaginary axis.
Matrix riccati_from_hamiltonian(const Matrix& h);

/// Stabilizing X of AᵀX + XA − XBR⁻¹BᵀX + Q = 0.
Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r);

/// ‖AᵀX + XA − XGX + Q‖_F / (1 + ‖X‖_F).
double care_residual(const Matrix& a, const Matrix& g, const Matrix& q, const Matrix& x);

}  // namespace wecs::control
