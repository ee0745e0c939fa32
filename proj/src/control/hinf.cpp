#include "wecs/control/hinf.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wecs/control/riccati.hpp"

namespace wecs::control {
namespace {

Matrix inverse_of(const Matrix& m, const char* what) {
  if (m.size() == 0) return m;
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) throw SingularError(what);
  return lu.inverse();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

double smallest_singular_ratio(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
  return s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

// Relative residual of H21 + H22 X − X H11 − X H12 X = 0, scaled by the size
// of its terms.
double hamiltonian_residual(const Matrix& h, const Matrix& x) {
  const Index n = x.rows();
  const Matrix h11 = h.topLeftCorner(n, n), h12 = h.topRightCorner(n, n);
  const Matrix h21 = h.bottomLeftCorner(n, n), h22 = h.bottomRightCorner(n, n);
  const Matrix t1 = h22 * x, t2 = x * h11, t3 = x * h12 * x;
  const double scale = h21.norm() + t1.norm() + t2.norm() + t3.norm();
  const double res = (h21 + t1 - t2 - t3).norm();
  return scale > 0.0 ? res / scale : res;
}

bool is_psd(const Matrix& x) {
  if (x.size() == 0) return true;
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(x).eigenvalues();
  return ev.minCoeff() >= -1e-8 * std::max(1.0, ev.cwiseAbs().maxCoeff());
}

// Hamiltonian whose imaginary-axis eigenvalues are the frequencies where
// σ̄(G(jω)) = γ.
Matrix norm_hamiltonian(const StateSpace& g, double gamma) {
  const Index m = g.inputs(), p = g.outputs();
  const Matrix r = g.D.transpose() * g.D - gamma * gamma * Matrix::Identity(m, m);
  const Matrix s = g.D * g.D.transpose() - gamma * gamma * Matrix::Identity(p, p);
  const Matrix ri = inverse_of(r, "hinf_norm: γ equals a singular value of D");
  const Matrix si = inverse_of(s, "hinf_norm: γ equals a singular value of D");
  const Matrix a = g.A - g.B * ri * g.D.transpose() * g.C;
  Matrix h(2 * g.states(), 2 * g.states());
  h << a, -gamma * g.B * ri * g.B.transpose(), gamma * g.C.transpose() * si * g.C,
      -a.transpose();
  return h;
}

std::vector<double> crossing_frequencies(const Matrix& h) {
  std::vector<double> freqs;
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(h, false).eigenvalues();
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).real()) <= 1e-8 * std::max(1.0, std::abs(ev(i))) && ev(i).imag() >= 0.0)
      freqs.push_back(ev(i).imag());
  }
  std::sort(freqs.begin(), freqs.end());
  return freqs;
}

double gain_at(const StateSpace& g, double w) {
  try {
    return max_singular_value(evaluate(g, Complex(0.0, w)));
  } catch (const SingularError&) {
    return 0.0;
  }
}

// Plant with extra z rows ε·u or w columns ε·I so that D12 / D21 have full rank.
GeneralizedPlant regularize(const GeneralizedPlant& p, double eps, bool fix_d12,
                            bool fix_d21) {
  Matrix B1 = p.B1(), B2 = p.B2(), C1 = p.C1(), C2 = p.C2();
  Matrix D11 = p.D11(), D12 = p.D12(), D21 = p.D21(), D22 = p.D22();
  const Index n = p.sys.states();
  if (fix_d12) {
    const Index nu = p.nu;
    C1.conservativeResize(C1.rows() + nu, Eigen::NoChange);
    C1.bottomRows(nu).setZero();
    D11.conservativeResize(D11.rows() + nu, Eigen::NoChange);
    D11.bottomRows(nu).setZero();
    D12.conservativeResize(D12.rows() + nu, Eigen::NoChange);
    D12.bottomRows(nu) = eps * Matrix::Identity(nu, nu);
  }
  if (fix_d21) {
    const Index ny = p.ny;
    B1.conservativeResize(Eigen::NoChange, B1.cols() + ny);
    B1.rightCols(ny).setZero();
    D11.conservativeResize(Eigen::NoChange, D11.cols() + ny);
    D11.rightCols(ny).setZero();
    D21.conservativeResize(Eigen::NoChange, D21.cols() + ny);
    D21.rightCols(ny) = eps * Matrix::Identity(ny, ny);
  }
  const Index nw = B1.cols(), nz = C1.rows();
  Matrix B(n, nw + p.nu), C(nz + p.ny, n), D(nz + p.ny, nw + p.nu);
  B << B1, B2;
  C << C1, C2;
  D << D11, D12, D21, D22;
  return GeneralizedPlant(StateSpace(p.sys.A, B, C, D), nw, p.nu, nz, p.ny);
}

// Central controller for D22 = 0. Implements the general-D11 two-Riccati
// formulas after the plant has been rotated/scaled to D12 = [0; I],
// D21 = [0 I].
CentralControllerAttempt central_controller_d22_zero(const GeneralizedPlant& p,
                                                     double gamma) {
  CentralControllerAttempt out;
  const Index n = p.sys.states(), nw = p.nw, nu = p.nu, nz = p.nz, ny = p.ny;
  const Matrix A = p.sys.A;

  // z̃ = Θ z with Θ D12 = [0; R12]; u = R12⁻¹ ũ.
  Eigen::HouseholderQR<Matrix> qr12(p.D12());
  const Matrix q12 = qr12.householderQ();
  const Matrix r12 = qr12.matrixQR().topRows(nu).triangularView<Eigen::Upper>();
  Matrix theta(nz, nz);
  theta << q12.rightCols(nz - nu).transpose(), q12.leftCols(nu).transpose();
  const Matrix r12_inv = inverse_of(r12, "D12 is rank deficient");

  // w = Φ w̃ with D21 Φ = [0 L]; ỹ = L⁻¹ y.
  Eigen::HouseholderQR<Matrix> qr21(p.D21().transpose());
  const Matrix q21 = qr21.householderQ();
  const Matrix l21 =
      Matrix(qr21.matrixQR().topRows(ny).triangularView<Eigen::Upper>()).transpose();
  Matrix phi(nw, nw);
  phi << q21.rightCols(nw - ny), q21.leftCols(ny);
  const Matrix l21_inv = inverse_of(l21, "D21 is rank deficient");

  const Matrix B1 = p.B1() * phi;
  const Matrix B2 = p.B2() * r12_inv;
  const Matrix C1 = theta * p.C1();
  const Matrix C2 = l21_inv * p.C2();
  const Matrix D11 = theta * p.D11() * phi;
  Matrix D12 = Matrix::Zero(nz, nu);
  D12.bottomRows(nu).setIdentity();
  Matrix D21 = Matrix::Zero(ny, nw);
  D21.rightCols(ny).setIdentity();

  const Index mw1 = nw - ny, pz1 = nz - nu;
  const Matrix D1111 = D11.topLeftCorner(pz1, mw1), D1112 = D11.topRightCorner(pz1, ny);
  const Matrix D1121 = D11.bottomLeftCorner(nu, mw1), D1122 = D11.bottomRightCorner(nu, ny);

  Matrix top(pz1, nw), left(nz, mw1);
  top << D1111, D1112;
  left << D1111, D1121;
  const double g2 = gamma * gamma;
  if (gamma <= std::max(spectral_norm(top), spectral_norm(left))) {
    out.failed = SynthesisCondition::feedthrough_bound;
    return out;
  }

  Matrix Bfull(n, nw + nu), Cfull(nz + ny, n), D1dot(nz, nw + nu), Ddot1(nz + ny, nw);
  Bfull << B1, B2;
  Cfull << C1, C2;
  D1dot << D11, D12;
  Ddot1 << D11, D21;
  const Matrix R = D1dot.transpose() * D1dot -
                   block_diag(g2 * Matrix::Identity(nw, nw), Matrix::Zero(nu, nu));
  const Matrix Rt = Ddot1 * Ddot1.transpose() -
                    block_diag(g2 * Matrix::Identity(nz, nz), Matrix::Zero(ny, ny));
  const Matrix Ri = inverse_of(R, "synthesis: R is singular");
  const Matrix Rti = inverse_of(Rt, "synthesis: R~ is singular");

  Matrix H(2 * n, 2 * n), J(2 * n, 2 * n);
  {
    Matrix base(2 * n, 2 * n), left_h(2 * n, nw + nu), right_h(nw + nu, 2 * n);
    base << A, Matrix::Zero(n, n), -C1.transpose() * C1, -A.transpose();
    left_h << Bfull, -C1.transpose() * D1dot;
    right_h << D1dot.transpose() * C1, Bfull.transpose();
    H = base - left_h * Ri * right_h;
  }
  {
    Matrix base(2 * n, 2 * n), left_j(2 * n, nz + ny), right_j(nz + ny, 2 * n);
    base << A.transpose(), Matrix::Zero(n, n), -B1 * B1.transpose(), -A;
    left_j << Cfull.transpose(), -B1 * Ddot1.transpose();
    right_j << Ddot1 * B1.transpose(), Cfull;
    J = base - left_j * Rti * right_j;
  }

  Matrix X, Y;
  try {
    X = riccati_from_hamiltonian(H);
  } catch (const NoStabilizingSolution&) {
    out.failed = SynthesisCondition::x_not_stabilizing;
    return out;
  }
  if (!is_psd(X)) {
    out.failed = SynthesisCondition::x_not_psd;
    return out;
  }
  try {
    Y = riccati_from_hamiltonian(J);
  } catch (const NoStabilizingSolution&) {
    out.failed = SynthesisCondition::y_not_stabilizing;
    return out;
  }
  if (!is_psd(Y)) {
    out.failed = SynthesisCondition::y_not_psd;
    return out;
  }
  const Matrix XY = X * Y;
  const double rho =
      XY.size() ? Eigen::EigenSolver<Matrix>(XY, false).eigenvalues().cwiseAbs().maxCoeff() : 0.0;
  if (!(rho < g2 * (1.0 - 1e-9))) {
    out.failed = SynthesisCondition::spectral_radius;
    return out;
  }
  out.riccati_residuals = {hamiltonian_residual(H, X), hamiltonian_residual(J, Y)};

  const Matrix F = -Ri * (D1dot.transpose() * C1 + Bfull.transpose() * X);
  const Matrix L = -(B1 * Ddot1.transpose() + Y * Cfull.transpose()) * Rti;
  const Matrix F12 = F.middleRows(mw1, ny), F2 = F.bottomRows(nu);
  const Matrix L12 = L.middleCols(pz1, nu), L2 = L.rightCols(ny);

  const Matrix inv_pz = inverse_of(g2 * Matrix::Identity(pz1, pz1) - D1111 * D1111.transpose(),
                                   "synthesis: γ²I − D1111 D1111ᵀ singular");
  const Matrix inv_mw = inverse_of(g2 * Matrix::Identity(mw1, mw1) - D1111.transpose() * D1111,
                                   "synthesis: γ²I − D1111ᵀ D1111 singular");
  const Matrix Dh11 = -D1121 * D1111.transpose() * inv_pz * D1112 - D1122;
  const Matrix M12 = Matrix::Identity(nu, nu) - D1121 * inv_mw * D1121.transpose();
  const Matrix M21 = Matrix::Identity(ny, ny) - D1112.transpose() * inv_pz * D1112;
  Eigen::LLT<Matrix> llt12(M12), llt21(M21);
  if (llt12.info() != Eigen::Success || llt21.info() != Eigen::Success) {
    out.failed = SynthesisCondition::feedthrough_bound;
    return out;
  }
  const Matrix Dh12 = llt12.matrixL();                  // Dh12 Dh12ᵀ = M12
  const Matrix Dh21 = Matrix(llt21.matrixL()).transpose();  // Dh21ᵀ Dh21 = M21
  const Matrix Dh12_inv = inverse_of(Dh12, "synthesis: D^12 singular");
  const Matrix Dh21_inv = inverse_of(Dh21, "synthesis: D^21 singular");

  const Matrix Z = inverse_of(Matrix::Identity(n, n) - Y * X / g2, "synthesis: I − YX/γ² singular");
  const Matrix Bh2 = Z * (B2 + L12) * Dh12;
  const Matrix Ch2 = -Dh21 * (C2 + F12);
  const Matrix Bh1 = -Z * L2 + Bh2 * Dh12_inv * Dh11;
  const Matrix Ch1 = F2 + Dh11 * Dh21_inv * Ch2;
  const Matrix Ah = A + Bfull * F + Bh1 * Dh21_inv * Ch2;

  out.controller =
      StateSpace(Ah, Bh1 * l21_inv, r12_inv * Ch1, r12_inv * Dh11 * l21_inv);
  return out;
}

}  // namespace

double hinf_norm(const StateSpace& g, double rel_tol) {
  if (!g.is_stable()) throw DomainError("hinf_norm: system is not stable");
  const double d_norm = spectral_norm(g.D);
  if (g.states() == 0) return d_norm;

  double lb = std::max(d_norm, gain_at(g, 0.0));
  const Eigen::VectorXcd poles = g.poles();
  for (Index i = 0; i < poles.size(); ++i) {
    lb = std::max(lb, gain_at(g, std::abs(poles(i).imag())));
    lb = std::max(lb, gain_at(g, std::abs(poles(i))));
  }
  if (lb == 0.0) return 0.0;

  double ub = std::numeric_limits<double>::infinity();
  double gamma = lb * (1.0 + 2.0 * rel_tol);
  for (int iter = 0; iter < 500; ++iter) {
    const std::vector<double> freqs = crossing_frequencies(norm_hamiltonian(g, gamma));
    if (freqs.empty()) {
      ub = gamma;
    } else {
      double peak = 0.0;
      for (size_t i = 0; i < freqs.size(); ++i) {
        peak = std::max(peak, gain_at(g, freqs[i]));
        if (i + 1 < freqs.size()) peak = std::max(peak, gain_at(g, 0.5 * (freqs[i] + freqs[i + 1])));
      }
      lb = std::max({lb, gamma, peak});
    }
    if (ub <= lb * (1.0 + rel_tol)) return ub;
    gamma = std::isfinite(ub) ? std::sqrt(lb * ub) : lb * (1.0 + 2.0 * rel_tol);
  }
  throw NumericError("hinf_norm: bisection did not converge");
}

double hinf_norm_grid(const StateSpace& g, double w_min, double w_max, int points) {
  double peak = gain_at(g, 0.0);
  const double lmin = std::log10(w_min), lmax = std::log10(w_max);
  for (int i = 0; i < points; ++i) {
    const double w = std::pow(10.0, lmin + (lmax - lmin) * i / (points - 1));
    peak = std::max(peak, gain_at(g, w));
  }
  return peak;
}

GeneralizedPlant::GeneralizedPlant(StateSpace s, Index exogenous, Index controls,
                                   Index performance, Index measurements)
    : sys(std::move(s)), nw(exogenous), nu(controls), nz(performance), ny(measurements) {
  if (nw + nu != sys.inputs() || nz + ny != sys.outputs() || nu <= 0 || ny <= 0)
    throw DimensionError("GeneralizedPlant: partition does not match the realization");
}

StateSpace GeneralizedPlant::close_loop(const StateSpace& controller) const {
  return lower_lft(sys, controller, nu, ny);
}

std::string to_string(SynthesisCondition c) {
  switch (c) {
    case SynthesisCondition::none: return "none";
    case SynthesisCondition::feedthrough_bound: return "feedthrough bound (gamma <= ||D11 block||)";
    case SynthesisCondition::x_not_stabilizing: return "X Riccati has no stabilizing solution";
    case SynthesisCondition::x_not_psd: return "X Riccati solution not positive semidefinite";
    case SynthesisCondition::y_not_stabilizing: return "Y Riccati has no stabilizing solution";
    case SynthesisCondition::y_not_psd: return "Y Riccati solution not positive semidefinite";
    case SynthesisCondition::spectral_radius: return "spectral radius rho(XY) >= gamma^2";
  }
  return "unknown";
}

CentralControllerAttempt central_controller(const GeneralizedPlant& p, double gamma) {
  const Matrix d22 = p.D22();
  if (d22.isZero(0.0)) return central_controller_d22_zero(p, gamma);

  // Synthesize for ỹ = y − D22 u, then close u = K̃ (y − D22 u).
  StateSpace shifted = p.sys;
  shifted.D.bottomRightCorner(p.ny, p.nu).setZero();
  CentralControllerAttempt out = central_controller_d22_zero(
      GeneralizedPlant(shifted, p.nw, p.nu, p.nz, p.ny), gamma);
  if (out.controller)
    out.controller = feedback(*out.controller, StateSpace::gain(d22), -1);
  return out;
}

SynthesisResult hinf_synthesize(const GeneralizedPlant& plant, const SynthesisOptions& opts) {
  if (!(opts.gamma_min > 0.0) || !(opts.gamma_max >= opts.gamma_min))
    throw DomainError("hinf_synthesize: invalid gamma range");

  SynthesisResult result;
  const bool fix_d12 = smallest_singular_ratio(plant.D12()) < 1e-10;
  const bool fix_d21 = smallest_singular_ratio(plant.D21()) < 1e-10;
  const GeneralizedPlant p =
      (fix_d12 || fix_d21) ? regularize(plant, opts.regularization, fix_d12, fix_d21) : plant;
  if (fix_d12 || fix_d21) result.regularization = opts.regularization;

  CentralControllerAttempt best = central_controller(p, opts.gamma_max);
  if (!best.controller)
    throw InfeasibleError(best.failed, "hinf_synthesize: infeasible at gamma_max = " +
                                           std::to_string(opts.gamma_max) + ": " +
                                           to_string(best.failed));
  double hi = opts.gamma_max;
  double lo = opts.gamma_min;
  if (central_controller(p, lo).controller) {
    hi = lo;
  } else {
    while (hi > lo * (1.0 + opts.rel_tol)) {
      const double mid = std::sqrt(lo * hi);
      if (central_controller(p, mid).controller)
        hi = mid;
      else
        lo = mid;
    }
  }
  result.gamma_boundary = hi;

  double gamma = std::min(opts.gamma_max, hi * (1.0 + opts.margin));
  CentralControllerAttempt attempt = central_controller(p, gamma);
  if (!attempt.controller) {
    gamma = hi;
    attempt = central_controller(p, gamma);
  }
  if (!attempt.controller)
    throw InfeasibleError(attempt.failed, "hinf_synthesize: lost feasibility at gamma = " +
                                              std::to_string(gamma));
  result.controller = *attempt.controller;
  result.gamma_achieved = gamma;
  result.riccati_residuals = attempt.riccati_residuals;
  return result;
}

}  // namespace wecs::control
