#pragma once

#include <optional>
#include <string>
#include <utility>

#include "wecs/control/state_space.hpp"
#include "wecs/error.hpp"

namespace wecs::control {

/// H∞ norm of a stable system: γ-bisection on the imaginary-axis eigenvalue
/// test of the associated Hamiltonian, refined until the bracket is within
/// `rel_tol`. Returns the upper end of the final bracket. Lower bounds are
/// raised by evaluating σ̄(G(jω)) at the crossing frequencies, so the
/// bracket always contains the true norm. Throws DomainError if unstable.
double hinf_norm(const StateSpace& sys, double rel_tol = 1e-4);

/// Peak σ̄(G(jω)) over `points` log-spaced frequencies in [w_min, w_max],
/// plus ω = 0. Independent cross-check for hinf_norm.
double hinf_norm_grid(const StateSpace& sys, double w_min = 1e-3, double w_max = 1e4,
                      int points = 2000);

/// Plant with inputs [w; u] and outputs [z; e].
struct GeneralizedPlant {
  StateSpace sys;
  Index nw = 0, nu = 0, nz = 0, ny = 0;

  GeneralizedPlant() = default;
  GeneralizedPlant(StateSpace s, Index exogenous, Index controls, Index performance,
                   Index measurements);

  Matrix B1() const { return sys.B.leftCols(nw); }
  Matrix B2() const { return sys.B.rightCols(nu); }
  Matrix C1() const { return sys.C.topRows(nz); }
  Matrix C2() const { return sys.C.bottomRows(ny); }
  Matrix D11() const { return sys.D.topLeftCorner(nz, nw); }
  Matrix D12() const { return sys.D.topRightCorner(nz, nu); }
  Matrix D21() const { return sys.D.bottomLeftCorner(ny, nw); }
  Matrix D22() const { return sys.D.bottomRightCorner(ny, nu); }

  /// Closed loop w → z with u = K e.
  StateSpace close_loop(const StateSpace& controller) const;
};

/// Which synthesis test rejected a candidate γ.
enum class SynthesisCondition {
  none,
  feedthrough_bound,     // γ <= σ̄ of the D11 blocks no controller can touch
  x_not_stabilizing,     // control Hamiltonian has no stabilizing solution
  x_not_psd,             // X∞ not positive semidefinite
  y_not_stabilizing,     // filter Hamiltonian has no stabilizing solution
  y_not_psd,             // Y∞ not positive semidefinite
  spectral_radius,       // ρ(X∞Y∞) >= γ²
};

std::string to_string(SynthesisCondition c);

class InfeasibleError : public Error {
 public:
  InfeasibleError(SynthesisCondition c, const std::string& what)
      : Error(what), condition_(c) {}
  SynthesisCondition condition() const noexcept { return condition_; }

 private:
  SynthesisCondition condition_;
};

/// Outcome of the two-Riccati test at a fixed γ.
struct CentralControllerAttempt {
  std::optional<StateSpace> controller;
  SynthesisCondition failed = SynthesisCondition::none;
  /// Relative residuals of the X∞ and Y∞ Riccati equations.
  std::pair<double, double> riccati_residuals{0.0, 0.0};
};

/// Central H∞ controller at level γ (general D11, D22 handled by loop
/// shifting). D12/D21 must have full column/row rank.
CentralControllerAttempt central_controller(const GeneralizedPlant& plant, double gamma);

struct SynthesisOptions {
  double gamma_min = 1e-3;
  double gamma_max = 1e6;
  /// Returned controller is built at boundary·(1 + margin).
  double margin = 0.05;
  double rel_tol = 1e-4;
  /// Feedthrough added to rank-deficient D12/D21 channels.
  double regularization = 1e-6;
};

struct SynthesisResult {
  StateSpace controller;
  double gamma_achieved = 0.0;
  /// Smallest feasible γ located by bisection.
  double gamma_boundary = 0.0;
  std::pair<double, double> riccati_residuals{0.0, 0.0};
  /// Regularization that was applied (0 when D12/D21 were already regular).
  double regularization = 0.0;
};

/// γ-bisection over [gamma_min, gamma_max]. Throws InfeasibleError naming
/// the failing condition when gamma_max is infeasible.
SynthesisResult hinf_synthesize(const GeneralizedPlant& plant, const SynthesisOptions& opts = {});

}  // namespace wecs::control
