#pragma once

#include <Eigen/Core>
#include <complex>
#include <utility>
#include <vector>

namespace wecs::control {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Continuous-time realization x' = Ax + Bu, y = Cx + Du.
struct StateSpace {
  Matrix A, B, C, D;

  StateSpace() = default;
  /// Throws DimensionError on inconsistent shapes, NumericError on NaN/Inf.
  StateSpace(Matrix a, Matrix b, Matrix c, Matrix d);

  /// Zero-state static gain y = D u.
  static StateSpace gain(const Matrix& d);

  Index states() const { return A.rows(); }
  Index inputs() const { return D.cols(); }
  Index outputs() const { return D.rows(); }

  Eigen::VectorXcd poles() const;
  /// Largest real part of the poles (-inf for a static gain).
  double spectral_abscissa() const;
  bool is_stable(double margin = 0.0) const { return spectral_abscissa() < -margin; }

  void validate() const;
};

/// Proper SISO rational function, coefficients in descending powers of s.
struct TransferFunction {
  std::vector<double> num;
  std::vector<double> den;

  Complex evaluate(Complex s) const;
  /// Controllable canonical realization. Throws DomainError if improper.
  StateSpace to_state_space() const;
};

/// C (sI − A)⁻¹ B + D. Throws SingularError when s is (numerically) a pole.
CMatrix evaluate(const StateSpace& sys, Complex s);

/// Largest singular value of a complex matrix.
double max_singular_value(const CMatrix& m);

/// y = second(first(u)).
StateSpace series(const StateSpace& first, const StateSpace& second);
/// y = a(u) + b(u).
StateSpace parallel(const StateSpace& a, const StateSpace& b);
/// Closed loop u_fwd = r + sign·back(y), y = forward(u_fwd).
/// sign = -1 gives forward (I + back·forward)⁻¹. Throws SingularError when
/// the loop has no unique algebraic solution.
StateSpace feedback(const StateSpace& forward, const StateSpace& back, int sign = -1);
/// Block-diagonal stacking: inputs and outputs concatenated.
StateSpace append(const StateSpace& a, const StateSpace& b);

/// Lower linear fractional transformation. `plant` has inputs [w; u] with
/// `controls` trailing u channels and outputs [z; y] with `measurements`
/// trailing y channels; the controller closes u = K y.
StateSpace lower_lft(const StateSpace& plant, const StateSpace& controller, Index controls,
                     Index measurements);

/// Exact zero-order-hold discretization (Ad, Bd) of (A, B) at period dt.
std::pair<Matrix, Matrix> discretize_zoh(const Matrix& a, const Matrix& b, double dt);

}  // namespace wecs::control
