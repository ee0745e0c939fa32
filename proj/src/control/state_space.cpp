#include "wecs/control/state_space.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <limits>

#include "wecs/error.hpp"

namespace wecs::control {
namespace {

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

// Inverse of a square matrix that must be well conditioned.
Matrix checked_inverse(const Matrix& m, const char* what) {
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible() || lu.rcond() < 1e-13) throw SingularError(what);
  return lu.inverse();
}

}  // namespace

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  validate();
}

StateSpace StateSpace::gain(const Matrix& d) {
  return StateSpace(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d);
}

void StateSpace::validate() const {
  const Index n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n || C.rows() != D.rows() ||
      B.cols() != D.cols())
    throw DimensionError("StateSpace: inconsistent (A, B, C, D) dimensions");
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite())
    throw NumericError("StateSpace: non-finite entries");
}

Eigen::VectorXcd StateSpace::poles() const {
  if (states() == 0) return Eigen::VectorXcd(0);
  return Eigen::EigenSolver<Matrix>(A, false).eigenvalues();
}

double StateSpace::spectral_abscissa() const {
  if (states() == 0) return -std::numeric_limits<double>::infinity();
  return poles().real().maxCoeff();
}

Complex TransferFunction::evaluate(Complex s) const {
  Complex n = 0.0, d = 0.0;
  for (double c : num) n = n * s + c;
  for (double c : den) d = d * s + c;
  return n / d;
}

StateSpace TransferFunction::to_state_space() const {
  if (den.empty() || den.front() == 0.0)
    throw DomainError("TransferFunction: leading denominator coefficient is zero");
  if (num.size() > den.size()) throw DomainError("TransferFunction: improper");
  const Index n = static_cast<Index>(den.size()) - 1;
  const double lead = den.front();
  std::vector<double> a(den.size()), b(den.size(), 0.0);
  for (size_t i = 0; i < den.size(); ++i) a[i] = den[i] / lead;
  const size_t offset = den.size() - num.size();
  for (size_t i = 0; i < num.size(); ++i) b[offset + i] = num[i] / lead;

  const double d = b[0];
  Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1), C(1, n), D(1, 1);
  for (Index j = 0; j < n; ++j) {
    A(0, j) = -a[j + 1];
    C(0, j) = b[j + 1] - d * a[j + 1];
  }
  for (Index i = 1; i < n; ++i) A(i, i - 1) = 1.0;
  if (n > 0) B(0, 0) = 1.0;
  D(0, 0) = d;
  return StateSpace(A, B, C, D);
}

CMatrix evaluate(const StateSpace& sys, Complex s) {
  const Index n = sys.states();
  CMatrix out = sys.D.cast<Complex>();
  if (n == 0) return out;
  CMatrix resolvent = -sys.A.cast<Complex>();
  resolvent.diagonal().array() += s;
  Eigen::PartialPivLU<CMatrix> lu(resolvent);
  // Synthesized controllers are poorly scaled, so only reject at machine precision.
  if (!(lu.rcond() > std::numeric_limits<double>::epsilon()))
    throw SingularError("evaluate: s is a pole of the system");
  out.noalias() += sys.C.cast<Complex>() * lu.solve(sys.B.cast<Complex>());
  return out;
}

double max_singular_value(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<CMatrix>(m).singularValues()(0);
}

StateSpace series(const StateSpace& g1, const StateSpace& g2) {
  if (g1.outputs() != g2.inputs()) throw DimensionError("series: output/input mismatch");
  const Index n1 = g1.states(), n2 = g2.states();
  Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = g1.A;
  A.bottomLeftCorner(n2, n1) = g2.B * g1.C;
  A.bottomRightCorner(n2, n2) = g2.A;
  Matrix B(n1 + n2, g1.inputs());
  B << g1.B, g2.B * g1.D;
  Matrix C(g2.outputs(), n1 + n2);
  C << g2.D * g1.C, g2.C;
  return StateSpace(A, B, C, g2.D * g1.D);
}

StateSpace parallel(const StateSpace& a, const StateSpace& b) {
  if (a.inputs() != b.inputs() || a.outputs() != b.outputs())
    throw DimensionError("parallel: dimension mismatch");
  Matrix B(a.states() + b.states(), a.inputs());
  B << a.B, b.B;
  Matrix C(a.outputs(), a.states() + b.states());
  C << a.C, b.C;
  return StateSpace(block_diag(a.A, b.A), B, C, a.D + b.D);
}

StateSpace feedback(const StateSpace& g1, const StateSpace& g2, int sign) {
  if (g1.outputs() != g2.inputs() || g2.outputs() != g1.inputs())
    throw DimensionError("feedback: dimension mismatch");
  if (sign != 1 && sign != -1) throw DomainError("feedback: sign must be +1 or -1");
  const double s = sign;
  const Index m1 = g1.inputs();
  const Matrix E = checked_inverse(Matrix::Identity(m1, m1) - s * g2.D * g1.D,
                                   "feedback: algebraic loop is singular");
  const Index n1 = g1.states(), n2 = g2.states();

  // u1 = E (r + s D2 C1 x1 + s C2 x2)
  const Matrix u_x1 = s * E * g2.D * g1.C;
  const Matrix u_x2 = s * E * g2.C;
  Matrix A(n1 + n2, n1 + n2);
  A << g1.A + g1.B * u_x1, g1.B * u_x2,
      g2.B * (g1.C + g1.D * u_x1), g2.A + g2.B * g1.D * u_x2;
  Matrix B(n1 + n2, m1);
  B << g1.B * E, g2.B * g1.D * E;
  Matrix C(g1.outputs(), n1 + n2);
  C << g1.C + g1.D * u_x1, g1.D * u_x2;
  return StateSpace(A, B, C, g1.D * E);
}

StateSpace append(const StateSpace& a, const StateSpace& b) {
  return StateSpace(block_diag(a.A, b.A), block_diag(a.B, b.B), block_diag(a.C, b.C),
                    block_diag(a.D, b.D));
}

StateSpace lower_lft(const StateSpace& p, const StateSpace& k, Index nu, Index ny) {
  const Index nw = p.inputs() - nu, nz = p.outputs() - ny;
  if (nw < 0 || nz < 0 || k.inputs() != ny || k.outputs() != nu)
    throw DimensionError("lower_lft: partition does not match controller");
  const Index n = p.states(), nk = k.states();
  const Matrix B1 = p.B.leftCols(nw), B2 = p.B.rightCols(nu);
  const Matrix C1 = p.C.topRows(nz), C2 = p.C.bottomRows(ny);
  const Matrix D11 = p.D.topLeftCorner(nz, nw), D12 = p.D.topRightCorner(nz, nu);
  const Matrix D21 = p.D.bottomLeftCorner(ny, nw), D22 = p.D.bottomRightCorner(ny, nu);

  // y = M (C2 x + D21 w + D22 Ck xk), u = Ck xk + Dk y
  const Matrix M = checked_inverse(Matrix::Identity(ny, ny) - D22 * k.D,
                                   "lower_lft: loop is not well posed");
  const Matrix y_x = M * C2, y_xk = M * D22 * k.C, y_w = M * D21;
  const Matrix u_x = k.D * y_x, u_xk = k.C + k.D * y_xk, u_w = k.D * y_w;

  Matrix A(n + nk, n + nk);
  A << p.A + B2 * u_x, B2 * u_xk, k.B * y_x, k.A + k.B * y_xk;
  Matrix B(n + nk, nw);
  B << B1 + B2 * u_w, k.B * y_w;
  Matrix C(nz, n + nk);
  C << C1 + D12 * u_x, D12 * u_xk;
  return StateSpace(A, B, C, D11 + D12 * u_w);
}

std::pair<Matrix, Matrix> discretize_zoh(const Matrix& a, const Matrix& b, double dt) {
  const Index n = a.rows(), m = b.cols();
  if (n == 0) return {Matrix(0, 0), Matrix(0, m)};
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * dt;
  aug.topRightCorner(n, m) = b * dt;
  const Matrix e = aug.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

}  // namespace wecs::control
