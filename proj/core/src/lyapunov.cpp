#include "samsbo/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "samsbo/errors.hpp"

namespace samsbo {

double spectral_abscissa(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Eigen::MatrixXd> eig(a, false);
  if (eig.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  return eig.eigenvalues().real().maxCoeff();
}

Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) {
    throw std::invalid_argument("Lyapunov operands must be square and of equal size");
  }
  if (!a.allFinite() || !q.allFinite()) throw std::invalid_argument("non-finite operand");
  if (n == 0) return Eigen::MatrixXd(0, 0);

  using Complex = std::complex<double>;
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(a);
  if (schur.info() != Eigen::Success) throw NumericalError("Schur decomposition failed");
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& u = schur.matrixU();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (t(i, i).real() >= 0.0) {
      std::ostringstream msg;
      msg << "matrix is not Hurwitz: eigenvalue " << t(i, i).real() << (t(i, i).imag() >= 0 ? "+" : "")
          << t(i, i).imag() << "i";
      throw StabilityError(msg.str());
    }
  }

  // T Y + Y Tᴴ = C with Y = Uᴴ P U and C = −Uᴴ Q U.
  const Eigen::MatrixXcd c = -(u.adjoint() * q.cast<Complex>() * u);
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = c.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(t(j, k)) * y.col(k);
    Eigen::MatrixXcd shifted = t;
    shifted.diagonal().array() += std::conj(t(j, j));
    y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  const Eigen::MatrixXd p = (u * y * u.adjoint()).real();
  return 0.5 * (p + p.transpose());
}

double h2_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c) {
  if (b.rows() != a.rows() || c.cols() != a.rows()) {
    throw std::invalid_argument("state-space dimensions disagree");
  }
  const Eigen::MatrixXd p = lyapunov_solve(a, b * b.transpose());
  return std::sqrt(std::max(0.0, (c * p * c.transpose()).trace()));
}

}  // namespace samsbo
