#include "qloc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qloc {

std::size_t ipow(std::size_t base, std::size_t exponent) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exponent; ++i) out *= base;
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double op_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 || a.cols() == 1) return a.norm();
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double hermiticity_defect(const Matrix& a) {
  return op_norm(a - a.adjoint());
}

Matrix hermitian_part(const Matrix& a) {
  return 0.5 * (a + a.adjoint());
}

HermitianEigen eigh(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigh: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(a),
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

Matrix psd_sqrt(const Matrix& a) {
  const auto [values, vectors] = eigh(a);
  RealVector roots = values.cwiseMax(0.0).cwiseSqrt();
  return vectors * roots.cast<cplx>().asDiagonal() * vectors.adjoint();
}

Matrix pauli(char letter) {
  Matrix m = Matrix::Zero(2, 2);
  switch (letter) {
    case 'I':
      m(0, 0) = 1.0;
      m(1, 1) = 1.0;
      break;
    case 'X':
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case 'Y':
      m(0, 1) = cplx(0.0, -1.0);
      m(1, 0) = cplx(0.0, 1.0);
      break;
    case 'Z':
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    default:
      throw std::invalid_argument(std::string("unknown Pauli letter '") + letter + "'");
  }
  return m;
}

Matrix shift_matrix(int d) {
  Matrix m = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) m((k + 1) % d, k) = 1.0;
  return m;
}

Matrix clock_matrix(int d) {
  Matrix m = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) m(k, k) = std::polar(1.0, 2.0 * M_PI * k / d);
  // keep the qubit case exactly real
  if (d == 2) m(1, 1) = -1.0;
  return m;
}

Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Matrix m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = cplx(re, im);
    }
  }
  return m;
}

Matrix haar_unitary(std::size_t dim, Rng& rng) {
  Matrix z = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t k = 0; k < dim; ++k) {
    const cplx d = r(k, k);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(k) *= d / mag;
  }
  return q;
}

Vector random_unit_vector(std::size_t dim, Rng& rng) {
  Vector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

Matrix random_density(std::size_t dim, std::size_t rank, Rng& rng) {
  Matrix g = ginibre(dim, std::min(rank, dim), rng);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace();
}

}  // namespace qloc
