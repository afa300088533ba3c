#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace qloc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Default tolerance for equality-of-matrices and positivity checks.
inline constexpr double kDefaultTol = 1e-10;

std::size_t ipow(std::size_t base, std::size_t exponent);

Matrix kron(const Matrix& a, const Matrix& b);

/// Largest singular value.
double op_norm(const Matrix& a);

/// ‖a − a†‖ in operator norm.
double hermiticity_defect(const Matrix& a);

Matrix hermitian_part(const Matrix& a);

struct HermitianEigen {
  RealVector values;  // ascending
  Matrix vectors;     // columns
};

/// Eigendecomposition of the Hermitian part of `a`.
HermitianEigen eigh(const Matrix& a);

double min_eigenvalue(const Matrix& a);

/// Positive square root of the Hermitian part, negative eigenvalues clipped to zero.
Matrix psd_sqrt(const Matrix& a);

/// Single-qubit Pauli matrix for 'I', 'X', 'Y' or 'Z'.
Matrix pauli(char letter);

/// Generalized shift and clock matrices; for d = 2 these are σ_x and σ_z.
Matrix shift_matrix(int d);
Matrix clock_matrix(int d);

/// Complex Gaussian matrix with unit-variance entries.
Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng);
Matrix haar_unitary(std::size_t dim, Rng& rng);
Vector random_unit_vector(std::size_t dim, Rng& rng);
/// Random density matrix of the given rank (trace one).
Matrix random_density(std::size_t dim, std::size_t rank, Rng& rng);

}  // namespace qloc
