#pragma once

// Dense matrices, elasticity tensors and their eigen-basket decomposition.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace econmech {

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;
  std::vector<double> apply(std::span<const double> x) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

/// Largest |a_ij - b_ij|; matrices must share a shape.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Result of a symmetric eigen-decomposition. Eigenvalues sorted descending;
/// basis(i, :) is the unit eigenvector of eigenvalues[i] with its first
/// nonzero component positive.
struct EigenBaskets {
  std::vector<double> eigenvalues;
  Matrix basis;

  /// B^T diag(lambda) B, i.e. the tensor rebuilt in the commodity chart.
  Matrix reconstruct() const;
};

/// Cyclic Jacobi eigen-solver for symmetric matrices. Stops when the
/// off-diagonal Frobenius norm falls below 1e-14 * ||A||_F.
/// Throws DomainError on non-square or non-symmetric input.
EigenBaskets symmetric_eigen(const Matrix& a);

/// Symmetric positive-definite map from prices to quantities demanded.
class ElasticityTensor {
 public:
  /// Validates symmetry (to 1e-12) and positive-definiteness.
  explicit ElasticityTensor(Matrix m);

  const Matrix& matrix() const noexcept { return m_; }
  std::size_t dimension() const noexcept { return m_.rows(); }

  /// v = eps p
  std::vector<double> demand(std::span<const double> price) const { return m_.apply(price); }

  bool operator==(const ElasticityTensor&) const = default;

 private:
  Matrix m_;
};

/// Principal elasticities and orthonormal basket vectors. Rejects any
/// tensor with an eigenvalue <= 0 (DomainError).
EigenBaskets eigen_baskets(const Matrix& eps);
inline EigenBaskets eigen_baskets(const ElasticityTensor& eps) { return eigen_baskets(eps.matrix()); }

/// T = 1/2 p^T eps p.
double tensor_surplus(const ElasticityTensor& eps, std::span<const double> price);

/// Coordinates of `x` in the basket chart: y_i = b_i . x
std::vector<double> to_basket_chart(const EigenBaskets& baskets, std::span<const double> x);

/// Surplus evaluated in the basket chart: sum 1/2 lambda_i (p . b_i)^2.
double basket_surplus(const EigenBaskets& baskets, std::span<const double> price);

}  // namespace econmech
