#include "econmech/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "econmech/errors.hpp"
#include "econmech/kernels.hpp"

namespace econmech {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DomainError("matrix rows must have equal length");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

std::vector<double> Matrix::apply(std::span<const double> x) const {
  if (x.size() != cols_) throw DomainError("matrix-vector shape mismatch");
  std::vector<double> y(rows_);
  for (std::size_t i = 0; i < rows_; ++i) y[i] = kernels::dot(row(i), x);
  return y;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DomainError("matrix product shape mismatch");
  const Matrix bt = b.transposed();
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) = kernels::dot(a.row(i), bt.row(j));
  return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DomainError("matrix shape mismatch");
  return kernels::max_abs_diff(a.data(), b.data());
}

Matrix EigenBaskets::reconstruct() const {
  const std::size_t n = eigenvalues.size();
  Matrix scaled = basis;  // rows lambda_i b_i
  for (std::size_t i = 0; i < n; ++i)
    for (double& x : scaled.row(i)) x *= eigenvalues[i];
  return basis.transposed() * scaled;
}

namespace {

double frobenius(const Matrix& a) {
  return std::sqrt(kernels::dot(a.data(), a.data()));
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

void check_symmetric(const Matrix& a) {
  if (!a.square() || a.rows() == 0) throw DomainError("elasticity tensor must be a nonempty square matrix");
  double scale = 1.0;
  for (double x : a.data()) {
    if (!std::isfinite(x)) throw DomainError("elasticity tensor entries must be finite");
    scale = std::max(scale, std::fabs(x));
  }
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::fabs(a(i, j) - a(j, i)) > 1e-12 * scale) {
        std::ostringstream msg;
        msg << "elasticity tensor is not symmetric at (" << i << "," << j << ")";
        throw DomainError(msg.str());
      }
}

// One Jacobi rotation annihilating a(p, q). Rows of `vt` accumulate the
// eigenvectors.
void jacobi_rotate(Matrix& a, Matrix& vt, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double app = a(p, p);
  const double aqq = a(q, q);
  const double theta = (aqq - app) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  kernels::rotate(a.row(p), a.row(q), c, s);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (i == p || i == q) continue;
    a(i, p) = a(p, i);
    a(i, q) = a(q, i);
  }
  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  kernels::rotate(vt.row(p), vt.row(q), c, s);
}

}  // namespace

EigenBaskets symmetric_eigen(const Matrix& input) {
  check_symmetric(input);
  const std::size_t n = input.rows();
  // Work on the exactly symmetrized copy.
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));
  Matrix vt = Matrix::identity(n);

  const double threshold = 1e-14 * frobenius(a);
  for (int sweep = 0; sweep < 100 && off_diagonal_norm(a) > threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        if (a(p, q) != 0.0) jacobi_rotate(a, vt, p, q);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenBaskets out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t src = order[r];
    out.eigenvalues[r] = a(src, src);
    auto dst = out.basis.row(r);
    std::copy(vt.row(src).begin(), vt.row(src).end(), dst.begin());
    auto lead = std::find_if(dst.begin(), dst.end(), [](double x) { return std::fabs(x) > 1e-14; });
    if (lead != dst.end() && *lead < 0.0)
      for (double& x : dst) x = -x;
  }
  return out;
}

EigenBaskets eigen_baskets(const Matrix& eps) {
  EigenBaskets out = symmetric_eigen(eps);
  for (std::size_t i = 0; i < out.eigenvalues.size(); ++i) {
    if (!(out.eigenvalues[i] > 0.0)) {
      std::ostringstream msg;
      msg << "elasticity tensor must be positive-definite (eigenvalue " << out.eigenvalues[i] << ")";
      throw DomainError(msg.str());
    }
  }
  return out;
}

ElasticityTensor::ElasticityTensor(Matrix m) : m_(std::move(m)) {
  eigen_baskets(m_);
}

double tensor_surplus(const ElasticityTensor& eps, std::span<const double> price) {
  if (price.size() != eps.dimension()) throw DomainError("price vector does not match tensor chart");
  const std::vector<double> v = eps.demand(price);
  return 0.5 * kernels::dot(price, v);
}

std::vector<double> to_basket_chart(const EigenBaskets& baskets, std::span<const double> x) {
  return baskets.basis.apply(x);
}

double basket_surplus(const EigenBaskets& baskets, std::span<const double> price) {
  const std::vector<double> y = to_basket_chart(baskets, price);
  double t = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) t += 0.5 * baskets.eigenvalues[i] * y[i] * y[i];
  return t;
}

}  // namespace econmech
