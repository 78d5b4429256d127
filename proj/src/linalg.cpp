#include "netctrl/linalg.hpp"

#include <utility>
#include <vector>

namespace netctrl {
namespace {

using IntRows = std::vector<std::vector<Integer>>;

IntRows integer_rows(const RatMatrix& m) {
  IntRows out(m.rows(), std::vector<Integer>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Integer l = 1;
    for (std::size_t c = 0; c < m.cols(); ++c) l = boost::multiprecision::lcm(l, denominator(m(r, c)));
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out[r][c] = numerator(m(r, c)) * (l / denominator(m(r, c)));
    }
  }
  return out;
}

// Returns the rank; when square and full rank, det receives the determinant of the
// scaled matrix (sign tracked through row swaps).
std::size_t bareiss(IntRows a, std::size_t cols, Integer* det) {
  const std::size_t rows = a.size();
  Integer prev = 1;
  std::size_t r = 0;
  int sign = 1;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && a[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    if (piv != r) {
      std::swap(a[piv], a[r]);
      sign = -sign;
    }
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) / prev;
      }
      a[i][c] = 0;
    }
    prev = a[r][c];
    ++r;
  }
  if (det) *det = (r == rows && rows == cols) ? Integer(sign * prev) : Integer(0);
  return r;
}

// In-place reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(RatMatrix& a) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t piv = r;
    while (piv < a.rows() && a(piv, c) == 0) ++piv;
    if (piv == a.rows()) continue;
    if (piv != r) {
      for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(piv, j), a(r, j));
    }
    Rational inv = 1 / a(r, c);
    for (std::size_t j = c; j < a.cols(); ++j) a(r, j) *= inv;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == r || a(i, c) == 0) continue;
      Rational f = a(i, c);
      for (std::size_t j = c; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

std::size_t rank(const RatMatrix& m) {
  if (m.empty()) return 0;
  return bareiss(integer_rows(m), m.cols(), nullptr);
}

Rational determinant(const RatMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant of non-square matrix");
  if (m.rows() == 0) return Rational(1);
  Rational scale = 1;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Integer l = 1;
    for (std::size_t c = 0; c < m.cols(); ++c) l = boost::multiprecision::lcm(l, denominator(m(r, c)));
    scale *= Rational(l);
  }
  Integer det;
  bareiss(integer_rows(m), m.cols(), &det);
  return Rational(det) / scale;
}

std::optional<RatMatrix> inverse(const RatMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("inverse of non-square matrix");
  const std::size_t n = m.rows();
  RatMatrix aug = hstack(m, RatMatrix::identity(n));
  auto pivots = rref(aug);
  if (pivots.size() < n || (n > 0 && pivots.back() >= n)) return std::nullopt;
  return aug.block(0, n, n, n);
}

RatMatrix left_nullspace(const RatMatrix& m) {
  // y m = 0  <=>  m^T y^T = 0.
  RatMatrix a = m.transpose();
  const std::size_t n = a.cols();
  auto pivots = rref(a);
  std::vector<bool> is_pivot(n, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<std::size_t> free_cols;
  for (std::size_t c = 0; c < n; ++c) {
    if (!is_pivot[c]) free_cols.push_back(c);
  }
  RatMatrix out(free_cols.size(), n);
  for (std::size_t k = 0; k < free_cols.size(); ++k) {
    std::size_t f = free_cols[k];
    out(k, f) = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) out(k, pivots[i]) = -a(i, f);
  }
  return out;
}

CMatrix to_complex(const RatMatrix& m) {
  CMatrix out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = to_double(m(r, c));
    }
  return out;
}

double max_singular_value(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

std::size_t numeric_rank(const CMatrix& m, double abs_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > abs_tol) ++r;
  }
  return r;
}

CMatrix left_nullspace(const CMatrix& m, double rel_tol) {
  const Eigen::Index n = m.rows();
  if (n == 0) return CMatrix(0, 0);
  if (m.cols() == 0) return CMatrix::Identity(n, n);
  CMatrix mt = m.transpose();
  Eigen::JacobiSVD<CMatrix> svd(mt, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double tol = rel_tol * (sv.size() ? sv(0) : 0.0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++r;
  }
  const CMatrix& v = svd.matrixV();
  CMatrix out(n - r, n);
  for (Eigen::Index k = r; k < n; ++k) out.row(k - r) = v.col(k).transpose();
  return out;
}

}  // namespace netctrl
