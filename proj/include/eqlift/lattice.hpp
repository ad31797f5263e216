#pragma once

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace eqlift::lattice {

template <typename Int>
using IntMatrix = Eigen::Matrix<Int, Eigen::Dynamic, Eigen::Dynamic>;

using Rational = boost::rational<std::int64_t>;

/// Row-style Hermite normal form: unimodular U with H = U * A, where the first
/// `rank` rows of H are in echelon form with positive pivots, entries above each
/// pivot reduced into [0, pivot), and the remaining rows vanish.
template <typename Int>
struct HermiteForm {
  IntMatrix<Int> H;
  IntMatrix<Int> U;
  int rank = 0;
  std::vector<int> pivot_columns;
};

template <typename Int>
HermiteForm<Int> hermite_normal_form(const IntMatrix<Int>& A) {
  const Eigen::Index rows = A.rows(), cols = A.cols();
  HermiteForm<Int> out;
  out.H = A;
  out.U = IntMatrix<Int>::Identity(rows, rows);
  auto& H = out.H;
  auto& U = out.U;

  auto row_op = [&](Eigen::Index i, Eigen::Index k, Int a, Int b, Int c, Int d) {
    // [row_i; row_k] <- [[a b]; [c d]] * [row_i; row_k]
    const auto hi = H.row(i).eval(), hk = H.row(k).eval();
    H.row(i) = a * hi + b * hk;
    H.row(k) = c * hi + d * hk;
    const auto ui = U.row(i).eval(), uk = U.row(k).eval();
    U.row(i) = a * ui + b * uk;
    U.row(k) = c * ui + d * uk;
  };

  Eigen::Index pivot_row = 0;
  for (Eigen::Index col = 0; col < cols && pivot_row < rows; ++col) {
    for (Eigen::Index k = pivot_row + 1; k < rows; ++k) {
      if (H(k, col) == 0) continue;
      // Extended gcd on (H(pivot_row, col), H(k, col)).
      Int a = H(pivot_row, col), b = H(k, col);
      Int x0 = 1, y0 = 0, x1 = 0, y1 = 1;
      while (b != 0) {
        const Int q = a / b;
        Int t = a - q * b; a = b; b = t;
        t = x0 - q * x1; x0 = x1; x1 = t;
        t = y0 - q * y1; y0 = y1; y1 = t;
      }
      // a = g = x0*p + y0*q; (x1, y1) is the cofactor pair annihilating the column.
      row_op(pivot_row, k, x0, y0, x1, y1);
    }
    if (H(pivot_row, col) == 0) continue;
    if (H(pivot_row, col) < 0) {
      H.row(pivot_row) *= Int(-1);
      U.row(pivot_row) *= Int(-1);
    }
    const Int p = H(pivot_row, col);
    for (Eigen::Index i = 0; i < pivot_row; ++i) {
      Int q = H(i, col) / p;
      if (H(i, col) - q * p < 0) --q;
      if (q != 0) {
        H.row(i) -= q * H.row(pivot_row);
        U.row(i) -= q * U.row(pivot_row);
      }
    }
    out.pivot_columns.push_back(static_cast<int>(col));
    ++pivot_row;
  }
  out.rank = static_cast<int>(pivot_row);
  return out;
}

/// Exact determinant by fraction-free Bareiss elimination.
template <typename Int>
Int bareiss_determinant(IntMatrix<Int> M) {
  const Eigen::Index n = M.rows();
  if (n == 0) return Int(1);
  Int sign = 1, prev = 1;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (M(k, k) == 0) {
      Eigen::Index swap = k + 1;
      while (swap < n && M(swap, k) == 0) ++swap;
      if (swap == n) return Int(0);
      M.row(k).swap(M.row(swap));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i)
      for (Eigen::Index j = k + 1; j < n; ++j)
        M(i, j) = (M(i, j) * M(k, k) - M(i, k) * M(k, j)) / prev;
    prev = M(k, k);
  }
  return sign * M(n - 1, n - 1);
}

/// gcd of all maximal (rows x rows) minors of a full-row-rank integer matrix:
/// the index of A * Z^cols inside Z^rows.
template <typename Int>
Int maximal_minor_gcd(const IntMatrix<Int>& A) {
  const int r = static_cast<int>(A.rows()), c = static_cast<int>(A.cols());
  if (r == 0) return Int(1);
  Int g = 0;
  std::vector<int> pick(r);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    IntMatrix<Int> sub(r, r);
    for (int j = 0; j < r; ++j) sub.col(j) = A.col(pick[j]);
    g = std::gcd(g, bareiss_determinant<Int>(sub));
    int i = r - 1;
    while (i >= 0 && pick[i] == c - r + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }
  return g < 0 ? -g : g;
}

/// The rational with the smallest denominator in the closed interval [lo, hi],
/// found by walking the continued-fraction (Stern-Brocot) tree.
inline Rational simplest_rational_in(double lo, double hi, std::int64_t max_denominator) {
  if (lo > hi) throw std::invalid_argument("simplest_rational_in: empty interval");
  const double fl = std::floor(lo);
  if (fl == lo) return Rational(static_cast<std::int64_t>(fl));
  if (std::floor(hi) > fl) return Rational(static_cast<std::int64_t>(fl) + 1);
  // Both ends share the integer part: recurse on the reciprocals of the fractional parts.
  const double flo = lo - fl, fhi = hi - fl;
  if (1.0 / fhi > static_cast<double>(max_denominator) * 4.0)
    throw std::range_error("simplest_rational_in: denominator bound exceeded");
  const Rational inner = simplest_rational_in(1.0 / fhi, 1.0 / flo, max_denominator);
  const Rational r = Rational(static_cast<std::int64_t>(fl)) + Rational(1) / inner;
  if (r.denominator() > max_denominator)
    throw std::range_error("simplest_rational_in: denominator bound exceeded");
  return r;
}

inline std::int64_t lcm_of_denominators(const std::vector<Rational>& values) {
  std::int64_t l = 1;
  for (const auto& v : values) l = std::lcm(l, v.denominator());
  return l;
}

}  // namespace eqlift::lattice
