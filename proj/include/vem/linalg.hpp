#pragma once

// Dense linear-algebra helpers shared by every module: numerical rank with an
// explicit ambiguity zone, orthonormal null spaces and deterministic column
// selection.

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace vem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input that does not satisfy a documented precondition (bad degree, bad family...).
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Rank deficiency, or a singular value inside the ambiguity zone.
class RankError : public Error {
public:
  using Error::Error;
};

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kRankAmbiguity = 1e-8;

struct RankInfo {
  Index rank = 0;
  double largest = 0.0;
  double smallest_kept = 0.0;    // relative to largest
  double largest_dropped = 0.0;  // relative to largest
  bool ambiguous = false;        // some value in (tolerance, ambiguity]
};

inline Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

/// Rank decided on singular values relative to the largest one.
inline RankInfo rank_info(const Matrix& a, double tolerance = kRankTolerance,
                          double ambiguity = kRankAmbiguity) {
  RankInfo info;
  const Vector s = singular_values(a);
  if (s.size() == 0 || s(0) == 0.0) return info;
  info.largest = s(0);
  info.smallest_kept = 1.0;
  for (Index i = 0; i < s.size(); ++i) {
    const double rel = s(i) / s(0);
    if (rel > tolerance) {
      ++info.rank;
      info.smallest_kept = rel;
      if (rel <= ambiguity) info.ambiguous = true;
    } else {
      info.largest_dropped = std::max(info.largest_dropped, rel);
    }
  }
  return info;
}

inline Index numerical_rank(const Matrix& a, double tolerance = kRankTolerance) {
  return rank_info(a, tolerance).rank;
}

/// Smallest over largest singular value (0 for an empty or zero matrix).
inline double conditioning_ratio(const Matrix& a) {
  const Vector s = singular_values(a);
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

/// Orthonormal basis (columns) of the null space of `a`, whose row rank must
/// be exactly `expected_rank`. Throws RankError otherwise, or when the decision
/// falls inside the ambiguity zone.
inline Matrix null_space(const Matrix& a, Index expected_rank, const std::string& what) {
  const Index n = a.cols();
  if (a.rows() == 0 || expected_rank == 0) {
    if (expected_rank != 0) throw RankError(what + ": empty constraint matrix");
    return Matrix::Identity(n, n);
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double top = s(0);
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    const double rel = top > 0 ? s(i) / top : 0.0;
    if (rel > kRankTolerance) {
      if (rel <= kRankAmbiguity)
        throw RankError(what + ": singular value ratio " + std::to_string(rel) +
                        " inside ambiguity zone");
      ++rank;
    }
  }
  if (rank != expected_rank)
    throw RankError(what + ": rank " + std::to_string(rank) + ", expected " +
                    std::to_string(expected_rank));
  return svd.matrixV().rightCols(n - rank);
}

/// Indices (ascending) of a maximal set of linearly independent columns,
/// picked by column-pivoted QR.
inline std::vector<Index> independent_columns(const Matrix& a, double tolerance = kRankTolerance) {
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(tolerance);
  const Index r = qr.rank();
  std::vector<Index> cols;
  cols.reserve(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) cols.push_back(qr.colsPermutation().indices()(i));
  std::sort(cols.begin(), cols.end());
  return cols;
}

inline Matrix select_columns(const Matrix& a, const std::vector<Index>& cols) {
  Matrix out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = a.col(cols[j]);
  return out;
}

inline Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

/// Frobenius-type relative residual |a| / max(|scale|, tiny).
inline double relative(double residual, double scale) {
  return residual / std::max(scale, 1e-300);
}

}  // namespace vem
