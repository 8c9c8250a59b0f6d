#pragma once

// Scaled monomial algebra in one, two and three variables.
//
// Every polynomial is a coefficient vector against the basis
// m_a(x) = ((x - center) / scale)^a, |a| <= degree, with multi-indices in
// graded lexicographic order:
//   d = 1 : 1, x, x^2, ...
//   d = 2 : 1 | x, y | x^2, xy, y^2 | ...
//   d = 3 : 1 | x, y, z | x^2, xy, xz, y^2, yz, z^2 | ...
// The P_k basis is therefore a prefix of the P_{k+1} basis. Vector-valued
// polynomials are stored component-major: [comp 0 block | comp 1 block | ...].

#include "vem/linalg.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace vem {

using MultiIndex = std::array<int, 3>;

/// Dimension of P_k(R^d); zero for k = -1 (P_{-1} = {0}).
inline int dim_poly(int k, int d) {
  if (d < 1 || d > 3) throw PreconditionError("dim_poly: dimension must be 1, 2 or 3");
  if (k < -1) throw PreconditionError("dim_poly: degree must be >= -1");
  if (k < 0) return 0;
  switch (d) {
    case 1: return k + 1;
    case 2: return (k + 1) * (k + 2) / 2;
    default: return (k + 1) * (k + 2) * (k + 3) / 6;
  }
}

/// Same as dim_poly but clamps degrees below -1 to the empty space.
inline int dim_poly_or_zero(int k, int d) { return k < 0 ? 0 : dim_poly(k, d); }

inline int total_degree(const MultiIndex& a) { return a[0] + a[1] + a[2]; }

inline std::vector<MultiIndex> multi_indices(int k, int d) {
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(dim_poly(k, d)));
  for (int n = 0; n <= k; ++n) {
    if (d == 1) {
      out.push_back({n, 0, 0});
    } else if (d == 2) {
      for (int j = 0; j <= n; ++j) out.push_back({n - j, j, 0});
    } else {
      for (int a = n; a >= 0; --a)
        for (int b = n - a; b >= 0; --b) out.push_back({a, b, n - a - b});
    }
  }
  return out;
}

/// Position of a multi-index in the graded lexicographic order.
inline std::size_t multi_index_position(const MultiIndex& a, int d) {
  const int n = total_degree(a);
  switch (d) {
    case 1: return static_cast<std::size_t>(a[0]);
    case 2: return static_cast<std::size_t>(n * (n + 1) / 2 + a[1]);
    default: {
      const int offset = n * (n + 1) * (n + 2) / 6;
      const int m = n - a[0];
      return static_cast<std::size_t>(offset + m * (m + 1) / 2 + (m - a[1]));
    }
  }
}

class MonomialBasis {
public:
  MonomialBasis() = default;
  MonomialBasis(int dim, int degree, Vector center, double scale)
      : dim_(dim), degree_(degree < -1 ? -1 : degree), center_(std::move(center)), scale_(scale) {
    if (dim < 1 || dim > 3) throw PreconditionError("MonomialBasis: dimension must be 1, 2 or 3");
    if (center_.size() != dim) throw PreconditionError("MonomialBasis: center has wrong dimension");
    if (!(scale > 0)) throw PreconditionError("MonomialBasis: scale must be positive");
    indices_ = multi_indices(degree_, dim_);
  }

  /// Unscaled monomials about the origin.
  static MonomialBasis global(int dim, int degree) {
    return MonomialBasis(dim, degree, Vector::Zero(dim), 1.0);
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const Vector& center() const { return center_; }
  double scale() const { return scale_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  const MultiIndex& index(Index i) const { return indices_[static_cast<std::size_t>(i)]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  Index position(const MultiIndex& a) const { return static_cast<Index>(multi_index_position(a, dim_)); }

  MonomialBasis with_degree(int k) const { return MonomialBasis(dim_, k, center_, scale_); }

  bool same_frame(const MonomialBasis& other) const {
    return dim_ == other.dim_ && scale_ == other.scale_ && center_ == other.center_;
  }

  Vector evaluate(const Vector& x) const {
    Vector out(size());
    std::array<std::vector<double>, 3> powers;
    for (int i = 0; i < dim_; ++i) {
      const double y = (x(i) - center_(i)) / scale_;
      powers[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(std::max(degree_, 0)) + 1, 1.0);
      for (int p = 1; p <= degree_; ++p)
        powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)] =
            powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(p - 1)] * y;
    }
    for (Index j = 0; j < size(); ++j) {
      double v = 1.0;
      for (int i = 0; i < dim_; ++i)
        v *= powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(index(j)[static_cast<std::size_t>(i)])];
      out(j) = v;
    }
    return out;
  }

private:
  int dim_ = 1;
  int degree_ = -1;
  Vector center_ = Vector::Zero(1);
  double scale_ = 1.0;
  std::vector<MultiIndex> indices_;
};

/// A scalar (components = 1) or vector polynomial against a MonomialBasis.
struct PolyCoeffs {
  MonomialBasis basis;
  int components = 1;
  Vector coeffs;

  PolyCoeffs() = default;
  PolyCoeffs(MonomialBasis b, int comps)
      : basis(std::move(b)), components(comps), coeffs(Vector::Zero(comps * basis.size())) {}
  PolyCoeffs(MonomialBasis b, int comps, Vector c)
      : basis(std::move(b)), components(comps), coeffs(std::move(c)) {
    if (coeffs.size() != components * basis.size())
      throw PreconditionError("PolyCoeffs: coefficient count does not match basis");
  }

  int degree() const { return basis.degree(); }

  PolyCoeffs component(int i) const {
    return PolyCoeffs(basis, 1, coeffs.segment(i * basis.size(), basis.size()));
  }

  Vector operator()(const Vector& x) const {
    const Vector m = basis.evaluate(x);
    Vector out(components);
    for (int c = 0; c < components; ++c) out(c) = coeffs.segment(c * basis.size(), basis.size()).dot(m);
    return out;
  }
};

inline Vector poly_eval(const PolyCoeffs& p, const Vector& point) {
  if (point.size() != p.basis.dim()) throw PreconditionError("poly_eval: point has wrong dimension");
  return p(point);
}

/// Re-expresses p in the same frame with a higher degree (zero padding).
inline PolyCoeffs promote(const PolyCoeffs& p, int k) {
  if (k < p.degree()) throw PreconditionError("promote: target degree below source degree");
  PolyCoeffs out(p.basis.with_degree(k), p.components);
  const Index n = p.basis.size();
  for (int c = 0; c < p.components; ++c)
    out.coeffs.segment(c * out.basis.size(), n) = p.coeffs.segment(c * n, n);
  return out;
}

/// Stacks scalar polynomials (same frame) into a vector polynomial.
inline PolyCoeffs stack_components(const std::vector<PolyCoeffs>& parts) {
  int k = -1;
  for (const auto& p : parts) k = std::max(k, p.degree());
  const MonomialBasis b = parts.front().basis.with_degree(k);
  PolyCoeffs out(b, static_cast<int>(parts.size()));
  for (std::size_t c = 0; c < parts.size(); ++c) {
    const PolyCoeffs q = promote(parts[c], k);
    out.coeffs.segment(static_cast<Index>(c) * b.size(), b.size()) = q.coeffs;
  }
  return out;
}

namespace detail {

/// Product of two coefficient vectors against the same index list.
inline Vector multiply_against(const MonomialBasis& basis, const Vector& x, const Vector& y) {
  Vector out = Vector::Zero(basis.size());
  const int d = basis.dim();
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) == 0.0) continue;
    const MultiIndex& a = basis.index(i);
    for (Index j = 0; j < y.size(); ++j) {
      if (y(j) == 0.0) continue;
      const MultiIndex& b = basis.index(j);
      const MultiIndex s{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
      if (total_degree(s) > basis.degree()) throw PreconditionError("multiply: product degree overflow");
      out(static_cast<Index>(multi_index_position(s, d))) += x(i) * y(j);
    }
  }
  return out;
}

}  // namespace detail

/// Product of two scalar polynomials sharing a frame.
inline PolyCoeffs multiply(const PolyCoeffs& a, const PolyCoeffs& b) {
  if (a.components != 1 || b.components != 1) throw PreconditionError("multiply: scalar operands expected");
  if (!a.basis.same_frame(b.basis)) throw PreconditionError("multiply: operands in different frames");
  const int k = std::max(a.degree(), -1) < 0 || b.degree() < 0 ? -1 : a.degree() + b.degree();
  const MonomialBasis out_basis = a.basis.with_degree(k);
  if (k < 0) return PolyCoeffs(out_basis, 1);
  Vector x = Vector::Zero(out_basis.size());
  Vector y = Vector::Zero(out_basis.size());
  x.head(a.basis.size()) = a.coeffs;
  y.head(b.basis.size()) = b.coeffs;
  return PolyCoeffs(out_basis, 1, detail::multiply_against(out_basis, x, y));
}

inline PolyCoeffs add(const PolyCoeffs& a, const PolyCoeffs& b, double sb = 1.0) {
  if (a.components != b.components) throw PreconditionError("add: component mismatch");
  const int k = std::max(a.degree(), b.degree());
  PolyCoeffs out = promote(a, k);
  out.coeffs += sb * promote(b, k).coeffs;
  return out;
}

/// Euclidean dot product of two vector polynomials (scalar result).
inline PolyCoeffs dot(const PolyCoeffs& a, const PolyCoeffs& b) {
  if (a.components != b.components) throw PreconditionError("dot: component mismatch");
  PolyCoeffs out = multiply(a.component(0), b.component(0));
  for (int c = 1; c < a.components; ++c) out = add(out, multiply(a.component(c), b.component(c)));
  return out;
}

/// Cross product of two 3-component polynomials.
inline PolyCoeffs cross(const PolyCoeffs& a, const PolyCoeffs& b) {
  if (a.components != 3 || b.components != 3) throw PreconditionError("cross: 3-vectors expected");
  auto term = [&](int i, int j) { return multiply(a.component(i), b.component(j)); };
  return stack_components({add(term(1, 2), term(2, 1), -1.0), add(term(2, 0), term(0, 2), -1.0),
                           add(term(0, 1), term(1, 0), -1.0)});
}

enum class DiffOp { grad, brot, rot, div, curl, laplacian };

inline std::string to_string(DiffOp op) {
  switch (op) {
    case DiffOp::grad: return "grad";
    case DiffOp::brot: return "brot";
    case DiffOp::rot: return "rot";
    case DiffOp::div: return "div";
    case DiffOp::curl: return "curl";
    case DiffOp::laplacian: return "laplacian";
  }
  return "?";
}

/// Number of components of the source and image of an operator in dimension d.
inline std::pair<int, int> diff_components(DiffOp op, int d) {
  switch (op) {
    case DiffOp::grad: return {1, d};
    case DiffOp::brot: return {1, 2};
    case DiffOp::rot: return {2, 1};
    case DiffOp::div: return {d, 1};
    case DiffOp::curl: return {3, 3};
    case DiffOp::laplacian: return {1, 1};
  }
  return {1, 1};
}

/// d/dx_i as a map from the degree-k basis to the degree-(k-1) basis.
inline Matrix partial_matrix(const MonomialBasis& basis, int i) {
  const MonomialBasis target = basis.with_degree(basis.degree() - 1);
  Matrix m = Matrix::Zero(target.size(), basis.size());
  for (Index j = 0; j < basis.size(); ++j) {
    MultiIndex a = basis.index(j);
    const int p = a[static_cast<std::size_t>(i)];
    if (p == 0) continue;
    a[static_cast<std::size_t>(i)] -= 1;
    m(target.position(a), j) = p / basis.scale();
  }
  return m;
}

/// Coefficient matrix of a differential operator on (P_k)^c, c the source
/// component count of the operator. The image lives in the same frame with
/// degree k-1 (k-2 for the Laplacian).
inline Matrix diff_matrix(DiffOp op, const MonomialBasis& basis) {
  const int d = basis.dim();
  if ((op == DiffOp::rot || op == DiffOp::brot) && d != 2)
    throw PreconditionError(to_string(op) + " is only defined in two dimensions");
  if (op == DiffOp::curl && d != 3) throw PreconditionError("curl is only defined in three dimensions");
  if (op == DiffOp::grad || op == DiffOp::div || op == DiffOp::laplacian) {
    if (d < 1) throw PreconditionError("bad dimension");
  }
  std::vector<Matrix> D;
  for (int i = 0; i < d; ++i) D.push_back(partial_matrix(basis, i));
  const Index n = basis.size();
  const Index m = D[0].rows();
  Matrix out;
  switch (op) {
    case DiffOp::grad:
      out = Matrix::Zero(d * m, n);
      for (int i = 0; i < d; ++i) out.block(i * m, 0, m, n) = D[static_cast<std::size_t>(i)];
      break;
    case DiffOp::brot:
      out = Matrix::Zero(2 * m, n);
      out.block(0, 0, m, n) = D[1];
      out.block(m, 0, m, n) = -D[0];
      break;
    case DiffOp::rot:
      out = Matrix::Zero(m, 2 * n);
      out.block(0, 0, m, n) = -D[1];
      out.block(0, n, m, n) = D[0];
      break;
    case DiffOp::div:
      out = Matrix::Zero(m, d * n);
      for (int i = 0; i < d; ++i) out.block(0, i * n, m, n) = D[static_cast<std::size_t>(i)];
      break;
    case DiffOp::curl:
      out = Matrix::Zero(3 * m, 3 * n);
      out.block(0, 1 * n, m, n) = -D[2];
      out.block(0, 2 * n, m, n) = D[1];
      out.block(m, 0, m, n) = D[2];
      out.block(m, 2 * n, m, n) = -D[0];
      out.block(2 * m, 0, m, n) = -D[1];
      out.block(2 * m, 1 * n, m, n) = D[0];
      break;
    case DiffOp::laplacian: {
      const MonomialBasis lower = basis.with_degree(basis.degree() - 1);
      out = Matrix::Zero(std::max<Index>(dim_poly_or_zero(basis.degree() - 2, d), 0), n);
      for (int i = 0; i < d; ++i) out += partial_matrix(lower, i) * D[static_cast<std::size_t>(i)];
      break;
    }
  }
  return out;
}

/// Applies a differential operator to a polynomial.
inline PolyCoeffs apply(DiffOp op, const PolyCoeffs& p) {
  const auto [src, dst] = diff_components(op, p.basis.dim());
  if (p.components != src) throw PreconditionError("apply: component count does not match operator");
  const int drop = op == DiffOp::laplacian ? 2 : 1;
  return PolyCoeffs(p.basis.with_degree(p.degree() - drop), dst, diff_matrix(op, p.basis) * p.coeffs);
}

/// Affine map x = origin + axes * s from local coordinates s (dimension
/// axes.cols()) into ambient coordinates x (dimension axes.rows()).
struct AffineChart {
  Vector origin;
  Matrix axes;

  static AffineChart identity(int d) { return {Vector::Zero(d), Matrix::Identity(d, d)}; }
  Vector map(const Vector& s) const { return origin + axes * s; }
};

/// Matrix R with (restriction of p to the chart) = R * p, where p is expressed
/// in `src` (ambient coordinates) and the result in `dst` (chart coordinates).
/// Requires dst.degree() >= src.degree().
inline Matrix restriction_matrix(const MonomialBasis& src, const AffineChart& chart, const MonomialBasis& dst) {
  const int d = src.dim();
  const int dl = dst.dim();
  if (chart.axes.rows() != d || chart.axes.cols() != dl || chart.origin.size() != d)
    throw PreconditionError("restriction_matrix: chart does not match bases");
  if (dst.degree() < src.degree()) throw PreconditionError("restriction_matrix: target degree too low");
  Matrix out = Matrix::Zero(dst.size(), src.size());
  if (src.degree() < 0) return out;

  // y_i = b_i + sum_j a_ij xi_j, xi the scaled chart coordinates of dst
  const Vector b = (chart.origin + chart.axes * dst.center() - src.center()) / src.scale();
  const Matrix a = chart.axes * (dst.scale() / src.scale());

  const int K = src.degree();
  std::vector<std::vector<Vector>> powers(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    Vector lin = Vector::Zero(dst.size());
    lin(0) = b(i);
    for (int j = 0; j < dl; ++j) {
      MultiIndex e{0, 0, 0};
      e[static_cast<std::size_t>(j)] = 1;
      if (dst.degree() >= 1) lin(dst.position(e)) = a(i, j);
    }
    auto& pw = powers[static_cast<std::size_t>(i)];
    pw.push_back(Vector::Unit(dst.size(), 0));
    for (int p = 1; p <= K; ++p) pw.push_back(detail::multiply_against(dst, pw.back(), lin));
  }
  for (Index col = 0; col < src.size(); ++col) {
    const MultiIndex& al = src.index(col);
    Vector v = powers[0][static_cast<std::size_t>(al[0])];
    for (int i = 1; i < d; ++i)
      v = detail::multiply_against(dst, v, powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(al[static_cast<std::size_t>(i)])]);
    out.col(col) = v;
  }
  return out;
}

/// Re-expresses a polynomial (all components) in another basis through a chart.
inline PolyCoeffs restrict_to(const PolyCoeffs& p, const AffineChart& chart, const MonomialBasis& dst) {
  const Matrix r = restriction_matrix(p.basis, chart, dst);
  PolyCoeffs out(dst, p.components);
  for (int c = 0; c < p.components; ++c)
    out.coeffs.segment(c * dst.size(), dst.size()) = r * p.coeffs.segment(c * p.basis.size(), p.basis.size());
  return out;
}

/// Same polynomial, different frame in the same ambient space.
inline PolyCoeffs rebase(const PolyCoeffs& p, const MonomialBasis& dst) {
  return restrict_to(p, AffineChart::identity(p.basis.dim()), dst);
}

// ---------------------------------------------------------------------------
// Exactness of polynomial sequences

struct SequenceLink {
  std::string op;
  Index rows = 0;
  Index cols = 0;
  Index rank = 0;
  Index kernel_dim = 0;
};

struct PolynomialSequence {
  std::string name;
  std::vector<Index> dims;  // dimension of every space in the chain
  std::vector<SequenceLink> links;
  bool constants_kernel = false;  // kernel of the first map is the constants
  std::vector<bool> exact_at;     // one flag per intermediate space, then surjectivity
  bool exact = false;
};

struct SequenceReport {
  int degree = 0;
  int dim = 0;
  std::vector<PolynomialSequence> sequences;
  bool exact() const {
    for (const auto& s : sequences)
      if (!s.exact) return false;
    return true;
  }
};

namespace detail {

inline PolynomialSequence analyse_chain(std::string name, const std::vector<std::pair<DiffOp, MonomialBasis>>& chain) {
  PolynomialSequence seq;
  seq.name = std::move(name);
  for (const auto& [op, basis] : chain) {
    const Matrix m = diff_matrix(op, basis);
    const Index r = numerical_rank(m);
    seq.links.push_back({to_string(op), m.rows(), m.cols(), r, m.cols() - r});
    if (seq.dims.empty()) seq.dims.push_back(m.cols());
  }
  for (const auto& l : seq.links) seq.dims.push_back(l.rows);
  seq.constants_kernel = seq.links.front().kernel_dim == 1;
  bool ok = seq.constants_kernel;
  for (std::size_t j = 1; j < seq.links.size(); ++j) {
    const bool e = seq.links[j - 1].rank == seq.links[j].kernel_dim;
    seq.exact_at.push_back(e);
    ok = ok && e;
  }
  const bool onto = seq.links.back().rank == seq.links.back().rows;
  seq.exact_at.push_back(onto);
  seq.exact = ok && onto;
  return seq;
}

}  // namespace detail

/// Ranks and kernels of the polynomial de Rham sequences starting at P_r.
inline SequenceReport sequence_ranks(int r, int d) {
  if (r < 1) throw PreconditionError("sequence_ranks: degree must be >= 1");
  if (d != 2 && d != 3) throw PreconditionError("sequence_ranks: dimension must be 2 or 3");
  SequenceReport rep;
  rep.degree = r;
  rep.dim = d;
  auto unit = [d](int k) { return MonomialBasis(d, k, Vector::Zero(d), 1.0); };
  if (d == 2) {
    rep.sequences.push_back(detail::analyse_chain("grad-rot", {{DiffOp::grad, unit(r)}, {DiffOp::rot, unit(r - 1)}}));
    rep.sequences.push_back(detail::analyse_chain("brot-div", {{DiffOp::brot, unit(r)}, {DiffOp::div, unit(r - 1)}}));
  } else {
    rep.sequences.push_back(detail::analyse_chain(
        "grad-curl-div", {{DiffOp::grad, unit(r)}, {DiffOp::curl, unit(r - 1)}, {DiffOp::div, unit(r - 2)}}));
  }
  return rep;
}

}  // namespace vem
