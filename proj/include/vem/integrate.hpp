#pragma once

// Exact integration of scaled monomials over edges, polygons and polyhedra,
// Gram matrices, and the element decompositions
//   (P_k)^d = G_k + G_k^perp = R_k + R_k^perp.
//
// Polytope moments come from the homogeneity identity
//   int_O m_a = 1/(|a| + d) * sum_{faces F} ((x_F - c) . n_F) int_F m_a,
// applied recursively (polyhedron -> faces -> edges). A signed fan
// subdivision with Gauss rules re-derives every table as a cross-check.

#include "vem/geom.hpp"
#include "vem/linalg.hpp"
#include "vem/poly.hpp"
#include "vem/quadrature.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vem {

struct MomentTable {
  int object = -1;
  MonomialBasis basis;
  Vector values;  // int_O m_a for every basis member

  double measure() const { return values.size() ? values(0) : 0.0; }
  double at(const MultiIndex& a) const { return values(basis.position(a)); }
};

/// int over [-L/2, L/2] of (s/L)^n for n = 0..k.
inline Vector edge_basis_moments(double length, int k) {
  Vector m = Vector::Zero(std::max(k + 1, 0));
  for (int n = 0; n <= k; n += 2) m(n) = length * std::pow(0.5, n) / (n + 1);
  return m;
}

/// Gram matrix of the edge basis of degree k.
inline Matrix edge_gram(double length, int k) {
  const Vector mu = edge_basis_moments(length, 2 * k);
  Matrix g(k + 1, k + 1);
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= k; ++j) g(i, j) = mu(i + j);
  return g;
}

namespace detail {

inline Vector chart_moments(const AffineChart& chart, double length, const MonomialBasis& basis) {
  const MonomialBasis eb(1, basis.degree(), Vector::Zero(1), length);
  return restriction_matrix(basis, chart, eb).transpose() * edge_basis_moments(length, basis.degree());
}

}  // namespace detail

/// int_e m_a ds for the members of `basis` (any frame of the polygon plane).
inline Vector edge_moments(const PolygonEdge& e, const MonomialBasis& basis) {
  return detail::chart_moments(e.chart(), e.length, basis);
}

inline Vector edge_moments(const Edge3& e, const MonomialBasis& basis) {
  return detail::chart_moments(e.chart(), e.length, basis);
}

inline MomentTable edge_moment_table(const PolygonEdge& e, int k) {
  return {e.global_id, e.basis(k), edge_basis_moments(e.length, k)};
}

// ---------------------------------------------------------------------------
// Quadrature point sets (oracles and cross-checks)

struct PointSet {
  std::vector<Vector> points;
  std::vector<double> weights;

  double integrate(const std::function<double(const Vector&)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i]);
    return s;
  }
  Vector integrate_vector(const std::function<Vector(const Vector&)>& f) const {
    Vector s = weights[0] * f(points[0]);
    for (std::size_t i = 1; i < points.size(); ++i) s += weights[i] * f(points[i]);
    return s;
  }
};

inline PointSet segment_quadrature(const Vector& a, const Vector& b, int degree) {
  const QuadRule g = gauss_legendre(degree / 2 + 1);
  PointSet ps;
  const double len = (b - a).norm();
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    ps.points.push_back(a + g.points[i](0) * (b - a));
    ps.weights.push_back(g.weights[i] * len);
  }
  return ps;
}

/// Signed fan of triangles (centroid, v_i, v_{i+1}).
inline PointSet polygon_quadrature(const Polygon& p, int degree) {
  const QuadRule t = triangle_rule(degree);
  PointSet ps;
  for (const auto& e : p.edges) {
    const Vector u = e.start - p.centroid, w = e.end - p.centroid;
    const double det = cross2(u, w);
    for (std::size_t q = 0; q < t.points.size(); ++q) {
      ps.points.push_back(p.centroid + t.points[q](0) * u + t.points[q](1) * w);
      ps.weights.push_back(t.weights[q] * det);
    }
  }
  return ps;
}

/// Signed fan of tetrahedra (cell centroid, face centroid, v_i, v_{i+1}).
inline PointSet polyhedron_quadrature(const Polyhedron& c, int degree) {
  const QuadRule t = tetrahedron_rule(degree);
  PointSet ps;
  for (int f = 0; f < c.num_faces(); ++f) {
    const Face3& face = c.faces[static_cast<std::size_t>(f)];
    const int sign = c.face_signs[static_cast<std::size_t>(f)];
    const Vector a = face.centroid - c.centroid;
    for (const auto& e : face.polygon.edges) {
      const Vector x1 = face.frame.to_global(e.start) - c.centroid;
      const Vector x2 = face.frame.to_global(e.end) - c.centroid;
      const double det = sign * a.dot(cross3(x1, x2));
      for (std::size_t q = 0; q < t.points.size(); ++q) {
        const Vector& r = t.points[q];
        ps.points.push_back(c.centroid + r(0) * a + r(1) * x1 + r(2) * x2);
        ps.weights.push_back(t.weights[q] * det);
      }
    }
  }
  return ps;
}

/// Face quadrature in global coordinates.
inline PointSet face_quadrature(const Face3& f, int degree) {
  PointSet ps = polygon_quadrature(f.polygon, degree);
  for (auto& x : ps.points) x = f.frame.to_global(x);
  return ps;
}

inline Vector moments_by_quadrature(const PointSet& ps, const MonomialBasis& basis) {
  Vector m = Vector::Zero(basis.size());
  for (std::size_t i = 0; i < ps.points.size(); ++i) m += ps.weights[i] * basis.evaluate(ps.points[i]);
  return m;
}

// ---------------------------------------------------------------------------
// Polytope moments

namespace detail {

inline void cross_check(const Vector& reduced, const Vector& fan, double measure, const std::string& what) {
  const double err = (reduced - fan).lpNorm<Eigen::Infinity>();
  if (err > 1e-12 * std::max(measure, 1.0) * std::max<double>(1.0, static_cast<double>(reduced.size()) / 10.0))
    throw GeometryError(what, "boundary reduction and subdivision quadrature disagree (" + std::to_string(err) + ")");
}

}  // namespace detail

/// Moments of the polygon's own scaled monomials up to degree k.
inline MomentTable polygon_moments(const Polygon& p, int k, bool cross_check = true) {
  const MonomialBasis b = p.basis(k);
  Vector m = Vector::Zero(b.size());
  for (const auto& e : p.edges) {
    const double lever = (e.midpoint - p.centroid).dot(e.normal);
    m += lever * edge_moments(e, b);
  }
  for (Index i = 0; i < b.size(); ++i) m(i) /= total_degree(b.index(i)) + 2;
  if (cross_check)
    detail::cross_check(m, moments_by_quadrature(polygon_quadrature(p, k), b), p.area, "polygon " + std::to_string(p.id));
  return {p.id, b, m};
}

/// int_f m_a dS for cell-frame monomials m_a (3D basis) over a face.
inline Vector face_moments(const Face3& f, const MonomialBasis& basis3) {
  const int k = basis3.degree();
  const MomentTable fm = polygon_moments(f.polygon, k, false);
  return restriction_matrix(basis3, f.frame.chart(), fm.basis).transpose() * fm.values;
}

inline MomentTable polyhedron_moments(const Polyhedron& c, int k, bool cross_check = true) {
  const MonomialBasis b = c.basis(k);
  Vector m = Vector::Zero(b.size());
  for (int f = 0; f < c.num_faces(); ++f) {
    const Face3& face = c.faces[static_cast<std::size_t>(f)];
    const double lever = (face.centroid - c.centroid).dot(c.outward_normal(f));
    m += lever * face_moments(face, b);
  }
  for (Index i = 0; i < b.size(); ++i) m(i) /= total_degree(b.index(i)) + 3;
  if (cross_check)
    detail::cross_check(m, moments_by_quadrature(polyhedron_quadrature(c, k), b), c.volume,
                        "cell " + std::to_string(c.id));
  return {c.id, b, m};
}

// ---------------------------------------------------------------------------
// Gram matrices

/// Scalar Gram matrix between the degree-ka and degree-kb prefixes of the
/// table's basis. Requires ka + kb <= table degree.
inline Matrix gram_from_moments(const MomentTable& t, int ka, int kb) {
  if (ka + kb > t.basis.degree()) throw PreconditionError("gram: moment table degree too low");
  const int d = t.basis.dim();
  const Index na = dim_poly_or_zero(ka, d), nb = dim_poly_or_zero(kb, d);
  Matrix g(na, nb);
  for (Index i = 0; i < na; ++i) {
    const MultiIndex& a = t.basis.index(i);
    for (Index j = 0; j < nb; ++j) {
      const MultiIndex& b = t.basis.index(j);
      g(i, j) = t.at({a[0] + b[0], a[1] + b[1], a[2] + b[2]});
    }
  }
  return g;
}

/// Block-diagonal Gram matrix of vector polynomials with `comps` components.
inline Matrix vector_gram(const Matrix& scalar, int comps) {
  Matrix g = Matrix::Zero(comps * scalar.rows(), comps * scalar.cols());
  for (int c = 0; c < comps; ++c) g.block(c * scalar.rows(), c * scalar.cols(), scalar.rows(), scalar.cols()) = scalar;
  return g;
}

/// Gram matrix of two bases expressed in arbitrary frames, against the
/// element's moment table (degree >= a.degree() + b.degree()).
inline Matrix gram(const MomentTable& t, const MonomialBasis& a, const MonomialBasis& b) {
  const int d = t.basis.dim();
  const AffineChart id = AffineChart::identity(d);
  const Matrix ra = restriction_matrix(a, id, t.basis.with_degree(a.degree()));
  const Matrix rb = restriction_matrix(b, id, t.basis.with_degree(b.degree()));
  return ra.transpose() * gram_from_moments(t, a.degree(), b.degree()) * rb;
}

inline Matrix gram(const Polygon& p, const MonomialBasis& a, const MonomialBasis& b) {
  return gram(polygon_moments(p, a.degree() + b.degree()), a, b);
}

inline Matrix gram(const Polyhedron& c, const MonomialBasis& a, const MonomialBasis& b) {
  return gram(polyhedron_moments(c, a.degree() + b.degree()), a, b);
}

/// Cholesky factorization with a positivity check.
inline Eigen::LLT<Matrix> factor_gram(const Matrix& g, const std::string& what) {
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw RankError(what + ": Gram matrix is not positive definite");
  return llt;
}

// ---------------------------------------------------------------------------
// Decomposition bases

enum class SubspaceKind { G, Gperp, R, Rperp };

inline std::string to_string(SubspaceKind k) {
  switch (k) {
    case SubspaceKind::G: return "G";
    case SubspaceKind::Gperp: return "Gperp";
    case SubspaceKind::R: return "R";
    case SubspaceKind::Rperp: return "Rperp";
  }
  return "?";
}

/// dim G_k, G_k^perp, R_k, R_k^perp from the closed forms.
inline int subspace_dim(SubspaceKind kind, int k, int d) {
  if (k < 0) return 0;
  const auto pi = [d](int n) { return dim_poly_or_zero(n, d); };
  if (d == 2) {
    return (kind == SubspaceKind::G || kind == SubspaceKind::R) ? pi(k + 1) - 1 : pi(k - 1);
  }
  switch (kind) {
    case SubspaceKind::G: return pi(k + 1) - 1;
    case SubspaceKind::Gperp: return 3 * pi(k) - pi(k + 1) + 1;
    case SubspaceKind::R: return 3 * pi(k + 1) - pi(k + 2) + 1;
    case SubspaceKind::Rperp: return pi(k - 1);
  }
  return 0;
}

struct SubspaceBasis {
  int element = -1;
  SubspaceKind kind = SubspaceKind::G;
  int degree = -1;
  MonomialBasis basis;  // scalar basis of P_k; columns live in (P_k)^d
  Matrix coeffs;        // d * pi_k rows, one column per member

  Index dim() const { return coeffs.cols(); }
};

namespace detail {

inline Matrix drop_first_column(const Matrix& m) { return m.rightCols(m.cols() - 1); }

/// G_k or R_k columns (h * grad / brot / curl of higher-degree monomials).
inline Matrix range_columns(SubspaceKind kind, const MonomialBasis& b, const std::string& what) {
  const int d = b.dim(), k = b.degree();
  const MonomialBasis up = b.with_degree(k + 1);
  if (kind == SubspaceKind::G) return b.scale() * drop_first_column(diff_matrix(DiffOp::grad, up));
  if (d == 2) return b.scale() * drop_first_column(diff_matrix(DiffOp::brot, up));
  const Matrix curl = b.scale() * diff_matrix(DiffOp::curl, up);
  const auto cols = independent_columns(curl);
  if (static_cast<int>(cols.size()) != subspace_dim(SubspaceKind::R, k, 3))
    throw RankError(what + ": curl image has rank " + std::to_string(cols.size()));
  return select_columns(curl, cols);
}

}  // namespace detail

/// Basis of one of G_k, G_k^perp, R_k, R_k^perp inside (P_k)^d, orthogonal
/// complements taken in L2 of the element described by `moments`
/// (degree >= 2k).
inline SubspaceBasis build_subspace(const MomentTable& moments, SubspaceKind kind, int k) {
  const int d = moments.basis.dim();
  const std::string what = "element " + std::to_string(moments.object) + " " + to_string(kind) + "_" + std::to_string(k);
  SubspaceBasis s;
  s.element = moments.object;
  s.kind = kind;
  s.degree = k;
  s.basis = moments.basis.with_degree(k);
  if (k < 0) {
    s.coeffs = Matrix(0, 0);
    return s;
  }
  const bool is_g = kind == SubspaceKind::G || kind == SubspaceKind::Gperp;
  const Matrix range = detail::range_columns(is_g ? SubspaceKind::G : SubspaceKind::R, s.basis, what);
  if (kind == SubspaceKind::G || kind == SubspaceKind::R) {
    s.coeffs = range;
  } else {
    // work in L2-orthonormal coordinates z = L^T y, M = L L^T, so that the
    // rank decision sees unit-norm fields rather than raw monomial scales
    const Eigen::LLT<Matrix> llt = factor_gram(vector_gram(gram_from_moments(moments, k, k), d), what);
    Matrix w = llt.matrixU() * range;
    for (Index j = 0; j < w.cols(); ++j) w.col(j).normalize();
    s.coeffs = llt.matrixU().solve(null_space(w.transpose(), range.cols(), what));
  }
  if (s.coeffs.cols() != subspace_dim(kind, k, d))
    throw RankError(what + ": dimension " + std::to_string(s.coeffs.cols()) + ", expected " +
                    std::to_string(subspace_dim(kind, k, d)));
  return s;
}

inline SubspaceBasis build_subspace(const Polygon& p, SubspaceKind kind, int k) {
  return build_subspace(polygon_moments(p, std::max(2 * k, 0)), kind, k);
}

inline SubspaceBasis build_subspace(const Polyhedron& c, SubspaceKind kind, int k) {
  return build_subspace(polyhedron_moments(c, std::max(2 * k, 0)), kind, k);
}

}  // namespace vem
