#pragma once

// Local and global virtual element spaces on polygons.
//
//  face : v.n in P_k(e) on each edge, div v in P_{k-1}, rot v in P_{k-1}
//  edge : v.t in P_k(e) on each edge, rot v in P_{k-1}, div v in P_{k-1}
//  vert : continuous, P_k on each edge, Laplacian in P_{k-2}
//  elem : P_k
//
// DOF layout (edge moments scaled by 1/|e|, interior moments by 1/|E|):
//  face : per edge  int_e v.n p, p in P_k(e)   | G_{k-2} | G_k^perp
//  edge : per edge  int_e v.t p, p in P_k(e)   | R_{k-2} | R_k^perp
//  vert : vertex values | per edge P_{k-2}(e) moments | P_{k-2} moments
//  elem : P_k moments
// Edge polynomials are written in the chart of the global edge orientation;
// n is the outward normal and t the counterclockwise tangent of the element,
// so a local edge DOF equals the global one times the edge orientation.

#include "vem/dofs.hpp"
#include "vem/geom.hpp"
#include "vem/integrate.hpp"
#include "vem/poly.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vem {

inline void check_degree(Family f, int k) {
  const int lo = f == Family::elem ? 0 : 1;
  if (k < lo)
    throw PreconditionError(to_string(f) + " family needs k >= " + std::to_string(lo) + " (got " + std::to_string(k) + ")");
}

/// DOF layout of a polygon. `interior` is the entity kind owning interior
/// DOFs (cell for 2D meshes, face for faces of a 3D mesh).
inline DofLayout layout_2d(const Polygon& p, Family family, int k, EntityKind interior = EntityKind::cell) {
  check_degree(family, k);
  DofLayout l;
  l.family = family;
  l.dim = 2;
  l.element = p.id;
  l.degree = k;
  const double inv_area = 1.0 / p.area;
  switch (family) {
    case Family::face:
    case Family::edge: {
      for (int i = 0; i < p.num_edges(); ++i) {
        const PolygonEdge& e = p.edges[static_cast<std::size_t>(i)];
        l.add("edge", EntityKind::edge, e.global_id, i, k + 1, 1.0 / e.length, e.orientation);
      }
      const bool f = family == Family::face;
      const Index nr = dim_poly(k - 1, 2) - 1;
      l.add(f ? "G" : "R", interior, p.id, -1, nr, inv_area);
      l.add(f ? "Gperp" : "Rperp", interior, p.id, -1, dim_poly(k - 1, 2), inv_area, 1, static_cast<int>(nr));
      break;
    }
    case Family::vert: {
      for (int i = 0; i < p.num_vertices(); ++i)
        l.add("vertex", EntityKind::vertex, p.vertex_ids[static_cast<std::size_t>(i)], i, 1, 1.0);
      for (int i = 0; i < p.num_edges(); ++i) {
        const PolygonEdge& e = p.edges[static_cast<std::size_t>(i)];
        l.add("edge", EntityKind::edge, e.global_id, i, dim_poly_or_zero(k - 2, 1), 1.0 / e.length);
      }
      l.add("interior", interior, p.id, -1, dim_poly_or_zero(k - 2, 2), inv_area);
      break;
    }
    case Family::elem:
      l.add("interior", interior, p.id, -1, dim_poly(k, 2), inv_area);
      break;
  }
  return l;
}

inline void check_profile(Family family, const DegreeProfile& pr) {
  if (pr.kb < -1 || pr.kd < -1 || pr.kr < -1) throw PreconditionError("profile degrees must be >= -1");
  if ((family == Family::face || family == Family::edge) && (pr.kb < 0 || pr.kd < 0))
    throw PreconditionError("face/edge profiles need kb >= 0 and kd >= 0 (got " + pr.str() + ")");
  if (family == Family::vert && pr.kb < 1) throw PreconditionError("vert profiles need kb >= 1");
}

/// Local dimension from the closed-form counts. With a profile, the count of
/// the generalized space is returned; for the edge family kd plays the role
/// of the rotation degree and kr of the divergence degree.
inline int dim_local_2d(Family family, const Polygon& p, int k, std::optional<DegreeProfile> profile = std::nullopt) {
  const int le = p.num_edges(), lv = p.num_vertices();
  if (!profile) {
    check_degree(family, k);
    profile = DegreeProfile::standard(k);
  } else {
    check_profile(family, *profile);
  }
  const DegreeProfile pr = *profile;
  switch (family) {
    case Family::face:
    case Family::edge:
      return le * dim_poly(pr.kb, 1) + dim_poly(pr.kd, 2) - 1 + dim_poly_or_zero(pr.kr, 2);
    case Family::vert:
      return lv + le * dim_poly_or_zero(pr.kb - 2, 1) + dim_poly_or_zero(pr.kd - 1, 2);
    case Family::elem:
      return dim_poly(profile ? pr.kb : k, 2);
  }
  return 0;
}

namespace detail {

/// (a+1) x (b+1) matrix of int_e p_i p_j over the edge basis.
inline Matrix edge_cross_gram(double length, int a, int b) {
  const Vector mu = edge_basis_moments(length, a + b);
  Matrix g(a + 1, b + 1);
  for (int i = 0; i <= a; ++i)
    for (int j = 0; j <= b; ++j) g(i, j) = mu(i + j);
  return g;
}

/// Restriction of element monomials (degree m) to the edge chart basis.
inline Matrix edge_restriction(const PolygonEdge& e, const MonomialBasis& b) {
  return restriction_matrix(b, e.chart(), e.basis(b.degree()));
}

}  // namespace detail

class LocalSpace2D {
public:
  LocalSpace2D(Polygon p, Family family, int k, EntityKind interior = EntityKind::cell)
      : poly_(std::move(p)), family_(family), k_(k), layout_(layout_2d(poly_, family, k, interior)) {
    table_ = polygon_moments(poly_, 2 * k_ + 4);
    if (family_ == Family::face || family_ == Family::edge) {
      const bool f = family_ == Family::face;
      range_ = build_subspace(table_, f ? SubspaceKind::G : SubspaceKind::R, k_ - 2);
      perp_ = build_subspace(table_, f ? SubspaceKind::Gperp : SubspaceKind::Rperp, k_);
    }
  }

  const Polygon& element() const { return poly_; }
  Family family() const { return family_; }
  int degree() const { return k_; }
  const DofLayout& layout() const { return layout_; }
  Index size() const { return layout_.size(); }
  const MomentTable& moments() const { return table_; }
  /// G_{k-2} (face) or R_{k-2} (edge).
  const SubspaceBasis& interior_range() const { return range_; }
  /// G_k^perp (face) or R_k^perp (edge).
  const SubspaceBasis& interior_perp() const { return perp_; }
  MonomialBasis basis(int m) const { return poly_.basis(m); }
  int components() const { return (family_ == Family::face || family_ == Family::edge) ? 2 : 1; }

  /// Moment table of degree at least m.
  MomentTable table(int m) const { return m <= table_.basis.degree() ? table_ : polygon_moments(poly_, m); }

  /// Vector Gram block between the degree-a and degree-b monomials.
  Matrix gram(int a, int b, int comps) const { return vector_gram(gram_from_moments(table(a + b), a, b), comps); }

  /// DOFs of the monomial basis of degree m (vector for face/edge, scalar
  /// otherwise), one column per basis member in component-major order.
  Matrix dof_matrix(int m) const {
    const MonomialBasis b = basis(m);
    const int c = components();
    Matrix d = Matrix::Zero(size(), c * b.size());
    const MomentTable t = table(std::max(m + k_, 0));
    auto gram_ab = [&](int a) { return vector_gram(gram_from_moments(t, a, m), c); };
    for (const auto& blk : layout_.blocks) {
      if (blk.name == "edge") {
        const PolygonEdge& e = poly_.edges[static_cast<std::size_t>(blk.local)];
        const Matrix r = detail::edge_restriction(e, b);
        const Matrix g = detail::edge_cross_gram(e.length, static_cast<int>(blk.size) - 1, m);
        if (c == 2) {
          const Vector dir = family_ == Family::face ? e.normal : e.tangent;
          d.block(blk.offset, 0, blk.size, b.size()) = blk.weight * dir(0) * g * r;
          d.block(blk.offset, b.size(), blk.size, b.size()) = blk.weight * dir(1) * g * r;
        } else {
          d.block(blk.offset, 0, blk.size, b.size()) = blk.weight * g * r;
        }
      } else if (blk.name == "G" || blk.name == "R") {
        d.middleRows(blk.offset, blk.size) = blk.weight * range_.coeffs.transpose() * gram_ab(k_ - 2);
      } else if (blk.name == "Gperp" || blk.name == "Rperp") {
        d.middleRows(blk.offset, blk.size) = blk.weight * perp_.coeffs.transpose() * gram_ab(k_);
      } else if (blk.name == "vertex") {
        d.row(blk.offset) = b.evaluate(poly_.vertices[static_cast<std::size_t>(blk.local)]).transpose();
      } else if (blk.name == "interior") {
        const int deg = family_ == Family::vert ? k_ - 2 : k_;
        d.middleRows(blk.offset, blk.size) = blk.weight * gram_from_moments(t, deg, m);
      }
    }
    return d;
  }

  /// DOFs of a polynomial given in any frame of the plane.
  Vector dofs(const PolyCoeffs& p) const {
    if (p.components != components())
      throw PreconditionError(to_string(family_) + " family expects " + std::to_string(components()) + " components");
    const PolyCoeffs q = rebase(p, basis(std::max(p.degree(), 0)));
    return dof_matrix(q.degree()) * q.coeffs;
  }

  DofVector dof_vector(const PolyCoeffs& p) const { return {layout_, dofs(p)}; }

  /// Coefficients (edge basis of degree k, global chart) of the normal
  /// (face) or tangential (edge) trace on local edge i.
  Matrix edge_trace(int i) const {
    const DofBlock& blk = layout_.block("edge", i);
    const PolygonEdge& e = poly_.edges[static_cast<std::size_t>(i)];
    Matrix sel = Matrix::Zero(blk.size, size());
    sel.middleCols(blk.offset, blk.size) = e.length * Matrix::Identity(blk.size, blk.size);
    if (family_ == Family::vert) {
      // two endpoint values plus k-1 moments determine the P_k trace
      const int k = k_;
      Matrix a = Matrix::Zero(k + 1, k + 1);
      Matrix rhs = Matrix::Zero(k + 1, size());
      const int first = e.orientation > 0 ? i : (i + 1) % poly_.num_vertices();
      const int last = e.orientation > 0 ? (i + 1) % poly_.num_vertices() : i;
      for (int j = 0; j <= k; ++j) {
        a(0, j) = std::pow(-0.5, j);
        a(1, j) = std::pow(0.5, j);
      }
      rhs(0, layout_.block("vertex", first).offset) = 1.0;
      rhs(1, layout_.block("vertex", last).offset) = 1.0;
      if (k >= 2) {
        a.bottomRows(k - 1) = detail::edge_cross_gram(e.length, k - 2, k);
        rhs.bottomRows(k - 1) = sel;
      }
      return a.partialPivLu().solve(rhs);
    }
    return detail::edge_cross_gram(e.length, k_, k_).llt().solve(sel);
  }

  /// div v in P_{k-1} (face family): element-basis coefficients.
  Matrix div_matrix() const {
    require(Family::face, "div_matrix");
    return boundary_derivative_matrix(-1.0);
  }

  /// rot v in P_{k-1} (edge family).
  Matrix rot_matrix() const {
    require(Family::edge, "rot_matrix");
    return boundary_derivative_matrix(+1.0);
  }

  /// L2 projection onto (P_k)^2 (face and edge families) or P_k (elem).
  Matrix projector() const {
    if (family_ == Family::elem) {
      const DofBlock& blk = layout_.block("interior");
      return gram_from_moments(table_, k_, k_).llt().solve(poly_.area * Matrix::Identity(blk.size, size()));
    }
    if (family_ == Family::vert)
      throw PreconditionError("the vert family only provides moments up to degree k-2");
    const bool face = family_ == Family::face;
    const double h = poly_.diameter;
    const Index np = dim_poly(k_, 2);
    // moments against [G_k | G_k^perp] (resp. [R_k | R_k^perp])
    const SubspaceBasis full_range = build_subspace(table_, face ? SubspaceKind::G : SubspaceKind::R, k_);
    const Matrix b = hstack(full_range.coeffs, perp_.coeffs);
    Matrix mb = Matrix::Zero(b.cols(), size());

    // boundary term int_{dE} trace * m_beta for |beta| <= k+1
    const MonomialBasis up = basis(k_ + 1);
    Matrix boundary = Matrix::Zero(up.size(), size());
    for (int i = 0; i < poly_.num_edges(); ++i) {
      const PolygonEdge& e = poly_.edges[static_cast<std::size_t>(i)];
      const Matrix r = detail::edge_restriction(e, up);
      boundary += r.transpose() * detail::edge_cross_gram(e.length, k_ + 1, k_) * edge_trace(i);
    }
    // interior term int_E (div v or rot v) m_beta
    const Matrix inner = gram_from_moments(table_, k_ + 1, k_ - 1) * (face ? div_matrix() : rot_matrix());
    const Matrix range_rows = face ? h * (boundary - inner) : h * (inner - boundary);
    mb.topRows(full_range.dim()) = range_rows.bottomRows(up.size() - 1);
    const DofBlock& pb = layout_.block(face ? "Gperp" : "Rperp");
    mb.block(full_range.dim(), pb.offset, pb.size, pb.size) = poly_.area * Matrix::Identity(pb.size, pb.size);

    const Matrix m = vector_gram(gram_from_moments(table_, k_, k_), 2);
    const Matrix bmb = b.transpose() * m * b;
    if (b.cols() != 2 * np) throw RankError("projector: decomposition basis has wrong size");
    return b * bmb.ldlt().solve(mb);
  }

private:
  void require(Family f, const char* what) const {
    if (family_ != f) throw PreconditionError(std::string(what) + " needs the " + to_string(f) + " family");
  }

  /// div (sign -1) or rot (sign +1) from the DOFs, via
  ///   int div v q = int_{dE} v.n q - int v.grad q
  ///   int rot v q = int_{dE} v.t q + int v.brot q.
  Matrix boundary_derivative_matrix(double sign) const {
    const MonomialBasis b = basis(k_ - 1);
    Matrix rhs = Matrix::Zero(b.size(), size());
    for (const auto& blk : layout_.find("edge")) {
      const PolygonEdge& e = poly_.edges[static_cast<std::size_t>(blk.local)];
      const Matrix r = detail::edge_restriction(e, b);  // k x pi_{k-1}
      rhs.middleCols(blk.offset, r.rows()) += e.length * r.transpose();
    }
    // G_{k-2} / R_{k-2} column beta-1 is h grad m_beta / h brot m_beta
    const DofBlock& rb = layout_.blocks[static_cast<std::size_t>(poly_.num_edges())];
    for (Index a = 1; a < b.size(); ++a) rhs(a, rb.offset + a - 1) += sign * poly_.area / poly_.diameter;
    return gram_from_moments(table_, k_ - 1, k_ - 1).llt().solve(rhs);
  }

  Polygon poly_;
  Family family_;
  int k_;
  DofLayout layout_;
  MomentTable table_;
  SubspaceBasis range_, perp_;
};

inline DofVector dofs_of_polynomial(Family family, const Polygon& p, int k, const PolyCoeffs& v) {
  return LocalSpace2D(p, family, k).dof_vector(v);
}

inline PolyCoeffs div_from_dofs(const LocalSpace2D& s, const Vector& d) {
  return PolyCoeffs(s.basis(s.degree() - 1), 1, s.div_matrix() * d);
}

inline PolyCoeffs rot_from_dofs(const LocalSpace2D& s, const Vector& d) {
  return PolyCoeffs(s.basis(s.degree() - 1), 1, s.rot_matrix() * d);
}

inline PolyCoeffs div_from_dofs(const Polygon& p, int k, const DofVector& d) {
  if (d.layout.family != Family::face) throw PreconditionError("div_from_dofs needs a face-family DOF vector");
  return div_from_dofs(LocalSpace2D(p, Family::face, k), d.values);
}

inline PolyCoeffs rot_from_dofs(const Polygon& p, int k, const DofVector& d) {
  if (d.layout.family != Family::edge) throw PreconditionError("rot_from_dofs needs an edge-family DOF vector");
  return rot_from_dofs(LocalSpace2D(p, Family::edge, k), d.values);
}

inline Matrix l2_projector_2d(Family family, const Polygon& p, int k) {
  if (family != Family::face && family != Family::edge) throw PreconditionError("l2_projector_2d: face or edge family");
  return LocalSpace2D(p, family, k).projector();
}

inline PolyCoeffs project(const LocalSpace2D& s, const Vector& d) {
  return PolyCoeffs(s.basis(s.degree()), s.components(), s.projector() * d);
}

/// |int_E f_d - int_{dE} g| for boundary flux data given as the edge block of
/// a face-family DOF vector.
inline double compatibility_residual_2d(const Polygon& p, int k, const Vector& flux_block, const PolyCoeffs& f_d) {
  if (flux_block.size() != static_cast<Index>(p.num_edges()) * (k + 1))
    throw PreconditionError("compatibility_residual_2d: flux block has wrong length");
  double boundary = 0.0;
  for (int i = 0; i < p.num_edges(); ++i)
    boundary += p.edges[static_cast<std::size_t>(i)].length * flux_block(i * (k + 1));
  const MonomialBasis b = p.basis(std::max(f_d.degree(), 0));
  const double interior = f_d.degree() < 0 ? 0.0 : polygon_moments(p, b.degree()).values.dot(rebase(f_d, b).coeffs);
  return std::abs(interior - boundary);
}

// ---------------------------------------------------------------------------
// Global spaces

/// Closed-form global dimension on a 2D mesh.
inline Index global_dim_2d(const Mesh2D& m, Family family, int k) {
  const Index ne = static_cast<Index>(m.edges.size()), nc = static_cast<Index>(m.elements.size());
  const Index nv = static_cast<Index>(m.vertices.size());
  switch (family) {
    case Family::face:
    case Family::edge: return dim_poly(k, 1) * ne + (2 * dim_poly(k - 1, 2) - 1) * nc;
    case Family::vert: return nv + dim_poly_or_zero(k - 2, 1) * ne + dim_poly_or_zero(k - 2, 2) * nc;
    case Family::elem: return dim_poly(k, 2) * nc;
  }
  return 0;
}

inline GlobalDofMap assemble_global_2d(const Mesh2D& m, Family family, int k) {
  std::vector<DofLayout> layouts;
  for (const auto& p : m.elements) layouts.push_back(layout_2d(p, family, k));
  GlobalDofMap g = build_global_map(layouts, family == Family::face || family == Family::edge);
  g.closed_form = global_dim_2d(m, family, k);
  return g;
}

}  // namespace vem
