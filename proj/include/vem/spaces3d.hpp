#pragma once

// Local and global virtual element spaces on polyhedra.
//
// DOF layout (edge moments scaled by 1/|e|, face moments by 1/|f|, interior
// moments by 1/|P|):
//  face : per face  int_f v.n p, p in P_k(f)   | G_{k-2} | G_k^perp
//  edge : per edge  int_e v.t_e p, p in P_k(e)
//         per face  R_{k-2}(f), R_k^perp(f) moments of the tangential part
//         interior  R_{k-2} | R_k^perp
//  vert : vertex values | edge, face and interior moments up to degree k-2
//  elem : P_k moments
// Face polynomials live in the face frame, t_e runs from the lower to the
// higher vertex id, and a local face DOF of the face family uses the outward
// normal (global value times the face sign).

#include "vem/dofs.hpp"
#include "vem/geom.hpp"
#include "vem/integrate.hpp"
#include "vem/poly.hpp"
#include "vem/spaces2d.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vem {

/// dim R_k in 3D (curls of (P_{k+1})^3).
inline int rho3(int k) { return k < 0 ? 0 : subspace_dim(SubspaceKind::R, k, 3); }
/// dim G_k in 3D (gradients of P_{k+1}).
inline int gamma3(int k) { return k < 0 ? 0 : subspace_dim(SubspaceKind::G, k, 3); }

/// Dimension of the boundary space of face-wise 2D edge fields with
/// tangential continuity.
inline int beta_k(const Polyhedron& c, int k) {
  return c.num_edges() * dim_poly(k, 1) + c.num_faces() * (2 * dim_poly(k - 1, 2) - 1);
}

inline DofLayout layout_3d(const Polyhedron& c, Family family, int k) {
  check_degree(family, k);
  DofLayout l;
  l.family = family;
  l.dim = 3;
  l.element = c.id;
  l.degree = k;
  const double inv_vol = 1.0 / c.volume;
  switch (family) {
    case Family::face: {
      for (int f = 0; f < c.num_faces(); ++f) {
        const Face3& face = c.faces[static_cast<std::size_t>(f)];
        l.add("face", EntityKind::face, face.id, f, dim_poly(k, 2), 1.0 / face.area, c.face_signs[static_cast<std::size_t>(f)]);
      }
      const Index ng = gamma3(k - 2);
      l.add("G", EntityKind::cell, c.id, -1, ng, inv_vol);
      l.add("Gperp", EntityKind::cell, c.id, -1, subspace_dim(SubspaceKind::Gperp, k, 3), inv_vol, 1, static_cast<int>(ng));
      break;
    }
    case Family::edge: {
      for (int i = 0; i < c.num_edges(); ++i) {
        const Edge3& e = c.edges[static_cast<std::size_t>(i)];
        l.add("edge", EntityKind::edge, e.id, i, k + 1, 1.0 / e.length);
      }
      const Index nr = dim_poly(k - 1, 2) - 1;
      for (int f = 0; f < c.num_faces(); ++f) {
        const Face3& face = c.faces[static_cast<std::size_t>(f)];
        l.add("face_R", EntityKind::face, face.id, f, nr, 1.0 / face.area);
        l.add("face_Rperp", EntityKind::face, face.id, f, dim_poly(k - 1, 2), 1.0 / face.area, 1, static_cast<int>(nr));
      }
      const Index ni = rho3(k - 2);
      l.add("R", EntityKind::cell, c.id, -1, ni, inv_vol);
      l.add("Rperp", EntityKind::cell, c.id, -1, subspace_dim(SubspaceKind::Rperp, k, 3), inv_vol, 1, static_cast<int>(ni));
      break;
    }
    case Family::vert: {
      for (int i = 0; i < c.num_vertices(); ++i)
        l.add("vertex", EntityKind::vertex, c.vertex_ids[static_cast<std::size_t>(i)], i, 1, 1.0);
      for (int i = 0; i < c.num_edges(); ++i) {
        const Edge3& e = c.edges[static_cast<std::size_t>(i)];
        l.add("edge", EntityKind::edge, e.id, i, dim_poly_or_zero(k - 2, 1), 1.0 / e.length);
      }
      for (int f = 0; f < c.num_faces(); ++f) {
        const Face3& face = c.faces[static_cast<std::size_t>(f)];
        l.add("face", EntityKind::face, face.id, f, dim_poly_or_zero(k - 2, 2), 1.0 / face.area);
      }
      l.add("interior", EntityKind::cell, c.id, -1, dim_poly_or_zero(k - 2, 3), inv_vol);
      break;
    }
    case Family::elem:
      l.add("interior", EntityKind::cell, c.id, -1, dim_poly(k, 3), inv_vol);
      break;
  }
  return l;
}

/// Local dimension from the closed-form counts (see dim_local_2d for the
/// meaning of a profile).
inline int dim_local_3d(Family family, const Polyhedron& c, int k, std::optional<DegreeProfile> profile = std::nullopt) {
  if (!profile) {
    check_degree(family, k);
    profile = DegreeProfile::standard(k);
  } else {
    check_profile(family, *profile);
  }
  const DegreeProfile pr = *profile;
  const int lv = c.num_vertices(), le = c.num_edges(), lf = c.num_faces();
  switch (family) {
    case Family::face: return lf * dim_poly(pr.kb, 2) + dim_poly(pr.kd, 3) - 1 + rho3(pr.kr);
    case Family::edge: return beta_k(c, pr.kb) + dim_poly(pr.kd, 3) + rho3(pr.kr - 1);
    case Family::vert:
      return lv + le * dim_poly_or_zero(pr.kb - 2, 1) + lf * dim_poly_or_zero(pr.kb - 2, 2) + dim_poly_or_zero(pr.kd - 1, 3);
    case Family::elem: return dim_poly(pr.kb, 3);
  }
  return 0;
}

namespace detail {

inline Matrix face_restriction(const Face3& f, const MonomialBasis& b) {
  return restriction_matrix(b, f.frame.chart(), f.basis(b.degree()));
}

/// Scalar restriction of w . p for a constant 3-vector w and p in (P_m)^3.
inline Matrix directional_restriction(const Matrix& r, const Vector& w) {
  Matrix out(r.rows(), 3 * r.cols());
  for (int c = 0; c < 3; ++c) out.middleCols(c * r.cols(), r.cols()) = w(c) * r;
  return out;
}

/// Frame components of the tangential part of p in (P_m)^3 on a face.
inline Matrix tangential_restriction(const Face3& f, const MonomialBasis& b) {
  const Matrix r = face_restriction(f, b);
  return vstack(directional_restriction(r, f.frame.a1), directional_restriction(r, f.frame.a2));
}

}  // namespace detail

class LocalSpace3D {
public:
  LocalSpace3D(Polyhedron c, Family family, int k) : cell_(std::move(c)), family_(family), k_(k), layout_(layout_3d(cell_, family, k)) {
    table_ = polyhedron_moments(cell_, 2 * k_ + 4);
    for (const auto& f : cell_.faces) face_tables_.push_back(polygon_moments(f.polygon, 2 * k_ + 4));
    if (family_ == Family::face) {
      range_ = build_subspace(table_, SubspaceKind::G, k_ - 2);
      perp_ = build_subspace(table_, SubspaceKind::Gperp, k_);
    } else if (family_ == Family::edge) {
      range_ = build_subspace(table_, SubspaceKind::R, k_ - 2);
      perp_ = build_subspace(table_, SubspaceKind::Rperp, k_);
      for (const auto& f : cell_.faces) faces_.emplace_back(f.polygon, Family::edge, k_, EntityKind::face);
    }
  }

  const Polyhedron& element() const { return cell_; }
  Family family() const { return family_; }
  int degree() const { return k_; }
  const DofLayout& layout() const { return layout_; }
  Index size() const { return layout_.size(); }
  const MomentTable& moments() const { return table_; }
  const SubspaceBasis& interior_range() const { return range_; }
  const SubspaceBasis& interior_perp() const { return perp_; }
  MonomialBasis basis(int m) const { return cell_.basis(m); }
  int components() const { return (family_ == Family::face || family_ == Family::edge) ? 3 : 1; }

  MomentTable table(int m) const { return m <= table_.basis.degree() ? table_ : polyhedron_moments(cell_, m); }
  MomentTable face_table(int f, int m) const {
    const MomentTable& t = face_tables_[static_cast<std::size_t>(f)];
    return m <= t.basis.degree() ? t : polygon_moments(cell_.faces[static_cast<std::size_t>(f)].polygon, m);
  }

  /// Face-local 2D edge space of face f (edge family).
  const LocalSpace2D& face_space(int f) const {
    require(Family::edge, "face_space");
    return faces_[static_cast<std::size_t>(f)];
  }

  /// Matrix taking the 3D DOFs to the DOFs of the 2D edge space of face f
  /// (edge family). Edge DOFs pick up the loop orientation of the face.
  Matrix face_selector(int f) const {
    const LocalSpace2D& s = face_space(f);
    Matrix t = Matrix::Zero(s.size(), size());
    for (const auto& blk : s.layout().blocks) {
      if (blk.name == "edge") {
        const PolygonEdge& e = s.element().edges[static_cast<std::size_t>(blk.local)];
        const DofBlock& src = layout_.block("edge", cell_.local_edge(e.global_id));
        t.block(blk.offset, src.offset, blk.size, blk.size) = e.orientation * Matrix::Identity(blk.size, blk.size);
      } else {
        const DofBlock& src = layout_.block(blk.name == "R" ? "face_R" : "face_Rperp", f);
        t.block(blk.offset, src.offset, blk.size, blk.size).setIdentity();
      }
    }
    return t;
  }

  /// DOFs of the monomial basis of degree m, one column per basis member.
  Matrix dof_matrix(int m) const {
    const MonomialBasis b = basis(m);
    const int c = components();
    Matrix d = Matrix::Zero(size(), c * b.size());
    const MomentTable t = table(std::max(m + k_, 0));
    auto cell_gram = [&](int a) { return vector_gram(gram_from_moments(t, a, m), c); };
    for (const auto& blk : layout_.blocks) {
      if (blk.size == 0) continue;
      if (blk.name == "edge") {
        const Edge3& e = cell_.edges[static_cast<std::size_t>(blk.local)];
        const Matrix r = restriction_matrix(b, e.chart(), e.basis(m));
        const Matrix g = detail::edge_cross_gram(e.length, static_cast<int>(blk.size) - 1, m);
        d.middleRows(blk.offset, blk.size) = blk.weight * g * (c == 3 ? detail::directional_restriction(r, e.tangent) : r);
      } else if (blk.name == "face") {
        const Face3& f = cell_.faces[static_cast<std::size_t>(blk.local)];
        const Matrix r = detail::face_restriction(f, b);
        const int deg = family_ == Family::face ? k_ : k_ - 2;
        const Matrix g = gram_from_moments(face_table(blk.local, deg + m), deg, m);
        d.middleRows(blk.offset, blk.size) =
            blk.weight * g * (c == 3 ? detail::directional_restriction(r, cell_.outward_normal(blk.local)) : r);
      } else if (blk.name == "face_R" || blk.name == "face_Rperp") {
        const LocalSpace2D& s = faces_[static_cast<std::size_t>(blk.local)];
        const DofBlock& b2 = s.layout().block(blk.name == "face_R" ? "R" : "Rperp");
        const Face3& f = cell_.faces[static_cast<std::size_t>(blk.local)];
        d.middleRows(blk.offset, blk.size) = s.dof_matrix(m).middleRows(b2.offset, b2.size) * detail::tangential_restriction(f, b);
      } else if (blk.name == "G" || blk.name == "R") {
        d.middleRows(blk.offset, blk.size) = blk.weight * range_.coeffs.transpose() * cell_gram(k_ - 2);
      } else if (blk.name == "Gperp" || blk.name == "Rperp") {
        d.middleRows(blk.offset, blk.size) = blk.weight * perp_.coeffs.transpose() * cell_gram(k_);
      } else if (blk.name == "vertex") {
        d.row(blk.offset) = b.evaluate(cell_.vertices[static_cast<std::size_t>(blk.local)]).transpose();
      } else if (blk.name == "interior") {
        const int deg = family_ == Family::vert ? k_ - 2 : k_;
        d.middleRows(blk.offset, blk.size) = blk.weight * gram_from_moments(t, deg, m);
      }
    }
    return d;
  }

  Vector dofs(const PolyCoeffs& p) const {
    if (p.components != components())
      throw PreconditionError(to_string(family_) + " family expects " + std::to_string(components()) + " components");
    const PolyCoeffs q = rebase(p, basis(std::max(p.degree(), 0)));
    return dof_matrix(q.degree()) * q.coeffs;
  }

  DofVector dof_vector(const PolyCoeffs& p) const { return {layout_, dofs(p)}; }

  /// Outward normal trace on face f (face family), face-basis coefficients
  /// of degree k.
  Matrix face_trace(int f) const {
    require(Family::face, "face_trace");
    const DofBlock& blk = layout_.block("face", f);
    Matrix sel = Matrix::Zero(blk.size, size());
    sel.middleCols(blk.offset, blk.size) = cell_.faces[static_cast<std::size_t>(f)].area * Matrix::Identity(blk.size, blk.size);
    return gram_from_moments(face_tables_[static_cast<std::size_t>(f)], k_, k_).llt().solve(sel);
  }

  /// div v in P_{k-1} (face family), from
  ///   int div v q = sum_f int_f v.n q - int v.grad q.
  Matrix div_matrix() const {
    require(Family::face, "div_matrix");
    const MonomialBasis b = basis(k_ - 1);
    Matrix rhs = Matrix::Zero(b.size(), size());
    for (const auto& blk : layout_.find("face")) {
      const Face3& f = cell_.faces[static_cast<std::size_t>(blk.local)];
      const Matrix r = detail::face_restriction(f, b);
      rhs.middleCols(blk.offset, r.rows()) += f.area * r.transpose();
    }
    const DofBlock& gb = layout_.block("G");
    for (Index a = 1; a < b.size(); ++a) rhs(a, gb.offset + a - 1) -= cell_.volume / cell_.diameter;
    return gram_from_moments(table_, k_ - 1, k_ - 1).llt().solve(rhs);
  }

  /// L2 projection onto (P_k)^3 (face family) or P_k (elem). The edge family
  /// goes through EnhancementOperator.
  Matrix projector() const {
    if (family_ == Family::elem) {
      const DofBlock& blk = layout_.block("interior");
      return gram_from_moments(table_, k_, k_).llt().solve(cell_.volume * Matrix::Identity(blk.size, size()));
    }
    require(Family::face, "projector");
    const double h = cell_.diameter;
    const SubspaceBasis full_range = build_subspace(table_, SubspaceKind::G, k_);
    const Matrix bm = hstack(full_range.coeffs, perp_.coeffs);
    Matrix mb = Matrix::Zero(bm.cols(), size());
    const MonomialBasis up = basis(k_ + 1);
    Matrix boundary = Matrix::Zero(up.size(), size());
    for (int f = 0; f < cell_.num_faces(); ++f) {
      const Face3& face = cell_.faces[static_cast<std::size_t>(f)];
      const Matrix r = detail::face_restriction(face, up);
      boundary += r.transpose() * gram_from_moments(face_table(f, 2 * k_ + 1), k_ + 1, k_) * face_trace(f);
    }
    const Matrix inner = gram_from_moments(table_, k_ + 1, k_ - 1) * div_matrix();
    mb.topRows(full_range.dim()) = (h * (boundary - inner)).bottomRows(up.size() - 1);
    const DofBlock& pb = layout_.block("Gperp");
    mb.block(full_range.dim(), pb.offset, pb.size, pb.size) = cell_.volume * Matrix::Identity(pb.size, pb.size);
    const Matrix m = vector_gram(gram_from_moments(table_, k_, k_), 3);
    return bm * (bm.transpose() * m * bm).ldlt().solve(mb);
  }

private:
  void require(Family f, const char* what) const {
    if (family_ != f) throw PreconditionError(std::string(what) + " needs the " + to_string(f) + " family");
  }

  Polyhedron cell_;
  Family family_;
  int k_;
  DofLayout layout_;
  MomentTable table_;
  std::vector<MomentTable> face_tables_;
  SubspaceBasis range_, perp_;
  std::vector<LocalSpace2D> faces_;
};

inline DofVector dofs_of_polynomial_3d(Family family, const Polyhedron& c, int k, const PolyCoeffs& v) {
  return LocalSpace3D(c, family, k).dof_vector(v);
}

inline PolyCoeffs div_from_dofs_3d(const LocalSpace3D& s, const Vector& d) {
  return PolyCoeffs(s.basis(s.degree() - 1), 1, s.div_matrix() * d);
}

inline PolyCoeffs div_from_dofs_3d(const Polyhedron& c, int k, const DofVector& d) {
  if (d.layout.family != Family::face || d.layout.dim != 3)
    throw PreconditionError("div_from_dofs_3d needs a 3D face-family DOF vector");
  return div_from_dofs_3d(LocalSpace3D(c, Family::face, k), d.values);
}

inline Matrix l2_projector_face3d(const Polyhedron& c, int k) { return LocalSpace3D(c, Family::face, k).projector(); }

/// Matrix giving rot_2 of the tangential part on face f, i.e. (curl v).n
/// for the frame normal of the face, as face-basis coefficients of degree k-1.
inline Matrix curl_normal_trace_matrix(const LocalSpace3D& s, int f) {
  return s.face_space(f).rot_matrix() * s.face_selector(f);
}

inline PolyCoeffs curl_normal_trace(const LocalSpace3D& s, int f, const Vector& d) {
  return PolyCoeffs(s.element().faces[static_cast<std::size_t>(f)].basis(s.degree() - 1), 1, curl_normal_trace_matrix(s, f) * d);
}

// ---------------------------------------------------------------------------
// Boundary space and enhancement

/// Face-wise 2D edge fields on the boundary of a cell, glued through shared
/// edge DOFs.
struct BoundaryEdgeSpace {
  int element = -1;
  int degree = 1;
  std::vector<DofBlock> blocks;  // the boundary blocks of the 3D edge layout
  Index size = 0;

  explicit BoundaryEdgeSpace(const LocalSpace3D& s) : element(s.element().id), degree(s.degree()) {
    if (s.family() != Family::edge) throw PreconditionError("BoundaryEdgeSpace needs the edge family");
    for (const auto& b : s.layout().blocks)
      if (b.name == "edge" || b.name == "face_R" || b.name == "face_Rperp") {
        blocks.push_back(b);
        size += b.size;
      }
  }
};

/// Projector onto (P_k)^3 built from the DOFs of the edge space,
///   S(D pi v - D v, D q) = 0 for all q in (P_k)^3,
/// with S a diagonal SPD form (Euclidean by default), together with the
/// moment recovery against all of (P_k)^3 that it enables.
class EnhancementOperator {
public:
  explicit EnhancementOperator(const LocalSpace3D& s, std::optional<Vector> weights = std::nullopt)
      : element_(s.element().id), k_(s.degree()) {
    if (s.family() != Family::edge) throw PreconditionError("EnhancementOperator needs the edge family");
    const std::string what = "enhancement on cell " + std::to_string(element_);
    d_ = s.dof_matrix(k_);
    n_ = d_.rows();
    s_ = weights ? *weights : Vector::Ones(n_);
    if (s_.size() != n_ || !(s_.minCoeff() > 0)) throw PreconditionError("enhancement weights must be positive, one per DOF");
    const Matrix dsd = d_.transpose() * s_.asDiagonal() * d_;
    const RankInfo ri = rank_info(d_);
    if (ri.rank < d_.cols()) throw RankError(what + ": DOF matrix on (P_k)^3 is rank deficient");
    pi_ = dsd.llt().solve(d_.transpose() * s_.asDiagonal());

    const MomentTable& t = s.moments();
    const SubspaceBasis rk = build_subspace(t, SubspaceKind::R, k_);
    const SubspaceBasis& rlow = s.interior_range();
    const Matrix mk = vector_gram(gram_from_moments(t, k_, k_), 3);
    if (rlow.dim() > 0) {
      const Matrix x = rlow.coeffs.transpose() * vector_gram(gram_from_moments(t, k_ - 2, k_), 3) * rk.coeffs;
      rort_ = rk.coeffs * null_space(x, rlow.dim(), what + " (Rort)");
    } else {
      rort_ = rk.coeffs;
    }

    // moments against B = [R_{k-2} | Rort | R_k^perp], then against monomials
    const Index n_low = rlow.dim(), n_ort = rort_.cols(), n_perp = s.interior_perp().dim();
    Matrix b = Matrix::Zero(3 * dim_poly(k_, 3), n_low + n_ort + n_perp);
    for (int c = 0; c < 3; ++c)
      if (n_low > 0)
        b.block(c * dim_poly(k_, 3), 0, dim_poly(k_ - 2, 3), n_low) =
            rlow.coeffs.middleRows(c * dim_poly(k_ - 2, 3), dim_poly(k_ - 2, 3));
    b.middleCols(n_low, n_ort) = rort_;
    b.rightCols(n_perp) = s.interior_perp().coeffs;
    Matrix mb = Matrix::Zero(b.cols(), n_);
    const double vol = s.element().volume;
    const DofBlock& rb = s.layout().block("R");
    const DofBlock& pb = s.layout().block("Rperp");
    mb.block(0, rb.offset, n_low, n_low) = vol * Matrix::Identity(n_low, n_low);
    mb.middleRows(n_low, n_ort) = rort_.transpose() * mk * pi_;
    mb.block(n_low + n_ort, pb.offset, n_perp, n_perp) = vol * Matrix::Identity(n_perp, n_perp);
    moments_ = b.transpose().partialPivLu().solve(mb);
    projector_ = mk.llt().solve(moments_);
  }

  int element() const { return element_; }
  int degree() const { return k_; }
  /// Number of DOFs the projector reads.
  Index n() const { return n_; }
  const Matrix& dof_matrix() const { return d_; }
  const Matrix& matrix() const { return pi_; }
  /// Coefficients of a basis of {q in R_k : int q.r = 0 for r in R_{k-2}}.
  const Matrix& rort() const { return rort_; }
  Index rort_dim() const { return rort_.cols(); }

  /// Only the first n() entries are read; anything appended is ignored.
  Vector apply(const Vector& info) const {
    if (info.size() < n_) throw PreconditionError("enhancement: need at least " + std::to_string(n_) + " values");
    return pi_ * info.head(n_);
  }

  /// int v.m for every vector monomial m of degree k.
  const Matrix& moments_matrix() const { return moments_; }
  Vector moments(const Vector& d) const { return moments_ * d.head(n_); }
  /// L2 projection onto (P_k)^3.
  const Matrix& projector() const { return projector_; }

private:
  int element_;
  int k_;
  Index n_ = 0;
  Matrix d_, pi_, rort_, moments_, projector_;
  Vector s_;
};

inline EnhancementOperator build_enhancement(const Polyhedron& c, int k, std::optional<Vector> weights = std::nullopt) {
  return EnhancementOperator(LocalSpace3D(c, Family::edge, k), std::move(weights));
}

inline Vector moments_via_enhancement(const EnhancementOperator& e, const DofVector& d) { return e.moments(d.values); }

// ---------------------------------------------------------------------------
// Green's formulas on polynomials

namespace detail {

inline double integrate_cell(const Polyhedron& c, const PolyCoeffs& f) {
  if (f.degree() < 0) return 0.0;
  const MonomialBasis b = c.basis(f.degree());
  return polyhedron_moments(c, f.degree()).values.dot(rebase(f, b).coeffs);
}

inline double integrate_boundary(const Polyhedron& c, const std::function<PolyCoeffs(const Vector&)>& integrand) {
  double s = 0.0;
  for (int f = 0; f < c.num_faces(); ++f) {
    const PolyCoeffs g = integrand(c.outward_normal(f));
    if (g.degree() < 0) continue;
    s += face_moments(c.faces[static_cast<std::size_t>(f)], g.basis).dot(g.coeffs);
  }
  return s;
}

inline PolyCoeffs constant_vector(const MonomialBasis& b, const Vector& w) {
  PolyCoeffs p(b.with_degree(0), static_cast<int>(w.size()));
  p.coeffs = w;
  return p;
}

}  // namespace detail

struct GreenResiduals {
  double curl = 0.0;      // int curl psi . phi - int psi . curl phi - int_dP psi . (phi x n)
  double curlcurl = 0.0;  // int curl psi . curl phi - int psi . (-lap phi + grad div phi) - int_dP psi . (curl phi x n)
  double scale = 1.0;
};

/// Residuals of the two curl Green formulas, every term integrated exactly.
inline GreenResiduals green_residuals(const Polyhedron& c, const PolyCoeffs& psi, const PolyCoeffs& phi) {
  if (psi.components != 3 || phi.components != 3) throw PreconditionError("green_residuals: 3D vector fields expected");
  const MonomialBasis b = c.basis(std::max({psi.degree(), phi.degree(), 2}));
  const PolyCoeffs u = rebase(psi, b), v = rebase(phi, b);
  const PolyCoeffs cu = apply(DiffOp::curl, u), cv = apply(DiffOp::curl, v);
  auto surf = [&](const PolyCoeffs& w) {
    return detail::integrate_boundary(c, [&](const Vector& n) { return dot(u, cross(w, detail::constant_vector(b, n))); });
  };
  const double a1 = detail::integrate_cell(c, dot(cu, v));
  const double a2 = detail::integrate_cell(c, dot(u, cv));
  const double a3 = surf(v);

  std::vector<PolyCoeffs> lap;
  for (int i = 0; i < 3; ++i) lap.push_back(apply(DiffOp::laplacian, v.component(i)));
  const PolyCoeffs graddiv = apply(DiffOp::grad, apply(DiffOp::div, v));
  const PolyCoeffs op = add(graddiv, stack_components(lap), -1.0);
  const double b1 = detail::integrate_cell(c, dot(cu, cv));
  const double b2 = detail::integrate_cell(c, dot(u, op));
  const double b3 = surf(cv);

  GreenResiduals r;
  r.scale = std::max({1.0, std::abs(a1), std::abs(a2), std::abs(a3), std::abs(b1), std::abs(b2), std::abs(b3)});
  r.curl = std::abs(a1 - a2 - a3) / r.scale;
  r.curlcurl = std::abs(b1 - b2 - b3) / r.scale;
  return r;
}

// ---------------------------------------------------------------------------
// Global spaces

/// Closed-form global dimension on a 3D mesh. For the edge family the
/// interior count follows the local space (R_{k-2} moments); `alternative_count`
/// receives the variant with rho_{k-1,3}.
inline Index global_dim_3d(const Mesh3D& m, Family family, int k, Index* alternative_count = nullptr) {
  const Index nv = static_cast<Index>(m.vertices.size()), ne = static_cast<Index>(m.edges.size());
  const Index nf = static_cast<Index>(m.faces.size()), nc = static_cast<Index>(m.cells.size());
  Index n = 0;
  switch (family) {
    case Family::face: n = dim_poly(k, 2) * nf + (gamma3(k - 2) + rho3(k - 1)) * nc; break;
    case Family::edge:
      n = dim_poly(k, 1) * ne + (2 * dim_poly(k - 1, 2) - 1) * nf + (dim_poly(k - 1, 3) + rho3(k - 2)) * nc;
      if (alternative_count)
        *alternative_count = dim_poly(k, 1) * ne + (2 * dim_poly(k - 1, 2) - 1) * nf + (dim_poly(k - 1, 3) + rho3(k - 1)) * nc;
      return n;
    case Family::vert:
      n = nv + dim_poly_or_zero(k - 2, 1) * ne + dim_poly_or_zero(k - 2, 2) * nf + dim_poly_or_zero(k - 2, 3) * nc;
      break;
    case Family::elem: n = dim_poly(k, 3) * nc; break;
  }
  if (alternative_count) *alternative_count = n;
  return n;
}

inline GlobalDofMap assemble_global_3d(const Mesh3D& m, Family family, int k) {
  std::vector<DofLayout> layouts;
  for (const auto& c : m.cells) layouts.push_back(layout_3d(c, family, k));
  GlobalDofMap g = build_global_map(layouts, family == Family::face);
  g.closed_form = global_dim_3d(m, family, k, &g.alternative_count);
  return g;
}

}  // namespace vem
