#pragma once

// Transfer matrices between consecutive global spaces and checks of the
// discrete de Rham sequences
//
//  2D:  R -> V^vert_k -grad-> V^edge_{k-1} -rot-> P_{k-2}
//       R -> V^vert_k -brot-> V^face_{k-1} -div-> P_{k-2}
//  3D:  R -> V^vert_k -grad-> V^edge_{k-1} -curl-> V^face_{k-2} -div-> P_{k-3}
//
// Every transfer is assembled element by element from DOFs alone. A row that
// belongs to a shared entity is produced by each element that sees it; the
// largest disagreement is recorded as the assembly discrepancy. The 3D grad
// link is only assembled on the polynomial subspace P_k (the vertex DOFs do
// not give the face moments of degree k-1 that the full link needs).

#include "vem/dofs.hpp"
#include "vem/geom.hpp"
#include "vem/parallel.hpp"
#include "vem/spaces2d.hpp"
#include "vem/spaces3d.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace vem {

struct TransferMatrix {
  std::string op;
  Family source_family = Family::vert;
  int source_degree = 0;
  Family target_family = Family::edge;
  int target_degree = 0;
  Matrix matrix;  // rows: target global DOFs, columns: source global DOFs
  double discrepancy = 0.0;
  std::map<std::string, std::string> provenance;  // target block -> identity used
};

namespace detail {

/// Builds the global matrix from local (target x source) matrices.
inline TransferMatrix assemble_transfer(const GlobalDofMap& src, const GlobalDofMap& dst, const std::vector<Matrix>& local) {
  TransferMatrix t;
  t.matrix = Matrix::Zero(dst.size, src.size);
  std::vector<bool> set(static_cast<std::size_t>(dst.size), false);
  double diff = 0.0;
  for (std::size_t e = 0; e < local.size(); ++e) {
    const Matrix rows = local[e] * src.local_selector(static_cast<int>(e));
    for (Index r = 0; r < rows.rows(); ++r) {
      const Index g = dst.local_to_global[e][static_cast<std::size_t>(r)];
      const Vector row = dst.signs[e][static_cast<std::size_t>(r)] * rows.row(r).transpose();
      if (set[static_cast<std::size_t>(g)]) {
        diff = std::max(diff, (t.matrix.row(g).transpose() - row).cwiseAbs().maxCoeff());
      } else {
        t.matrix.row(g) = row.transpose();
        set[static_cast<std::size_t>(g)] = true;
      }
    }
  }
  const double scale = t.matrix.size() ? std::max(1.0, t.matrix.cwiseAbs().maxCoeff()) : 1.0;
  t.discrepancy = diff / scale;
  return t;
}

/// Edge-basis matrix of d/ds on P_k(e) -> P_{k-1}(e) (s along the global tangent).
inline Matrix edge_derivative(double length, int k) {
  Matrix d = Matrix::Zero(k, k + 1);
  for (int j = 1; j <= k; ++j) d(j - 1, j) = j / length;
  return d;
}

/// Row functional phi -> int_E grad(phi) . w for phi in the vertex space,
///   int grad phi . w = sum_e int_e phi (w.n) - int phi div w,
/// with div w in P_{k-2} read off the interior moments.
inline Vector grad_functional_2d(const LocalSpace2D& vert, const std::vector<Matrix>& traces, const PolyCoeffs& w_in) {
  const Polygon& p = vert.element();
  const int k = vert.degree();
  const PolyCoeffs w = rebase(w_in, p.basis(k - 1));
  Vector row = Vector::Zero(vert.size());
  for (int i = 0; i < p.num_edges(); ++i) {
    const PolygonEdge& e = p.edges[static_cast<std::size_t>(i)];
    const Matrix r = edge_restriction(e, w.basis);
    const Vector wn = e.normal(0) * r * w.component(0).coeffs + e.normal(1) * r * w.component(1).coeffs;
    row += (wn.transpose() * edge_cross_gram(e.length, k - 1, k) * traces[static_cast<std::size_t>(i)]).transpose();
  }
  const PolyCoeffs dw = rebase(apply(DiffOp::div, w), p.basis(k - 2));
  const DofBlock& ib = vert.layout().block("interior");
  row.segment(ib.offset, ib.size) -= p.area * dw.coeffs;
  return row;
}

/// Local grad (target edge family) or brot (target face family) matrix.
inline Matrix local_grad_2d(const LocalSpace2D& vert, const LocalSpace2D& target) {
  const Polygon& p = vert.element();
  const int k = vert.degree();
  const bool brot = target.family() == Family::face;
  Matrix l = Matrix::Zero(target.size(), vert.size());
  std::vector<Matrix> traces;
  for (int i = 0; i < p.num_edges(); ++i) traces.push_back(vert.edge_trace(i));
  for (const auto& blk : target.layout().blocks) {
    if (blk.size == 0) continue;
    if (blk.name == "edge") {
      // grad phi . t and brot phi . n both equal the derivative along the loop
      const PolygonEdge& e = p.edges[static_cast<std::size_t>(blk.local)];
      l.middleRows(blk.offset, blk.size) = blk.weight * e.orientation * edge_cross_gram(e.length, k - 1, k - 1) *
                                           edge_derivative(e.length, k) * traces[static_cast<std::size_t>(blk.local)];
      continue;
    }
    const bool perp = blk.name == "Gperp" || blk.name == "Rperp";
    const SubspaceBasis& sb = perp ? target.interior_perp() : target.interior_range();
    for (Index j = 0; j < blk.size; ++j) {
      PolyCoeffs w(sb.basis, 2, sb.coeffs.col(j));
      if (brot) {
        // brot phi . w = grad phi . (-w2, w1)
        PolyCoeffs r(sb.basis, 2);
        const Index n = sb.basis.size();
        r.coeffs.head(n) = -w.coeffs.tail(n);
        r.coeffs.tail(n) = w.coeffs.head(n);
        w = r;
      }
      l.row(blk.offset + j) = blk.weight * grad_functional_2d(vert, traces, w).transpose();
    }
  }
  return l;
}

/// Local map to the moments of an elementwise polynomial (elem family).
inline Matrix local_to_elem(const MomentTable& t, double measure, int deg, const Matrix& coeffs) {
  return gram_from_moments(t, deg, deg) * coeffs / measure;
}

/// Local curl matrix from the 3D edge space (degree k) to the 3D face space
/// (degree k-1).
inline Matrix local_curl_3d(const LocalSpace3D& edge, const LocalSpace3D& face) {
  const Polyhedron& c = edge.element();
  const int ke = edge.degree(), kf = face.degree();
  Matrix l = Matrix::Zero(face.size(), edge.size());
  // per-face 2D L2 projections of the tangential part, degree ke
  std::vector<Matrix> pi;
  for (int f = 0; f < c.num_faces(); ++f) pi.push_back(edge.face_space(f).projector() * edge.face_selector(f));

  for (const auto& blk : face.layout().blocks) {
    if (blk.size == 0) continue;
    if (blk.name == "face") {
      const int f = blk.local;
      l.middleRows(blk.offset, blk.size) = blk.weight * c.face_signs[static_cast<std::size_t>(f)] *
                                           gram_from_moments(edge.face_table(f, 2 * kf), kf, kf) *
                                           curl_normal_trace_matrix(edge, f);
      continue;
    }
    // int curl v . g = int v . curl g + sum_f int_f v_t . (g x n)
    const bool perp = blk.name == "Gperp";
    const SubspaceBasis& sb = perp ? face.interior_perp() : face.interior_range();
    const SubspaceBasis& rlow = edge.interior_range();  // R_{ke-2}
    const DofBlock& rb = edge.layout().block("R");
    for (Index j = 0; j < blk.size; ++j) {
      const PolyCoeffs g = rebase(PolyCoeffs(sb.basis, 3, sb.coeffs.col(j)), c.basis(kf));
      Vector row = Vector::Zero(edge.size());
      const PolyCoeffs cg = apply(DiffOp::curl, g);
      if (cg.coeffs.size() > 0 && cg.coeffs.norm() > 0) {
        const Vector target = rebase(cg, rlow.basis).coeffs;
        const Vector a = rlow.coeffs.colPivHouseholderQr().solve(target);
        if ((rlow.coeffs * a - target).norm() > 1e-9 * std::max(1.0, target.norm()))
          throw RankError("curl transfer: curl of a face-space functional is not in R_{k-2}");
        row.segment(rb.offset, rb.size) += c.volume * a;
      }
      for (int f = 0; f < c.num_faces(); ++f) {
        const Face3& fc = c.faces[static_cast<std::size_t>(f)];
        const Matrix r = face_restriction(fc, g.basis);
        // frame components of g x n for the frame normal
        const Vector w = vstack(directional_restriction(r, fc.frame.a2), -directional_restriction(r, fc.frame.a1)) * g.coeffs;
        const Matrix gm = vector_gram(gram_from_moments(edge.face_table(f, kf + ke), kf, ke), 2);
        row += c.face_signs[static_cast<std::size_t>(f)] * (w.transpose() * gm * pi[static_cast<std::size_t>(f)]).transpose();
      }
      l.row(blk.offset + j) = blk.weight * row.transpose();
    }
  }
  return l;
}

inline double composition_residual(const Matrix& a, const Matrix& b) {
  if (a.size() == 0 || b.size() == 0) return 0.0;
  const double scale = std::max(1e-300, a.norm() * b.norm());
  return (a * b).norm() / scale;
}

/// Global DOF vectors of polynomial fields given as columns of local DOF
/// evaluations; shared DOFs are taken from the first element that sees them.
inline Matrix gather_global(const GlobalDofMap& g, const std::vector<Matrix>& local) {
  const Index cols = local.empty() ? 0 : local.front().cols();
  Matrix out = Matrix::Zero(g.size, cols);
  for (std::size_t e = 0; e < local.size(); ++e)
    for (Index r = 0; r < local[e].rows(); ++r)
      out.row(g.local_to_global[e][static_cast<std::size_t>(r)]) = g.signs[e][static_cast<std::size_t>(r)] * local[e].row(r);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// 2D transfers

struct Spaces2D {
  std::vector<std::unique_ptr<LocalSpace2D>> local;
  GlobalDofMap map;
};

inline Spaces2D build_spaces_2d(const Mesh2D& m, Family f, int k) {
  Spaces2D s;
  s.local.resize(m.elements.size());
  parallel_for(m.elements.size(), [&](std::size_t e) { s.local[e] = std::make_unique<LocalSpace2D>(m.elements[e], f, k); });
  s.map = assemble_global_2d(m, f, k);
  return s;
}

/// grad: V^vert_k -> V^edge_{k-1}, or brot: V^vert_k -> V^face_{k-1}.
inline TransferMatrix transfer_grad_2d(const Spaces2D& vert, const Spaces2D& target) {
  std::vector<Matrix> local(vert.local.size());
  parallel_for(local.size(), [&](std::size_t e) { local[e] = detail::local_grad_2d(*vert.local[e], *target.local[e]); });
  TransferMatrix t = detail::assemble_transfer(vert.map, target.map, local);
  const bool brot = target.map.family == Family::face;
  t.op = brot ? "brot" : "grad";
  t.source_family = Family::vert;
  t.source_degree = vert.map.degree;
  t.target_family = target.map.family;
  t.target_degree = target.map.degree;
  t.provenance["edge"] = "derivative of the edge trace along the boundary";
  t.provenance[brot ? "G" : "R"] = "boundary integral of phi (w.n); div w = 0";
  t.provenance[brot ? "Gperp" : "Rperp"] = "boundary integral of phi (w.n) minus interior moments against div w";
  return t;
}

/// rot: V^edge_{k} -> P_{k-1}, or div: V^face_{k} -> P_{k-1}, as elementwise
/// moments (elem family of degree k-1).
inline TransferMatrix transfer_last_2d(const Spaces2D& src, const Spaces2D& elem) {
  std::vector<Matrix> local(src.local.size());
  const bool div = src.map.family == Family::face;
  parallel_for(local.size(), [&](std::size_t e) {
    const LocalSpace2D& s = *src.local[e];
    local[e] = detail::local_to_elem(s.moments(), s.element().area, s.degree() - 1, div ? s.div_matrix() : s.rot_matrix());
  });
  TransferMatrix t = detail::assemble_transfer(src.map, elem.map, local);
  t.op = div ? "div" : "rot";
  t.source_family = src.map.family;
  t.source_degree = src.map.degree;
  t.target_family = Family::elem;
  t.target_degree = elem.map.degree;
  t.provenance["interior"] = div ? "boundary flux minus gradient moments" : "boundary circulation plus brot moments";
  return t;
}

// ---------------------------------------------------------------------------
// 3D transfers

struct Spaces3D {
  std::vector<std::unique_ptr<LocalSpace3D>> local;
  GlobalDofMap map;
};

inline Spaces3D build_spaces_3d(const Mesh3D& m, Family f, int k) {
  Spaces3D s;
  s.local.resize(m.cells.size());
  parallel_for(m.cells.size(), [&](std::size_t e) { s.local[e] = std::make_unique<LocalSpace3D>(m.cells[e], f, k); });
  s.map = assemble_global_3d(m, f, k);
  return s;
}

/// curl: V^edge_{k-1} -> V^face_{k-2}.
inline TransferMatrix transfer_curl_3d(const Spaces3D& edge, const Spaces3D& face) {
  std::vector<Matrix> local(edge.local.size());
  parallel_for(local.size(), [&](std::size_t e) { local[e] = detail::local_curl_3d(*edge.local[e], *face.local[e]); });
  TransferMatrix t = detail::assemble_transfer(edge.map, face.map, local);
  t.op = "curl";
  t.source_family = Family::edge;
  t.source_degree = edge.map.degree;
  t.target_family = Family::face;
  t.target_degree = face.map.degree;
  t.provenance["face"] = "rot of the tangential part on the face";
  t.provenance["G"] = "boundary integral of v . (grad q x n)";
  t.provenance["Gperp"] = "interior R moments of curl g plus boundary integral of v . (g x n)";
  return t;
}

/// div: V^face_{k-2} -> P_{k-3}.
inline TransferMatrix transfer_div_3d(const Spaces3D& face, const Spaces3D& elem) {
  std::vector<Matrix> local(face.local.size());
  parallel_for(local.size(), [&](std::size_t e) {
    const LocalSpace3D& s = *face.local[e];
    local[e] = detail::local_to_elem(s.moments(), s.element().volume, s.degree() - 1, s.div_matrix());
  });
  TransferMatrix t = detail::assemble_transfer(face.map, elem.map, local);
  t.op = "div";
  t.source_family = Family::face;
  t.source_degree = face.map.degree;
  t.target_family = Family::elem;
  t.target_degree = elem.map.degree;
  t.provenance["interior"] = "boundary flux minus gradient moments";
  return t;
}

/// Global DOFs of the monomials of degree k about the mesh bounding box
/// (vert) and of their gradients (edge, degree k-1).
struct PolynomialGradients {
  Matrix vert;  // dim V^vert x pi_{k,3}
  Matrix edge;  // dim V^edge x pi_{k,3}
};

inline PolynomialGradients polynomial_gradients_3d(const Mesh3D& m, const Spaces3D& vert, const Spaces3D& edge) {
  Vector lo = m.vertices.front(), hi = m.vertices.front();
  for (const auto& v : m.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const MonomialBasis b(3, vert.map.degree, 0.5 * (lo + hi), std::max(1e-300, (hi - lo).norm()));
  std::vector<Matrix> lv(m.cells.size()), le(m.cells.size());
  parallel_for(m.cells.size(), [&](std::size_t e) {
    const LocalSpace3D& sv = *vert.local[e];
    const LocalSpace3D& se = *edge.local[e];
    lv[e] = Matrix(sv.size(), b.size());
    le[e] = Matrix(se.size(), b.size());
    for (Index j = 0; j < b.size(); ++j) {
      PolyCoeffs p(b, 1);
      p.coeffs(j) = 1.0;
      lv[e].col(j) = sv.dofs(p);
      const PolyCoeffs g = apply(DiffOp::grad, p);
      le[e].col(j) = g.degree() < 0 ? Vector::Zero(se.size()) : se.dofs(g);
    }
  });
  return {detail::gather_global(vert.map, lv), detail::gather_global(edge.map, le)};
}

// Mesh-level entry points. k is the degree of the vertex space.

inline TransferMatrix transfer_grad_2d(const Mesh2D& m, int k) {
  if (k < 2) throw PreconditionError("grad transfer needs k >= 2");
  return transfer_grad_2d(build_spaces_2d(m, Family::vert, k), build_spaces_2d(m, Family::edge, k - 1));
}

inline TransferMatrix transfer_brot_2d(const Mesh2D& m, int k) {
  if (k < 2) throw PreconditionError("brot transfer needs k >= 2");
  return transfer_grad_2d(build_spaces_2d(m, Family::vert, k), build_spaces_2d(m, Family::face, k - 1));
}

inline TransferMatrix transfer_rot_2d(const Mesh2D& m, int k) {
  if (k < 2) throw PreconditionError("rot transfer needs k >= 2");
  return transfer_last_2d(build_spaces_2d(m, Family::edge, k - 1), build_spaces_2d(m, Family::elem, k - 2));
}

inline TransferMatrix transfer_div_2d(const Mesh2D& m, int k) {
  if (k < 2) throw PreconditionError("div transfer needs k >= 2");
  return transfer_last_2d(build_spaces_2d(m, Family::face, k - 1), build_spaces_2d(m, Family::elem, k - 2));
}

inline TransferMatrix transfer_curl_3d(const Mesh3D& m, int k) {
  if (k < 3) throw PreconditionError("curl transfer needs k >= 3");
  return transfer_curl_3d(build_spaces_3d(m, Family::edge, k - 1), build_spaces_3d(m, Family::face, k - 2));
}

inline TransferMatrix transfer_div_3d(const Mesh3D& m, int k) {
  if (k < 3) throw PreconditionError("div transfer needs k >= 3");
  return transfer_div_3d(build_spaces_3d(m, Family::face, k - 2), build_spaces_3d(m, Family::elem, k - 3));
}

// ---------------------------------------------------------------------------
// Reports

struct ComplexCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ComplexLink {
  std::string op, from, to;
  Index rows = 0, cols = 0, rank = 0, kernel_dim = 0;
  double discrepancy = 0.0;
  std::string note;
};

struct ComplexSequence {
  std::string name;
  std::vector<std::string> spaces;
  std::vector<Index> dims;
  std::vector<ComplexLink> links;
  long euler = 0;
  std::vector<ComplexCheck> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct ComplexReport {
  std::string mesh;
  int dim = 2;
  int degree = 2;
  bool fault_injected = false;
  std::vector<ComplexSequence> sequences;

  bool pass() const {
    for (const auto& s : sequences)
      if (!s.pass()) return false;
    return true;
  }
};

inline constexpr double kCompositionTolerance = 1e-10;
inline constexpr double kAssemblyTolerance = 1e-10;

namespace detail {

inline ComplexLink make_link(const TransferMatrix& t, const std::string& from, const std::string& to) {
  ComplexLink l;
  l.op = t.op;
  l.from = from;
  l.to = to;
  l.rows = t.matrix.rows();
  l.cols = t.matrix.cols();
  l.rank = t.matrix.size() ? numerical_rank(t.matrix) : 0;
  l.kernel_dim = l.cols - l.rank;
  l.discrepancy = t.discrepancy;
  return l;
}

inline ComplexCheck check_le(std::string name, double value, double tol, std::string detail = {}) {
  return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

inline ComplexCheck check_eq(std::string name, long a, long b, const std::string& what) {
  return {std::move(name), a == b, static_cast<double>(a), static_cast<double>(b), what};
}

inline std::string space_name(const char* fam, int k) { return std::string(fam) + "_" + std::to_string(k); }

}  // namespace detail

enum class Fault { none, sign_flip };

inline ComplexReport verify_complex(const Mesh2D& m, int k, Fault fault = Fault::none) {
  if (k < 2) throw PreconditionError("complex verification needs k >= 2 in 2D (got " + std::to_string(k) + ")");
  if (!m.simply_connected) throw PreconditionError("mesh '" + m.name + "' is not simply connected; exactness is not checked");
  ComplexReport rep;
  rep.mesh = m.name;
  rep.dim = 2;
  rep.degree = k;
  Spaces2D vert = build_spaces_2d(m, Family::vert, k);
  Spaces2D elem = build_spaces_2d(m, Family::elem, k - 2);
  for (Family mid : {Family::edge, Family::face}) {
    Spaces2D middle = build_spaces_2d(m, mid, k - 1);
    if (fault == Fault::sign_flip) rep.fault_injected = inject_sign_flip(middle.map) || rep.fault_injected;
    const TransferMatrix t0 = transfer_grad_2d(vert, middle);
    const TransferMatrix t1 = transfer_last_2d(middle, elem);
    ComplexSequence s;
    s.name = mid == Family::edge ? "grad-rot" : "brot-div";
    const std::string mname = detail::space_name(mid == Family::edge ? "V^edge" : "V^face", k - 1);
    s.spaces = {"R", detail::space_name("V^vert", k), mname, detail::space_name("P", k - 2)};
    s.dims = {1, vert.map.size, middle.map.size, elem.map.size};
    s.links = {detail::make_link(t0, s.spaces[1], s.spaces[2]), detail::make_link(t1, s.spaces[2], s.spaces[3])};
    s.euler = static_cast<long>(s.dims[1] - s.dims[2] + s.dims[3]);

    // DOFs of the constant 1 in the vertex space
    std::vector<Matrix> ones(m.elements.size());
    for (std::size_t e = 0; e < ones.size(); ++e)
      ones[e] = vert.local[e]->dofs(PolyCoeffs(m.elements[e].basis(0), 1, Vector::Ones(1)));
    const Vector one = detail::gather_global(vert.map, ones).col(0);
    s.checks.push_back(detail::check_le("constants in kernel", (t0.matrix * one).norm() / std::max(1.0, t0.matrix.norm()),
                                        kCompositionTolerance));
    s.checks.push_back(detail::check_eq("kernel is constants", s.links[0].kernel_dim, 1, "dim ker " + t0.op));
    s.checks.push_back(detail::check_le("composition", detail::composition_residual(t1.matrix, t0.matrix), kCompositionTolerance,
                                        t1.op + " o " + t0.op));
    s.checks.push_back(detail::check_eq("exact at " + mname, s.links[0].rank, s.dims[2] - s.links[1].rank,
                                        "rank " + t0.op + " = dim ker " + t1.op));
    s.checks.push_back(detail::check_eq("surjective " + t1.op, s.links[1].rank, s.dims[3], "rank = target dim"));
    s.checks.push_back(detail::check_eq("euler", s.euler, 1, "alternating sum of dimensions"));
    s.checks.push_back(detail::check_le("assembly", std::max(t0.discrepancy, t1.discrepancy), kAssemblyTolerance,
                                        "shared rows agree between elements"));
    rep.sequences.push_back(std::move(s));
  }
  return rep;
}

inline ComplexReport verify_complex(const Mesh3D& m, int k, Fault fault = Fault::none) {
  if (k < 3) throw PreconditionError("complex verification needs k >= 3 in 3D (got " + std::to_string(k) + ")");
  if (!m.simply_connected) throw PreconditionError("mesh '" + m.name + "' is not simply connected; exactness is not checked");
  ComplexReport rep;
  rep.mesh = m.name;
  rep.dim = 3;
  rep.degree = k;
  Spaces3D vert = build_spaces_3d(m, Family::vert, k);
  Spaces3D edge = build_spaces_3d(m, Family::edge, k - 1);
  Spaces3D face = build_spaces_3d(m, Family::face, k - 2);
  Spaces3D elem = build_spaces_3d(m, Family::elem, k - 3);
  if (fault == Fault::sign_flip) rep.fault_injected = inject_sign_flip(face.map) || inject_sign_flip(edge.map);

  const TransferMatrix curl = transfer_curl_3d(edge, face);
  const TransferMatrix div = transfer_div_3d(face, elem);
  const PolynomialGradients pg = polynomial_gradients_3d(m, vert, edge);

  ComplexSequence s;
  s.name = "grad-curl-div";
  s.spaces = {"R", detail::space_name("V^vert", k), detail::space_name("V^edge", k - 1), detail::space_name("V^face", k - 2),
              detail::space_name("P", k - 3)};
  s.dims = {1, vert.map.size, edge.map.size, face.map.size, elem.map.size};
  ComplexLink g;
  g.op = "grad";
  g.from = s.spaces[1];
  g.to = s.spaces[2];
  g.rows = pg.edge.rows();
  g.cols = pg.edge.cols();
  g.rank = numerical_rank(pg.edge);
  g.kernel_dim = g.cols - g.rank;
  g.note = "assembled on the polynomial subspace P_" + std::to_string(k) + " only";
  s.links = {g, detail::make_link(curl, s.spaces[2], s.spaces[3]), detail::make_link(div, s.spaces[3], s.spaces[4])};
  s.euler = static_cast<long>(s.dims[1] - s.dims[2] + s.dims[3] - s.dims[4]);

  const Index rc = s.links[1].rank, rd = s.links[2].rank;
  s.checks.push_back(detail::check_eq("kernel is constants (polynomials)", g.kernel_dim, 1, "dim ker grad on P_k"));
  s.checks.push_back(detail::check_le("composition curl o grad (polynomials)", detail::composition_residual(curl.matrix, pg.edge),
                                      kCompositionTolerance));
  s.checks.push_back(detail::check_le("composition div o curl", detail::composition_residual(div.matrix, curl.matrix),
                                      kCompositionTolerance));
  s.checks.push_back(detail::check_eq("exact at " + s.spaces[3], rc, s.dims[3] - rd, "rank curl = dim ker div"));
  s.checks.push_back(detail::check_eq("exact at " + s.spaces[2], s.dims[2] - rc, s.dims[1] - 1,
                                      "dim ker curl = dim V^vert - 1 (dimension identity)"));
  s.checks.push_back(detail::check_eq("surjective div", rd, s.dims[4], "rank = target dim"));
  s.checks.push_back(detail::check_eq("euler", s.euler, 1, "alternating sum of dimensions"));
  s.checks.push_back(detail::check_le("assembly", std::max(curl.discrepancy, div.discrepancy), kAssemblyTolerance,
                                      "shared rows agree between cells"));
  rep.sequences.push_back(std::move(s));
  return rep;
}

inline ComplexReport verify_complex(const PolytopalMesh& m, int k, Fault fault = Fault::none) {
  return std::visit([&](const auto& mesh) { return verify_complex(mesh, k, fault); }, m);
}

inline nlohmann::ordered_json to_json(const ComplexReport& r) {
  nlohmann::ordered_json j;
  j["mesh"] = r.mesh;
  j["dim"] = r.dim;
  j["k"] = r.degree;
  j["fault_injected"] = r.fault_injected;
  j["pass"] = r.pass();
  j["sequences"] = nlohmann::ordered_json::array();
  for (const auto& s : r.sequences) {
    nlohmann::ordered_json js;
    js["name"] = s.name;
    js["spaces"] = s.spaces;
    js["dims"] = s.dims;
    js["euler"] = s.euler;
    js["links"] = nlohmann::ordered_json::array();
    for (const auto& l : s.links) {
      nlohmann::ordered_json jl;
      jl["op"] = l.op;
      jl["from"] = l.from;
      jl["to"] = l.to;
      jl["rows"] = l.rows;
      jl["cols"] = l.cols;
      jl["rank"] = l.rank;
      jl["kernel_dim"] = l.kernel_dim;
      jl["assembly_discrepancy"] = l.discrepancy;
      if (!l.note.empty()) jl["note"] = l.note;
      js["links"].push_back(jl);
    }
    js["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : s.checks)
      js["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"tolerance", c.tolerance}, {"detail", c.detail}});
    js["pass"] = s.pass();
    j["sequences"].push_back(js);
  }
  return j;
}

}  // namespace vem
