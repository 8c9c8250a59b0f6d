// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include "vem/vem.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef VEM_MESH_DIR
#define VEM_MESH_DIR "data/meshes"
#endif

using namespace vem;

namespace {

std::string path(const std::string& name) { return std::string(VEM_MESH_DIR) + "/" + name + ".json"; }
Mesh2D mesh2(const std::string& n) { return std::get<Mesh2D>(load_mesh(path(n))); }
Mesh3D mesh3(const std::string& n) { return std::get<Mesh3D>(load_mesh(path(n))); }

std::vector<Polygon> polygons() {
  std::vector<Polygon> out;
  for (const char* n : {"unit_square", "squares_2x2", "voronoi_5", "pentagon"})
    for (const auto& e : mesh2(n).elements) out.push_back(e);
  return out;
}

std::vector<Polyhedron> polyhedra() {
  std::vector<Polyhedron> out;
  for (const char* n : {"unit_cube", "two_cubes", "prism"})
    for (const auto& c : mesh3(n).cells) out.push_back(c);
  return out;
}

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }
double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

std::mt19937 rng(2024);
PolyCoeffs random_poly(const MonomialBasis& b, int comps) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PolyCoeffs p(b, comps);
  for (Index i = 0; i < p.coeffs.size(); ++i) p.coeffs(i) = u(rng);
  return p;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// 1 ---------------------------------------------------------------------------
Outcome dimension_ledger() {
  Outcome o;
  int mismatches = 0;
  for (const auto& p : polygons())
    for (Family f : {Family::face, Family::edge, Family::vert, Family::elem})
      for (int k = f == Family::elem ? 0 : 1; k <= 3; ++k) mismatches += layout_2d(p, f, k).size() != dim_local_2d(f, p, k);
  for (const auto& c : polyhedra())
    for (Family f : {Family::face, Family::edge, Family::vert, Family::elem})
      for (int k = f == Family::elem ? 0 : 1; k <= 3; ++k) mismatches += layout_3d(c, f, k).size() != dim_local_3d(f, c, k);
  const Polygon sq = mesh2("unit_square").elements[0], pent = mesh2("pentagon").elements[0];
  const Polyhedron cube = mesh3("unit_cube").cells[0], prism = mesh3("prism").cells[0];
  const std::vector<std::pair<long, long>> named = {
      {layout_2d(sq, Family::face, 1).size(), 9},       {layout_2d(pent, Family::face, 1).size(), 11},
      {layout_3d(cube, Family::face, 1).size(), 21},    {layout_3d(prism, Family::face, 1).size(), 18},
      {beta_k(cube, 1), 30},                            {layout_3d(cube, Family::edge, 1).size(), 31},
      {beta_k(cube, 2), 66},                            {layout_3d(cube, Family::edge, 2).size(), 73},
      {layout_3d(cube, Family::vert, 2).size(), 27}};
  for (const auto& [got, want] : named) mismatches += got != want;
  o.pass = mismatches == 0;
  o.detail = std::to_string(mismatches) + " mismatches";
  return o;
}

// 2 ---------------------------------------------------------------------------
Outcome decompositions() {
  int bad = 0;
  double cross = 0.0;
  auto check = [&](const MomentTable& t, int d, int k) {
    const auto pi = [d](int n) { return dim_poly_or_zero(n, d); };
    const SubspaceBasis g = build_subspace(t, SubspaceKind::G, k), gp = build_subspace(t, SubspaceKind::Gperp, k);
    const SubspaceBasis r = build_subspace(t, SubspaceKind::R, k), rp = build_subspace(t, SubspaceKind::Rperp, k);
    bad += g.dim() + gp.dim() != d * pi(k);
    bad += r.dim() + rp.dim() != d * pi(k);
    bad += g.dim() != pi(k + 1) - 1;
    bad += r.dim() != (d == 2 ? pi(k + 1) - 1 : 3 * pi(k + 1) - (pi(k + 2) - 1));
    bad += numerical_rank(hstack(g.coeffs, gp.coeffs)) != d * pi(k);
    bad += numerical_rank(hstack(r.coeffs, rp.coeffs)) != d * pi(k);
    const Matrix m = vector_gram(gram_from_moments(t, k, k), d);
    auto ortho = [&](const Matrix& a, const Matrix& b) {
      if (a.cols() == 0 || b.cols() == 0) return 0.0;
      const Matrix c = a.transpose() * m * b;
      const double s = std::sqrt((a.transpose() * m * a).diagonal().maxCoeff() * (b.transpose() * m * b).diagonal().maxCoeff());
      return c.cwiseAbs().maxCoeff() / s;
    };
    cross = std::max({cross, ortho(g.coeffs, gp.coeffs), ortho(r.coeffs, rp.coeffs)});
  };
  for (const auto& p : polygons())
    for (int k = 0; k <= 4; ++k) check(polygon_moments(p, 2 * k), 2, k);
  for (const auto& c : polyhedra())
    for (int k = 0; k <= 4; ++k) check(polyhedron_moments(c, 2 * k), 3, k);
  std::ostringstream os;
  os << bad << " dimension mismatches, max cross term " << cross;
  return {bad == 0 && cross < 1e-10, os.str()};
}

// 3 ---------------------------------------------------------------------------
Outcome polynomial_sequences() {
  int bad = 0;
  for (int d : {2, 3})
    for (int r = d == 2 ? 1 : 2; r <= 5; ++r) {
      const SequenceReport s = sequence_ranks(r, d);
      for (const auto& seq : s.sequences) {
        bad += !seq.exact || !seq.constants_kernel;
        // rank-nullity at every interior space, surjective last map
        for (std::size_t i = 0; i + 1 < seq.links.size(); ++i) bad += seq.links[i].rank != seq.links[i + 1].kernel_dim;
        bad += seq.links.back().rank != seq.links.back().rows;
        bad += seq.links.front().kernel_dim != 1;
      }
    }
  return {bad == 0, std::to_string(bad) + " failed equalities, r <= 5"};
}

// 4 ---------------------------------------------------------------------------
Outcome projector_reproduction() {
  double worst = 0.0;
  for (const auto& p : polygons())
    for (Family f : {Family::face, Family::edge})
      for (int k = 1; k <= 3; ++k) {
        const LocalSpace2D s(p, f, k);
        const Matrix d = s.dof_matrix(k);
        worst = std::max(worst, rel(Matrix(s.projector() * d), Matrix::Identity(d.cols(), d.cols())));
      }
  for (const auto& c : polyhedra())
    for (int k = 1; k <= 3; ++k) {
      const LocalSpace3D s(c, Family::face, k);
      const Matrix d = s.dof_matrix(k);
      worst = std::max(worst, rel(Matrix(s.projector() * d), Matrix::Identity(d.cols(), d.cols())));
      const LocalSpace3D e(c, Family::edge, k);
      const Matrix de = e.dof_matrix(k);
      worst = std::max(worst, rel(Matrix(EnhancementOperator(e).projector() * de), Matrix::Identity(de.cols(), de.cols())));
    }
  std::ostringstream os;
  os << "max relative error " << worst;
  return {worst < 1e-10, os.str()};
}

// 5 ---------------------------------------------------------------------------
Outcome harmonic_gradient() {
  // v = grad(x^4 - 6x^2y^2 + y^4) on the unit square, k = 2 face space
  const Polygon sq = mesh2("unit_square").elements[0];
  auto v = [](const Vector& x) {
    return vec2(4 * std::pow(x(0), 3) - 12 * x(0) * x(1) * x(1), -12 * x(0) * x(0) * x(1) + 4 * std::pow(x(1), 3));
  };
  const LocalSpace2D s(sq, Family::face, 2);
  const int q = 10;
  Vector d = Vector::Zero(s.size());
  const PointSet area = polygon_quadrature(sq, q);
  for (const auto& blk : s.layout().blocks) {
    if (blk.name == "edge") {
      const PolygonEdge& e = sq.edges[static_cast<std::size_t>(blk.local)];
      const PointSet seg = segment_quadrature(e.start, e.end, q);
      for (Index j = 0; j < blk.size; ++j)
        d(blk.offset + j) = seg.integrate([&](const Vector& x) {
                              return v(x).dot(e.normal) * std::pow((x - e.midpoint).dot(e.global_tangent()) / e.length, j);
                            }) / e.length;
    } else {
      const SubspaceBasis& sb = blk.name == "G" ? s.interior_range() : s.interior_perp();
      for (Index j = 0; j < blk.size; ++j) {
        const PolyCoeffs w(sb.basis, 2, sb.coeffs.col(j));
        d(blk.offset + j) = area.integrate([&](const Vector& x) { return v(x).dot(w(x)); }) / sq.area;
      }
    }
  }
  const Vector pi = s.projector() * d;
  const MonomialBasis b = sq.basis(2);
  const Index n = b.size();
  Matrix m = Matrix::Zero(2 * n, 2 * n);
  Vector rhs = Vector::Zero(2 * n);
  for (std::size_t i = 0; i < area.points.size(); ++i) {
    const Vector phi = b.evaluate(area.points[i]);
    const Vector val = v(area.points[i]);
    for (int c = 0; c < 2; ++c) {
      m.block(c * n, c * n, n, n) += area.weights[i] * phi * phi.transpose();
      rhs.segment(c * n, n) += area.weights[i] * val(c) * phi;
    }
  }
  const Vector oracle = m.ldlt().solve(rhs);
  const double err = (pi - oracle).norm() / oracle.norm();
  std::ostringstream os;
  os << "relative difference " << err;
  return {err < 1e-10, os.str()};
}

// 6 ---------------------------------------------------------------------------
Outcome dof_recovery() {
  double worst = 0.0;
  for (const auto& p : polygons())
    for (int k = 1; k <= 3; ++k) {
      const LocalSpace2D face(p, Family::face, k), edge(p, Family::edge, k);
      for (int i = 0; i < 20; ++i) {
        const PolyCoeffs v = random_poly(p.basis(k), 2);
        const PolyCoeffs dv = apply(DiffOp::div, v);
        worst = std::max(worst, rel(rebase(div_from_dofs(face, face.dofs(v)), dv.basis).coeffs, dv.coeffs));
        const PolyCoeffs gx = apply(DiffOp::grad, v.component(1)), gy = apply(DiffOp::grad, v.component(0));
        const PolyCoeffs rv = add(gx.component(0), gy.component(1), -1.0);
        worst = std::max(worst, rel(rebase(rot_from_dofs(edge, edge.dofs(v)), rv.basis).coeffs, rv.coeffs));
      }
    }
  for (const auto& c : polyhedra())
    for (int k = 1; k <= 3; ++k) {
      const LocalSpace3D face(c, Family::face, k);
      for (int i = 0; i < 20; ++i) {
        const PolyCoeffs v = random_poly(c.basis(k), 3);
        const PolyCoeffs dv = apply(DiffOp::div, v);
        worst = std::max(worst, rel(rebase(div_from_dofs_3d(face, face.dofs(v)), dv.basis).coeffs, dv.coeffs));
      }
    }
  std::ostringstream os;
  os << "max relative error " << worst;
  return {worst < 1e-10, os.str()};
}

// 7 ---------------------------------------------------------------------------
Outcome unisolvence() {
  double worst = 1.0;
  auto ratio = [](const Matrix& d) {
    const Vector s = singular_values(d);
    return s(s.size() - 1) / s(0);
  };
  for (const auto& p : polygons())
    for (Family f : {Family::face, Family::edge, Family::vert, Family::elem})
      for (int k = f == Family::elem ? 0 : 1; k <= 3; ++k) worst = std::min(worst, ratio(LocalSpace2D(p, f, k).dof_matrix(k)));
  for (const auto& c : polyhedra())
    for (Family f : {Family::face, Family::edge, Family::vert, Family::elem})
      for (int k = f == Family::elem ? 0 : 1; k <= 2; ++k) worst = std::min(worst, ratio(LocalSpace3D(c, f, k).dof_matrix(k)));
  std::ostringstream os;
  os << "min sigma_min/sigma_max " << worst;
  return {worst > 1e-8, os.str()};
}

// 8 ---------------------------------------------------------------------------
Outcome enhancement() {
  bool identical = true;
  double moments = 0.0;
  for (const auto& c : polyhedra())
    for (int k = 1; k <= 3; ++k) {
      const LocalSpace3D s(c, Family::edge, k);
      const EnhancementOperator e(s);
      const PolyCoeffs v = random_poly(c.basis(k), 3);
      const Vector d = s.dofs(v);
      Vector info(d.size() + 7);
      info << d, Vector::Constant(7, 0.25);
      const Vector a = e.apply(info);
      info.tail(7) = Vector::LinSpaced(7, -3.0, 5.0);
      const Vector b = e.apply(info);
      identical = identical && a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
      // moments of v against the monomials of degree k, exact integration
      const Matrix g = vector_gram(gram_from_moments(polyhedron_moments(c, 2 * k), k, k), 3);
      moments = std::max(moments, rel(Vector(e.moments(d)), Vector(g * rebase(v, c.basis(k)).coeffs)) +
                                      rel(Vector(g * e.projector() * d), Vector(g * rebase(v, c.basis(k)).coeffs)));
    }
  const Index rort = EnhancementOperator(LocalSpace3D(mesh3("unit_cube").cells[0], Family::edge, 2)).rort_dim();
  std::ostringstream os;
  os << "bit-identical " << (identical ? "yes" : "no") << ", moment error " << moments << ", dim Rort(cube, 2) = " << rort;
  return {identical && moments < 1e-10 && rort == 23, os.str()};
}

// 9 ---------------------------------------------------------------------------
Outcome complex_exactness() {
  struct Case {
    bool three_d;
    const char* mesh;
    int k;
    std::vector<Index> dims;
  };
  const std::vector<Case> cases = {{false, "unit_square", 2, {1, 9, 9, 1}},
                                   {false, "squares_2x2", 2, {1, 25, 28, 4}},
                                   {true, "unit_cube", 3, {1, 54, 73, 21, 1}},
                                   {true, "prism", 3, {1, 43, 59, 18, 1}}};
  int bad = 0;
  for (const auto& c : cases) {
    const ComplexReport r = c.three_d ? verify_complex(mesh3(c.mesh), c.k) : verify_complex(mesh2(c.mesh), c.k);
    for (const auto& s : r.sequences) {
      bad += !s.pass();
      bad += s.dims != c.dims;
      bad += s.euler != 1;
      bad += s.links.back().rank != s.dims.back();
    }
  }
  return {bad == 0, std::to_string(bad) + " failed checks over square, 2x2, cube, prism"};
}

// 10 --------------------------------------------------------------------------
Outcome green_identities() {
  double worst = 0.0;
  for (const auto& c : polyhedra())
    for (int i = 0; i < 20; ++i) {
      const GreenResiduals g = green_residuals(c, random_poly(c.basis(1 + i % 3), 3), random_poly(c.basis(1 + (i / 3) % 3), 3));
      worst = std::max({worst, g.curl, g.curlcurl});
    }
  std::ostringstream os;
  os << "max relative residual " << worst;
  return {worst < 1e-10, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"dimension ledger", dimension_ledger},
      {"decomposition dims and orthogonality", decompositions},
      {"polynomial sequence exactness", polynomial_sequences},
      {"projector reproduction", projector_reproduction},
      {"beyond-polynomial projection", harmonic_gradient},
      {"DOF-only div/rot recovery", dof_recovery},
      {"unisolvence", unisolvence},
      {"enhancement contract", enhancement},
      {"complex exactness", complex_exactness},
      {"Green identities", green_identities}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %2zu %-38s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
