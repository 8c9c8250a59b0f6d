#include "common.hpp"

#include <cmath>
#include <numbers>

using namespace vem;
using vem::test::mesh2;
using vem::test::mesh3;

TEST(EdgeMoments, Examples) {
  const Mesh2D m = mesh2("unit_square");
  const PolygonEdge& e = m.elements[0].edges[0];  // [0,1] x {0}
  const Vector mu = edge_basis_moments(e.length, 3);
  EXPECT_DOUBLE_EQ(mu(0), 1.0);
  EXPECT_DOUBLE_EQ(mu(1), 0.0);
  EXPECT_DOUBLE_EQ(mu(3), 0.0);
  const Vector g = edge_moments(e, MonomialBasis::global(2, 2));
  EXPECT_NEAR(g(0), 1.0, 1e-15);
  EXPECT_NEAR(g(3), 1.0 / 3.0, 1e-15);  // x^2
  EXPECT_NEAR(g(5), 0.0, 1e-15);        // y^2 vanishes on y = 0
}

TEST(EdgeMoments, MatchGaussQuadrature) {
  std::mt19937 rng(2);
  for (const auto& p : test::sample_polygons())
    for (const auto& e : p.edges) {
      const MonomialBasis b = p.basis(5);
      const Vector ref = moments_by_quadrature(segment_quadrature(e.start, e.end, 5), b);
      EXPECT_LE((edge_moments(e, b) - ref).lpNorm<Eigen::Infinity>(), 1e-14);
    }
}

TEST(PolytopeMoments, Examples) {
  const Polygon sq = mesh2("unit_square").elements[0];
  const MomentTable t = polygon_moments(sq, 2);
  const auto global = MonomialBasis::global(2, 1);
  const Matrix g = gram(t, global, global);  // entries int x^a y^b
  EXPECT_NEAR(g(1, 2), 0.25, 1e-15);
  EXPECT_NEAR(t.measure(), 1.0, 1e-15);

  EXPECT_NEAR(polyhedron_moments(mesh3("unit_cube").cells[0], 0).measure(), 1.0, 1e-15);

  const Polygon pent = mesh2("pentagon").elements[0];
  // shoelace oracle
  double shoelace = 0.0;
  for (const auto& e : pent.edges) shoelace += 0.5 * cross2(e.start, e.end);
  EXPECT_NEAR(polygon_moments(pent, 0).measure(), shoelace, 1e-14);
  EXPECT_NEAR(shoelace, 2.5 * std::sin(2 * std::numbers::pi / 5), 1e-14);
}

TEST(PolytopeMoments, ReductionMatchesSubdivision) {
  for (int k = 0; k <= 6; ++k) {
    for (const auto& p : test::sample_polygons()) {
      const MomentTable t = polygon_moments(p, k, false);
      const Vector q = moments_by_quadrature(polygon_quadrature(p, k), t.basis);
      EXPECT_LE((t.values - q).lpNorm<Eigen::Infinity>(), 1e-12 * p.area) << "k=" << k;
    }
    for (const auto& c : test::sample_polyhedra()) {
      const MomentTable t = polyhedron_moments(c, k, false);
      const Vector q = moments_by_quadrature(polyhedron_quadrature(c, k), t.basis);
      EXPECT_LE((t.values - q).lpNorm<Eigen::Infinity>(), 1e-12 * c.volume) << "k=" << k;
    }
  }
}

TEST(PolytopeMoments, SkewedPrismAgainstTetQuadrature) {
  // a sheared, non-axis-aligned prism exercises the face charts
  const auto doc = nlohmann::json::parse(R"({"dim": 3,
    "vertices": [[0,0,0],[1.2,0.1,0],[0.2,0.9,0.1],[0.3,0.2,1],[1.4,0.3,1.1],[0.45,1.05,1.05]],
    "faces": [[0,2,1],[3,4,5],[0,1,4,3],[1,2,5,4],[2,0,3,5]], "cells": [[0,1,2,3,4]]})");
  try {
    const Polyhedron c = std::get<Mesh3D>(mesh_from_json(doc)).cells[0];
    (void)c;
    FAIL() << "faces of this prism are not planar";
  } catch (const GeometryError&) {
  }
  const auto planar = nlohmann::json::parse(R"({"dim": 3,
    "vertices": [[0,0,0],[1.2,0.1,0.2],[0.2,0.9,-0.1],[0.3,0.2,1],[1.5,0.3,1.2],[0.5,1.1,0.9]],
    "faces": [[0,2,1],[3,4,5],[0,1,4,3],[1,2,5,4],[2,0,3,5]], "cells": [[0,1,2,3,4]]})");
  const Polyhedron c = std::get<Mesh3D>(mesh_from_json(planar)).cells[0];
  const MomentTable t = polyhedron_moments(c, 5, false);
  EXPECT_LE((t.values - moments_by_quadrature(polyhedron_quadrature(c, 5), t.basis)).lpNorm<Eigen::Infinity>(),
            1e-12 * c.volume);
}

TEST(Gram, Examples) {
  const Polygon sq = mesh2("unit_square").elements[0];
  const Matrix g0 = gram(sq, sq.basis(0), sq.basis(0));
  ASSERT_EQ(g0.rows(), 1);
  EXPECT_NEAR(g0(0, 0), 1.0, 1e-15);
  const Matrix g1 = gram(sq, sq.basis(1), sq.basis(1));
  EXPECT_NEAR(g1(1, 2), 0.0, 1e-15);
  EXPECT_NEAR(g1(0, 1), 0.0, 1e-15);
  for (const auto& p : test::sample_polygons()) EXPECT_NO_THROW(factor_gram(gram(p, p.basis(3), p.basis(3)), "p"));
  for (const auto& c : test::sample_polyhedra()) EXPECT_NO_THROW(factor_gram(gram(c, c.basis(3), c.basis(3)), "c"));
}

TEST(Gram, MixedFramesAgreeWithQuadrature) {
  const Polygon p = mesh2("voronoi_5").elements[2];
  const MonomialBasis a(2, 2, vec2(1.0, -1.0), 3.0);
  const MonomialBasis b = MonomialBasis::global(2, 3);
  const Matrix g = gram(p, a, b);
  const PointSet ps = polygon_quadrature(p, 5);
  Matrix ref = Matrix::Zero(a.size(), b.size());
  for (std::size_t i = 0; i < ps.points.size(); ++i)
    ref += ps.weights[i] * a.evaluate(ps.points[i]) * b.evaluate(ps.points[i]).transpose();
  EXPECT_LE((g - ref).cwiseAbs().maxCoeff(), 1e-14);
}

namespace {

void check_decomposition(const MomentTable& t, int k) {
  const int d = t.basis.dim();
  const Matrix m = vector_gram(gram_from_moments(t, k, k), d);
  for (auto [range, perp] : {std::pair{SubspaceKind::G, SubspaceKind::Gperp}, std::pair{SubspaceKind::R, SubspaceKind::Rperp}}) {
    const SubspaceBasis a = build_subspace(t, range, k);
    const SubspaceBasis b = build_subspace(t, perp, k);
    EXPECT_EQ(a.dim(), subspace_dim(range, k, d));
    EXPECT_EQ(b.dim(), subspace_dim(perp, k, d));
    EXPECT_EQ(a.dim() + b.dim(), d * dim_poly(k, d));
    if (b.dim() > 0 && a.dim() > 0) {
      const Matrix cross = a.coeffs.transpose() * m * b.coeffs;
      const double scale = std::sqrt((a.coeffs.transpose() * m * a.coeffs).diagonal().maxCoeff() *
                                     (b.coeffs.transpose() * m * b.coeffs).diagonal().maxCoeff());
      EXPECT_LE(cross.cwiseAbs().maxCoeff(), 1e-10 * scale);
    }
    EXPECT_EQ(numerical_rank(hstack(a.coeffs, b.coeffs)), d * dim_poly(k, d));
  }
}

}  // namespace

TEST(Subspaces, DimensionsAndOrthogonality2D) {
  for (const auto& p : test::sample_polygons()) {
    const MomentTable t = polygon_moments(p, 8);
    for (int k = 0; k <= 4; ++k) check_decomposition(t, k);
  }
}

TEST(Subspaces, DimensionsAndOrthogonality3D) {
  for (const auto& c : test::sample_polyhedra()) {
    const MomentTable t = polyhedron_moments(c, 8);
    for (int k = 0; k <= 4; ++k) check_decomposition(t, k);
  }
}

TEST(Subspaces, Examples) {
  const Polygon sq = mesh2("unit_square").elements[0];
  const SubspaceBasis r0 = build_subspace(sq, SubspaceKind::R, 0);
  EXPECT_EQ(r0.dim(), 2);
  EXPECT_EQ(build_subspace(sq, SubspaceKind::Rperp, 0).dim(), 0);
  const Polyhedron cube = mesh3("unit_cube").cells[0];
  EXPECT_EQ(build_subspace(cube, SubspaceKind::Gperp, 1).dim(), 3);
  EXPECT_EQ(build_subspace(cube, SubspaceKind::R, 2).dim(), 26);
  EXPECT_EQ(build_subspace(cube, SubspaceKind::Rperp, 2).dim(), 4);
  EXPECT_EQ(build_subspace(cube, SubspaceKind::G, -1).dim(), 0);
}

TEST(Subspaces, DivIsInjectiveOnRperp) {
  for (const auto& p : test::sample_polygons())
    for (int k = 1; k <= 4; ++k) {
      const SubspaceBasis r = build_subspace(p, SubspaceKind::Rperp, k);
      const Matrix dv = diff_matrix(DiffOp::div, r.basis) * r.coeffs;
      EXPECT_EQ(numerical_rank(dv), r.dim());
    }
  for (const auto& c : test::sample_polyhedra())
    for (int k = 1; k <= 3; ++k) {
      const SubspaceBasis r = build_subspace(c, SubspaceKind::Rperp, k);
      EXPECT_EQ(numerical_rank(diff_matrix(DiffOp::div, r.basis) * r.coeffs), r.dim());
    }
}

TEST(Subspaces, RotIsInjectiveOnGperp) {
  for (const auto& p : test::sample_polygons())
    for (int k = 1; k <= 4; ++k) {
      const SubspaceBasis g = build_subspace(p, SubspaceKind::Gperp, k);
      EXPECT_EQ(numerical_rank(diff_matrix(DiffOp::rot, g.basis) * g.coeffs), g.dim());
    }
}
