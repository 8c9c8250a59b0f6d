#include "common.hpp"

#include <cmath>
#include <functional>

using namespace vem;
using vem::test::mesh2;
using vem::test::rel_err;

namespace {

using Field = std::function<Vector(const Vector&)>;

/// Every DOF functional of `s` applied to f by direct quadrature.
Vector quad_dofs(const LocalSpace2D& s, const Field& f, int degree) {
  const Polygon& p = s.element();
  Vector d = Vector::Zero(s.size());
  const PointSet area = polygon_quadrature(p, degree);
  for (const auto& blk : s.layout().blocks) {
    if (blk.name == "edge") {
      const PolygonEdge& e = p.edges[static_cast<std::size_t>(blk.local)];
      const PointSet seg = segment_quadrature(e.start, e.end, degree);
      for (std::size_t q = 0; q < seg.points.size(); ++q) {
        const Vector& x = seg.points[q];
        const double t = (x - e.midpoint).dot(e.global_tangent()) / e.length;
        double val = f(x)(0);
        if (s.components() == 2) val = f(x).dot(s.family() == Family::face ? e.normal : e.tangent);
        for (Index j = 0; j < blk.size; ++j) d(blk.offset + j) += seg.weights[q] * val * std::pow(t, j) / e.length;
      }
    } else if (blk.name == "vertex") {
      d(blk.offset) = f(p.vertices[static_cast<std::size_t>(blk.local)])(0);
    } else {
      const bool perp = blk.name == "Gperp" || blk.name == "Rperp";
      const SubspaceBasis* sb = perp ? &s.interior_perp() : &s.interior_range();
      for (std::size_t q = 0; q < area.points.size(); ++q) {
        const Vector& x = area.points[q];
        for (Index j = 0; j < blk.size; ++j) {
          double val;
          if (blk.name == "interior") {
            val = f(x)(0) * s.basis(s.family() == Family::vert ? s.degree() - 2 : s.degree()).evaluate(x)(j);
          } else {
            val = f(x).dot(PolyCoeffs(sb->basis, 2, sb->coeffs.col(j))(x));
          }
          d(blk.offset + j) += area.weights[q] * val / p.area;
        }
      }
    }
  }
  return d;
}

Field as_field(const PolyCoeffs& p) {
  return [p](const Vector& x) { return p(x); };
}

PolyCoeffs random_member(std::mt19937& rng, const LocalSpace2D& s, int degree) {
  return test::random_poly(rng, s.basis(degree), s.components());
}

constexpr Family kAll[] = {Family::face, Family::edge, Family::vert, Family::elem};

}  // namespace

TEST(LocalDim2D, Examples) {
  const Polygon sq = mesh2("unit_square").elements[0];
  const Polygon pent = mesh2("pentagon").elements[0];
  EXPECT_EQ(dim_local_2d(Family::face, sq, 1), 9);
  EXPECT_EQ(dim_local_2d(Family::face, pent, 1), 11);
  EXPECT_EQ(dim_local_2d(Family::edge, sq, 2), 17);
  EXPECT_EQ(dim_local_2d(Family::vert, sq, 2), 9);
  EXPECT_EQ(dim_local_2d(Family::elem, sq, 0), 1);
  // Raviart-Thomas-like profile (k, k, k-1)
  EXPECT_EQ(dim_local_2d(Family::face, sq, 1, DegreeProfile{1, 1, 0}), 8 + 2 + 1);
  EXPECT_THROW(dim_local_2d(Family::face, sq, 0), PreconditionError);
  EXPECT_THROW(dim_local_2d(Family::face, sq, 1, DegreeProfile{1, -2, 0}), PreconditionError);
}

TEST(LocalDim2D, LayoutMatchesClosedForm) {
  for (const auto& p : test::sample_polygons())
    for (Family f : kAll)
      for (int k = f == Family::elem ? 0 : 1; k <= 3; ++k) {
        EXPECT_EQ(layout_2d(p, f, k).size(), dim_local_2d(f, p, k)) << to_string(f) << " k=" << k;
        EXPECT_EQ(dim_local_2d(f, p, k, DegreeProfile::standard(k)), dim_local_2d(f, p, k));
      }
}

TEST(Dofs2D, MatchQuadratureOracle) {
  std::mt19937 rng(21);
  for (const auto& p : test::sample_polygons())
    for (Family f : kAll)
      for (int k = 1; k <= 3; ++k) {
        const LocalSpace2D s(p, f, k);
        const PolyCoeffs v = random_member(rng, s, k + 1);
        const Vector d = s.dofs(v);
        EXPECT_LE(rel_err(d, quad_dofs(s, as_field(v), 2 * k + 3)), 1e-12) << to_string(f) << " k=" << k;
      }
}

TEST(Dofs2D, Examples) {
  const Polygon sq = mesh2("unit_square").elements[0];
  const DofVector zero = dofs_of_polynomial(Family::face, sq, 2, PolyCoeffs(sq.basis(1), 2));
  EXPECT_EQ(zero.values.norm(), 0.0);

  // (1,0): edge block is n_x times the P_1 edge moments / |e|
  PolyCoeffs ex(MonomialBasis::global(2, 0), 2);
  ex.coeffs(0) = 1.0;
  const DofVector d = dofs_of_polynomial(Family::face, sq, 1, ex);
  ASSERT_EQ(d.values.size(), 9);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(d.values(2 * i), sq.edges[i].normal(0), 1e-15);
    EXPECT_NEAR(d.values(2 * i + 1), 0.0, 1e-15);
  }
  const LocalSpace2D s1(sq, Family::face, 1);
  const SubspaceBasis& gp = s1.interior_perp();
  const PolyCoeffs g(gp.basis, 2, gp.coeffs.col(0));
  double oracle = 0.0;
  const PointSet ps = polygon_quadrature(sq, 2);
  for (std::size_t q = 0; q < ps.points.size(); ++q) oracle += ps.weights[q] * g(ps.points[q])(0);
  EXPECT_NEAR(d.values(8), oracle, 1e-15);

  // vert, p = 1, k = 2
  const DofVector one = dofs_of_polynomial(Family::vert, sq, 2, PolyCoeffs(sq.basis(0), 1, Vector::Ones(1)));
  ASSERT_EQ(one.values.size(), 9);
  EXPECT_EQ(one.values.head(4), Vector::Ones(4));
  EXPECT_LE((one.values.tail(5) - Vector::Ones(5)).norm(), 1e-15);
}

TEST(DivRot2D, Examples) {
  const Polygon sq = mesh2("unit_square").elements[0];
  const MonomialBasis g = MonomialBasis::global(2, 1);
  auto field = [&](double ax, double ay, double bx, double by) {
    PolyCoeffs v(g, 2);
    v.coeffs << 0, ax, ay, 0, bx, by;  // (ax x + ay y, bx x + by y)
    return v;
  };
  for (int k = 1; k <= 3; ++k) {
    const auto div = [&](const PolyCoeffs& v) {
      return div_from_dofs(sq, k, dofs_of_polynomial(Family::face, sq, k, v));
    };
    const auto rot = [&](const PolyCoeffs& v) {
      return rot_from_dofs(sq, k, dofs_of_polynomial(Family::edge, sq, k, v));
    };
    const Vector x = vec2(0.3, 0.8);
    EXPECT_NEAR(div(field(1, 0, 0, 1))(x)(0), 2.0, 1e-13);
    EXPECT_NEAR(div(field(0, -1, 1, 0))(x)(0), 0.0, 1e-13);
    EXPECT_NEAR(div(field(2, 0, 0, -2))(x)(0), 0.0, 1e-13);
    EXPECT_NEAR(rot(field(0, -1, 1, 0))(x)(0), 2.0, 1e-13);
    EXPECT_NEAR(rot(field(1, 0, 0, 1))(x)(0), 0.0, 1e-13);
    EXPECT_NEAR(rot(field(0, -2, -2, 0))(x)(0), 0.0, 1e-13);
  }
  const DofVector wrong = dofs_of_polynomial(Family::edge, sq, 1, field(1, 0, 0, 1));
  EXPECT_THROW(div_from_dofs(sq, 1, wrong), PreconditionError);
}

TEST(DivRot2D, RandomMembersMatchAnalyticDerivatives) {
  std::mt19937 rng(33);
  for (const auto& p : test::sample_polygons())
    for (int k = 1; k <= 3; ++k) {
      const LocalSpace2D face(p, Family::face, k), edge(p, Family::edge, k);
      const Matrix dm = face.div_matrix(), rm = edge.rot_matrix();
      for (int t = 0; t < 20; ++t) {
        const PolyCoeffs v = random_member(rng, face, k);
        const PolyCoeffs dv = rebase(apply(DiffOp::div, v), p.basis(k - 1));
        const PolyCoeffs rv = rebase(apply(DiffOp::rot, v), p.basis(k - 1));
        EXPECT_LE(rel_err(dm * face.dofs(v), dv.coeffs), 1e-10);
        EXPECT_LE(rel_err(rm * edge.dofs(v), rv.coeffs), 1e-10);
      }
    }
}

TEST(Projector2D, ReproducesPolynomials) {
  std::mt19937 rng(5);
  for (const auto& p : test::sample_polygons())
    for (Family f : {Family::face, Family::edge, Family::elem})
      for (int k = 1; k <= 3; ++k) {
        const LocalSpace2D s(p, f, k);
        const Matrix pi = s.projector();
        for (int t = 0; t < 3; ++t) {
          const PolyCoeffs v = random_member(rng, s, k);
          EXPECT_LE(rel_err(pi * s.dofs(v), v.coeffs), 1e-10) << to_string(f) << " k=" << k;
        }
        PolyCoeffs c(s.basis(0), s.components());
        c.coeffs(0) = 1.0;
        const Vector out = pi * s.dofs(c);
        EXPECT_LE(rel_err(out, rebase(c, s.basis(k)).coeffs), 1e-12);
      }
}

TEST(Projector2D, HarmonicGradientMatchesQuadratureOracle) {
  // v = grad(x^4 - 6x^2y^2 + y^4): div v = rot v = 0 and v.n in P_2 on every
  // edge of the unit square, so v is in the k = 2 face space but is cubic.
  const Polygon sq = mesh2("unit_square").elements[0];
  const Field v = [](const Vector& x) {
    return vec2(4 * std::pow(x(0), 3) - 12 * x(0) * x(1) * x(1), -12 * x(0) * x(0) * x(1) + 4 * std::pow(x(1), 3));
  };
  const LocalSpace2D s(sq, Family::face, 2);
  const Vector d = quad_dofs(s, v, 9);
  const Vector pi = s.projector() * d;

  // oracle: mass-matrix solve with moments from quadrature
  const MonomialBasis b = sq.basis(2);
  const PointSet ps = polygon_quadrature(sq, 9);
  Matrix m = Matrix::Zero(b.size(), b.size());
  Matrix rhs = Matrix::Zero(b.size(), 2);
  for (std::size_t q = 0; q < ps.points.size(); ++q) {
    const Vector phi = b.evaluate(ps.points[q]);
    m += ps.weights[q] * phi * phi.transpose();
    rhs += ps.weights[q] * phi * v(ps.points[q]).transpose();
  }
  const Matrix c = m.ldlt().solve(rhs);
  Vector oracle(2 * b.size());
  oracle << c.col(0), c.col(1);
  EXPECT_LE(rel_err(pi, oracle), 1e-10);
}

TEST(Projector2D, LinearAndIdempotent) {
  std::mt19937 rng(8);
  for (const auto& p : test::sample_polygons())
    for (Family f : {Family::face, Family::edge}) {
      const LocalSpace2D s(p, f, 2);
      const Matrix pi = s.projector();
      const Vector a = test::random_vector(rng, s.size()), b = test::random_vector(rng, s.size());
      EXPECT_LE(rel_err(pi * (2 * a - b), 2 * (pi * a) - pi * b), 1e-12);
      const Vector once = pi * a;
      const Vector twice = pi * s.dofs(PolyCoeffs(s.basis(2), 2, once));
      EXPECT_LE(rel_err(twice, once), 1e-10);
    }
}

TEST(Projector2D, CommutesWithRigidMotions) {
  std::mt19937 rng(13);
  const double theta = 0.7;
  const Vector shift = vec2(2.0, -1.5);
  const double c = std::cos(theta), sn = std::sin(theta);
  Matrix q(2, 2);
  q << c, -sn, sn, c;
  for (const auto& p : test::sample_polygons())
    for (Family f : {Family::face, Family::edge})
      for (int k = 1; k <= 3; ++k) {
        const Polygon pr = p.transformed(theta, shift);
        const LocalSpace2D s(p, f, k), sr(pr, f, k);
        // a field outside the space, so that the projection is not trivial
        const PolyCoeffs v = random_member(rng, s, k + 2);
        const Field moved = [&](const Vector& y) -> Vector { return q * v(q.transpose() * (y - shift)); };
        const PolyCoeffs vr = test::fit_poly(pr.basis(k + 2), 2, moved);
        const PolyCoeffs a(s.basis(k), 2, s.projector() * s.dofs(v));
        const PolyCoeffs b(sr.basis(k), 2, sr.projector() * sr.dofs(vr));
        for (int t = 0; t < 5; ++t) {
          const Vector x = p.centroid + 0.3 * p.diameter * test::random_vector(rng, 2);
          EXPECT_LE((q * a(x) - b(q * x + shift)).norm(), 1e-9 * std::max(1.0, a(x).norm()));
        }
      }
}

TEST(Unisolvence2D, PolynomialDofMatricesHaveFullColumnRank) {
  for (const auto& p : test::sample_polygons())
    for (Family f : kAll)
      for (int k = 1; k <= 3; ++k) {
        const LocalSpace2D s(p, f, k);
        const Vector sv = singular_values(s.dof_matrix(k));
        EXPECT_GT(sv.minCoeff(), 1e-8 * sv.maxCoeff()) << to_string(f) << " k=" << k;
      }
}

TEST(Shadows2D, ZeroBoundaryAndGradientBlocksGiveZeroDivergence) {
  std::mt19937 rng(3);
  for (const auto& p : test::sample_polygons())
    for (int k = 1; k <= 3; ++k) {
      const LocalSpace2D s(p, Family::face, k);
      Vector d = Vector::Zero(s.size());
      const DofBlock& gp = s.layout().block("Gperp");
      d.segment(gp.offset, gp.size) = test::random_vector(rng, gp.size);
      EXPECT_LE(d.size() ? (s.div_matrix() * d).norm() : 0.0, 1e-13);
    }
}

TEST(Shadows2D, PolynomialsSplitIntoGradientAndPerp) {
  std::mt19937 rng(4);
  for (const auto& p : test::sample_polygons())
    for (int k = 0; k <= 3; ++k) {
      const SubspaceBasis g = build_subspace(p, SubspaceKind::G, k);
      const SubspaceBasis gp = build_subspace(p, SubspaceKind::Gperp, k);
      const PolyCoeffs v = test::random_poly(rng, p.basis(k), 2);
      const Matrix b = hstack(g.coeffs, gp.coeffs);
      const Vector a = b.colPivHouseholderQr().solve(v.coeffs);
      // the G part is h grad(phi) with phi in P_{k+1}
      Vector phi = Vector::Zero(dim_poly(k + 1, 2));
      phi.tail(g.dim()) = p.diameter * a.head(g.dim());
      const PolyCoeffs grad_phi = apply(DiffOp::grad, PolyCoeffs(p.basis(k + 1), 1, phi));
      const Vector perp = gp.coeffs * a.tail(gp.dim());
      EXPECT_LE(rel_err(rebase(grad_phi, p.basis(k)).coeffs + perp, v.coeffs), 1e-10);
    }
}

TEST(EdgeTrace2D, VertexFamilyRecoversRestriction) {
  std::mt19937 rng(9);
  for (const auto& p : test::sample_polygons())
    for (int k = 1; k <= 3; ++k) {
      const LocalSpace2D s(p, Family::vert, k);
      const PolyCoeffs v = random_member(rng, s, k);
      const Vector d = s.dofs(v);
      for (int i = 0; i < p.num_edges(); ++i) {
        const PolygonEdge& e = p.edges[static_cast<std::size_t>(i)];
        const Vector tr = s.edge_trace(i) * d;
        for (double t : {-0.5, -0.1, 0.3, 0.5}) {
          const double val = e.basis(k).evaluate(Vector::Constant(1, t * e.length)).dot(tr);
          EXPECT_NEAR(val, v(e.chart().map(Vector::Constant(1, t * e.length)))(0), 1e-12);
        }
      }
    }
}

TEST(Global2D, Examples) {
  EXPECT_EQ(assemble_global_2d(mesh2("squares_2x2"), Family::face, 1).size, 28);
  EXPECT_EQ(assemble_global_2d(mesh2("unit_square"), Family::edge, 1).size, 9);
  EXPECT_EQ(assemble_global_2d(mesh2("squares_2x2"), Family::vert, 2).size, 25);
}

TEST(Global2D, CountsMatchClosedForms) {
  for (const auto& name : test::meshes_2d()) {
    const Mesh2D m = mesh2(name);
    for (Family f : kAll)
      for (int k = 1; k <= 3; ++k) {
        const GlobalDofMap g = assemble_global_2d(m, f, k);
        EXPECT_EQ(g.size, g.closed_form) << name << " " << to_string(f) << " k=" << k;
      }
  }
}

TEST(Global2D, SharedNormalTracesAgree) {
  // a global polynomial field has consistent local DOFs on both sides of an edge
  std::mt19937 rng(12);
  const Mesh2D m = mesh2("voronoi_5");
  for (Family f : {Family::face, Family::edge}) {
    const GlobalDofMap g = assemble_global_2d(m, f, 2);
    const PolyCoeffs v = test::random_poly(rng, MonomialBasis::global(2, 2), 2);
    Vector global = Vector::Zero(g.size);
    for (std::size_t e = 0; e < m.elements.size(); ++e) {
      const Vector d = LocalSpace2D(m.elements[e], f, 2).dofs(v);
      for (std::size_t i = 0; i < d.size(); ++i) global(g.local_to_global[e][i]) = g.signs[e][i] * d(i);
    }
    for (std::size_t e = 0; e < m.elements.size(); ++e)
      EXPECT_LE(rel_err(g.gather(static_cast<int>(e), global), LocalSpace2D(m.elements[e], f, 2).dofs(v)), 1e-13);
  }
}

TEST(Compatibility2D, Examples) {
  const Polygon sq = mesh2("unit_square").elements[0];
  const int k = 1;
  const Vector none = Vector::Zero(4 * (k + 1));
  EXPECT_EQ(compatibility_residual_2d(sq, k, none, PolyCoeffs(sq.basis(0), 1)), 0.0);
  EXPECT_NEAR(compatibility_residual_2d(sq, k, none, PolyCoeffs(sq.basis(0), 1, Vector::Ones(1))), 1.0, 1e-15);

  PolyCoeffs v(MonomialBasis::global(2, 1), 2);
  v.coeffs << 0, 1, 0, 0, 0, 1;
  const Vector flux = dofs_of_polynomial(Family::face, sq, k, v).values.head(4 * (k + 1));
  EXPECT_NEAR(compatibility_residual_2d(sq, k, flux, PolyCoeffs(sq.basis(0), 1, Vector::Constant(1, 2.0))), 0.0, 1e-14);
}
