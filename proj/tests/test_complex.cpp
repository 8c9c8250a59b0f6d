#include "common.hpp"

#include <cmath>

using namespace vem;
using vem::test::mesh2;
using vem::test::mesh3;

namespace {

template <class Spaces>
Vector global_dofs(const Spaces& s, const PolyCoeffs& p) {
  std::vector<Matrix> local;
  for (const auto& l : s.local) local.push_back(l->dofs(p));
  return detail::gather_global(s.map, local).col(0);
}

PolyCoeffs poly2(std::initializer_list<std::pair<int, double>> terms, int comps, int degree) {
  // coefficients in the global (unscaled) monomials about the origin
  PolyCoeffs p(MonomialBasis(2, degree, Vector::Zero(2), 1.0), comps);
  for (auto [i, c] : terms) p.coeffs(i) = c;
  return p;
}

PolyCoeffs poly3(std::initializer_list<std::pair<int, double>> terms, int comps, int degree) {
  PolyCoeffs p(MonomialBasis(3, degree, Vector::Zero(3), 1.0), comps);
  for (auto [i, c] : terms) p.coeffs(i) = c;
  return p;
}

Mesh2D rotated(const Mesh2D& m) {
  std::vector<Vector> v;
  for (const auto& x : m.vertices) {
    Vector r(2);
    r << -x(1), x(0);
    v.push_back(r);
  }
  std::vector<std::vector<int>> loops;
  for (const auto& p : m.elements) loops.push_back(p.vertex_ids);
  return build_mesh_2d(v, loops, m.simply_connected, m.name + "_rot");
}

}  // namespace

// grad -----------------------------------------------------------------------

TEST(Grad2D, ConstantsInKernel) {
  for (const auto& name : vem::test::meshes_2d()) {
    const Mesh2D m = mesh2(name);
    const Spaces2D v = build_spaces_2d(m, Family::vert, 2);
    const TransferMatrix t = transfer_grad_2d(v, build_spaces_2d(m, Family::edge, 1));
    const Vector one = global_dofs(v, poly2({{0, 1.0}}, 1, 0));
    EXPECT_LT((t.matrix * one).norm(), 1e-12 * std::max(1.0, t.matrix.norm())) << name;
  }
}

TEST(Grad2D, LinearFunctionGivesItsGradient) {
  const Mesh2D m = mesh2("squares_2x2");
  for (int k : {2, 3}) {
    const Spaces2D v = build_spaces_2d(m, Family::vert, k);
    const Spaces2D e = build_spaces_2d(m, Family::edge, k - 1);
    const TransferMatrix t = transfer_grad_2d(v, e);
    // phi = x, grad phi = (1, 0)
    const Vector got = t.matrix * global_dofs(v, poly2({{1, 1.0}}, 1, 1));
    const Vector want = global_dofs(e, poly2({{0, 1.0}}, 2, 0));
    EXPECT_LT(test::rel_err(got, want), 1e-12) << k;
  }
}

TEST(Grad2D, PolynomialGradientsMatchDirectDofs) {
  std::mt19937 rng(11);
  for (const auto& name : vem::test::meshes_2d()) {
    const Mesh2D m = mesh2(name);
    for (int k : {2, 3}) {
      const Spaces2D v = build_spaces_2d(m, Family::vert, k);
      const Spaces2D e = build_spaces_2d(m, Family::edge, k - 1);
      const Spaces2D f = build_spaces_2d(m, Family::face, k - 1);
      const TransferMatrix tg = transfer_grad_2d(v, e);
      const TransferMatrix tb = transfer_grad_2d(v, f);
      const PolyCoeffs phi = test::random_poly(rng, MonomialBasis(2, k, Vector::Zero(2), 1.0), 1);
      const PolyCoeffs g = apply(DiffOp::grad, phi);
      PolyCoeffs b(g.basis, 2);  // brot phi = (d_y phi, -d_x phi)
      const Index n = g.basis.size();
      b.coeffs.head(n) = g.coeffs.tail(n);
      b.coeffs.tail(n) = -g.coeffs.head(n);
      const Vector d = global_dofs(v, phi);
      EXPECT_LT(test::rel_err(tg.matrix * d, global_dofs(e, g)), 1e-11) << name << " k=" << k;
      EXPECT_LT(test::rel_err(tb.matrix * d, global_dofs(f, b)), 1e-11) << name << " k=" << k;
    }
  }
}

TEST(Grad2D, RankOnSquare) {
  const TransferMatrix t = transfer_grad_2d(mesh2("unit_square"), 2);
  EXPECT_EQ(t.matrix.cols(), 9);
  EXPECT_EQ(numerical_rank(t.matrix), 8);
  EXPECT_EQ(t.op, "grad");
  EXPECT_EQ(t.source_family, Family::vert);
  EXPECT_EQ(t.target_family, Family::edge);
  EXPECT_FALSE(t.provenance.empty());
}

// rot / div ------------------------------------------------------------------

TEST(Rot2D, RotationFieldGivesTwo) {
  for (const auto& name : vem::test::meshes_2d()) {
    const Mesh2D m = mesh2(name);
    const Spaces2D e = build_spaces_2d(m, Family::edge, 1);
    const Spaces2D p = build_spaces_2d(m, Family::elem, 0);
    const TransferMatrix t = transfer_last_2d(e, p);
    // v = (-y, x)
    const Vector r = t.matrix * global_dofs(e, poly2({{2, -1.0}, {3 + 1, 1.0}}, 2, 1));
    EXPECT_LT((r - 2.0 * Vector::Ones(r.size())).cwiseAbs().maxCoeff(), 1e-12) << name;
  }
}

TEST(Rot2D, CompositionAndRankOnSquare) {
  const Mesh2D m = mesh2("unit_square");
  const TransferMatrix g = transfer_grad_2d(m, 2);
  const TransferMatrix r = transfer_rot_2d(m, 2);
  EXPECT_LT((r.matrix * g.matrix).norm(), 1e-10 * r.matrix.norm() * g.matrix.norm());
  EXPECT_EQ(r.matrix.rows(), 1);
  EXPECT_EQ(numerical_rank(r.matrix), 1);
}

TEST(Div2D, PositionFieldGivesTwo) {
  const Mesh2D m = mesh2("voronoi_5");
  const Spaces2D f = build_spaces_2d(m, Family::face, 1);
  const TransferMatrix t = transfer_last_2d(f, build_spaces_2d(m, Family::elem, 0));
  const Vector r = t.matrix * global_dofs(f, poly2({{1, 1.0}, {3 + 2, 1.0}}, 2, 1));
  EXPECT_LT((r - 2.0 * Vector::Ones(r.size())).cwiseAbs().maxCoeff(), 1e-12);
}

// curl / div 3D --------------------------------------------------------------

TEST(Curl3D, GradientsInKernel) {
  for (const auto& name : vem::test::meshes_3d()) {
    const Mesh3D m = mesh3(name);
    const Spaces3D v = build_spaces_3d(m, Family::vert, 3);
    const Spaces3D e = build_spaces_3d(m, Family::edge, 2);
    const Spaces3D f = build_spaces_3d(m, Family::face, 1);
    const TransferMatrix c = transfer_curl_3d(e, f);
    const PolynomialGradients pg = polynomial_gradients_3d(m, v, e);
    EXPECT_LT((c.matrix * pg.edge).norm(), 1e-10 * std::max(1.0, c.matrix.norm() * pg.edge.norm())) << name;
    EXPECT_EQ(numerical_rank(pg.edge), dim_poly(3, 3) - 1) << name;
  }
}

TEST(Curl3D, RotationFieldOnCube) {
  const Mesh3D m = mesh3("unit_cube");
  const Spaces3D e = build_spaces_3d(m, Family::edge, 2);
  const Spaces3D f = build_spaces_3d(m, Family::face, 1);
  const TransferMatrix c = transfer_curl_3d(e, f);
  // v = (-y, x, 0), curl v = (0, 0, 2)
  const Vector got = c.matrix * global_dofs(e, poly3({{2, -1.0}, {4 + 1, 1.0}}, 3, 1));
  const Polyhedron& cube = m.cells[0];
  const LocalSpace3D& fl = *f.local[0];
  for (int i = 0; i < cube.num_faces(); ++i) {
    const DofBlock& blk = fl.layout().block("face", i);
    const Index g = f.map.local_to_global[0][static_cast<std::size_t>(blk.offset)];
    const double sign = f.map.signs[0][static_cast<std::size_t>(blk.offset)];
    const Vector n = cube.outward_normal(i);
    EXPECT_NEAR(sign * got(g), 2.0 * n(2), 1e-12) << "face " << i;
  }
}

TEST(Curl3D, PolynomialCurlMatchesDirectDofs) {
  std::mt19937 rng(5);
  for (const auto& name : vem::test::meshes_3d()) {
    const Mesh3D m = mesh3(name);
    for (int k : {3, 4}) {
      if (k == 4 && name != "unit_cube") continue;
      const Spaces3D e = build_spaces_3d(m, Family::edge, k - 1);
      const Spaces3D f = build_spaces_3d(m, Family::face, k - 2);
      const TransferMatrix c = transfer_curl_3d(e, f);
      const PolyCoeffs v = test::random_poly(rng, MonomialBasis(3, k - 1, Vector::Zero(3), 1.0), 3);
      const Vector got = c.matrix * global_dofs(e, v);
      EXPECT_LT(test::rel_err(got, global_dofs(f, apply(DiffOp::curl, v))), 1e-10) << name << " k=" << k;
      EXPECT_LT(c.discrepancy, 1e-10) << name;
    }
  }
}

TEST(Div3D, PositionFieldGivesThree) {
  const Mesh3D m = mesh3("prism");
  const Spaces3D f = build_spaces_3d(m, Family::face, 1);
  const TransferMatrix t = transfer_div_3d(f, build_spaces_3d(m, Family::elem, 0));
  const Vector r = t.matrix * global_dofs(f, poly3({{1, 1.0}, {4 + 2, 1.0}, {8 + 3, 1.0}}, 3, 1));
  EXPECT_LT((r - 3.0 * Vector::Ones(r.size())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Div3D, CompositionAndRankOnCube) {
  const Mesh3D m = mesh3("unit_cube");
  const TransferMatrix c = transfer_curl_3d(m, 3);
  const TransferMatrix d = transfer_div_3d(m, 3);
  EXPECT_LT((d.matrix * c.matrix).norm(), 1e-10 * d.matrix.norm() * c.matrix.norm());
  EXPECT_EQ(d.matrix.rows(), 1);
  EXPECT_EQ(numerical_rank(d.matrix), 1);
}

// reports --------------------------------------------------------------------

TEST(Complex2D, SquareDimensions) {
  const ComplexReport r = verify_complex(mesh2("unit_square"), 2);
  ASSERT_EQ(r.sequences.size(), 2u);
  for (const auto& s : r.sequences) {
    EXPECT_EQ(s.dims, (std::vector<Index>{1, 9, 9, 1})) << s.name;
    EXPECT_EQ(s.euler, 1);
    EXPECT_TRUE(s.pass()) << to_json(r).dump(2);
  }
}

TEST(Complex2D, TwoByTwoDimensions) {
  const ComplexReport r = verify_complex(mesh2("squares_2x2"), 2);
  for (const auto& s : r.sequences) {
    EXPECT_EQ(s.dims, (std::vector<Index>{1, 25, 28, 4})) << s.name;
    EXPECT_EQ(s.links[1].rank, 4);
    EXPECT_TRUE(s.pass()) << to_json(r).dump(2);
  }
}

TEST(Complex2D, AllMeshesAllDegrees) {
  for (const auto& name : vem::test::meshes_2d()) {
    const Mesh2D m = mesh2(name);
    for (int k : {2, 3, 4}) {
      const ComplexReport r = verify_complex(m, k);
      EXPECT_TRUE(r.pass()) << name << " k=" << k << "\n" << to_json(r).dump(2);
      for (const auto& s : r.sequences) {
        EXPECT_EQ(s.euler, 1);
        EXPECT_EQ(s.links[0].kernel_dim, 1);
        EXPECT_EQ(s.links[1].rank, s.dims[3]);
      }
    }
  }
}

TEST(Complex2D, RotatedDuality) {
  for (const auto& name : vem::test::meshes_2d()) {
    const Mesh2D m = mesh2(name);
    const ComplexReport a = verify_complex(m, 3);
    const ComplexReport b = verify_complex(rotated(m), 3);
    const ComplexSequence& rot = a.sequences[0];
    const ComplexSequence& div = b.sequences[1];
    ASSERT_EQ(rot.name, "grad-rot");
    ASSERT_EQ(div.name, "brot-div");
    EXPECT_EQ(rot.dims, div.dims) << name;
    EXPECT_EQ(rot.euler, div.euler);
    ASSERT_EQ(rot.links.size(), div.links.size());
    for (std::size_t i = 0; i < rot.links.size(); ++i) {
      EXPECT_EQ(rot.links[i].rank, div.links[i].rank) << name;
      EXPECT_EQ(rot.links[i].kernel_dim, div.links[i].kernel_dim) << name;
    }
    ASSERT_EQ(rot.checks.size(), div.checks.size());
    for (std::size_t i = 0; i < rot.checks.size(); ++i) EXPECT_EQ(rot.checks[i].pass, div.checks[i].pass) << rot.checks[i].name;
  }
}

TEST(Complex3D, CubeAndPrism) {
  const std::vector<std::pair<std::string, std::vector<Index>>> cases = {{"unit_cube", {1, 54, 73, 21, 1}},
                                                                         {"prism", {1, 43, 59, 18, 1}}};
  for (const auto& [name, dims] : cases) {
    const ComplexReport r = verify_complex(mesh3(name), 3);
    ASSERT_EQ(r.sequences.size(), 1u);
    const ComplexSequence& s = r.sequences[0];
    EXPECT_EQ(s.dims, dims) << name;
    EXPECT_EQ(s.euler, 1);
    EXPECT_EQ(s.links[2].rank, 1);
    EXPECT_TRUE(r.pass()) << to_json(r).dump(2);
  }
}

TEST(Complex3D, TwoCubes) {
  const ComplexReport r = verify_complex(mesh3("two_cubes"), 3);
  EXPECT_TRUE(r.pass()) << to_json(r).dump(2);
  EXPECT_EQ(r.sequences[0].euler, 1);
}

TEST(Complex, SignFlipIsDetected) {
  const ComplexReport r2 = verify_complex(mesh2("squares_2x2"), 2, Fault::sign_flip);
  EXPECT_TRUE(r2.fault_injected);
  EXPECT_FALSE(r2.pass());
  const ComplexReport r3 = verify_complex(mesh3("two_cubes"), 3, Fault::sign_flip);
  EXPECT_TRUE(r3.fault_injected);
  EXPECT_FALSE(r3.pass());
}

TEST(Complex, Preconditions) {
  EXPECT_THROW(verify_complex(mesh2("unit_square"), 1), PreconditionError);
  EXPECT_THROW(verify_complex(mesh3("unit_cube"), 2), PreconditionError);
  Mesh2D m = mesh2("unit_square");
  m.simply_connected = false;
  try {
    verify_complex(m, 2);
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("simply connected"), std::string::npos);
  }
}

TEST(Complex, JsonShape) {
  const auto j = to_json(verify_complex(mesh2("unit_square"), 2));
  EXPECT_EQ(j["dim"], 2);
  EXPECT_EQ(j["sequences"][0]["dims"].get<std::vector<int>>(), (std::vector<int>{1, 9, 9, 1}));
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_TRUE(j["sequences"][0]["links"][0].contains("rank"));
}

TEST(Complex, ThreadCountDoesNotChangeResult) {
  const Mesh2D m = mesh2("voronoi_5");
  setenv("VEM_THREADS", "1", 1);
  const Matrix a = transfer_grad_2d(m, 3).matrix;
  setenv("VEM_THREADS", "4", 1);
  const Matrix b = transfer_grad_2d(m, 3).matrix;
  unsetenv("VEM_THREADS");
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
}
