#include "common.hpp"

using namespace vem;

TEST(DimPoly, ClosedForms) {
  EXPECT_EQ(dim_poly(2, 2), 6);
  EXPECT_EQ(dim_poly(-1, 3), 0);
  EXPECT_EQ(dim_poly(3, 3), 20);
  EXPECT_EQ(dim_poly(4, 1), 5);
  EXPECT_THROW(dim_poly(2, 4), PreconditionError);
  EXPECT_THROW(dim_poly(2, 0), PreconditionError);
}

TEST(DimPoly, MatchesMultiIndexCount) {
  for (int d = 1; d <= 3; ++d)
    for (int k = -1; k <= 5; ++k) {
      const auto idx = multi_indices(k, d);
      ASSERT_EQ(static_cast<int>(idx.size()), dim_poly(k, d));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        EXPECT_EQ(multi_index_position(idx[i], d), i);
        if (i > 0) EXPECT_LE(total_degree(idx[i - 1]), total_degree(idx[i]));
      }
    }
}

TEST(MonomialBasis, GradedLexOrder) {
  const auto b = MonomialBasis::global(2, 2);
  ASSERT_EQ(b.size(), 6);
  EXPECT_EQ(b.index(3), (MultiIndex{2, 0, 0}));
  EXPECT_EQ(b.index(4), (MultiIndex{1, 1, 0}));
  EXPECT_EQ(b.index(5), (MultiIndex{0, 2, 0}));
  const auto c = MonomialBasis::global(3, 2);
  EXPECT_EQ(c.index(4), (MultiIndex{2, 0, 0}));
  EXPECT_EQ(c.index(5), (MultiIndex{1, 1, 0}));
  EXPECT_EQ(c.index(6), (MultiIndex{1, 0, 1}));
  EXPECT_EQ(c.index(9), (MultiIndex{0, 0, 2}));
  EXPECT_EQ(MonomialBasis::global(2, -1).size(), 0);
}

TEST(PolyEval, Examples) {
  const PolyCoeffs one(MonomialBasis::global(2, 0), 1, Vector::Ones(1));
  EXPECT_DOUBLE_EQ(poly_eval(one, vec2(3.0, -7.0))(0), 1.0);

  PolyCoeffs x(MonomialBasis::global(1, 1), 1);
  x.coeffs(1) = 1.0;
  EXPECT_DOUBLE_EQ(poly_eval(x, Vector::Constant(1, 2.0))(0), 2.0);

  PolyCoeffs s(MonomialBasis(1, 2, Vector::Constant(1, 1.0), 2.0), 1);
  s.coeffs(2) = 1.0;
  EXPECT_DOUBLE_EQ(poly_eval(s, Vector::Constant(1, 3.0))(0), 1.0);

  EXPECT_THROW(poly_eval(one, Vector::Zero(3)), PreconditionError);
}

TEST(DiffMatrix, GradOfXSquared) {
  const auto b = MonomialBasis::global(2, 2);
  const Matrix g = diff_matrix(DiffOp::grad, b);
  ASSERT_EQ(g.rows(), 2 * 3);
  ASSERT_EQ(g.cols(), 6);
  // x^2 (index 3) -> 2x in the first component (index 1 of the P_1 block)
  EXPECT_DOUBLE_EQ(g(1, 3), 2.0);
  EXPECT_DOUBLE_EQ(g.col(3).cwiseAbs().sum(), 2.0);
}

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST(DiffMatrix, ComplexPropertiesVanish) {
  for (int k = 1; k <= 5; ++k) {
    const MonomialBasis b2(2, k, vec2(0.3, -0.2), 0.7);
    const Matrix rg = diff_matrix(DiffOp::rot, b2.with_degree(k - 1)) * diff_matrix(DiffOp::grad, b2);
    EXPECT_LE(max_abs(rg), 1e-14 * std::max(1.0, diff_matrix(DiffOp::grad, b2).norm()));
    const Matrix db = diff_matrix(DiffOp::div, b2.with_degree(k - 1)) * diff_matrix(DiffOp::brot, b2);
    EXPECT_LE(max_abs(db), 1e-14 * std::max(1.0, diff_matrix(DiffOp::brot, b2).norm()));

    const MonomialBasis b3(3, k, vec3(0.1, 0.2, 0.3), 1.3);
    const Matrix dc = diff_matrix(DiffOp::div, b3.with_degree(k - 1)) * diff_matrix(DiffOp::curl, b3);
    EXPECT_LE(max_abs(dc), 1e-14 * std::max(1.0, diff_matrix(DiffOp::curl, b3).norm()));
    const Matrix cg = diff_matrix(DiffOp::curl, b3.with_degree(k - 1)) * diff_matrix(DiffOp::grad, b3);
    EXPECT_LE(max_abs(cg), 1e-14 * std::max(1.0, diff_matrix(DiffOp::grad, b3).norm()));
  }
}

TEST(DiffMatrix, RejectsDimensionMismatch) {
  EXPECT_THROW(diff_matrix(DiffOp::rot, MonomialBasis::global(3, 2)), PreconditionError);
  EXPECT_THROW(diff_matrix(DiffOp::brot, MonomialBasis::global(3, 2)), PreconditionError);
  EXPECT_THROW(diff_matrix(DiffOp::curl, MonomialBasis::global(2, 2)), PreconditionError);
}

TEST(DiffMatrix, LaplacianAgreesWithFiniteDifferences) {
  std::mt19937 rng(3);
  const MonomialBasis b(3, 4, vec3(0.2, -0.1, 0.4), 0.8);
  const PolyCoeffs p = test::random_poly(rng, b, 1);
  const PolyCoeffs lap = apply(DiffOp::laplacian, p);
  const Vector x = vec3(0.3, 0.5, -0.2);
  const double h = 1e-3;
  double fd = 0.0;
  for (int i = 0; i < 3; ++i) {
    Vector e = Vector::Zero(3);
    e(i) = h;
    fd += (p(x + e)(0) - 2 * p(x)(0) + p(x - e)(0)) / (h * h);
  }
  EXPECT_NEAR(lap(x)(0), fd, 1e-4 * std::max(1.0, std::abs(fd)));
}

TEST(DiffMatrix, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(5);
  const MonomialBasis b(2, 3, vec2(0.5, 0.5), 1.4);
  const PolyCoeffs p = test::random_poly(rng, b, 1);
  const PolyCoeffs g = apply(DiffOp::grad, p);
  const Vector x = vec2(0.1, 0.9);
  const double h = 1e-6;
  EXPECT_NEAR(g(x)(0), (p(x + vec2(h, 0))(0) - p(x - vec2(h, 0))(0)) / (2 * h), 1e-7);
  EXPECT_NEAR(g(x)(1), (p(x + vec2(0, h))(0) - p(x - vec2(0, h))(0)) / (2 * h), 1e-7);
}

TEST(Restriction, AgreesWithPointEvaluation) {
  std::mt19937 rng(11);
  const MonomialBasis src(3, 3, vec3(0.5, 0.4, 0.2), 1.7);
  AffineChart chart;
  chart.origin = vec3(0.1, 0.2, 0.3);
  chart.axes = Matrix(3, 2);
  chart.axes << 1, 0.2, 0.3, -0.7, 0.5, 0.1;
  const MonomialBasis dst(2, 4, vec2(-0.2, 0.3), 0.6);
  const Matrix r = restriction_matrix(src, chart, dst);
  const PolyCoeffs p = test::random_poly(rng, src, 1);
  const PolyCoeffs q(dst, 1, r * p.coeffs);
  for (int t = 0; t < 5; ++t) {
    const Vector s = test::random_vector(rng, 2);
    EXPECT_NEAR(q(s)(0), p(chart.map(s))(0), 1e-12);
  }
  EXPECT_THROW(restriction_matrix(src, chart, dst.with_degree(2)), PreconditionError);
}

TEST(Algebra, ProductsAgreeWithPointEvaluation) {
  std::mt19937 rng(17);
  const MonomialBasis b(3, 2, vec3(0.1, 0.1, 0.1), 0.9);
  const PolyCoeffs u = test::random_poly(rng, b, 3);
  const PolyCoeffs v = test::random_poly(rng, b.with_degree(1), 3);
  const Vector x = vec3(0.4, -0.3, 0.7);
  EXPECT_NEAR(dot(u, v)(x)(0), u(x).dot(v(x)), 1e-13);
  EXPECT_LE((cross(u, v)(x) - cross3(u(x), v(x))).norm(), 1e-13);
}

TEST(SequenceRanks, Examples) {
  const auto r3 = sequence_ranks(3, 2);
  ASSERT_EQ(r3.sequences.size(), 2u);
  EXPECT_EQ(r3.sequences[0].links[0].rank, 9);
  EXPECT_EQ(r3.sequences[0].links[0].kernel_dim, 1);

  const Matrix curl2 = diff_matrix(DiffOp::curl, MonomialBasis::global(3, 2));
  EXPECT_EQ(curl2.cols() - numerical_rank(curl2), dim_poly(3, 3) - 1);
  EXPECT_EQ(sequence_ranks(3, 3).sequences[0].links[1].kernel_dim, 19);

  const auto r1 = sequence_ranks(1, 2);
  EXPECT_EQ(r1.sequences[0].links[1].rank, 0);
  EXPECT_EQ(r1.sequences[0].links[1].rows, 0);
  EXPECT_TRUE(r1.exact());
  EXPECT_THROW(sequence_ranks(0, 2), PreconditionError);
}

TEST(SequenceRanks, ExactForLowDegrees) {
  for (int d = 2; d <= 3; ++d)
    for (int r = 1; r <= 5; ++r) {
      const auto rep = sequence_ranks(r, d);
      EXPECT_TRUE(rep.exact()) << "d=" << d << " r=" << r;
      for (const auto& s : rep.sequences) {
        EXPECT_TRUE(s.constants_kernel);
        // rank-nullity bookkeeping
        for (const auto& l : s.links) EXPECT_EQ(l.rank + l.kernel_dim, l.cols);
      }
    }
}
