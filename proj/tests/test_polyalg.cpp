#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "sosgeom/gram.hpp"
#include "sosgeom/monomial.hpp"
#include "sosgeom/polynomial.hpp"

using namespace sosgeom;

namespace {

Polynomial sum_of_squares_of_vars(int n) {
  Polynomial p(n);
  for (int i = 0; i < n; ++i) p.add_term(Monomial::var(n, i, 2), 1.0);
  return p;
}

}  // namespace

TEST_CASE("monomial ordering and basis sizes") {
  auto b = MonomialBasis::up_to_degree(2, 1);
  REQUIRE(b.size() == 3);
  CHECK(b.monomials[0] == Monomial::unit(2));
  CHECK(b.monomials[1] == Monomial::var(2, 0));
  CHECK(b.monomials[2] == Monomial::var(2, 1));

  auto b33 = MonomialBasis::up_to_degree(3, 3);
  CHECK(b33.size() == 20);
  CHECK(b33.size() == binomial(3 + 3, 3));

  // Within one degree earlier variables with higher exponents come first.
  auto b22 = MonomialBasis::up_to_degree(2, 2);
  CHECK(b22.monomials[3] == Monomial({2, 0}));
  CHECK(b22.monomials[4] == Monomial({1, 1}));
  CHECK(b22.monomials[5] == Monomial({0, 2}));

  auto h = HessianBasis::for_degree(3, 3);
  CHECK(h.size() == 3 * binomial(3 + 2, 2));  // n * C(n+d-1, d-1) = 30
  for (const auto& e : h.entries) {
    int ydeg = e.exponents[3] + e.exponents[4] + e.exponents[5];
    int xdeg = e.exponents[0] + e.exponents[1] + e.exponents[2];
    CHECK(ydeg == 1);
    CHECK(xdeg <= 2);
  }
}

TEST_CASE("eval") {
  auto p = sum_of_squares_of_vars(2);
  CHECK(p.eval(Eigen::Vector2d(0, 0)) == 0.0);
  CHECK(p.eval(Eigen::Vector2d(1, 2)) == 5.0);

  // 1 + 2x1^2 + 2x2^2 equals 3 anywhere on the unit circle.
  Polynomial q = Polynomial::constant(2, 1.0);
  q.add_term(Monomial::var(2, 0, 2), 2.0);
  q.add_term(Monomial::var(2, 1, 2), 2.0);
  for (int k = 0; k < 8; ++k) {
    double t = 2 * M_PI * k / 8.0;
    CHECK(q.eval(Eigen::Vector2d(std::cos(t), std::sin(t))) == doctest::Approx(3.0).epsilon(1e-12));
  }

  CHECK_THROWS_AS((void)p.eval(Eigen::Vector3d(1, 2, 3)), std::invalid_argument);
}

TEST_CASE("hessian") {
  {
    Polynomial p(1);
    p.add_term(Monomial::var(1, 0, 2), 1.0);
    auto h = p.hessian();
    REQUIRE(h.size() == 1);
    CHECK(h[0].almost_equal(Polynomial::constant(1, 2.0), 0.0));
  }
  {
    Polynomial p(2);
    p.add_term(Monomial::var(2, 0, 4), 1.0);
    p.add_term(Monomial::var(2, 1, 4), 1.0);
    auto h = p.hessian();
    Polynomial d0(2), d1(2);
    d0.add_term(Monomial::var(2, 0, 2), 12.0);
    d1.add_term(Monomial::var(2, 1, 2), 12.0);
    CHECK(h[0].almost_equal(d0, 0.0));
    CHECK(h[3].almost_equal(d1, 0.0));
    CHECK(h[1].is_zero());
    CHECK(h[2].is_zero());
  }
  {
    Polynomial p(2);
    p.add_term(Monomial({2, 2}), 1.0);  // x1^2 x2^2
    auto h = p.hessian();
    Polynomial h00(2), h01(2), h11(2);
    h00.add_term(Monomial({0, 2}), 2.0);
    h01.add_term(Monomial({1, 1}), 4.0);
    h11.add_term(Monomial({2, 0}), 2.0);
    CHECK(h[0].almost_equal(h00, 0.0));
    CHECK(h[1].almost_equal(h01, 0.0));
    CHECK(h[2].almost_equal(h01, 0.0));
    CHECK(h[3].almost_equal(h11, 0.0));
  }
  {
    // degree < 2 gives the zero matrix
    Polynomial p = Polynomial::variable(2, 0);
    for (const auto& e : p.hessian()) CHECK(e.is_zero());
  }
}

TEST_CASE("hessian_form") {
  {
    Polynomial p(1);
    p.add_term(Monomial::var(1, 0, 2), 1.0);
    Polynomial expect(2);
    expect.add_term(Monomial::var(2, 1, 2), 2.0);  // 2 y1^2
    CHECK(p.hessian_form().almost_equal(expect, 0.0));
  }
  {
    auto p = sum_of_squares_of_vars(3);
    Polynomial expect(6);
    for (int i = 0; i < 3; ++i) expect.add_term(Monomial::var(6, 3 + i, 2), 2.0);
    CHECK(p.hessian_form().almost_equal(expect, 0.0));
  }
  {
    Polynomial p(1);
    p.add_term(Monomial::var(1, 0, 4), 1.0);
    Polynomial expect(2);
    expect.add_term(Monomial({2, 2}), 12.0);  // 12 x1^2 y1^2
    CHECK(p.hessian_form().almost_equal(expect, 0.0));
  }
}

TEST_CASE("hessian_form matches y^T H y numerically") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  Polynomial p(3);
  auto b = MonomialBasis::up_to_degree(3, 4);
  for (const auto& m : b.monomials) p.add_term(m, U(rng));
  const Polynomial hf = p.hessian_form();
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(3), y(3), xy(6);
    for (int i = 0; i < 3; ++i) x[i] = U(rng), y[i] = U(rng);
    xy << x, y;
    double direct = y.dot(p.hessian_at(x) * y);
    double via_form = hf.eval(xy);
    CHECK(std::abs(direct - via_form) <= 1e-10 * (1 + std::abs(direct)));
  }
}

TEST_CASE("gram_expand") {
  {
    auto basis = MonomialBasis::up_to_degree(1, 1).monomials;  // (1, x1)
    Polynomial p = gram_expand(basis, Eigen::Matrix2d::Identity());
    Polynomial expect = Polynomial::constant(1, 1.0);
    expect.add_term(Monomial::var(1, 0, 2), 1.0);
    CHECK(p.almost_equal(expect, 0.0));
  }
  {
    std::vector<Monomial> basis = {Monomial({2, 0}), Monomial({1, 1}), Monomial({0, 2})};
    Eigen::Matrix3d Q = Eigen::Vector3d(1, 0, 1).asDiagonal();
    Polynomial p = gram_expand(basis, Q);
    Polynomial expect(2);
    expect.add_term(Monomial({4, 0}), 1.0);
    expect.add_term(Monomial({0, 4}), 1.0);
    CHECK(p.almost_equal(expect, 0.0));
  }
  {
    // Random PSD Gram matrices expand to polynomials nonnegative everywhere.
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<Monomial> basis = {Monomial({2, 0}), Monomial({1, 1}), Monomial({0, 2})};
    Eigen::Matrix3d B;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) B(i, j) = U(rng);
    Eigen::Matrix3d Q = B * B.transpose();
    Polynomial p = gram_expand(basis, Q);
    for (int k = 0; k < 1000; ++k) {
      Eigen::Vector2d x(U(rng) * 3, U(rng) * 3);
      CHECK(p.eval(x) >= -1e-12);
    }
  }
}

TEST_CASE("gram_expand is linear in the matrix") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  auto basis = MonomialBasis::up_to_degree(2, 2).monomials;
  const int N = static_cast<int>(basis.size());
  Eigen::MatrixXd Q1(N, N), Q2(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) Q1(i, j) = U(rng), Q2(i, j) = U(rng);
  Q1 = (0.5 * (Q1 + Q1.transpose())).eval();
  Q2 = (0.5 * (Q2 + Q2.transpose())).eval();
  Polynomial lhs = gram_expand(basis, Q1 + Q2);
  Polynomial rhs = gram_expand(basis, Q1) + gram_expand(basis, Q2);
  CHECK(lhs.almost_equal(rhs, 1e-12));
}

TEST_CASE("coefficient_maps") {
  {
    auto basis = MonomialBasis::up_to_degree(1, 1).monomials;
    auto t = coefficient_maps(basis);
    int ix2 = t.index_of(Monomial({2}));
    REQUIRE(ix2 >= 0);
    REQUIRE(t.pairs[static_cast<size_t>(ix2)].size() == 1);
    CHECK(t.pairs[static_cast<size_t>(ix2)][0] == std::pair<int, int>(1, 1));
    int ix1 = t.index_of(Monomial({1}));
    REQUIRE(ix1 >= 0);
    CHECK(t.pairs[static_cast<size_t>(ix1)][0] == std::pair<int, int>(0, 1));
  }
  {
    auto basis = MonomialBasis::up_to_degree(2, 1).monomials;  // (1, x1, x2)
    auto t = coefficient_maps(basis);
    int ix = t.index_of(Monomial({1, 1}));
    REQUIRE(ix >= 0);
    REQUIRE(t.pairs[static_cast<size_t>(ix)].size() == 1);
    CHECK(t.pairs[static_cast<size_t>(ix)][0] == std::pair<int, int>(1, 2));
  }
  {
    auto basis = MonomialBasis::up_to_degree(3, 3).monomials;
    auto t = coefficient_maps(basis);
    size_t total = 0;
    for (const auto& ps : t.pairs) total += ps.size();
    CHECK(total == 20 * 21 / 2);  // N(N+1)/2 = 210
  }
}

TEST_CASE("certificate expand/round trip and transforms") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);

  GramCertificate cert;
  cert.kind = GramKind::Sos;
  cert.n_vars = 2;
  cert.basis_degree = 2;
  const int N = static_cast<int>(cert.basis_monomials().size());
  Eigen::MatrixXd B(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) B(i, j) = U(rng);
  cert.matrix = B * B.transpose();

  Polynomial p = cert.expand();
  CHECK(cert.certifies(p, 1e-12));
  CHECK(cert.min_eigenvalue() >= -1e-12);

  // Rotate + translate; transformed certificate certifies the substituted polynomial.
  double th = 0.7;
  Eigen::Matrix2d R;
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  Eigen::Vector2d t(0.3, -1.2);
  GramCertificate moved = transform_certificate(cert, R, t);
  Polynomial p_moved = p.substitute_affine(R, t);
  CHECK(moved.certifies(p_moved, 1e-9));
  CHECK(moved.min_eigenvalue() >= -1e-9);
}

TEST_CASE("substitute_affine identity and translation") {
  Polynomial p = sum_of_squares_of_vars(3);
  Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  CHECK(p.substitute_affine(I, Eigen::Vector3d::Zero()).almost_equal(p, 0.0));

  Eigen::Vector3d t(-1, 0, 0);
  Polynomial q = p.substitute_affine(I, t);  // ||x - (1,0,0)||^2
  CHECK(q.eval(Eigen::Vector3d(1, 0, 0)) == doctest::Approx(0.0));
  CHECK(q.eval(Eigen::Vector3d(2, 0, 0)) == doctest::Approx(1.0));
}
