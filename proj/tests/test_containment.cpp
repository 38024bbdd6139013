#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "sosgeom/containment.hpp"
#include "sosgeom/errors.hpp"

using namespace sosgeom;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

Polynomial ellipsoid_poly(const Eigen::MatrixXd& A, const VectorXd& c) {
  // (x-c)^T A (x-c)
  const int n = static_cast<int>(c.size());
  Polynomial p(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (A(i, j) == 0.0) continue;
      p.add_term(Monomial::var(n, i) * Monomial::var(n, j), A(i, j));
      p.add_term(Monomial::var(n, i), -A(i, j) * c[j]);
      p.add_term(Monomial::var(n, j), -A(i, j) * c[i]);
      p.add_term(Monomial::unit(n), A(i, j) * c[i] * c[j]);
    }
  return p;
}

BodySpec random_ellipsoid(std::mt19937& rng, const Vector3d& center, double radius_scale) {
  std::uniform_real_distribution<double> U(0.6, 1.6);
  Eigen::Matrix3d D = Eigen::Vector3d(U(rng), U(rng), U(rng)).asDiagonal();
  Eigen::Vector3d axis(U(rng), U(rng), U(rng));
  Eigen::Matrix3d R = Eigen::AngleAxisd(U(rng), axis.normalized()).toRotationMatrix();
  Eigen::Matrix3d A = R * D * R.transpose() / (radius_scale * radius_scale);
  return BodySpec::single(ellipsoid_poly(A, center), ConvexityTag::SosConvexCertified);
}

}  // namespace

TEST_CASE("self containment of the unit ball") {
  Polynomial ball = ellipsoid_poly(Eigen::Matrix3d::Identity(), Vector3d::Zero());
  ContainmentProblem prob;
  prob.targets = {BodySpec::single(ball, ConvexityTag::SosConvexCertified)};
  prob.degree = 2;
  auto cert = contain(prob);
  // optimal unit sublevel set is the ball itself; the polynomial is the
  // logdet-optimal representation (1-s)|x|^2 + s
  for (int k = 0; k < 200; ++k) {
    Vector3d dir = Vector3d::Random().normalized();
    CHECK(cert.container.polynomial.eval(dir) == doctest::Approx(1.0).epsilon(1e-3));
  }
  auto rep = verify_certificate(cert);
  CHECK(rep.all_pass());
}

TEST_CASE("three ellipsoids, degree-4 container, degree-2 multipliers") {
  std::mt19937 rng(2024);
  ContainmentProblem prob;
  prob.targets = {random_ellipsoid(rng, Vector3d(1.6, 0, 0), 0.8),
                  random_ellipsoid(rng, Vector3d(-1.2, 1.1, 0.3), 0.7),
                  random_ellipsoid(rng, Vector3d(-0.4, -1.3, -0.5), 0.75)};
  prob.degree = 4;
  prob.multiplier_degree = 2;
  auto cert = contain(prob);
  CHECK(cert.multiplier_degree == 2);
  CHECK(cert.per_target.size() == 3);

  auto rep = verify_certificate(cert);
  for (const auto& e : rep.entries) {
    INFO(e.name, " margin ", e.margin, " ", e.note);
    CHECK(e.pass);
  }
  // soundness: algebraic checks passing implies the sampling check passes
  bool algebraic_ok = true, sampling_ok = true;
  for (const auto& e : rep.entries) {
    if (e.name.find("sampled") != std::string::npos) sampling_ok &= e.pass;
    else algebraic_ok &= e.pass;
  }
  CHECK(algebraic_ok);
  CHECK((algebraic_ok ? sampling_ok : true));
}

TEST_CASE("default multiplier degree follows the container and target degrees") {
  std::mt19937 rng(7);
  ContainmentProblem prob;
  prob.targets = {random_ellipsoid(rng, Vector3d(0.5, 0, 0), 0.6)};
  prob.degree = 4;
  auto cert = contain(prob);
  CHECK(cert.multiplier_degree == 2);  // 4 - 2 = 2
  CHECK(verify_certificate(cert).all_pass());
}

TEST_CASE("tampered certificates fail verification") {
  std::mt19937 rng(5);
  ContainmentProblem prob;
  prob.targets = {random_ellipsoid(rng, Vector3d(0, 0, 0), 0.9)};
  prob.degree = 2;
  auto cert = contain(prob);
  REQUIRE(verify_certificate(cert).all_pass());

  // force a negative eigenvalue into one Gram: PSD check fails
  {
    auto bad = cert;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bad.per_target[0].residual_gram.matrix);
    Eigen::VectorXd ev = es.eigenvalues();
    ev[0] = -1e-3;
    bad.per_target[0].residual_gram.matrix =
        es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    auto rep = verify_certificate(bad);
    bool psd_failed = false;
    for (const auto& e : rep.entries)
      if (e.name.find("residual gram psd") != std::string::npos && !e.pass) psd_failed = true;
    CHECK(psd_failed);
  }
  // scale p without re-solving: identity check fails
  {
    auto bad = cert;
    bad.container.polynomial = bad.container.polynomial * 1.5;
    auto rep = verify_certificate(bad);
    bool identity_failed = false;
    for (const auto& e : rep.entries)
      if (e.name.find("residual identity") != std::string::npos && !e.pass) identity_failed = true;
    CHECK(identity_failed);
  }
}

TEST_CASE("far-apart balls with scalar multipliers are infeasible") {
  Polynomial b1 = ellipsoid_poly(Eigen::Matrix3d::Identity(), Vector3d(10, 0, 0));
  Polynomial b2 = ellipsoid_poly(Eigen::Matrix3d::Identity(), Vector3d(-10, 0, 0));
  ContainmentProblem prob;
  prob.targets = {BodySpec::single(b1), BodySpec::single(b2)};
  prob.degree = 2;
  prob.multiplier_degree = 0;
  try {
    (void)contain(prob);
    FAIL("expected infeasibility");
  } catch (const SolverError& e) {
    CHECK(e.status() == SolveStatus::Infeasible);
    CHECK(std::string(e.what()).find("multiplier_degree") != std::string::npos);
  }
}

TEST_CASE("objective does not degrade when multiplier degree rises") {
  std::mt19937 rng(11);
  ContainmentProblem prob;
  prob.targets = {random_ellipsoid(rng, Vector3d(0.8, 0.2, 0), 0.7),
                  random_ellipsoid(rng, Vector3d(-0.8, -0.2, 0.1), 0.7)};
  prob.degree = 4;
  prob.multiplier_degree = 2;
  auto c2 = contain(prob);
  prob.multiplier_degree = 4;
  auto c4 = contain(prob);
  CHECK(c4.container.objective_value <= c2.container.objective_value + 1e-4);
}
