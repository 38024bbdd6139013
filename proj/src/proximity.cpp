#include "sosgeom/proximity.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <set>
#include <stdexcept>

#include "sosgeom/errors.hpp"
#include "sosgeom/sos_builder.hpp"

namespace sosgeom {

const char* to_string(GrowthClass c) {
  switch (c) {
    case GrowthClass::Separated: return "separated";
    case GrowthClass::Touching: return "touching";
    case GrowthClass::Overlapping: return "overlapping";
  }
  return "unknown";
}

BodySpec BodySpec::single(const Polynomial& g, ConvexityTag tag) {
  BodySpec b;
  b.n_vars = g.n_vars();
  b.constraints.push_back(g);
  b.convexity.push_back(tag);
  return b;
}

BodySpec BodySpec::from_fitted(const FittedBody& body) {
  if (body.level <= 0) throw std::invalid_argument("BodySpec: nonpositive level");
  Polynomial g = body.polynomial_world() * (1.0 / body.level);
  return single(g, body.sos_convex_certified() ? ConvexityTag::SosConvexCertified
                                               : ConvexityTag::Unknown);
}

bool BodySpec::all_sos_convex() const {
  for (auto t : convexity)
    if (t != ConvexityTag::SosConvexCertified) return false;
  return !convexity.empty();
}

bool BodySpec::feasible(const Eigen::VectorXd& x, double margin) const {
  for (const auto& g : constraints)
    if (g.eval(x) > 1.0 + margin) return false;
  return true;
}

void BodySpec::validate() const {
  if (constraints.empty()) throw std::invalid_argument("BodySpec: needs at least one constraint");
  if (convexity.size() != constraints.size())
    throw std::invalid_argument("BodySpec: convexity tags out of sync");
  for (const auto& g : constraints)
    if (g.n_vars() != n_vars) throw std::invalid_argument("BodySpec: variable count mismatch");
}

namespace {

// Evaluation-point recovery from a near-null Gram eigenvector: rescale to
// constant entry one, read the linear entries, and demand that the degree-2
// entries match their products.
std::optional<Eigen::VectorXd> recover_evaluation_point(const Eigen::MatrixXd& gram,
                                                        const std::vector<Monomial>& basis,
                                                        int n_vars, double null_tol,
                                                        double cross_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gram + gram.transpose()));
  if (es.info() != Eigen::Success) return std::nullopt;
  const double lmax = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues()(0) > null_tol * lmax) return std::nullopt;
  Eigen::VectorXd v = es.eigenvectors().col(0);

  int const_ix = -1;
  for (size_t i = 0; i < basis.size(); ++i)
    if (basis[i].degree() == 0) const_ix = static_cast<int>(i);
  if (const_ix < 0) return std::nullopt;
  if (std::abs(v[const_ix]) < 1e-6 * v.norm()) return std::nullopt;
  v /= v[const_ix];

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_vars);
  std::vector<bool> have(static_cast<size_t>(n_vars), false);
  for (size_t i = 0; i < basis.size(); ++i) {
    if (basis[i].degree() != 1) continue;
    for (int j = 0; j < n_vars; ++j) {
      if (basis[i].exponents[static_cast<size_t>(j)] == 1) {
        x[j] = v[static_cast<Eigen::Index>(i)];
        have[static_cast<size_t>(j)] = true;
      }
    }
  }
  for (bool h : have)
    if (!h) return std::nullopt;

  for (size_t i = 0; i < basis.size(); ++i) {
    if (basis[i].degree() != 2) continue;
    const double predicted = basis[i].eval(x);
    if (std::abs(v[static_cast<Eigen::Index>(i)] - predicted) >
        cross_tol * (1.0 + std::abs(predicted)))
      return std::nullopt;
  }
  return x;
}

}  // namespace

std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> recover_minimizers(
    const Eigen::MatrixXd& gram, const std::vector<Monomial>& basis, int n_vars, double null_tol,
    double cross_tol) {
  auto xy = recover_evaluation_point(gram, basis, 2 * n_vars, null_tol, cross_tol);
  if (!xy) return std::nullopt;
  return std::make_pair(xy->head(n_vars).eval(), xy->tail(n_vars).eval());
}

namespace {

// Newton polish of the closest-pair stationarity system. The eigenvector
// recovery is only O(sqrt(mu)) accurate because the optimal Gram matrix sits
// on the cone boundary; a few local Newton steps restore full precision.
void polish_closest_pair(const BodySpec& s1, const BodySpec& s2, Eigen::VectorXd& x,
                         Eigen::VectorXd& y) {
  const int n = s1.n_vars;
  auto nearest_active = [](const BodySpec& s, const Eigen::VectorXd& p) {
    int best = -1;
    double v = -1e30;
    for (size_t i = 0; i < s.constraints.size(); ++i) {
      double g = s.constraints[i].eval(p);
      if (g > v) {
        v = g;
        best = static_cast<int>(i);
      }
    }
    return std::make_pair(best, v);
  };
  auto [i1, v1] = nearest_active(s1, x);
  auto [i2, v2] = nearest_active(s2, y);
  if (v1 < 1.0 - 1e-3 || v2 < 1.0 - 1e-3) return;  // interior pair, nothing to pin
  const Polynomial& g = s1.constraints[static_cast<size_t>(i1)];
  const Polynomial& h = s2.constraints[static_cast<size_t>(i2)];

  Eigen::VectorXd gx = g.gradient_at(x), hy = h.gradient_at(y);
  if (gx.norm() < 1e-10 || hy.norm() < 1e-10) return;
  double lam = 2.0 * (x - y).norm() / gx.norm();
  double nu = 2.0 * (x - y).norm() / hy.norm();

  Eigen::VectorXd x0 = x, y0 = y;
  for (int it = 0; it < 12; ++it) {
    gx = g.gradient_at(x);
    hy = h.gradient_at(y);
    Eigen::VectorXd F(2 * n + 2);
    F.head(n) = 2.0 * (x - y) + lam * gx;
    F.segment(n, n) = 2.0 * (y - x) + nu * hy;
    F[2 * n] = g.eval(x) - 1.0;
    F[2 * n + 1] = h.eval(y) - 1.0;
    if (F.norm() < 1e-13) break;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n + 2, 2 * n + 2);
    J.topLeftCorner(n, n) =
        2.0 * Eigen::MatrixXd::Identity(n, n) + lam * g.hessian_at(x);
    J.block(0, n, n, n) = -2.0 * Eigen::MatrixXd::Identity(n, n);
    J.block(n, 0, n, n) = -2.0 * Eigen::MatrixXd::Identity(n, n);
    J.block(n, n, n, n) = 2.0 * Eigen::MatrixXd::Identity(n, n) + nu * h.hessian_at(y);
    J.block(0, 2 * n, n, 1) = gx;
    J.block(n, 2 * n + 1, n, 1) = hy;
    J.block(2 * n, 0, 1, n) = gx.transpose();
    J.block(2 * n + 1, n, 1, n) = hy.transpose();
    Eigen::VectorXd step = J.partialPivLu().solve(-F);
    if (!step.allFinite()) return;
    x += step.head(n);
    y += step.segment(n, n);
    lam += step[2 * n];
    nu += step[2 * n + 1];
  }
  // keep the polished pair only if it actually improved things
  if ((x - x0).norm() > 0.1 || (y - y0).norm() > 0.1 || !x.allFinite() || !y.allFinite()) {
    x = x0;
    y = y0;
  }
}

// Newton polish for the growth minimizer: constrained (q2 = 1) or free
// stationary point of q1, depending on where the seed sits.
void polish_growth_point(const Polynomial& q1, const Polynomial& q2, Eigen::VectorXd& x) {
  const int n = q1.n_vars();
  Eigen::VectorXd x0 = x;
  if (q2.eval(x) < 1.0 - 1e-3) {
    for (int it = 0; it < 12; ++it) {
      Eigen::VectorXd gr = q1.gradient_at(x);
      if (gr.norm() < 1e-13) break;
      Eigen::VectorXd step = q1.hessian_at(x).ldlt().solve(-gr);
      if (!step.allFinite()) break;
      x += step;
    }
  } else {
    Eigen::VectorXd g2 = q2.gradient_at(x);
    if (g2.norm() < 1e-10) return;
    double lam = q1.gradient_at(x).norm() / g2.norm();
    for (int it = 0; it < 12; ++it) {
      g2 = q2.gradient_at(x);
      Eigen::VectorXd F(n + 1);
      F.head(n) = q1.gradient_at(x) + lam * g2;
      F[n] = q2.eval(x) - 1.0;
      if (F.norm() < 1e-13) break;
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + 1, n + 1);
      J.topLeftCorner(n, n) = q1.hessian_at(x) + lam * q2.hessian_at(x);
      J.block(0, n, n, 1) = g2;
      J.block(n, 0, 1, n) = g2.transpose();
      Eigen::VectorXd step = J.partialPivLu().solve(-F);
      if (!step.allFinite()) break;
      x += step.head(n);
      lam += step[n];
    }
  }
  if ((x - x0).norm() > 0.1 || !x.allFinite()) x = x0;
}

}  // namespace

DistanceResult distance_lower_bound(const BodySpec& s1, const BodySpec& s2, int level,
                                    const SolverConfig& config, const SdpSolution* warm_start) {
  s1.validate();
  s2.validate();
  if (s1.n_vars != s2.n_vars)
    throw std::invalid_argument("distance_lower_bound: dimension mismatch");
  if (level < 0) throw std::invalid_argument("distance_lower_bound: level must be >= 0");
  const int n = s1.n_vars;
  const int nn = 2 * n;

  // |x - y|^2 in the joint space
  Polynomial dist2(nn);
  for (int i = 0; i < n; ++i) {
    dist2.add_term(Monomial::var(nn, i, 2), 1.0);
    dist2.add_term(Monomial::var(nn, n + i, 2), 1.0);
    Monomial cross = Monomial::var(nn, i) * Monomial::var(nn, n + i);
    dist2.add_term(cross, -2.0);
  }

  std::vector<Polynomial> one_minus;
  for (const auto& g : s1.constraints)
    one_minus.push_back(Polynomial::constant(nn, 1.0) - g.embed(nn, 0));
  for (const auto& h : s2.constraints)
    one_minus.push_back(Polynomial::constant(nn, 1.0) - h.embed(nn, n));

  const int mult_deg = (level + 1) / 2;  // sos multipliers of degree <= 2*ceil(level/2)
  const MonomialBasis mult_basis = MonomialBasis::up_to_degree(nn, mult_deg);

  // support of the certified combination, for the reduced main Gram basis
  std::set<Monomial, GradedLexLess> supp;
  for (const auto& [m, c] : dist2.terms()) {
    (void)c;
    supp.insert(m);
  }
  supp.insert(Monomial::unit(nn));
  for (const auto& f : one_minus) {
    for (const auto& wa : mult_basis.monomials) {
      for (const auto& wb : mult_basis.monomials) {
        const Monomial prod = wa * wb;
        for (const auto& [m, c] : f.terms()) {
          (void)c;
          supp.insert(prod * m);
        }
      }
    }
  }
  const std::vector<Monomial> main_basis =
      reduced_gram_basis(nn, std::vector<Monomial>(supp.begin(), supp.end()));

  SosProgramBuilder B;
  const int Q = B.add_gram_block(static_cast<int>(main_basis.size()));
  std::vector<SosProgramBuilder::GramTerm> terms;
  terms.push_back(SosProgramBuilder::plain(Q, main_basis));
  for (const auto& f : one_minus) {
    const int T = B.add_gram_block(mult_basis.size());
    terms.push_back(SosProgramBuilder::multiplied(T, mult_basis.monomials, f));
  }
  const int gamma = B.add_free();
  B.add_identity(terms, {{gamma, Polynomial::constant(nn, 1.0)}}, dist2);
  B.prob.objective.free_terms.emplace_back(gamma, -1.0);  // maximize gamma

  SdpSolution sol = solve(B.prob, config, warm_start);
  if (sol.status != SolveStatus::Optimal)
    throw SolverError(sol.status,
                      std::string("distance_lower_bound: solver returned ") + to_string(sol.status));

  DistanceResult out;
  out.lower_bound = sol.free_values[gamma];
  out.hierarchy_level = level;
  out.solve_stats = sol.stats;

  auto mins = recover_minimizers(sol.block_values[static_cast<size_t>(Q)], main_basis, n);
  if (mins) {
    auto [xs, ys] = *mins;
    polish_closest_pair(s1, s2, xs, ys);
    const double gap = (xs - ys).squaredNorm() - out.lower_bound;
    if (s1.feasible(xs, 1e-6) && s2.feasible(ys, 1e-6) && std::abs(gap) <= 1e-4) {
      out.minimizers = std::make_pair(xs, ys);
      out.tight = true;
    }
  }
  out.raw = std::move(sol);
  return out;
}

namespace {

struct GrowthProgram {
  SdpProblem prob;
  int Q = -1;
  int gamma = -1;
  std::vector<Monomial> basis;
};

// max gamma s.t. q1 - gamma - xi (1 - q2) sos, xi >= 0. A fixed full basis
// keeps the program structure stable across parametric sweeps.
GrowthProgram compile_growth(const Polynomial& q1, const Polynomial& q2) {
  const int n = q1.n_vars();
  const int D = (std::max(q1.degree(), q2.degree()) + 1) / 2;
  GrowthProgram gp;
  gp.basis = MonomialBasis::up_to_degree(n, D).monomials;
  SosProgramBuilder B;
  gp.Q = B.add_gram_block(static_cast<int>(gp.basis.size()));
  const int Xi = B.add_gram_block(1);
  gp.gamma = B.add_free();
  std::vector<SosProgramBuilder::GramTerm> terms;
  terms.push_back(SosProgramBuilder::plain(gp.Q, gp.basis));
  terms.push_back(SosProgramBuilder::multiplied(
      Xi, {Monomial::unit(n)}, Polynomial::constant(n, 1.0) - q2));
  B.add_identity(terms, {{gp.gamma, Polynomial::constant(n, 1.0)}}, q1);
  B.prob.objective.free_terms.emplace_back(gp.gamma, -1.0);
  gp.prob = std::move(B.prob);
  return gp;
}

GrowthResult growth_from_bodies(const Polynomial& q1, const Polynomial& q2, bool exact,
                                const SolverConfig& config, double tol_cls,
                                const SdpSolution* warm_start) {
  GrowthProgram gp = compile_growth(q1, q2);
  SdpSolution sol = solve(gp.prob, config, warm_start);
  if (sol.status != SolveStatus::Optimal)
    throw SolverError(sol.status,
                      std::string("growth_distance: solver returned ") + to_string(sol.status));
  GrowthResult out;
  out.value = sol.free_values[gp.gamma];
  out.exact = exact;
  out.solve_stats = sol.stats;
  if (out.value > 1.0 + tol_cls) out.classification = GrowthClass::Separated;
  else if (out.value < 1.0 - tol_cls) out.classification = GrowthClass::Overlapping;
  else out.classification = GrowthClass::Touching;
  auto pt = recover_evaluation_point(sol.block_values[static_cast<size_t>(gp.Q)], gp.basis,
                                     q1.n_vars(), 1e-5, 1e-4);
  if (pt) {
    polish_growth_point(q1, q2, *pt);
    if (q2.eval(*pt) <= 1.0 + 1e-6 && std::abs(q1.eval(*pt) - out.value) <= 1e-4)
      out.minimizer = *pt;
  }
  out.raw = std::move(sol);
  return out;
}

}  // namespace

GrowthResult growth_distance(const FittedBody& p1, const FittedBody& p2,
                             const SolverConfig& config, double tol_cls,
                             const SdpSolution* warm_start) {
  if (p1.n_vars() != p2.n_vars())
    throw std::invalid_argument("growth_distance: dimension mismatch");
  BodySpec b1 = BodySpec::from_fitted(p1);
  BodySpec b2 = BodySpec::from_fitted(p2);
  const bool exact = b1.all_sos_convex() && b2.all_sos_convex();
  return growth_from_bodies(b1.constraints[0], b2.constraints[0], exact, config, tol_cls,
                            warm_start);
}

std::vector<GrowthResult> sweep_growth(const FittedBody& p1, const FittedBody& p2,
                                       const std::vector<Eigen::VectorXd>& translations,
                                       bool warm_start, const SolverConfig& config) {
  std::vector<GrowthResult> out;
  out.reserve(translations.size());
  const int n = p1.n_vars();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const SdpSolution* prev = nullptr;
  for (const auto& t : translations) {
    FittedBody moved = rigid_transform(p2, I, t);
    GrowthResult r = growth_distance(p1, moved, config, 1e-5, warm_start ? prev : nullptr);
    out.push_back(std::move(r));
    prev = &out.back().raw;
  }
  return out;
}

FittedBody rigid_transform(const FittedBody& body, const Eigen::MatrixXd& R,
                           const Eigen::VectorXd& t) {
  const int n = body.n_vars();
  if (R.rows() != n || R.cols() != n || t.size() != n)
    throw std::invalid_argument("rigid_transform: shape mismatch");
  if ((R.transpose() * R - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-8 ||
      std::abs(R.determinant() - 1.0) > 1e-8)
    throw std::invalid_argument("rigid_transform: R is not a rotation");

  // world body {x : p((x-c)/s) <= level} maps to center Rc + t with the
  // normalized-space polynomial precomposed by R^T
  FittedBody out = body;
  out.normalization.center = R * body.normalization.center + t;
  out.polynomial =
      body.polynomial.substitute_affine(R.transpose(), Eigen::VectorXd::Zero(n));
  if (body.gram_p)
    out.gram_p = transform_certificate(*body.gram_p, R.transpose(), Eigen::VectorXd::Zero(n));
  if (body.gram_h)
    out.gram_h = transform_certificate(*body.gram_h, R.transpose(), Eigen::VectorXd::Zero(n));
  return out;
}

}  // namespace sosgeom
