#include "sosgeom/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "sosgeom/errors.hpp"
#include "sosgeom/sos_builder.hpp"

namespace sosgeom {

const char* to_string(FitFormulation f) {
  switch (f) {
    case FitFormulation::HessianLogdet: return "hessian_logdet";
    case FitFormulation::HessianTrace: return "hessian_trace";
    case FitFormulation::GramLogdet: return "gram_logdet";
    case FitFormulation::GramTrace: return "gram_trace";
    case FitFormulation::InverseMoment: return "inverse_moment";
  }
  return "unknown";
}

FitFormulation fit_formulation_from_string(const std::string& s) {
  if (s == "hessian_logdet") return FitFormulation::HessianLogdet;
  if (s == "hessian_trace") return FitFormulation::HessianTrace;
  if (s == "gram_logdet") return FitFormulation::GramLogdet;
  if (s == "gram_trace") return FitFormulation::GramTrace;
  if (s == "inverse_moment") return FitFormulation::InverseMoment;
  throw std::invalid_argument("unknown formulation: " + s);
}

double FittedBody::eval_world(const Eigen::VectorXd& x) const {
  return polynomial.eval(normalization.to_normalized(x));
}

bool FittedBody::contains_world(const Eigen::VectorXd& x, double margin) const {
  return eval_world(x) <= level + margin;
}

Polynomial FittedBody::polynomial_world() const {
  const int n = polynomial.n_vars();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) / normalization.scale;
  Eigen::VectorXd b = -normalization.center / normalization.scale;
  return polynomial.substitute_affine(A, b);
}

namespace {

void require_fittable(const PointCloud& cloud, int degree) {
  if (degree < 2 || degree % 2 != 0)
    throw std::invalid_argument("fit: degree must be even and >= 2");
  if (cloud.size() == 0) throw std::invalid_argument("fit: empty point cloud");
  if (!cloud.full_dimensional())
    throw std::invalid_argument("fit: degenerate cloud (affine hull is not full-dimensional)");
}

std::vector<int> initial_active_set(const std::vector<Eigen::VectorXd>& pts, int cap) {
  const int m = static_cast<int>(pts.size());
  if (m <= cap) {
    std::vector<int> all(static_cast<size_t>(m));
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  std::set<int> chosen;
  const int n = static_cast<int>(pts[0].size());
  for (int j = 0; j < n; ++j) {
    int lo = 0, hi = 0;
    for (int i = 1; i < m; ++i) {
      if (pts[static_cast<size_t>(i)][j] < pts[static_cast<size_t>(lo)][j]) lo = i;
      if (pts[static_cast<size_t>(i)][j] > pts[static_cast<size_t>(hi)][j]) hi = i;
    }
    chosen.insert(lo);
    chosen.insert(hi);
  }
  std::mt19937 rng(1u);
  std::uniform_int_distribution<int> pick(0, m - 1);
  while (static_cast<int>(chosen.size()) < cap) chosen.insert(pick(rng));
  return {chosen.begin(), chosen.end()};
}

struct CompiledFit {
  SdpProblem prob;
  int gram_block = -1;   // block holding P (or Q for hessian formulations)
  int gram_offset = 0;   // index offset of P inside its block (trace variant)
  int hess_block = -1;   // block holding H
  int hess_offset = 0;
  int first_slack = -1;  // slack blocks come last, one per active point
};

// Shared compile for the four SDP-based formulations. `hessian_objective`
// puts the volume objective on the Hessian-form Gram, otherwise on the sos
// Gram of p itself.
CompiledFit compile_fit(const std::vector<Eigen::VectorXd>& pts, const std::vector<int>& active,
                        int n, int d, bool hessian_objective, FitObjective objective,
                        double convexity_c) {
  const MonomialBasis Z = MonomialBasis::up_to_degree(n, d);
  const HessianBasis Wb = HessianBasis::for_degree(n, d);
  const int N = Z.size();
  const int Nh = Wb.size();

  CompiledFit out;
  SosProgramBuilder B;

  // main Gram (for p) and Hessian-form Gram, possibly embedded in a larger
  // [[V, I], [I, .]] block for the trace objective
  int pvar_block, pvar_off = 0, hvar_block, hvar_off = 0;
  int trace_block = -1, trace_dim = 0;
  if (objective == FitObjective::Trace) {
    trace_dim = hessian_objective ? Nh : N;
    trace_block = B.add_gram_block(2 * trace_dim);
  }
  if (hessian_objective) {
    pvar_block = B.add_gram_block(N);
    hvar_block = trace_block >= 0 ? trace_block : B.add_gram_block(Nh);
    hvar_off = trace_block >= 0 ? trace_dim : 0;
  } else {
    pvar_block = trace_block >= 0 ? trace_block : B.add_gram_block(N);
    pvar_off = trace_block >= 0 ? trace_dim : 0;
    hvar_block = B.add_gram_block(Nh);
  }

  // Hessian-form identity: w^T H w - y' Hess(p) y = c * Hess(|x|^2d form)
  Polynomial target(2 * n);
  if (convexity_c != 0.0) {
    Polynomial ssq(n);
    for (int i = 0; i < n; ++i) ssq.add_term(Monomial::var(n, i, 2), 1.0);
    Polynomial pow = Polynomial::constant(n, 1.0);
    for (int k = 0; k < d; ++k) pow = pow * ssq;
    target = pow.hessian_form() * convexity_c;
  }
  std::vector<SosProgramBuilder::GramTerm> terms;
  terms.push_back(SosProgramBuilder::plain(hvar_block, Wb.entries, 1.0, hvar_off));
  terms.push_back(SosProgramBuilder::hessian_mapped(pvar_block, Z.monomials, -1.0, pvar_off));
  B.add_identity(terms, {}, target);

  // trace coupling: off-diagonal block pinned to the identity
  if (trace_block >= 0) {
    for (int a = 0; a < trace_dim; ++a) {
      for (int b = 0; b < trace_dim; ++b) {
        LinearRow& row = B.new_row(a == b ? 1.0 : 0.0);
        SosProgramBuilder::add_entry(row, trace_block, a, trace_dim + b, 0.5);
      }
    }
    for (int a = 0; a < trace_dim; ++a) {
      BlockCoeff bc;
      bc.block = trace_block;
      bc.entries.push_back({a, a, 1.0});
      B.prob.objective.blocks.push_back(bc);
    }
  } else {
    B.prob.objective.logdet_block = hessian_objective ? hvar_block : pvar_block;
    B.prob.objective.logdet_weight = 1.0;
  }

  // containment rows p(x_i) + s_i = 1 on the active subset
  out.first_slack = static_cast<int>(B.prob.block_dims.size());
  const int full_dim = trace_block >= 0 && !hessian_objective ? 2 * N : N;
  for (int idx : active) {
    const int slack = B.prob.add_block(1);
    LinearRow& row = B.new_row(1.0);
    Eigen::VectorXd z = Z.eval(pts[static_cast<size_t>(idx)]);
    if (pvar_off > 0) {
      Eigen::VectorXd zp = Eigen::VectorXd::Zero(full_dim);
      zp.tail(N) = z;
      SosProgramBuilder::add_rank_one(row, pvar_block, zp);
    } else {
      SosProgramBuilder::add_rank_one(row, pvar_block, z);
    }
    SosProgramBuilder::add_entry(row, slack, 0, 0, 1.0);
  }

  out.prob = std::move(B.prob);
  out.gram_block = pvar_block;
  out.gram_offset = pvar_off;
  out.hess_block = hvar_block;
  out.hess_offset = hvar_off;
  return out;
}

FittedBody fit_sdp(const PointCloud& cloud, int degree, bool hessian_objective,
                   FitObjective objective, double convexity_c, const SolverConfig& config,
                   FitFormulation tag) {
  require_fittable(cloud, degree);
  const int n = cloud.dim();
  const int d = degree / 2;
  Normalization nrm = cloud.normalization();
  const auto pts = cloud.normalized_points(nrm);
  const MonomialBasis Z = MonomialBasis::up_to_degree(n, d);

  SolverConfig cfg = config;
  cfg.block_dim_cap = std::max(cfg.block_dim_cap, 2 * std::max(Z.size(),
                               HessianBasis::for_degree(n, d).size()));
  // Above degree 2 the Gram ambiguity of the side constraints leaves these
  // programs dual degenerate; duality gaps below 1e-6 are not reliably
  // attainable there in double precision, and downstream consumers need far
  // less. Degree-2 programs have unique Grams and keep the tight default.
  if (degree > 2) cfg.tol_gap = std::max(cfg.tol_gap, 1e-6);

  std::vector<int> active = initial_active_set(pts, 300);
  SdpSolution sol;
  CompiledFit comp;
  Polynomial p(n);
  bool converged = false;
  for (int round = 0; round < 15; ++round) {
    comp = compile_fit(pts, active, n, d, hessian_objective, objective, convexity_c);
    sol = solve(comp.prob, cfg);
    if (sol.status != SolveStatus::Optimal)
      throw SolverError(sol.status, std::string("fit: solver returned ") + to_string(sol.status));
    const Eigen::MatrixXd P = sol.block_values[static_cast<size_t>(comp.gram_block)]
                                  .block(comp.gram_offset, comp.gram_offset, Z.size(), Z.size());
    p = gram_expand(Z.monomials, P);
    // violation scan over the full cloud
    std::vector<std::pair<double, int>> viol;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      double v = p.eval(pts[static_cast<size_t>(i)]) - 1.0;
      if (v > 1e-8) viol.emplace_back(v, i);
    }
    if (viol.empty()) {
      converged = true;
      break;
    }
    std::sort(viol.rbegin(), viol.rend());
    std::set<int> next(active.begin(), active.end());
    for (size_t i = 0; i < viol.size() && i < 200; ++i) next.insert(viol[i].second);
    if (next.size() == active.size()) {
      converged = true;  // violations below solver accuracy, nothing to add
      break;
    }
    active.assign(next.begin(), next.end());
  }
  if (!converged)
    throw SolverError(SolveStatus::NumericalFailure, "fit: active-set refinement did not settle");

  FittedBody body;
  body.polynomial = p;
  body.level = 1.0;
  body.normalization = nrm;
  body.objective_value = sol.objective_value;
  body.formulation = tag;

  GramCertificate gp;
  gp.kind = GramKind::Sos;
  gp.n_vars = n;
  gp.basis_degree = d;
  gp.matrix = sol.block_values[static_cast<size_t>(comp.gram_block)]
                  .block(comp.gram_offset, comp.gram_offset, Z.size(), Z.size());
  body.gram_p = gp;

  if (convexity_c == 0.0) {
    const int Nh = HessianBasis::for_degree(n, d).size();
    GramCertificate gh;
    gh.kind = GramKind::SosConvex;
    gh.n_vars = n;
    gh.basis_degree = d;
    gh.matrix = sol.block_values[static_cast<size_t>(comp.hess_block)]
                    .block(comp.hess_offset, comp.hess_offset, Nh, Nh);
    body.gram_h = gh;
  }
  return body;
}

}  // namespace

FittedBody fit_hessian(const PointCloud& cloud, int degree, FitObjective objective,
                       const SolverConfig& config) {
  return fit_sdp(cloud, degree, true, objective, 0.0, config,
                 objective == FitObjective::Logdet ? FitFormulation::HessianLogdet
                                                   : FitFormulation::HessianTrace);
}

FittedBody fit_gram(const PointCloud& cloud, int degree, FitObjective objective,
                    double convexity_c, const SolverConfig& config) {
  if (convexity_c < 0) throw std::invalid_argument("fit_gram: convexity_c must be >= 0");
  return fit_sdp(cloud, degree, false, objective, convexity_c, config,
                 objective == FitObjective::Logdet ? FitFormulation::GramLogdet
                                                   : FitFormulation::GramTrace);
}

FittedBody fit_inverse_moment(const PointCloud& cloud, int degree, double cond_limit) {
  require_fittable(cloud, degree);
  const int n = cloud.dim();
  const int d = degree / 2;
  Normalization nrm = cloud.normalization();
  const auto pts = cloud.normalized_points(nrm);
  const MonomialBasis Z = MonomialBasis::up_to_degree(n, d);
  const int N = Z.size();

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
  for (const auto& q : pts) {
    Eigen::VectorXd z = Z.eval(q);
    M.noalias() += z * z.transpose();
  }
  M /= cloud.size();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
  if (lmin <= 0 || lmax / lmin > cond_limit) {
    throw std::invalid_argument(
        "fit_inverse_moment: singular moment matrix (condition number " +
        std::to_string(lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity()) + ")");
  }
  Eigen::MatrixXd Minv =
      es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  Minv = 0.5 * (Minv + Minv.transpose()).eval();

  FittedBody body;
  body.polynomial = gram_expand(Z.monomials, Minv);
  body.normalization = nrm;
  body.formulation = FitFormulation::InverseMoment;
  double gamma = 0.0;
  for (const auto& q : pts) gamma = std::max(gamma, body.polynomial.eval(q));
  body.level = gamma;
  body.objective_value = 0.0;
  GramCertificate gp;
  gp.kind = GramKind::Sos;
  gp.n_vars = n;
  gp.basis_degree = d;
  gp.matrix = Minv;
  body.gram_p = gp;
  return body;
}

FittedBody fit_body(const PointCloud& cloud, const FitRequest& request) {
  switch (request.formulation) {
    case FitFormulation::HessianLogdet:
      return fit_hessian(cloud, request.degree, FitObjective::Logdet, request.solver);
    case FitFormulation::HessianTrace:
      return fit_hessian(cloud, request.degree, FitObjective::Trace, request.solver);
    case FitFormulation::GramLogdet:
      return fit_gram(cloud, request.degree, FitObjective::Logdet, request.convexity_c,
                      request.solver);
    case FitFormulation::GramTrace:
      return fit_gram(cloud, request.degree, FitObjective::Trace, request.convexity_c,
                      request.solver);
    case FitFormulation::InverseMoment:
      return fit_inverse_moment(cloud, request.degree);
  }
  throw std::invalid_argument("fit_body: bad formulation");
}

EllipsoidForm ellipsoid_form(const FittedBody& body) {
  const Polynomial& p = body.polynomial;
  const int n = p.n_vars();
  if (p.degree() != 2) throw std::invalid_argument("ellipsoid_form: degree-2 bodies only");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (const auto& [m, c] : p.terms()) {
    const int deg = m.degree();
    if (deg == 1) {
      for (int i = 0; i < n; ++i)
        if (m.exponents[static_cast<size_t>(i)] == 1) b[i] = c;
    } else if (deg == 2) {
      int i = -1, j = -1;
      for (int v = 0; v < n; ++v) {
        if (m.exponents[static_cast<size_t>(v)] == 2) i = j = v;
        else if (m.exponents[static_cast<size_t>(v)] == 1) (i < 0 ? i : j) = v;
      }
      if (i == j) A(i, i) = c;
      else {
        A(i, j) = c / 2;
        A(j, i) = c / 2;
      }
    }
  }
  EllipsoidForm out;
  out.center = -0.5 * A.ldlt().solve(b);
  const double s = p.eval(out.center);
  if (body.level - s <= 0) throw std::invalid_argument("ellipsoid_form: empty sublevel set");
  out.shape = A / (body.level - s);
  out.volume_normalized =
      std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0) / std::sqrt(out.shape.determinant());
  out.volume_world = out.volume_normalized * std::pow(body.normalization.scale, n);
  out.center = body.normalization.to_world(out.center);
  return out;
}

}  // namespace sosgeom
