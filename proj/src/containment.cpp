#include "sosgeom/containment.hpp"

#include <Eigen/Dense>
#include <random>
#include <stdexcept>

#include "sosgeom/errors.hpp"
#include "sosgeom/sos_builder.hpp"

namespace sosgeom {

bool CheckReport::all_pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return !entries.empty();
}

namespace {

int default_multiplier_degree(const ContainmentProblem& problem) {
  int min_deg = problem.degree;
  for (const auto& t : problem.targets)
    for (const auto& g : t.constraints) min_deg = std::min(min_deg, g.degree());
  int md = problem.degree - min_deg;
  if (md < 0) md = 0;
  if (md % 2 != 0) ++md;  // sos multipliers need even degree
  return md;
}

}  // namespace

ContainmentCertificate contain(const ContainmentProblem& problem, FitObjective objective) {
  if (problem.targets.empty()) throw std::invalid_argument("contain: no targets");
  const int n = problem.targets[0].n_vars;
  for (const auto& t : problem.targets) {
    t.validate();
    if (t.n_vars != n) throw std::invalid_argument("contain: mixed target dimensions");
  }
  if (problem.degree < 2 || problem.degree % 2 != 0)
    throw std::invalid_argument("contain: container degree must be even and >= 2");
  const int mult_degree =
      problem.multiplier_degree >= 0 ? problem.multiplier_degree : default_multiplier_degree(problem);
  if (mult_degree % 2 != 0)
    throw std::invalid_argument("contain: multiplier degree must be even");

  const int d = problem.degree / 2;
  const MonomialBasis Z = MonomialBasis::up_to_degree(n, d);
  const HessianBasis Wb = HessianBasis::for_degree(n, d);
  const MonomialBasis Tb = MonomialBasis::up_to_degree(n, mult_degree / 2);
  const int N = Z.size();

  int max_gdeg = 0;
  for (const auto& t : problem.targets)
    for (const auto& g : t.constraints) max_gdeg = std::max(max_gdeg, g.degree());
  const int resid_deg = std::max(problem.degree, mult_degree + max_gdeg);
  const MonomialBasis Rb = MonomialBasis::up_to_degree(n, (resid_deg + 1) / 2);

  SosProgramBuilder B;
  int trace_block = -1;
  int P, Poff = 0;
  if (objective == FitObjective::Trace) {
    trace_block = B.add_gram_block(2 * N);
    P = trace_block;
    Poff = N;
  } else {
    P = B.add_gram_block(N);
  }
  const int H = B.add_gram_block(Wb.size());

  // sos-convexity of the container
  {
    std::vector<SosProgramBuilder::GramTerm> terms;
    terms.push_back(SosProgramBuilder::plain(H, Wb.entries));
    terms.push_back(SosProgramBuilder::hessian_mapped(P, Z.monomials, -1.0, Poff));
    B.add_identity(terms, {}, Polynomial(2 * n));
  }

  // per-target residual identity: R_t + p + sum_i tau_i (1 - g_i) == 1
  struct TargetBlocks {
    std::vector<int> taus;
    int resid;
  };
  std::vector<TargetBlocks> blocks;
  for (const auto& t : problem.targets) {
    TargetBlocks tb;
    std::vector<SosProgramBuilder::GramTerm> terms;
    tb.resid = B.add_gram_block(Rb.size());
    terms.push_back(SosProgramBuilder::plain(tb.resid, Rb.monomials));
    terms.push_back(SosProgramBuilder::plain(P, Z.monomials, 1.0, Poff));
    for (const auto& g : t.constraints) {
      const int Tg = B.add_gram_block(Tb.size());
      tb.taus.push_back(Tg);
      terms.push_back(
          SosProgramBuilder::multiplied(Tg, Tb.monomials, Polynomial::constant(n, 1.0) - g));
    }
    B.add_identity(terms, {}, Polynomial::constant(n, 1.0));
    blocks.push_back(std::move(tb));
  }

  if (trace_block >= 0) {
    for (int a = 0; a < N; ++a) {
      for (int b2 = 0; b2 < N; ++b2) {
        LinearRow& row = B.new_row(a == b2 ? 1.0 : 0.0);
        SosProgramBuilder::add_entry(row, trace_block, a, N + b2, 0.5);
      }
    }
    for (int a = 0; a < N; ++a) {
      BlockCoeff bc;
      bc.block = trace_block;
      bc.entries.push_back({a, a, 1.0});
      B.prob.objective.blocks.push_back(bc);
    }
  } else {
    B.prob.objective.logdet_block = P;
  }

  SolverConfig cfg = problem.solver;
  cfg.block_dim_cap = std::max(cfg.block_dim_cap, std::max(2 * N, Rb.size()));
  cfg.tol_gap = std::max(cfg.tol_gap, 1e-6);  // same dual degeneracy as the fits
  SdpSolution sol = solve(B.prob, cfg);
  if (sol.status == SolveStatus::Infeasible) {
    throw SolverError(SolveStatus::Infeasible,
                      "contain: infeasible at degree " + std::to_string(problem.degree) +
                          " with multiplier degree " + std::to_string(mult_degree) +
                          "; raising multiplier_degree by 2 may admit a certificate");
  }
  if (sol.status != SolveStatus::Optimal)
    throw SolverError(sol.status, std::string("contain: solver returned ") + to_string(sol.status));

  ContainmentCertificate out;
  out.targets = problem.targets;
  out.multiplier_degree = mult_degree;

  GramCertificate gp;
  gp.kind = GramKind::Sos;
  gp.n_vars = n;
  gp.basis_degree = d;
  gp.matrix = sol.block_values[static_cast<size_t>(P)].block(Poff, Poff, N, N);
  GramCertificate gh;
  gh.kind = GramKind::SosConvex;
  gh.n_vars = n;
  gh.basis_degree = d;
  gh.matrix = sol.block_values[static_cast<size_t>(H)];

  out.container.polynomial = gram_expand(Z.monomials, gp.matrix);
  out.container.level = 1.0;
  out.container.normalization = Normalization::identity(n);
  out.container.gram_p = gp;
  out.container.gram_h = gh;
  out.container.objective_value = sol.objective_value;
  out.container.formulation =
      objective == FitObjective::Logdet ? FitFormulation::GramLogdet : FitFormulation::GramTrace;

  for (size_t t = 0; t < problem.targets.size(); ++t) {
    TargetCertificate tc;
    for (int tg : blocks[t].taus) {
      GramCertificate mg;
      mg.kind = GramKind::Sos;
      mg.n_vars = n;
      mg.basis_degree = mult_degree / 2;
      mg.matrix = sol.block_values[static_cast<size_t>(tg)];
      tc.multipliers.push_back(gram_expand(Tb.monomials, mg.matrix));
      tc.multiplier_grams.push_back(std::move(mg));
    }
    GramCertificate rg;
    rg.kind = GramKind::Sos;
    rg.n_vars = n;
    rg.basis_degree = (resid_deg + 1) / 2;
    rg.matrix = sol.block_values[static_cast<size_t>(blocks[t].resid)];
    tc.residual_gram = std::move(rg);
    out.per_target.push_back(std::move(tc));
  }
  return out;
}

namespace {

// Uniform sampler inside a target; exact for single-constraint bodies with a
// positive definite quadratic part, rejection from the enclosing box else.
struct TargetSampler {
  bool ok = false;
  bool exact = false;
  Eigen::MatrixXd ell_L;  // maps unit ball to the ellipsoid
  Eigen::VectorXd ell_c;
  Eigen::VectorXd lo, hi;
  const BodySpec* body = nullptr;

  static TargetSampler make(const BodySpec& t) {
    TargetSampler s;
    s.body = &t;
    const int n = t.n_vars;
    if (t.constraints.size() == 1 && t.constraints[0].degree() == 2) {
      const Polynomial& g = t.constraints[0];
      Eigen::MatrixXd A = 0.5 * g.hessian_at(Eigen::VectorXd::Zero(n));
      Eigen::LLT<Eigen::MatrixXd> llt(A);
      if (llt.info() == Eigen::Success) {
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) b[i] = g.coeff(Monomial::var(n, i));
        Eigen::VectorXd c = -0.5 * A.ldlt().solve(b);
        double r2 = 1.0 - g.eval(c);
        if (r2 > 0) {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A / r2);
          s.ell_L = es.eigenvectors() *
                    es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                    es.eigenvectors().transpose();
          s.ell_c = c;
          s.ok = s.exact = true;
          return s;
        }
      }
    }
    // rejection fallback: box from per-axis sublevel probing around origin
    s.lo = Eigen::VectorXd::Constant(n, -8.0);
    s.hi = Eigen::VectorXd::Constant(n, 8.0);
    s.ok = true;
    return s;
  }

  template <typename Rng>
  bool draw(Rng& rng, Eigen::VectorXd& x) const {
    const int n = body->n_vars;
    std::normal_distribution<double> N01(0, 1);
    std::uniform_real_distribution<double> U(0, 1);
    if (exact) {
      Eigen::VectorXd u(n);
      for (int i = 0; i < n; ++i) u[i] = N01(rng);
      u *= std::pow(U(rng), 1.0 / n) / u.norm();
      x = ell_L * u + ell_c;
      return true;
    }
    for (int tries = 0; tries < 200; ++tries) {
      x.resize(n);
      for (int i = 0; i < n; ++i) x[i] = lo[i] + U(rng) * (hi[i] - lo[i]);
      if (body->feasible(x, 0.0)) return true;
    }
    return false;
  }
};

}  // namespace

CheckReport verify_certificate(const ContainmentCertificate& cert, unsigned long long seed,
                               int samples_per_target, double eps_coef, double eps_psd) {
  CheckReport rep;
  const Polynomial& p = cert.container.polynomial;  // identity normalization

  // container's own certificates
  {
    CheckReport::Entry e;
    e.name = "container sos gram expands to p";
    double diff = cert.container.gram_p
                      ? (cert.container.gram_p->expand() - p).max_abs_coeff()
                      : std::numeric_limits<double>::infinity();
    e.margin = eps_coef - diff;
    e.pass = e.margin >= 0;
    rep.entries.push_back(e);
  }
  if (cert.container.gram_h) {
    CheckReport::Entry e;
    e.name = "container sos-convexity gram matches hessian form";
    double diff = (cert.container.gram_h->expand() - p.hessian_form()).max_abs_coeff();
    e.margin = eps_coef - diff;
    e.pass = e.margin >= 0;
    rep.entries.push_back(e);
  }

  auto psd_entry = [&](const std::string& name, const GramCertificate& g) {
    CheckReport::Entry e;
    e.name = name;
    e.margin = g.min_eigenvalue() + eps_psd;
    e.pass = e.margin >= 0;
    rep.entries.push_back(e);
  };
  if (cert.container.gram_p) psd_entry("container gram psd", *cert.container.gram_p);
  if (cert.container.gram_h) psd_entry("container hessian gram psd", *cert.container.gram_h);

  for (size_t t = 0; t < cert.targets.size(); ++t) {
    const auto& target = cert.targets[t];
    const auto& tc = cert.per_target[t];
    const std::string tag = "target " + std::to_string(t);

    // (a) residual identity, coefficient-wise
    Polynomial expected = Polynomial::constant(p.n_vars(), 1.0) - p;
    for (size_t i = 0; i < target.constraints.size(); ++i) {
      expected =
          expected - tc.multipliers[i] * (Polynomial::constant(p.n_vars(), 1.0) -
                                          target.constraints[i]);
    }
    {
      CheckReport::Entry e;
      e.name = tag + " residual identity";
      double diff = (tc.residual_gram.expand() - expected).max_abs_coeff();
      e.margin = eps_coef - diff;
      e.pass = e.margin >= 0;
      rep.entries.push_back(e);
    }
    for (size_t i = 0; i < tc.multiplier_grams.size(); ++i) {
      CheckReport::Entry e;
      e.name = tag + " multiplier " + std::to_string(i) + " gram expands";
      double diff = (tc.multiplier_grams[i].expand() - tc.multipliers[i]).max_abs_coeff();
      e.margin = eps_coef - diff;
      e.pass = e.margin >= 0;
      rep.entries.push_back(e);
      psd_entry(tag + " multiplier " + std::to_string(i) + " psd", tc.multiplier_grams[i]);
    }
    psd_entry(tag + " residual gram psd", tc.residual_gram);

    // (c) sampled containment
    {
      CheckReport::Entry e;
      e.name = tag + " sampled containment";
      TargetSampler sampler = TargetSampler::make(target);
      std::mt19937_64 rng(seed + 1000 * t);
      int inside = 0, drawn = 0;
      Eigen::VectorXd x;
      for (int k = 0; k < samples_per_target; ++k) {
        if (!sampler.draw(rng, x)) break;
        ++drawn;
        if (cert.container.eval_world(x) <= cert.container.level + 1e-6) ++inside;
      }
      if (drawn < samples_per_target) {
        e.pass = false;
        e.note = "sampler starved (target empty or unbounded?)";
      } else {
        double frac = static_cast<double>(inside) / drawn;
        e.margin = frac - 0.999;
        e.pass = e.margin >= 0;
        e.note = std::to_string(inside) + "/" + std::to_string(drawn);
      }
      rep.entries.push_back(e);
    }
  }
  return rep;
}

}  // namespace sosgeom
