#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sosgeom/sdp.hpp"

namespace sosgeom {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

double frob(const MatrixXd& m) { return m.norm(); }

// ---------------------------------------------------------------------------
// Preprocessed constraint data: unit-normalized rows, redundant rows dropped.

struct Prep {
  const SdpProblem* prob = nullptr;
  int p = 0;                       // kept rows
  std::vector<int> keep;           // kept row -> original row index
  std::vector<double> row_scale;   // scale applied to each kept row
  VectorXd inv_scale;              // 1/row_scale, for original-units residuals
  double normb_orig = 0.0;
  std::vector<LinearRow> rows;     // scaled kept rows
  VectorXd b;                      // scaled rhs
  MatrixXd F;                      // p x n_free
  VectorXd cf;                     // free objective
  std::vector<MatrixXd> C;         // dense objective blocks
  std::vector<std::vector<std::pair<int, const BlockCoeff*>>> by_block;
  int dropped = 0;

  int n_blocks() const { return static_cast<int>(prob->block_dims.size()); }
  int dim(int k) const { return prob->block_dims[static_cast<size_t>(k)]; }
};

// Schur complement M = A_c W (.) W A_c^T for given per-block scalings.
// Identity scalings are used for the rank filter.
MatrixXd assemble_schur(const Prep& pp, const std::vector<MatrixXd>* W) {
  const int p = pp.p;
  MatrixXd M = MatrixXd::Zero(p, p);
  for (int k = 0; k < pp.n_blocks(); ++k) {
    const auto& rows_k = pp.by_block[static_cast<size_t>(k)];
    if (rows_k.empty()) continue;
    const int n = pp.dim(k);
    const MatrixXd* Wk = W ? &(*W)[static_cast<size_t>(k)] : nullptr;

    // Cache W z for rank-one rows.
    std::vector<int> r1_rows, sp_rows;
    std::vector<VectorXd> wz;
    for (size_t t = 0; t < rows_k.size(); ++t) {
      if (rows_k[t].second->rank_one) {
        r1_rows.push_back(static_cast<int>(t));
        wz.push_back(Wk ? (*Wk * rows_k[t].second->z).eval() : rows_k[t].second->z);
      } else {
        sp_rows.push_back(static_cast<int>(t));
      }
    }
    // rank-one x rank-one: (z_i^T W z_j)^2
    for (size_t a = 0; a < r1_rows.size(); ++a) {
      const auto& ra = rows_k[static_cast<size_t>(r1_rows[a])];
      for (size_t bq = a; bq < r1_rows.size(); ++bq) {
        const auto& rb = rows_k[static_cast<size_t>(r1_rows[bq])];
        double v = ra.second->z.dot(wz[bq]);
        int i = ra.first, j = rb.first;
        M(std::max(i, j), std::min(i, j)) += v * v;
      }
    }
    // sparse rows: T_j = W A_j W once, then sparse dots / quad forms
    MatrixXd Bbuf(n, n), Tj(n, n);
    for (size_t jb = 0; jb < sp_rows.size(); ++jb) {
      const auto& rj = rows_k[static_cast<size_t>(sp_rows[jb])];
      if (Wk) {
        Bbuf.setZero();
        for (const auto& e : rj.second->entries) {
          Bbuf.row(e.r) += e.v * Wk->row(e.c);
          if (e.r != e.c) Bbuf.row(e.c) += e.v * Wk->row(e.r);
        }
        Tj.setZero();
        for (const auto& e : rj.second->entries) {
          Tj.noalias() += Wk->col(e.r) * Bbuf.row(e.r);
          Bbuf.row(e.r).setZero();  // consume so shared rows are not double counted
          if (e.r != e.c && Bbuf.row(e.c).squaredNorm() > 0) {
            Tj.noalias() += Wk->col(e.c) * Bbuf.row(e.c);
            Bbuf.row(e.c).setZero();
          }
        }
      } else {
        Tj.setZero();
        rj.second->add_to(Tj, 1.0);
      }
      // vs sparse rows with index <= this one
      for (size_t ib = 0; ib <= jb; ++ib) {
        const auto& ri = rows_k[static_cast<size_t>(sp_rows[ib])];
        double v = 0.0;
        for (const auto& e : ri.second->entries)
          v += (e.r == e.c ? 1.0 : 2.0) * e.v * Tj(e.r, e.c);
        int i = ri.first, j = rj.first;
        M(std::max(i, j), std::min(i, j)) += v;
      }
      // vs rank-one rows: z^T (W A_j W) z
      for (size_t ab = 0; ab < r1_rows.size(); ++ab) {
        const auto& ra = rows_k[static_cast<size_t>(r1_rows[ab])];
        double v = ra.second->z.dot(Tj * ra.second->z);
        int i = ra.first, j = rj.first;
        M(std::max(i, j), std::min(i, j)) += v;
      }
    }
  }
  M.triangularView<Eigen::StrictlyUpper>() = M.transpose();
  return M;
}

// Greedy pivoted Cholesky on the row Gram matrix; returns kept row indices.
std::vector<int> full_rank_subset(MatrixXd G, double rel_tol) {
  const int p = static_cast<int>(G.rows());
  std::vector<int> perm(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) perm[static_cast<size_t>(i)] = i;
  double d0 = G.diagonal().maxCoeff();
  if (d0 <= 0) return {};
  std::vector<int> kept;
  for (int k = 0; k < p; ++k) {
    int best = k;
    for (int j = k + 1; j < p; ++j)
      if (G(j, j) > G(best, best)) best = j;
    if (G(best, best) <= rel_tol * d0) break;
    if (best != k) {
      G.row(k).swap(G.row(best));
      G.col(k).swap(G.col(best));
      std::swap(perm[static_cast<size_t>(k)], perm[static_cast<size_t>(best)]);
    }
    const double piv = std::sqrt(G(k, k));
    G.col(k).tail(p - k) /= piv;
    // trailing update on the lower triangle
    if (k + 1 < p)
      G.bottomRightCorner(p - k - 1, p - k - 1).selfadjointView<Eigen::Lower>().rankUpdate(
          G.col(k).tail(p - k - 1), -1.0);
    kept.push_back(perm[static_cast<size_t>(k)]);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

Prep preprocess(const SdpProblem& prob, const SolverConfig& cfg, int* dropped_out) {
  Prep pp;
  pp.prob = &prob;
  const int p0 = static_cast<int>(prob.rows.size());

  // Scale every row (coefficients and rhs) to unit Frobenius norm.
  std::vector<LinearRow> scaled(prob.rows.begin(), prob.rows.end());
  std::vector<double> scales(static_cast<size_t>(p0), 1.0);
  for (int i = 0; i < p0; ++i) {
    auto& row = scaled[static_cast<size_t>(i)];
    double nrm2 = 0.0;
    for (const auto& bc : row.blocks) nrm2 += bc.frob_norm_sq();
    for (const auto& [idx, v] : row.free_terms) {
      (void)idx;
      nrm2 += v * v;
    }
    double s = nrm2 > 0 ? 1.0 / std::sqrt(nrm2) : 1.0;
    scales[static_cast<size_t>(i)] = s;
    for (auto& bc : row.blocks) {
      if (bc.rank_one) bc.z *= std::sqrt(s);
      else
        for (auto& e : bc.entries) e.v *= s;
    }
    for (auto& [idx, v] : row.free_terms) {
      (void)idx;
      v *= s;
    }
    row.rhs *= s;
  }

  auto install = [&](const std::vector<int>& keep) {
    pp.keep = keep;
    pp.p = static_cast<int>(keep.size());
    pp.rows.clear();
    pp.row_scale.clear();
    pp.b.resize(pp.p);
    for (int i = 0; i < pp.p; ++i) {
      pp.rows.push_back(scaled[static_cast<size_t>(keep[static_cast<size_t>(i)])]);
      pp.row_scale.push_back(scales[static_cast<size_t>(keep[static_cast<size_t>(i)])]);
      pp.b[i] = pp.rows.back().rhs;
    }
    pp.inv_scale.resize(pp.p);
    double bn2 = 0.0;
    for (int i = 0; i < pp.p; ++i) {
      pp.inv_scale[i] = 1.0 / pp.row_scale[static_cast<size_t>(i)];
      const double borig = pp.b[i] * pp.inv_scale[i];
      bn2 += borig * borig;
    }
    pp.normb_orig = std::sqrt(bn2);
    pp.by_block.assign(static_cast<size_t>(pp.n_blocks()), {});
    for (int i = 0; i < pp.p; ++i)
      for (const auto& bc : pp.rows[static_cast<size_t>(i)].blocks)
        pp.by_block[static_cast<size_t>(bc.block)].emplace_back(i, &bc);
    pp.F = MatrixXd::Zero(pp.p, prob.n_free);
    for (int i = 0; i < pp.p; ++i)
      for (const auto& [idx, v] : pp.rows[static_cast<size_t>(i)].free_terms) pp.F(i, idx) = v;
  };

  std::vector<int> all(static_cast<size_t>(p0));
  for (int i = 0; i < p0; ++i) all[static_cast<size_t>(i)] = i;
  install(all);

  // Rank filter: cheap LLT first, pivoted Cholesky only on failure.
  {
    MatrixXd G = assemble_schur(pp, nullptr);
    G.noalias() += pp.F * pp.F.transpose();
    Eigen::LLT<MatrixXd> llt(G + 1e-13 * G.diagonal().maxCoeff() * MatrixXd::Identity(pp.p, pp.p));
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
      VectorXd d = llt.matrixLLT().diagonal();
      ok = (d.array() * d.array()).minCoeff() > cfg.rank_tol * G.diagonal().maxCoeff();
    }
    if (!ok) {
      std::vector<int> kept = full_rank_subset(G, cfg.rank_tol);
      install(kept);
    }
  }
  *dropped_out = p0 - pp.p;

  pp.cf = VectorXd::Zero(prob.n_free);
  for (const auto& [idx, v] : prob.objective.free_terms) pp.cf[idx] += v;
  pp.C.clear();
  for (int k = 0; k < pp.n_blocks(); ++k) pp.C.emplace_back(MatrixXd::Zero(pp.dim(k), pp.dim(k)));
  for (const auto& bc : prob.objective.blocks) pp.C[static_cast<size_t>(bc.block)] += [&] {
    MatrixXd m = MatrixXd::Zero(pp.dim(bc.block), pp.dim(bc.block));
    bc.add_to(m, 1.0);
    return m;
  }();
  return pp;
}

// A(X, u) over kept rows.
VectorXd apply_A(const Prep& pp, const std::vector<MatrixXd>& X, const VectorXd& u) {
  VectorXd out(pp.p);
  for (int i = 0; i < pp.p; ++i) {
    const auto& row = pp.rows[static_cast<size_t>(i)];
    double v = 0.0;
    for (const auto& bc : row.blocks) v += bc.inner(X[static_cast<size_t>(bc.block)]);
    for (const auto& [idx, c] : row.free_terms) v += c * u[idx];
    out[i] = v;
  }
  return out;
}

// A^*(y) accumulated into dense blocks.
std::vector<MatrixXd> apply_At(const Prep& pp, const VectorXd& y) {
  std::vector<MatrixXd> out;
  for (int k = 0; k < pp.n_blocks(); ++k) out.emplace_back(MatrixXd::Zero(pp.dim(k), pp.dim(k)));
  for (int i = 0; i < pp.p; ++i)
    for (const auto& bc : pp.rows[static_cast<size_t>(i)].blocks)
      bc.add_to(out[static_cast<size_t>(bc.block)], y[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Nesterov-Todd scaling per block.

struct Scaling {
  MatrixXd G, Ginv, W;
  VectorXd lambda;
  Eigen::LLT<MatrixXd> llt_x, llt_s;
  bool ok = false;
};

Scaling nt_scaling(const MatrixXd& X, const MatrixXd& S) {
  Scaling sc;
  sc.llt_x.compute(X);
  sc.llt_s.compute(S);
  if (sc.llt_x.info() != Eigen::Success || sc.llt_s.info() != Eigen::Success) return sc;
  MatrixXd Rx = sc.llt_x.matrixL();
  MatrixXd Ls = sc.llt_s.matrixL();
  Eigen::BDCSVD<MatrixXd> svd(Ls.transpose() * Rx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  sc.lambda = svd.singularValues();
  const double tiny = 1e-150;
  if (sc.lambda.minCoeff() < tiny) return sc;
  VectorXd li = sc.lambda.array().sqrt().inverse();
  sc.G = Rx * svd.matrixV() * li.asDiagonal();
  // G^{-1} = diag(sqrt(lambda)) V^T Rx^{-1}
  MatrixXd Rxi = Rx.triangularView<Eigen::Lower>().solve(
      MatrixXd::Identity(Rx.rows(), Rx.cols()));
  sc.Ginv = sc.lambda.array().sqrt().matrix().asDiagonal() * svd.matrixV().transpose() * Rxi;
  sc.W = sc.G * sc.G.transpose();
  sc.ok = true;
  return sc;
}

// Largest t with X + t*D still PSD (X = L L^T given).
double max_step(const Eigen::LLT<MatrixXd>& llt, const MatrixXd& D) {
  MatrixXd L = llt.matrixL();
  MatrixXd B = L.triangularView<Eigen::Lower>().solve(D);
  B = L.triangularView<Eigen::Lower>().solve(B.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return kInf;
  return -1.0 / lmin;
}

double logdet_from_llt(const Eigen::LLT<MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// ---------------------------------------------------------------------------
// KKT system [M F; F^T 0] with static regularization and one refinement pass.

struct Kkt {
  MatrixXd M, F;
  Eigen::LLT<MatrixXd> lltM;
  MatrixXd Sf;  // F^T (M+dI)^{-1} F + d I
  Eigen::LDLT<MatrixXd> ldltSf;
  double delta = 0.0;
  bool ok = false;

  void factor(MatrixXd M_in, const MatrixXd& F_in) {
    M = std::move(M_in);
    F = F_in;
    const int p = static_cast<int>(M.rows());
    double base = std::max(M.diagonal().maxCoeff(), 1.0);
    delta = 1e-13 * base;
    for (int attempt = 0; attempt < 8; ++attempt) {
      lltM.compute(M + delta * MatrixXd::Identity(p, p));
      if (lltM.info() == Eigen::Success) {
        ok = true;
        break;
      }
      delta *= 100.0;
    }
    if (!ok) return;
    if (F.cols() > 0) {
      Sf = F.transpose() * lltM.solve(F);
      Sf.diagonal().array() += delta;
      ldltSf.compute(Sf);
      ok = ldltSf.info() == Eigen::Success;
    }
  }

  void solve_once(const VectorXd& r1, const VectorXd& r2, VectorXd& dy, VectorXd& du) const {
    if (F.cols() == 0) {
      dy = lltM.solve(r1);
      du.resize(0);
      return;
    }
    VectorXd t = lltM.solve(r1);
    du = ldltSf.solve(F.transpose() * t - r2);
    dy = lltM.solve(r1 - F * du);
  }

  void solve(const VectorXd& r1, const VectorXd& r2, VectorXd& dy, VectorXd& du) const {
    solve_once(r1, r2, dy, du);
    // iterated refinement against the unregularized system
    const double scale = r1.norm() + (r2.size() ? r2.norm() : 0.0) + 1e-300;
    for (int pass = 0; pass < 4; ++pass) {
      VectorXd e1 = r1 - M.selfadjointView<Eigen::Lower>() * dy;
      if (F.cols() > 0) e1 -= F * du;
      VectorXd e2 = F.cols() > 0 ? (r2 - F.transpose() * dy).eval() : VectorXd();
      double err = e1.norm() + (e2.size() ? e2.norm() : 0.0);
      if (err <= 1e-14 * scale) break;
      VectorXd cy, cu;
      solve_once(e1, e2, cy, cu);
      dy += cy;
      if (F.cols() > 0) du += cu;
    }
  }
};

// ---------------------------------------------------------------------------
// Shared state for both solver loops.

struct IterState {
  std::vector<MatrixXd> X, S;
  VectorXd y, u;
  double tau = 1.0, kappa = 1.0;  // HSD only
};

struct CoreResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  IterState st;
  int iterations = 0;
};

// The scaled-space complementarity matrix E from targets nu_k and an optional
// Mehrotra corrector term.
MatrixXd build_E(const Scaling& sc, double nu, const MatrixXd* corr) {
  const int n = static_cast<int>(sc.lambda.size());
  MatrixXd E(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double num = (i == j ? nu - sc.lambda[i] * sc.lambda[i] : 0.0);
      if (corr) num -= (*corr)(i, j);
      E(i, j) = 2.0 * num / (sc.lambda[i] + sc.lambda[j]);
    }
  }
  return E;
}

struct Norms {
  double normb, normC, normcf;
};

Norms data_norms(const Prep& pp) {
  Norms nm;
  nm.normb = pp.b.norm();
  double c2 = pp.cf.squaredNorm();
  for (const auto& Ck : pp.C) c2 += Ck.squaredNorm();
  nm.normC = std::sqrt(c2);
  nm.normcf = pp.cf.norm();
  return nm;
}

// ===========================================================================
// Homogeneous self-dual embedding, linear objectives only.

CoreResult hsd_solve(const Prep& pp, const SolverConfig& cfg) {
  const int nb = pp.n_blocks();
  const int p = pp.p;
  const int nf = pp.prob->n_free;
  const Norms nm = data_norms(pp);

  IterState st;
  st.X.reserve(static_cast<size_t>(nb));
  st.S.reserve(static_cast<size_t>(nb));
  int Ntot = 0;
  for (int k = 0; k < nb; ++k) {
    st.X.emplace_back(MatrixXd::Identity(pp.dim(k), pp.dim(k)));
    st.S.emplace_back(MatrixXd::Identity(pp.dim(k), pp.dim(k)));
    Ntot += pp.dim(k);
  }
  st.y = VectorXd::Zero(p);
  st.u = VectorXd::Zero(nf);
  st.tau = 1.0;
  st.kappa = 1.0;

  CoreResult res;
  int stall = 0;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    res.iterations = iter;
    // residuals
    VectorXd rP = apply_A(pp, st.X, st.u) - pp.b * st.tau;
    std::vector<MatrixXd> Aty = apply_At(pp, st.y);
    std::vector<MatrixXd> rD(static_cast<size_t>(nb));
    double cx = st.u.size() ? pp.cf.dot(st.u) : 0.0;
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<size_t>(k);
      rD[ks] = -Aty[ks] + pp.C[ks] * st.tau - st.S[ks];
      cx += pp.C[ks].cwiseProduct(st.X[ks]).sum();
    }
    VectorXd rf = -pp.F.transpose() * st.y + pp.cf * st.tau;
    double by = pp.b.dot(st.y);
    double rG = by - cx - st.kappa;

    double dots = st.tau * st.kappa;
    for (int k = 0; k < nb; ++k)
      dots += st.X[static_cast<size_t>(k)].cwiseProduct(st.S[static_cast<size_t>(k)]).sum();
    double mu = dots / (Ntot + 1);

    // convergence tests on the scaled-back point
    {
      double inv_tau = 1.0 / st.tau;
      double pin = ((apply_A(pp, st.X, st.u) * inv_tau - pp.b).cwiseProduct(pp.inv_scale)).norm() /
                   (1.0 + pp.normb_orig);
      double din2 = 0.0;
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        din2 += (pp.C[ks] - Aty[ks] * inv_tau - st.S[ks] * inv_tau).squaredNorm();
      }
      din2 += (pp.cf - pp.F.transpose() * st.y * inv_tau).squaredNorm();
      double din = std::sqrt(din2) / (1.0 + nm.normC);
      double pobj = cx * inv_tau;
      double dobj = by * inv_tau;
      double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      if (pin <= 0.6 * cfg.tol_feas && din <= 0.6 * cfg.tol_feas && gap <= 0.6 * cfg.tol_gap) {
        res.status = SolveStatus::Optimal;
        res.st = st;
        return res;
      }
      // infeasibility certificates
      if (by > 0) {
        double r2 = (pp.F.transpose() * st.y).squaredNorm();
        for (int k = 0; k < nb; ++k) {
          const auto ks = static_cast<size_t>(k);
          r2 += (Aty[ks] + st.S[ks]).squaredNorm();
        }
        if (std::sqrt(r2) / by <= 1e2 * cfg.tol_feas && st.tau <= 1e-3 * st.kappa) {
          res.status = SolveStatus::Infeasible;
          res.st = st;
          return res;
        }
      }
      if (cx < 0) {
        double r = apply_A(pp, st.X, st.u).norm();
        if (r / (-cx) <= 1e2 * cfg.tol_feas && st.tau <= 1e-3 * st.kappa) {
          res.status = SolveStatus::Unbounded;
          res.st = st;
          return res;
        }
      }
    }

    // NT scalings and Schur system
    std::vector<Scaling> sc(static_cast<size_t>(nb));
    std::vector<MatrixXd> Ws(static_cast<size_t>(nb));
    bool scale_ok = true;
    for (int k = 0; k < nb; ++k) {
      sc[static_cast<size_t>(k)] = nt_scaling(st.X[static_cast<size_t>(k)],
                                              st.S[static_cast<size_t>(k)]);
      scale_ok = scale_ok && sc[static_cast<size_t>(k)].ok;
      if (scale_ok) Ws[static_cast<size_t>(k)] = sc[static_cast<size_t>(k)].W;
    }
    if (!scale_ok) { if (cfg.verbose) std::cerr << "hsd: scaling failed\n"; break; }

    Kkt kkt;
    kkt.factor(assemble_schur(pp, &Ws), pp.F);
    if (!kkt.ok) { if (cfg.verbose) std::cerr << "hsd: kkt factor failed\n"; break; }

    // W~(C) and the tau-column solve, shared by both directions
    std::vector<MatrixXd> WCW(static_cast<size_t>(nb));
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<size_t>(k);
      WCW[ks] = sc[ks].W * pp.C[ks] * sc[ks].W;
    }
    VectorXd rhs_tau_y = apply_A(pp, WCW, VectorXd::Zero(nf)) + pp.b;
    VectorXd y2, u2;
    kkt.solve(rhs_tau_y, pp.cf, y2, u2);

    auto direction = [&](double sigma, const std::vector<MatrixXd>* corr, double corr_tau,
                         std::vector<MatrixXd>& dX, std::vector<MatrixXd>& dS, VectorXd& dy,
                         VectorXd& du, double& dtau, double& dkappa) -> bool {
      const double oms = 1.0 - sigma;
      std::vector<MatrixXd> GEG(static_cast<size_t>(nb)), WrD(static_cast<size_t>(nb));
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        MatrixXd E = build_E(sc[ks], sigma * mu, corr ? &(*corr)[ks] : nullptr);
        GEG[ks] = sc[ks].G * E * sc[ks].G.transpose();
        WrD[ks] = sc[ks].W * rD[ks] * sc[ks].W;
      }
      VectorXd zero_u = VectorXd::Zero(nf);
      VectorXd q1 = -oms * rP - apply_A(pp, GEG, zero_u) + oms * apply_A(pp, WrD, zero_u);
      VectorXd q2 = oms * rf;
      VectorXd y1, u1;
      kkt.solve(q1, q2, y1, u1);

      // dX = GEG + W~(A*(dy)) - W~(C) dtau - oms W~(rD), affine in dtau
      std::vector<MatrixXd> At_y1 = apply_At(pp, y1), At_y2 = apply_At(pp, y2);
      std::vector<MatrixXd> X1(static_cast<size_t>(nb)), X2(static_cast<size_t>(nb));
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        X1[ks] = GEG[ks] + sc[ks].W * At_y1[ks] * sc[ks].W - oms * WrD[ks];
        X2[ks] = sc[ks].W * At_y2[ks] * sc[ks].W - WCW[ks];
      }
      const double dtau_rhs_const = sigma * mu - st.tau * st.kappa - corr_tau;
      // gap row: b'dy - <C,dX> - cf'du - dkappa = -oms * rG, dkappa = (dtau_rhs - kappa dtau)/tau
      double c_dX1 = 0.0, c_dX2 = 0.0;
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        c_dX1 += pp.C[ks].cwiseProduct(X1[ks]).sum();
        c_dX2 += pp.C[ks].cwiseProduct(X2[ks]).sum();
      }
      double cf_u1 = nf ? pp.cf.dot(u1) : 0.0, cf_u2 = nf ? pp.cf.dot(u2) : 0.0;
      double coef = pp.b.dot(y2) - c_dX2 - cf_u2 + st.kappa / st.tau;
      double rhs = -oms * rG - pp.b.dot(y1) + c_dX1 + cf_u1 + dtau_rhs_const / st.tau;
      if (!(std::abs(coef) > 1e-300)) { if (cfg.verbose) std::cerr << "hsd: tau coef " << coef << " rhs " << rhs << "\n"; return false; }
      dtau = rhs / coef;
      dy = y1 + dtau * y2;
      du = nf ? (u1 + dtau * u2).eval() : VectorXd();
      dkappa = (dtau_rhs_const - st.kappa * dtau) / st.tau;
      dX.resize(static_cast<size_t>(nb));
      dS.resize(static_cast<size_t>(nb));
      std::vector<MatrixXd> At_dy = apply_At(pp, dy);
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        dS[ks] = -At_dy[ks] + pp.C[ks] * dtau + oms * rD[ks];
        dX[ks] = X1[ks] + dtau * X2[ks];
        dX[ks] = 0.5 * (dX[ks] + dX[ks].transpose()).eval();
        dS[ks] = 0.5 * (dS[ks] + dS[ks].transpose()).eval();
      }
      return true;
    };

    auto step_limit = [&](const std::vector<MatrixXd>& dX, const std::vector<MatrixXd>& dS,
                          double dtau, double dkappa) {
      double a = kInf;
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        a = std::min(a, max_step(sc[ks].llt_x, dX[ks]));
        a = std::min(a, max_step(sc[ks].llt_s, dS[ks]));
      }
      if (dtau < 0) a = std::min(a, -st.tau / dtau);
      if (dkappa < 0) a = std::min(a, -st.kappa / dkappa);
      return a;
    };

    std::vector<MatrixXd> dXa, dSa;
    VectorXd dya, dua;
    double dta = 0, dka = 0;
    if (!direction(0.0, nullptr, 0.0, dXa, dSa, dya, dua, dta, dka)) break;
    double a_aff = std::min(1.0, 0.99 * step_limit(dXa, dSa, dta, dka));

    // sigma from the affine trial point
    double dots_aff = (st.tau + a_aff * dta) * (st.kappa + a_aff * dka);
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<size_t>(k);
      dots_aff += (st.X[ks] + a_aff * dXa[ks]).cwiseProduct(st.S[ks] + a_aff * dSa[ks]).sum();
    }
    double mu_aff = dots_aff / (Ntot + 1);
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

    // Mehrotra corrector in the scaled space
    std::vector<MatrixXd> corr(static_cast<size_t>(nb));
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<size_t>(k);
      MatrixXd dXt = sc[ks].Ginv * dXa[ks] * sc[ks].Ginv.transpose();
      MatrixXd dSt = sc[ks].G.transpose() * dSa[ks] * sc[ks].G;
      corr[ks] = 0.5 * (dXt * dSt + dSt * dXt);
    }

    std::vector<MatrixXd> dX, dS;
    VectorXd dy, du;
    double dtau = 0, dkappa = 0;
    if (!direction(sigma, &corr, dta * dka, dX, dS, dy, du, dtau, dkappa)) break;
    double alpha = std::min(1.0, 0.99 * step_limit(dX, dS, dtau, dkappa));

    if (alpha < 1e-7) {
      if (++stall >= 3) break;
    } else {
      stall = 0;
    }

    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<size_t>(k);
      st.X[ks] += alpha * dX[ks];
      st.S[ks] += alpha * dS[ks];
    }
    st.y += alpha * dy;
    if (nf) st.u += alpha * du;
    st.tau += alpha * dtau;
    st.kappa += alpha * dkappa;

    if (cfg.verbose) {
      std::cerr << "hsd iter " << iter << " mu " << mu << " tau " << st.tau << " kappa "
                << st.kappa << " alpha " << alpha << "\n";
    }
  }

  res.st = st;
  res.status =
      res.iterations + 1 >= cfg.max_iter ? SolveStatus::MaxIter : SolveStatus::NumericalFailure;
  return res;
}

// ===========================================================================
// Infeasible-start primal-dual loop with per-block complementarity targets
// nu_k = w_k + sigma*mu; w_k > 0 folds a -w logdet(X_k) objective term into
// the barrier (max-det programming). Supports warm starts.

CoreResult pd_solve(const Prep& pp, const SolverConfig& cfg, const std::vector<double>& w,
                    IterState st, bool mehrotra) {
  const int nb = pp.n_blocks();
  const int nf = pp.prob->n_free;
  const Norms nm = data_norms(pp);

  int Ntot = 0;
  double wn = 0.0;
  for (int k = 0; k < nb; ++k) {
    Ntot += pp.dim(k);
    wn += w[static_cast<size_t>(k)] * pp.dim(k);
  }

  CoreResult res;
  int stall = 0;
  IterState best = st;
  double best_merit = kInf;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    res.iterations = iter;
    VectorXd rp = pp.b - apply_A(pp, st.X, st.u);
    std::vector<MatrixXd> Aty = apply_At(pp, st.y);
    std::vector<MatrixXd> Rd(static_cast<size_t>(nb));
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<size_t>(k);
      Rd[ks] = pp.C[ks] - st.S[ks] - Aty[ks];
    }
    VectorXd rf = pp.cf - pp.F.transpose() * st.y;

    double dots = 0.0;
    for (int k = 0; k < nb; ++k)
      dots += st.X[static_cast<size_t>(k)].cwiseProduct(st.S[static_cast<size_t>(k)]).sum();
    double mu = std::max((dots - wn) / Ntot, 1e-300);

    // objective values and convergence
    double pobj = nf ? pp.cf.dot(st.u) : 0.0;
    double dobj = pp.b.dot(st.y);
    bool logdet_ok = true;
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<size_t>(k);
      pobj += pp.C[ks].cwiseProduct(st.X[ks]).sum();
      if (w[ks] > 0) {
        Eigen::LLT<MatrixXd> lx(st.X[ks]), ls(st.S[ks]);
        if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) {
          logdet_ok = false;
          continue;
        }
        pobj -= w[ks] * logdet_from_llt(lx);
        dobj += w[ks] * (pp.dim(k) + logdet_from_llt(ls) - pp.dim(k) * std::log(w[ks]));
      }
    }
    double pin = rp.cwiseProduct(pp.inv_scale).norm() / (1.0 + pp.normb_orig);
    double din2 = (nf ? rf.squaredNorm() : 0.0);
    for (int k = 0; k < nb; ++k) din2 += Rd[static_cast<size_t>(k)].squaredNorm();
    double din = std::sqrt(din2) / (1.0 + nm.normC);
    double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (cfg.verbose) {
      std::cerr << "pd iter " << iter << " mu " << mu << " pin " << pin << " din " << din
                << " gap " << gap << "\n";
      for (int k = 0; k < std::min(nb, 4); ++k) {
        const auto ks = static_cast<size_t>(k);
        Eigen::SelfAdjointEigenSolver<MatrixXd> ex(st.X[ks], Eigen::EigenvaluesOnly),
            es(st.S[ks], Eigen::EigenvaluesOnly);
        std::cerr << "   blk " << k << " dim " << pp.dim(k) << " X:[" << ex.eigenvalues().minCoeff()
                  << "," << ex.eigenvalues().maxCoeff() << "] S:[" << es.eigenvalues().minCoeff()
                  << "," << es.eigenvalues().maxCoeff() << "] <XS> "
                  << st.X[ks].cwiseProduct(st.S[ks]).sum() << "\n";
      }
    }
    if (logdet_ok && pin <= 0.6 * cfg.tol_feas && din <= 0.6 * cfg.tol_feas &&
        gap <= 0.6 * cfg.tol_gap) {
      res.status = SolveStatus::Optimal;
      res.st = st;
      return res;
    }
    if (logdet_ok) {
      double merit = std::max({pin, din, gap});
      if (merit < best_merit) {
        best_merit = merit;
        best = st;
      }
    }

    double xnorm = 0.0;
    for (int k = 0; k < nb; ++k) xnorm = std::max(xnorm, frob(st.X[static_cast<size_t>(k)]));
    if (xnorm > 1e14 || st.y.norm() > 1e14) break;
    // complementarity has collapsed far below the remaining residuals;
    // further double-precision progress is not possible
    if (mu < 1e-12 * (1.0 + std::abs(pobj)) && std::max(pin, din) > cfg.tol_feas) break;

    std::vector<Scaling> sc(static_cast<size_t>(nb));
    std::vector<MatrixXd> Ws(static_cast<size_t>(nb));
    bool scale_ok = true;
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<size_t>(k);
      sc[ks] = nt_scaling(st.X[ks], st.S[ks]);
      scale_ok = scale_ok && sc[ks].ok;
      if (scale_ok) Ws[ks] = sc[ks].W;
    }
    if (!scale_ok) break;

    Kkt kkt;
    kkt.factor(assemble_schur(pp, &Ws), pp.F);
    if (!kkt.ok) break;

    auto direction = [&](double sigma, const std::vector<MatrixXd>* corr,
                         std::vector<MatrixXd>& dX, std::vector<MatrixXd>& dS, VectorXd& dy,
                         VectorXd& du) {
      std::vector<MatrixXd> GEG(static_cast<size_t>(nb)), WRdW(static_cast<size_t>(nb));
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        double nu = w[ks] + sigma * mu;
        MatrixXd E = build_E(sc[ks], nu, corr ? &(*corr)[ks] : nullptr);
        GEG[ks] = sc[ks].G * E * sc[ks].G.transpose();
        WRdW[ks] = sc[ks].W * Rd[ks] * sc[ks].W;
      }
      VectorXd zero_u = VectorXd::Zero(nf);
      VectorXd r1 = rp - apply_A(pp, GEG, zero_u) + apply_A(pp, WRdW, zero_u);
      kkt.solve(r1, rf, dy, du);
      std::vector<MatrixXd> At_dy = apply_At(pp, dy);
      dX.resize(static_cast<size_t>(nb));
      dS.resize(static_cast<size_t>(nb));
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        dS[ks] = Rd[ks] - At_dy[ks];
        dX[ks] = GEG[ks] - WRdW[ks] + sc[ks].W * At_dy[ks] * sc[ks].W;
        dX[ks] = 0.5 * (dX[ks] + dX[ks].transpose()).eval();
        dS[ks] = 0.5 * (dS[ks] + dS[ks].transpose()).eval();
      }
    };

    auto step_limits = [&](const std::vector<MatrixXd>& dX, const std::vector<MatrixXd>& dS,
                           double& ap, double& ad) {
      ap = ad = kInf;
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        ap = std::min(ap, max_step(sc[ks].llt_x, dX[ks]));
        ad = std::min(ad, max_step(sc[ks].llt_s, dS[ks]));
      }
    };

    std::vector<MatrixXd> dX, dS;
    VectorXd dy, du;
    double sigma = 0.5;
    if (mehrotra) {
      std::vector<MatrixXd> dXa, dSa;
      VectorXd dya, dua;
      direction(0.0, nullptr, dXa, dSa, dya, dua);
      double apa, ada;
      step_limits(dXa, dSa, apa, ada);
      double a_aff = std::min({1.0, 0.99 * apa, 0.99 * ada});

      double dots_aff = 0.0;
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        dots_aff += (st.X[ks] + a_aff * dXa[ks]).cwiseProduct(st.S[ks] + a_aff * dSa[ks]).sum();
      }
      // Mehrotra exponent-3 rule, capped so a collapsed affine step still
      // yields a progressing (partially centering) direction.
      double mu_aff = std::max((dots_aff - wn) / Ntot, 0.0);
      sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
      sigma = std::clamp(sigma, 1e-8, 0.5);

      // Second-order correction scaled by the realized affine step; with a
      // collapsing affine direction the corrector fades out instead of
      // poisoning the combined system.
      std::vector<MatrixXd> corr(static_cast<size_t>(nb));
      const double corr_scale = a_aff * a_aff;
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        MatrixXd dXt = sc[ks].Ginv * dXa[ks] * sc[ks].Ginv.transpose();
        MatrixXd dSt = sc[ks].G.transpose() * dSa[ks] * sc[ks].G;
        corr[ks] = 0.5 * corr_scale * (dXt * dSt + dSt * dXt);
      }
      direction(sigma, &corr, dX, dS, dy, du);
    } else {
      // safeguarded centering step; slower but dependable on the dual
      // degenerate Gram-matching programs
      direction(sigma, nullptr, dX, dS, dy, du);
    }
    double ap, ad;
    step_limits(dX, dS, ap, ad);
    double alpha_p = std::min(1.0, 0.99 * ap);
    double alpha_d = std::min(1.0, 0.99 * ad);
    // keep the pair centered: unequal steps let the primal run ahead of the
    // dual and the eigen-product spread blows up
    alpha_p = alpha_d = std::min(alpha_p, alpha_d);

    // cone feasibility alone does not keep <X,S> above the logdet floor;
    // backtrack until the realized mu tracks its predicted linear decrease
    {
      double c0 = 0, c1 = 0, c2 = 0;
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        c0 += st.X[ks].cwiseProduct(st.S[ks]).sum();
        c1 += dX[ks].cwiseProduct(st.S[ks]).sum() + st.X[ks].cwiseProduct(dS[ks]).sum();
        c2 += dX[ks].cwiseProduct(dS[ks]).sum();
      }
      double a = alpha_p;
      for (int bt = 0; bt < 40; ++bt) {
        double mu_a = (c0 + a * c1 + a * a * c2 - wn) / Ntot;
        double floor_a = 0.25 * (1.0 - a * (1.0 - sigma)) * mu;
        if (mu_a >= floor_a || a < 1e-8) break;
        a *= 0.8;
      }
      alpha_p = alpha_d = a;
    }

    if (cfg.verbose) {
      double ndX = 0, ndS = 0;
      for (int k = 0; k < nb; ++k) {
        ndX = std::max(ndX, frob(dX[static_cast<size_t>(k)]));
        ndS = std::max(ndS, frob(dS[static_cast<size_t>(k)]));
      }
      std::cerr << "   sigma " << sigma << " ap " << alpha_p << " ad " << alpha_d << " |dX| "
                << ndX << " |dS| " << ndS << "\n";
    }

    if (std::min(alpha_p, alpha_d) < 1e-7) {
      if (++stall >= 3) break;
    } else {
      stall = 0;
    }

    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<size_t>(k);
      st.X[ks] += alpha_p * dX[ks];
      st.S[ks] += alpha_d * dS[ks];
    }
    if (nf) st.u += alpha_p * du;
    st.y += alpha_d * dy;
  }

  res.st = best_merit < kInf ? best : st;
  res.status =
      res.iterations + 1 >= cfg.max_iter ? SolveStatus::MaxIter : SolveStatus::NumericalFailure;
  return res;
}

// ===========================================================================
// Feasible-start primal barrier path-following for max-det objectives:
// minimize <C,X> + cf'u - sum nu_k logdet X_k with nu_k = w_k + mu and mu
// driven to zero. Damped Newton steps are globally convergent here and never
// fight the dual cone, which makes this path far more dependable than an
// infeasible primal-dual method on the Gram-matching programs.

CoreResult barrier_maxdet(const Prep& pp, const SolverConfig& cfg, const std::vector<double>& w,
                          IterState st) {
  const int nb = pp.n_blocks();
  const int nf = pp.prob->n_free;

  int Ntot = 0;
  for (int k = 0; k < nb; ++k) Ntot += pp.dim(k);

  CoreResult res;
  double cx0 = nf ? pp.cf.dot(st.u) : 0.0;
  for (int k = 0; k < nb; ++k)
    cx0 += pp.C[static_cast<size_t>(k)].cwiseProduct(st.X[static_cast<size_t>(k)]).sum();
  double mu = std::max(1.0, std::abs(cx0) / Ntot);
  int iter = 0;

  auto objective_now = [&] {
    double v = nf ? pp.cf.dot(st.u) : 0.0;
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<size_t>(k);
      v += pp.C[ks].cwiseProduct(st.X[ks]).sum();
      if (w[ks] > 0) {
        Eigen::LLT<MatrixXd> llt(st.X[ks]);
        if (llt.info() == Eigen::Success) v -= w[ks] * logdet_from_llt(llt);
      }
    }
    return v;
  };

  while (iter < cfg.max_iter) {
    // inner damped Newton at barrier weights nu_k = w_k + mu
    for (int inner = 0; inner < 40 && iter < cfg.max_iter; ++inner, ++iter) {
      res.iterations = iter;
      std::vector<MatrixXd> Ws(static_cast<size_t>(nb));
      std::vector<Eigen::LLT<MatrixXd>> lltX(static_cast<size_t>(nb));
      bool pd_ok = true;
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        lltX[ks].compute(st.X[ks]);
        if (lltX[ks].info() != Eigen::Success) pd_ok = false;
        if (pd_ok) Ws[ks] = st.X[ks] / std::sqrt(w[ks] + mu);
      }
      if (!pd_ok) {
        res.status = SolveStatus::NumericalFailure;
        res.st = st;
        return res;
      }

      Kkt kkt;
      kkt.factor(assemble_schur(pp, &Ws), pp.F);
      if (!kkt.ok) {
        res.status = SolveStatus::NumericalFailure;
        res.st = st;
        return res;
      }

      VectorXd rp = pp.b - apply_A(pp, st.X, st.u);
      std::vector<MatrixXd> WCW(static_cast<size_t>(nb));
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        WCW[ks] = Ws[ks] * pp.C[ks] * Ws[ks];
      }
      VectorXd zero_u = VectorXd::Zero(nf);
      VectorXd r1 = rp - apply_A(pp, st.X, zero_u) + apply_A(pp, WCW, zero_u);
      VectorXd y, du;
      kkt.solve(r1, pp.cf, y, du);

      std::vector<MatrixXd> Aty = apply_At(pp, y);
      std::vector<MatrixXd> dX(static_cast<size_t>(nb));
      double lambda2 = 0.0;
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        dX[ks] = st.X[ks] - WCW[ks] + Ws[ks] * Aty[ks] * Ws[ks];
        dX[ks] = 0.5 * (dX[ks] + dX[ks].transpose()).eval();
        MatrixXd L = lltX[ks].matrixL();
        MatrixXd B = L.triangularView<Eigen::Lower>().solve(dX[ks]);
        B = L.triangularView<Eigen::Lower>().solve(B.transpose()).transpose();
        lambda2 += (w[ks] + mu) * B.squaredNorm();
      }

      double lambda = std::sqrt(std::max(lambda2, 0.0));
      double alpha = lambda > 0.25 ? 1.0 / (1.0 + lambda) : 1.0;
      double ftb = kInf;
      for (int k = 0; k < nb; ++k)
        ftb = std::min(ftb, max_step(lltX[static_cast<size_t>(k)], dX[static_cast<size_t>(k)]));
      alpha = std::min(alpha, 0.99 * ftb);

      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<size_t>(k);
        st.X[ks] += alpha * dX[ks];
      }
      if (nf) st.u += alpha * du;
      st.y = y;

      if (cfg.verbose)
        std::cerr << "barrier iter " << iter << " mu " << mu << " lambda " << lambda << " alpha "
                  << alpha << "\n";
      double xnorm = 0.0;
      for (int k = 0; k < nb; ++k) xnorm = std::max(xnorm, frob(st.X[static_cast<size_t>(k)]));
      if (xnorm > 1e14) {
        res.status = SolveStatus::NumericalFailure;
        res.st = st;
        return res;
      }
      if (lambda <= 0.05) break;
    }
    // the centered gap is mu * Ntot (plus the fixed w-part)
    const double mu_target = 0.5 * cfg.tol_gap * (1.0 + 2.0 * std::abs(objective_now())) / Ntot;
    if (cfg.verbose)
      std::cerr << "barrier stage done: mu " << mu << " target " << mu_target << "\n";
    if (mu <= 1.0001 * mu_target) break;
    mu = std::max(0.2 * mu, mu_target);
  }

  // dual slack from the final multipliers
  std::vector<MatrixXd> Aty = apply_At(pp, st.y);
  for (int k = 0; k < nb; ++k) {
    const auto ks = static_cast<size_t>(k);
    st.S[ks] = pp.C[ks] - Aty[ks];
    st.S[ks] = 0.5 * (st.S[ks] + st.S[ks].transpose()).eval();
  }
  res.st = st;
  res.status = iter >= cfg.max_iter ? SolveStatus::MaxIter : SolveStatus::Optimal;
  return res;
}

IterState identity_state(const Prep& pp) {
  IterState st;
  for (int k = 0; k < pp.n_blocks(); ++k) {
    st.X.emplace_back(MatrixXd::Identity(pp.dim(k), pp.dim(k)));
    st.S.emplace_back(MatrixXd::Identity(pp.dim(k), pp.dim(k)));
  }
  st.y = VectorXd::Zero(pp.p);
  st.u = VectorXd::Zero(pp.prob->n_free);
  return st;
}

// Least-squares dual initialization: y0 minimizing ||C - S0 - A*(y)||, and
// when C - A*(y0) is itself safely positive definite, adopt it as the dual
// slack so the run starts dual-feasible.
void refine_dual_start(const Prep& pp, IterState& st) {
  const int nb = pp.n_blocks();
  MatrixXd M = assemble_schur(pp, nullptr);
  if (pp.F.cols() > 0) M.noalias() += pp.F * pp.F.transpose();
  M.diagonal().array() += 1e-10 * std::max(M.diagonal().maxCoeff(), 1.0);
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return;

  VectorXd rhs(pp.p);
  std::vector<MatrixXd> CS(static_cast<size_t>(nb));
  for (int k = 0; k < nb; ++k)
    CS[static_cast<size_t>(k)] = pp.C[static_cast<size_t>(k)] - st.S[static_cast<size_t>(k)];
  rhs = apply_A(pp, CS, VectorXd::Zero(pp.prob->n_free));
  if (pp.F.cols() > 0) rhs += pp.F * pp.cf;
  VectorXd y0 = llt.solve(rhs);

  std::vector<MatrixXd> Aty = apply_At(pp, y0);
  std::vector<MatrixXd> Scand(static_cast<size_t>(nb));
  bool feasible = true;
  for (int k = 0; k < nb && feasible; ++k) {
    const auto ks = static_cast<size_t>(k);
    Scand[ks] = pp.C[ks] - Aty[ks];
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Scand[ks], Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
    if (lmin < 1e-4 * scale) feasible = false;
  }
  st.y = y0;
  if (feasible) st.S = std::move(Scand);
}

// Push a warm-start point strictly inside the cone.
MatrixXd push_interior(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  double mean = std::max(m.trace() / m.rows(), 1.0);
  double shift = std::max(0.0, -lmin) + 1e-4 * mean;
  return m + shift * MatrixXd::Identity(m.rows(), m.cols());
}

struct FinishContext {
  const SdpProblem* prob;
  const Prep* pp;
  const SolverConfig* cfg;
};

// Scale solution back to original rows and fill residuals/objective honestly;
// downgrades status if the claimed tolerances do not hold.
SdpSolution finish(const FinishContext& fc, const CoreResult& core, bool hsd_scaled) {
  const SdpProblem& prob = *fc.prob;
  const Prep& pp = *fc.pp;
  SdpSolution sol;
  sol.status = core.status;
  sol.stats.iterations = core.iterations;

  const double inv_tau = hsd_scaled ? 1.0 / core.st.tau : 1.0;
  sol.block_values.clear();
  sol.dual_blocks.clear();
  for (size_t k = 0; k < core.st.X.size(); ++k) {
    sol.block_values.push_back(core.st.X[k] * inv_tau);
    sol.dual_blocks.push_back(core.st.S[k] * inv_tau);
  }
  sol.free_values = core.st.u * inv_tau;
  // duals, mapped to original (unscaled, un-dropped) rows
  sol.y = VectorXd::Zero(static_cast<Eigen::Index>(prob.rows.size()));
  for (int i = 0; i < pp.p; ++i)
    sol.y[pp.keep[static_cast<size_t>(i)]] =
        core.st.y[i] * inv_tau * pp.row_scale[static_cast<size_t>(i)];

  if (sol.status == SolveStatus::Infeasible || sol.status == SolveStatus::Unbounded) {
    sol.objective_value = sol.status == SolveStatus::Unbounded ? -kInf : kInf;
    return sol;
  }

  // objective
  double pobj = prob.objective.constant;
  for (const auto& bc : prob.objective.blocks)
    pobj += bc.inner(sol.block_values[static_cast<size_t>(bc.block)]);
  for (const auto& [idx, v] : prob.objective.free_terms) pobj += v * sol.free_values[idx];
  double min_eig = 0.0;
  bool logdet_pd = true;
  if (prob.objective.logdet_block >= 0) {
    const auto& Xl = sol.block_values[static_cast<size_t>(prob.objective.logdet_block)];
    Eigen::LLT<MatrixXd> llt(Xl);
    if (llt.info() == Eigen::Success) {
      pobj -= prob.objective.logdet_weight * logdet_from_llt(llt);
    } else {
      logdet_pd = false;
    }
  }
  sol.objective_value = pobj;

  // residuals over the original rows
  double eq2 = 0.0, bn2 = 0.0;
  for (const auto& row : prob.rows) {
    double v = -row.rhs;
    for (const auto& bc : row.blocks) v += bc.inner(sol.block_values[static_cast<size_t>(bc.block)]);
    for (const auto& [idx, c] : row.free_terms) v += c * sol.free_values[idx];
    eq2 += v * v;
    bn2 += row.rhs * row.rhs;
  }
  sol.residuals.primal_eq = std::sqrt(eq2) / (1.0 + std::sqrt(bn2));
  for (const auto& X : sol.block_values) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(X, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  sol.residuals.min_eig = min_eig;

  // dual objective (bound) and relative gap
  double dobj = prob.objective.constant;
  for (size_t i = 0; i < prob.rows.size(); ++i) dobj += sol.y[static_cast<Eigen::Index>(i)] * prob.rows[i].rhs;
  if (prob.objective.logdet_block >= 0) {
    const int k = prob.objective.logdet_block;
    const double w = prob.objective.logdet_weight;
    Eigen::LLT<MatrixXd> llt(sol.dual_blocks[static_cast<size_t>(k)]);
    if (llt.info() == Eigen::Success) {
      dobj += w * (prob.block_dims[static_cast<size_t>(k)] * (1.0 - std::log(w)) +
                   logdet_from_llt(llt));
    } else {
      logdet_pd = false;
    }
  }
  sol.stats.dual_objective = dobj;
  sol.residuals.duality_gap =
      std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

  // Honesty gate: optimal status must actually meet the tolerances.
  if (sol.status == SolveStatus::Optimal) {
    const SolverConfig& cfg = *fc.cfg;
    bool ok = logdet_pd && sol.residuals.primal_eq <= cfg.tol_feas &&
              sol.residuals.min_eig >= -cfg.tol_psd &&
              sol.residuals.duality_gap <= cfg.tol_gap &&
              pobj - dobj >= -cfg.tol_gap * (1.0 + std::abs(pobj) + std::abs(dobj));
    if (prob.objective.logdet_block >= 0 && logdet_pd) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(
          sol.block_values[static_cast<size_t>(prob.objective.logdet_block)],
          Eigen::EigenvaluesOnly);
      ok = ok && es.eigenvalues().minCoeff() > 0;
    }
    if (!ok) sol.status = SolveStatus::NumericalFailure;
  }
  return sol;
}

// Phase 1 for max-det problems: maximize the uniform interior margin t with
// X = X' + t I, 0 <= t <= 1.
SdpProblem phase1_problem(const SdpProblem& prob) {
  SdpProblem ph;
  ph.block_dims = prob.block_dims;
  ph.n_free = prob.n_free;
  const int tb = ph.add_block(1);
  const int sb = ph.add_block(1);
  for (const auto& row : prob.rows) {
    LinearRow r = row;
    double trsum = 0.0;
    for (const auto& bc : row.blocks) {
      if (bc.rank_one) trsum += bc.z.squaredNorm();
      else
        for (const auto& e : bc.entries)
          if (e.r == e.c) trsum += e.v;
    }
    if (trsum != 0.0) {
      BlockCoeff bc;
      bc.block = tb;
      bc.entries.push_back({0, 0, trsum});
      r.blocks.push_back(bc);
    }
    ph.rows.push_back(std::move(r));
  }
  LinearRow cap;
  BlockCoeff bt;
  bt.block = tb;
  bt.entries.push_back({0, 0, 1.0});
  BlockCoeff bs;
  bs.block = sb;
  bs.entries.push_back({0, 0, 1.0});
  cap.blocks = {bt, bs};
  cap.rhs = 1.0;
  ph.rows.push_back(cap);
  BlockCoeff obj;
  obj.block = tb;
  obj.entries.push_back({0, 0, -1.0});
  ph.objective.blocks = {obj};
  return ph;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolverConfig& config,
                  const SdpSolution* warm_start) {
  auto t0 = std::chrono::steady_clock::now();
  problem.validate();
  if (problem.rows.empty())
    throw std::invalid_argument("solve: problem has no equality rows");
  for (int d : problem.block_dims)
    if (d > config.block_dim_cap)
      throw std::invalid_argument("solve: block dimension exceeds configured cap");

  int dropped = 0;
  Prep pp = preprocess(problem, config, &dropped);
  FinishContext fc{&problem, &pp, &config};

  const bool maxdet = problem.objective.logdet_block >= 0;
  std::vector<double> w(problem.block_dims.size(), 0.0);
  if (maxdet) w[static_cast<size_t>(problem.objective.logdet_block)] = problem.objective.logdet_weight;

  auto make_warm_state = [&](const SdpSolution& ws) -> IterState {
    IterState st = identity_state(pp);
    if (ws.block_values.size() == problem.block_dims.size()) {
      for (size_t k = 0; k < ws.block_values.size(); ++k) {
        if (ws.block_values[k].rows() == pp.dim(static_cast<int>(k)))
          st.X[k] = push_interior(ws.block_values[k]);
        if (k < ws.dual_blocks.size() && ws.dual_blocks[k].rows() == pp.dim(static_cast<int>(k)))
          st.S[k] = push_interior(ws.dual_blocks[k]);
      }
    }
    if (ws.free_values.size() == problem.n_free) st.u = ws.free_values;
    if (ws.y.size() == static_cast<Eigen::Index>(problem.rows.size())) {
      for (int i = 0; i < pp.p; ++i)
        st.y[i] = ws.y[pp.keep[static_cast<size_t>(i)]] / pp.row_scale[static_cast<size_t>(i)];
    }
    return st;
  };

  SdpSolution sol;
  if (!maxdet) {
    bool done = false;
    if (warm_start) {
      CoreResult pd = pd_solve(pp, config, w, make_warm_state(*warm_start), true);
      if (pd.status == SolveStatus::Optimal) {
        sol = finish(fc, pd, false);
        sol.stats.warm_started = true;
        done = sol.status == SolveStatus::Optimal;
      }
    }
    if (!done) {
      CoreResult hs = hsd_solve(pp, config);
      SdpSolution s2 = finish(fc, hs, hs.status == SolveStatus::Optimal);
      if (warm_start) s2.stats.warm_started = false;
      sol = std::move(s2);
    }
  } else {
    IterState st0;
    bool have_start = false;
    if (warm_start && warm_start->block_values.size() == problem.block_dims.size()) {
      st0 = make_warm_state(*warm_start);
      have_start = true;
      sol.stats.warm_started = true;
    }
    if (!have_start) {
      SdpProblem ph = phase1_problem(problem);
      SolverConfig pcfg = config;
      pcfg.block_dim_cap = config.block_dim_cap;
      pcfg.tol_feas = std::max(config.tol_feas, 1e-9);
      int ph_dropped = 0;
      Prep ppp = preprocess(ph, pcfg, &ph_dropped);
      CoreResult ph_res = hsd_solve(ppp, pcfg);
      FinishContext pfc{&ph, &ppp, &pcfg};
      SdpSolution ph_sol = finish(pfc, ph_res, ph_res.status == SolveStatus::Optimal);
      if (ph_sol.status == SolveStatus::Infeasible) {
        sol.status = SolveStatus::Infeasible;
        sol.stats.phase1_used = true;
        sol.stats.iterations = ph_sol.stats.iterations;
        auto t1 = std::chrono::steady_clock::now();
        sol.stats.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        return sol;
      }
      double tstar =
          ph_sol.status == SolveStatus::Optimal ? ph_sol.block_values[problem.block_dims.size()](0, 0) : 0.0;
      if (ph_sol.status != SolveStatus::Optimal || tstar < 1e-9) {
        sol.status = SolveStatus::NumericalFailure;
        sol.stats.phase1_used = true;
        auto t1 = std::chrono::steady_clock::now();
        sol.stats.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        return sol;
      }
      st0 = identity_state(pp);
      for (size_t k = 0; k < problem.block_dims.size(); ++k) {
        const int dk = pp.dim(static_cast<int>(k));
        st0.X[k] = ph_sol.block_values[k] + tstar * MatrixXd::Identity(dk, dk);
        // centered dual start: X0 S0 = (w + mu0) I puts every block on the
        // central path regardless of how unbalanced the feasible point is
        const double nu0 = w[k] + 1.0;
        MatrixXd Xr = st0.X[k] + (1e-8 * st0.X[k].trace() / dk) * MatrixXd::Identity(dk, dk);
        st0.S[k] = nu0 * Xr.llt().solve(MatrixXd::Identity(dk, dk));
        st0.S[k] = 0.5 * (st0.S[k] + st0.S[k].transpose()).eval();
      }
      if (problem.n_free > 0) st0.u = ph_sol.free_values;
      refine_dual_start(pp, st0);
      sol.stats.phase1_used = true;
    }
    bool p1 = sol.stats.phase1_used, wsd = sol.stats.warm_started;
    // primal-dual first (fast, sharp when it converges), feasible-start
    // barrier as the dependable fallback on the dual-degenerate programs
    IterState st_barrier = st0;
    CoreResult pd = pd_solve(pp, config, w, std::move(st0), false);
    sol = finish(fc, pd, false);
    if (sol.status != SolveStatus::Optimal) {
      CoreResult br = barrier_maxdet(pp, config, w, std::move(st_barrier));
      SdpSolution alt = finish(fc, br, false);
      alt.stats.iterations += pd.iterations;
      if (alt.status == SolveStatus::Optimal || sol.status == SolveStatus::NumericalFailure)
        sol = std::move(alt);
    }
    sol.stats.phase1_used = p1;
    sol.stats.warm_started = wsd;
  }

  sol.stats.dropped_rows = dropped;
  auto t1 = std::chrono::steady_clock::now();
  sol.stats.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return sol;
}

}  // namespace sosgeom
