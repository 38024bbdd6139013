#include "oracles.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace sosgeom::oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double unit_ball_volume(int n) {
  // V_n = pi^{n/2} / Gamma(n/2 + 1)
  return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

Mvee khachiyan_mvee(const std::vector<VectorXd>& points, double eps, int max_iter) {
  const int m = static_cast<int>(points.size());
  if (m == 0) throw std::invalid_argument("khachiyan_mvee: empty point set");
  const int n = static_cast<int>(points[0].size());
  const int d = n + 1;
  MatrixXd Q(d, m);
  for (int i = 0; i < m; ++i) {
    Q.col(i).head(n) = points[static_cast<size_t>(i)];
    Q(n, i) = 1.0;
  }
  VectorXd u = VectorXd::Constant(m, 1.0 / m);
  for (int it = 0; it < max_iter; ++it) {
    MatrixXd Xmat = Q * u.asDiagonal() * Q.transpose();
    MatrixXd Xi = Xmat.llt().solve(MatrixXd::Identity(d, d));
    VectorXd g(m);
    for (int i = 0; i < m; ++i) g[i] = Q.col(i).dot(Xi * Q.col(i));
    int j;
    double gmax = g.maxCoeff(&j);
    if (gmax <= d * (1.0 + eps)) break;
    double step = (gmax - d) / (d * (gmax - 1.0));
    u *= (1.0 - step);
    u[j] += step;
  }
  Mvee out;
  out.center = VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) out.center += u[i] * points[static_cast<size_t>(i)];
  MatrixXd Sc = MatrixXd::Zero(n, n);
  for (int i = 0; i < m; ++i)
    Sc += u[i] * points[static_cast<size_t>(i)] * points[static_cast<size_t>(i)].transpose();
  Sc -= out.center * out.center.transpose();
  out.shape = (n * Sc).llt().solve(MatrixXd::Identity(n, n));
  out.volume = unit_ball_volume(n) / std::sqrt(out.shape.determinant());
  return out;
}

double grid_volume(const Polynomial& p, double level, const VectorXd& lo, const VectorXd& hi,
                   int cells) {
  const int n = p.n_vars();
  if (n > 3) throw std::invalid_argument("grid_volume: n <= 3 only");
  VectorXd h = (hi - lo) / cells;
  double cell_vol = 1.0;
  for (int i = 0; i < n; ++i) cell_vol *= h[i];
  long long inside = 0;
  VectorXd x(n);
  const int nz = n >= 3 ? cells : 1, ny = n >= 2 ? cells : 1;
  for (int ix = 0; ix < cells; ++ix) {
    x[0] = lo[0] + (ix + 0.5) * h[0];
    for (int iy = 0; iy < ny; ++iy) {
      if (n >= 2) x[1] = lo[1] + (iy + 0.5) * h[1];
      for (int iz = 0; iz < nz; ++iz) {
        if (n >= 3) x[2] = lo[2] + (iz + 0.5) * h[2];
        if (p.eval(x) <= level) ++inside;
      }
    }
  }
  return inside * cell_vol;
}

std::optional<double> grid_distance_sq_2d(const Polynomial& p1, double lvl1, const Polynomial& p2,
                                          double lvl2, const VectorXd& lo, const VectorXd& hi,
                                          int cells) {
  if (p1.n_vars() != 2 || p2.n_vars() != 2)
    throw std::invalid_argument("grid_distance_sq_2d: 2D only");
  VectorXd h = (hi - lo) / cells;
  auto feasible = [&](const Polynomial& p, double lvl) {
    std::vector<std::pair<int, int>> cellsxy;
    std::vector<uint8_t> mask(static_cast<size_t>(cells) * static_cast<size_t>(cells), 0);
    Eigen::Vector2d x;
    for (int i = 0; i < cells; ++i) {
      x[0] = lo[0] + (i + 0.5) * h[0];
      for (int j = 0; j < cells; ++j) {
        x[1] = lo[1] + (j + 0.5) * h[1];
        if (p.eval(x) <= lvl) {
          mask[static_cast<size_t>(i) * cells + j] = 1;
          cellsxy.emplace_back(i, j);
        }
      }
    }
    // keep boundary cells only (feasible with an infeasible or border neighbor)
    std::vector<Eigen::Vector2d> pts;
    for (auto [i, j] : cellsxy) {
      bool boundary = i == 0 || j == 0 || i == cells - 1 || j == cells - 1;
      if (!boundary) {
        for (int di = -1; di <= 1 && !boundary; ++di)
          for (int dj = -1; dj <= 1 && !boundary; ++dj)
            if (!mask[static_cast<size_t>(i + di) * cells + (j + dj)]) boundary = true;
      }
      if (boundary)
        pts.emplace_back(lo[0] + (i + 0.5) * h[0], lo[1] + (j + 0.5) * h[1]);
    }
    struct R {
      std::vector<Eigen::Vector2d> boundary;
      std::vector<uint8_t> mask;
    };
    return R{std::move(pts), std::move(mask)};
  };
  auto f1 = feasible(p1, lvl1);
  auto f2 = feasible(p2, lvl2);
  if (f1.boundary.empty() || f2.boundary.empty()) return std::nullopt;
  // overlap check on shared cells
  for (size_t i = 0; i < f1.mask.size(); ++i)
    if (f1.mask[i] && f2.mask[i]) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : f1.boundary)
    for (const auto& b : f2.boundary) best = std::min(best, (a - b).squaredNorm());
  return best;
}

namespace {

MatrixXd project_psd(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
  VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double projected_gradient_objective(const SdpProblem& prob, int outer, int inner) {
  if (prob.objective.logdet_block >= 0)
    throw std::invalid_argument("projected_gradient_objective: linear objectives only");
  const int nb = static_cast<int>(prob.block_dims.size());
  std::vector<MatrixXd> X;
  for (int k = 0; k < nb; ++k) {
    int d = prob.block_dims[static_cast<size_t>(k)];
    X.push_back(MatrixXd::Identity(d, d));
  }
  VectorXd u = VectorXd::Zero(prob.n_free);
  const int p = static_cast<int>(prob.rows.size());

  std::vector<MatrixXd> C;
  for (int k = 0; k < nb; ++k) {
    int d = prob.block_dims[static_cast<size_t>(k)];
    C.push_back(MatrixXd::Zero(d, d));
  }
  for (const auto& bc : prob.objective.blocks) bc.add_to(C[static_cast<size_t>(bc.block)], 1.0);
  VectorXd cf = VectorXd::Zero(prob.n_free);
  for (const auto& [i, v] : prob.objective.free_terms) cf[i] += v;

  double rho = 10.0;
  for (int o = 0; o < outer; ++o) {
    double step0 = 1.0 / (rho * 50.0);
    for (int t = 0; t < inner; ++t) {
      VectorXd resid(p);
      for (int i = 0; i < p; ++i) {
        const auto& row = prob.rows[static_cast<size_t>(i)];
        double v = -row.rhs;
        for (const auto& bc : row.blocks) v += bc.inner(X[static_cast<size_t>(bc.block)]);
        for (const auto& [idx, c] : row.free_terms) v += c * u[idx];
        resid[i] = v;
      }
      std::vector<MatrixXd> grad;
      for (int k = 0; k < nb; ++k) grad.push_back(C[static_cast<size_t>(k)]);
      VectorXd gu = cf;
      for (int i = 0; i < p; ++i) {
        const auto& row = prob.rows[static_cast<size_t>(i)];
        for (const auto& bc : row.blocks)
          bc.add_to(grad[static_cast<size_t>(bc.block)], 2.0 * rho * resid[i]);
        for (const auto& [idx, c] : row.free_terms) gu[idx] += 2.0 * rho * resid[i] * c;
      }
      double step = step0 / (1.0 + t / 500.0);
      for (int k = 0; k < nb; ++k) {
        X[static_cast<size_t>(k)] = project_psd(X[static_cast<size_t>(k)] - step * grad[static_cast<size_t>(k)]);
      }
      u -= step * gu;
    }
    rho *= 2.5;
  }
  double obj = prob.objective.constant + cf.dot(u);
  for (int k = 0; k < nb; ++k) obj += C[static_cast<size_t>(k)].cwiseProduct(X[static_cast<size_t>(k)]).sum();
  return obj;
}

}  // namespace sosgeom::oracles
