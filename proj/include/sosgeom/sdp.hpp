#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sosgeom {

// Coefficient matrix of one constraint (or objective) on one PSD block,
// either as sparse symmetric entries (r <= c) or as a rank-one z z^T. The
// inner product convention is <A, X> with A symmetric, so an off-diagonal
// stored entry v contributes 2*v*X(r,c).
struct SymEntry {
  int r = 0;
  int c = 0;
  double v = 0.0;
};

struct BlockCoeff {
  int block = -1;
  bool rank_one = false;
  std::vector<SymEntry> entries;
  Eigen::VectorXd z;

  double inner(const Eigen::MatrixXd& X) const;
  double quad_form(const Eigen::VectorXd& v) const;  // v^T A v
  void add_to(Eigen::MatrixXd& M, double scale) const;
  double frob_norm_sq() const;
};

struct LinearRow {
  std::vector<BlockCoeff> blocks;                 // at most one entry per block
  std::vector<std::pair<int, double>> free_terms; // (free var index, coefficient)
  double rhs = 0.0;
};

struct SdpObjective {
  std::vector<BlockCoeff> blocks;
  std::vector<std::pair<int, double>> free_terms;
  // If logdet_block >= 0 the objective gains -logdet_weight * logdet(X_k);
  // minimizing it is the max-det program.
  int logdet_block = -1;
  double logdet_weight = 1.0;
  double constant = 0.0;
};

// Standard-form SDP: minimize <C,X> + c_f^T u (- w logdet X_j) subject to
// <A_i, X> + a_i^T u = b_i and every block PSD.
struct SdpProblem {
  std::vector<int> block_dims;
  int n_free = 0;
  std::vector<LinearRow> rows;
  SdpObjective objective;

  int add_block(int dim);
  int add_free();
  void validate() const;  // throws std::invalid_argument on malformed data
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter, NumericalFailure };
const char* to_string(SolveStatus s);

struct SolverConfig {
  double tol_feas = 1e-7;
  double tol_gap = 1e-7;
  double tol_psd = 1e-8;
  int max_iter = 200;
  int block_dim_cap = 120;   // reject problems with larger blocks
  double rank_tol = 1e-10;   // redundant-equality detection
  bool verbose = false;

  // Multiply feasibility/gap tolerances; reads SOSGEOM_TOL_PROFILE
  // ("loose" = 1e2, "tight" = 1e-1, anything else = 1).
  static SolverConfig from_env();
};

struct SolveStats {
  int iterations = 0;
  double solve_ms = 0.0;
  int dropped_rows = 0;
  bool phase1_used = false;
  bool warm_started = false;
  double dual_objective = 0.0;
};

struct SdpSolution {
  std::vector<Eigen::MatrixXd> block_values;
  Eigen::VectorXd free_values;
  double objective_value = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;

  struct Residuals {
    double primal_eq = 0.0;    // ||A(X,u) - b|| / (1 + ||b||)
    double min_eig = 0.0;      // most negative block eigenvalue
    double duality_gap = 0.0;  // relative |primal - dual|
  } residuals;

  // Dual data; also consumed as a warm start for parametric re-solves.
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> dual_blocks;

  SolveStats stats;
};

SdpSolution solve(const SdpProblem& problem, const SolverConfig& config = {},
                  const SdpSolution* warm_start = nullptr);

// Unit eigenvector of the smallest eigenvalue if that eigenvalue <= tol.
std::optional<Eigen::VectorXd> extract_near_null_eigenvector(const Eigen::MatrixXd& m, double tol);

// Sparse text dump for cross-checking against external solvers, and its
// inverse. One line per datum; see README for the format.
void dump_problem(const SdpProblem& problem, std::ostream& os);
SdpProblem parse_problem_dump(std::istream& is);

}  // namespace sosgeom
