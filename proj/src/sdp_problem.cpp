#include <Eigen/Dense>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sosgeom/sdp.hpp"

namespace sosgeom {

double BlockCoeff::inner(const Eigen::MatrixXd& X) const {
  if (rank_one) return z.dot(X * z);
  double v = 0.0;
  for (const auto& e : entries) {
    v += (e.r == e.c) ? e.v * X(e.r, e.c) : 2.0 * e.v * X(e.r, e.c);
  }
  return v;
}

double BlockCoeff::quad_form(const Eigen::VectorXd& v) const {
  if (rank_one) {
    double d = z.dot(v);
    return d * d;
  }
  double s = 0.0;
  for (const auto& e : entries) {
    s += (e.r == e.c) ? e.v * v[e.r] * v[e.c] : 2.0 * e.v * v[e.r] * v[e.c];
  }
  return s;
}

void BlockCoeff::add_to(Eigen::MatrixXd& M, double scale) const {
  if (rank_one) {
    M.noalias() += scale * z * z.transpose();
    return;
  }
  for (const auto& e : entries) {
    M(e.r, e.c) += scale * e.v;
    if (e.r != e.c) M(e.c, e.r) += scale * e.v;
  }
}

double BlockCoeff::frob_norm_sq() const {
  if (rank_one) {
    double n = z.squaredNorm();
    return n * n;
  }
  double s = 0.0;
  for (const auto& e : entries) s += (e.r == e.c ? 1.0 : 2.0) * e.v * e.v;
  return s;
}

int SdpProblem::add_block(int dim) {
  if (dim <= 0) throw std::invalid_argument("add_block: dimension must be positive");
  block_dims.push_back(dim);
  return static_cast<int>(block_dims.size()) - 1;
}

int SdpProblem::add_free() { return n_free++; }

namespace {

void check_coeff(const SdpProblem& p, const BlockCoeff& bc, const char* where) {
  if (bc.block < 0 || bc.block >= static_cast<int>(p.block_dims.size()))
    throw std::invalid_argument(std::string(where) + ": block index out of range");
  const int d = p.block_dims[static_cast<size_t>(bc.block)];
  if (bc.rank_one) {
    if (bc.z.size() != d) throw std::invalid_argument(std::string(where) + ": rank-one size");
  } else {
    for (const auto& e : bc.entries) {
      if (e.r < 0 || e.c < e.r || e.c >= d)
        throw std::invalid_argument(std::string(where) + ": entry index out of range");
    }
  }
}

}  // namespace

void SdpProblem::validate() const {
  if (block_dims.empty() && n_free == 0)
    throw std::invalid_argument("SdpProblem: no variables declared");
  for (int d : block_dims)
    if (d <= 0) throw std::invalid_argument("SdpProblem: nonpositive block dimension");
  for (const auto& row : rows) {
    std::set<int> seen;
    for (const auto& bc : row.blocks) {
      check_coeff(*this, bc, "row");
      if (!seen.insert(bc.block).second)
        throw std::invalid_argument("SdpProblem: duplicate block reference in one row");
    }
    for (const auto& [idx, v] : row.free_terms) {
      (void)v;
      if (idx < 0 || idx >= n_free)
        throw std::invalid_argument("SdpProblem: free variable index out of range");
    }
  }
  for (const auto& bc : objective.blocks) check_coeff(*this, bc, "objective");
  for (const auto& [idx, v] : objective.free_terms) {
    (void)v;
    if (idx < 0 || idx >= n_free)
      throw std::invalid_argument("SdpProblem: objective free index out of range");
  }
  if (objective.logdet_block >= 0) {
    if (objective.logdet_block >= static_cast<int>(block_dims.size()))
      throw std::invalid_argument("SdpProblem: logdet block out of range");
    if (objective.logdet_weight <= 0)
      throw std::invalid_argument("SdpProblem: logdet weight must be positive");
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

SolverConfig SolverConfig::from_env() {
  SolverConfig c;
  const char* prof = std::getenv("SOSGEOM_TOL_PROFILE");
  if (prof) {
    std::string s(prof);
    double mult = 1.0;
    if (s == "loose") mult = 1e2;
    else if (s == "tight") mult = 1e-1;
    c.tol_feas *= mult;
    c.tol_gap *= mult;
  }
  return c;
}

std::optional<Eigen::VectorXd> extract_near_null_eigenvector(const Eigen::MatrixXd& m,
                                                             double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) return std::nullopt;
  if (es.eigenvalues()(0) > tol) return std::nullopt;
  return es.eigenvectors().col(0);
}

// Dump format, one record per line:
//   p <n_blocks> <n_free> <n_rows>
//   d <block> <dim>
//   c <row> <block> <r> <c> <coef>     sparse constraint entry
//   z <row> <block> <v0> ... <vd-1>    rank-one constraint row on a block
//   f <row> <free_index> <coef>
//   b <row> <rhs>
//   oc <block> <r> <c> <coef> / oz <block> ... / of <free_index> <coef>
//   ol <block> <weight>                logdet term
//   ok <constant>
void dump_problem(const SdpProblem& p, std::ostream& os) {
  os.precision(17);
  os << "p " << p.block_dims.size() << " " << p.n_free << " " << p.rows.size() << "\n";
  for (size_t k = 0; k < p.block_dims.size(); ++k)
    os << "d " << k << " " << p.block_dims[k] << "\n";
  auto put_coeff = [&os](const std::string& tagc, const std::string& tagz, long row,
                         const BlockCoeff& bc) {
    if (bc.rank_one) {
      os << tagz;
      if (row >= 0) os << " " << row;
      os << " " << bc.block;
      for (Eigen::Index i = 0; i < bc.z.size(); ++i) os << " " << bc.z[i];
      os << "\n";
    } else {
      for (const auto& e : bc.entries) {
        os << tagc;
        if (row >= 0) os << " " << row;
        os << " " << bc.block << " " << e.r << " " << e.c << " " << e.v << "\n";
      }
    }
  };
  for (size_t i = 0; i < p.rows.size(); ++i) {
    const auto& row = p.rows[i];
    for (const auto& bc : row.blocks) put_coeff("c", "z", static_cast<long>(i), bc);
    for (const auto& [idx, v] : row.free_terms)
      os << "f " << i << " " << idx << " " << v << "\n";
    os << "b " << i << " " << row.rhs << "\n";
  }
  for (const auto& bc : p.objective.blocks) put_coeff("oc", "oz", -1, bc);
  for (const auto& [idx, v] : p.objective.free_terms) os << "of " << idx << " " << v << "\n";
  if (p.objective.logdet_block >= 0)
    os << "ol " << p.objective.logdet_block << " " << p.objective.logdet_weight << "\n";
  if (p.objective.constant != 0.0) os << "ok " << p.objective.constant << "\n";
}

namespace {

BlockCoeff& coeff_for(std::vector<BlockCoeff>& v, int block) {
  for (auto& bc : v)
    if (bc.block == block) return bc;
  BlockCoeff bc;
  bc.block = block;
  v.push_back(bc);
  return v.back();
}

}  // namespace

SdpProblem parse_problem_dump(std::istream& is) {
  SdpProblem p;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "p") {
      size_t nb, nr;
      ls >> nb >> p.n_free >> nr;
      p.block_dims.assign(nb, 0);
      p.rows.resize(nr);
    } else if (tag == "d") {
      size_t k;
      int dim;
      ls >> k >> dim;
      p.block_dims.at(k) = dim;
    } else if (tag == "c" || tag == "oc") {
      long row = -1;
      if (tag == "c") ls >> row;
      int blk;
      SymEntry e;
      ls >> blk >> e.r >> e.c >> e.v;
      auto& vec = tag == "c" ? p.rows.at(static_cast<size_t>(row)).blocks : p.objective.blocks;
      coeff_for(vec, blk).entries.push_back(e);
    } else if (tag == "z" || tag == "oz") {
      long row = -1;
      if (tag == "z") ls >> row;
      int blk;
      ls >> blk;
      auto& vec = tag == "z" ? p.rows.at(static_cast<size_t>(row)).blocks : p.objective.blocks;
      BlockCoeff& bc = coeff_for(vec, blk);
      bc.rank_one = true;
      std::vector<double> vals;
      double v;
      while (ls >> v) vals.push_back(v);
      bc.z = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    } else if (tag == "f" || tag == "of") {
      long row = -1;
      if (tag == "f") ls >> row;
      int idx;
      double v;
      ls >> idx >> v;
      if (tag == "f") p.rows.at(static_cast<size_t>(row)).free_terms.emplace_back(idx, v);
      else p.objective.free_terms.emplace_back(idx, v);
    } else if (tag == "b") {
      long row;
      double v;
      ls >> row >> v;
      p.rows.at(static_cast<size_t>(row)).rhs = v;
    } else if (tag == "ol") {
      ls >> p.objective.logdet_block >> p.objective.logdet_weight;
    } else if (tag == "ok") {
      ls >> p.objective.constant;
    } else {
      throw std::invalid_argument("parse_problem_dump: unknown tag '" + tag + "'");
    }
  }
  p.validate();
  return p;
}

}  // namespace sosgeom
