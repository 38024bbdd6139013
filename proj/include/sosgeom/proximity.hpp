#pragma once

#include <optional>
#include <vector>

#include "sosgeom/fit.hpp"
#include "sosgeom/polynomial.hpp"
#include "sosgeom/sdp.hpp"

namespace sosgeom {

enum class ConvexityTag { SosConvexCertified, Unknown };

// Basic semialgebraic body { x : g_1(x) <= 1, ..., g_m(x) <= 1 } in world
// coordinates, with a per-constraint convexity tag.
struct BodySpec {
  int n_vars = 0;
  std::vector<Polynomial> constraints;
  std::vector<ConvexityTag> convexity;

  static BodySpec single(const Polynomial& g, ConvexityTag tag = ConvexityTag::Unknown);
  // unit-level world-coordinate form of a fitted body: g = p((x-c)/s) / level
  static BodySpec from_fitted(const FittedBody& body);

  bool all_sos_convex() const;
  bool feasible(const Eigen::VectorXd& x, double margin = 1e-6) const;
  void validate() const;
};

struct DistanceResult {
  double lower_bound = 0.0;  // on the squared Euclidean distance
  int hierarchy_level = 0;
  bool tight = false;
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> minimizers;
  SolveStats solve_stats;
  // solver state for parametric warm starts
  SdpSolution raw;
};

// Level-d sos relaxation of min |x-y|^2 over S1 x S2. Multipliers are sos of
// degree <= 2*ceil(d/2); level 0 means nonnegative scalars. The bound is
// non-decreasing in the level; minimizer recovery sets `tight`.
DistanceResult distance_lower_bound(const BodySpec& s1, const BodySpec& s2, int level = 0,
                                    const SolverConfig& config = {},
                                    const SdpSolution* warm_start = nullptr);

// Reads a candidate (x*, y*) off the near-null eigenvector of the Gram matrix
// of the main sos constraint, rescaled to constant entry 1, with cross-term
// consistency and returns none when the relaxation is not tight.
std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> recover_minimizers(
    const Eigen::MatrixXd& gram, const std::vector<Monomial>& basis, int n_vars,
    double null_tol = 1e-5, double cross_tol = 1e-4);

enum class GrowthClass { Separated, Touching, Overlapping };
const char* to_string(GrowthClass c);

struct GrowthResult {
  double value = 0.0;  // d(p1 || p2)
  GrowthClass classification = GrowthClass::Touching;
  std::optional<Eigen::VectorXd> minimizer;
  bool exact = true;  // false when inputs lacked sos-convexity certificates
  SolveStats solve_stats;
  SdpSolution raw;
};

// d(p1||p2) = min p1 over { p2 <= 1 }, solved via the level-0 sos program
// (exact for sos-convex data); classification uses a +-tol_cls band at 1.
GrowthResult growth_distance(const FittedBody& p1, const FittedBody& p2,
                             const SolverConfig& config = {}, double tol_cls = 1e-5,
                             const SdpSolution* warm_start = nullptr);

// p2 translated along each offset in turn, optionally warm-starting each
// solve from the previous one.
std::vector<GrowthResult> sweep_growth(const FittedBody& p1, const FittedBody& p2,
                                       const std::vector<Eigen::VectorXd>& translations,
                                       bool warm_start = true, const SolverConfig& config = {});

// p'(x) = p(R^T x - R^T t); certificates are conjugated along. R must be a
// rotation (orthogonal, det +1).
FittedBody rigid_transform(const FittedBody& body, const Eigen::MatrixXd& R,
                           const Eigen::VectorXd& t);

}  // namespace sosgeom
