#pragma once

// Independent oracles used by the test and acceptance suites. These stay
// deliberately naive (coordinate ascent, penalty gradient descent, dense
// grids) so they share no code path with the solvers they check.

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "sosgeom/polynomial.hpp"
#include "sosgeom/sdp.hpp"

namespace sosgeom::oracles {

// Khachiyan-style barycentric coordinate ascent for the minimum-volume
// enclosing ellipsoid { x : (x-c)^T A (x-c) <= 1 } of a point set.
struct Mvee {
  Eigen::MatrixXd shape;   // A
  Eigen::VectorXd center;  // c
  double volume = 0.0;
};
Mvee khachiyan_mvee(const std::vector<Eigen::VectorXd>& points, double eps = 1e-9,
                    int max_iter = 200000);

double unit_ball_volume(int n);

// Dense-grid quadrature of vol{ x in box : p(x) <= level }, n <= 3.
double grid_volume(const Polynomial& p, double level, const Eigen::VectorXd& lo,
                   const Eigen::VectorXd& hi, int cells_per_axis);

// Brute-force squared distance between two sublevel sets in the plane on a
// dense grid; 0 when the sampled sets intersect. Returns nullopt if either
// set has no feasible grid point.
std::optional<double> grid_distance_sq_2d(const Polynomial& p1, double lvl1,
                                          const Polynomial& p2, double lvl2,
                                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                          int cells_per_axis);

// Penalty + projected-gradient method for a linear-objective SdpProblem;
// crude but completely independent of the interior-point path.
double projected_gradient_objective(const SdpProblem& prob, int outer = 40, int inner = 4000);

}  // namespace sosgeom::oracles
