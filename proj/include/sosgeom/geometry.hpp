#pragma once

#include <Eigen/Core>
#include <vector>

namespace sosgeom {

struct Sphere {
  Eigen::VectorXd center;
  double radius = 0.0;
};

// Exact minimum enclosing sphere (Welzl, move-to-front), n in {1,2,3}.
Sphere min_enclosing_sphere(const std::vector<Eigen::VectorXd>& points, unsigned seed = 1234);

// Convex hull volume: shoelace in 2D, quickhull in 3D.
double convex_hull_volume(const std::vector<Eigen::VectorXd>& points);

double ball_volume(int n, double radius);

}  // namespace sosgeom
