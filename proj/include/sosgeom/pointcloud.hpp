#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

namespace sosgeom {

// Affine map x -> (x - center)/scale taking the cloud into [-1,1]^n.
struct Normalization {
  Eigen::VectorXd center;
  double scale = 1.0;

  Eigen::VectorXd to_normalized(const Eigen::VectorXd& x) const { return (x - center) / scale; }
  Eigen::VectorXd to_world(const Eigen::VectorXd& x) const { return x * scale + center; }

  static Normalization identity(int n);
};

struct PointCloud {
  std::vector<Eigen::VectorXd> points;

  int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
  int size() const { return static_cast<int>(points.size()); }

  // centroid center, uniform scale = max |coordinate| after centering
  Normalization normalization() const;
  std::vector<Eigen::VectorXd> normalized_points(const Normalization& nrm) const;

  // affine hull must be full-dimensional for fitting; smallest/largest
  // singular value ratio of the centered data
  bool full_dimensional(double tol = 1e-10) const;

  Eigen::VectorXd aabb_min() const;
  Eigen::VectorXd aabb_max() const;
};

// ASCII XYZ: one point per line, whitespace separated, '#' comments.
PointCloud read_xyz(std::istream& is);
// ASCII PLY: vertex positions only, faces ignored.
PointCloud read_ply(std::istream& is);
// dispatch on extension (.xyz / .ply)
PointCloud read_cloud_file(const std::string& path);
void write_xyz(const PointCloud& cloud, std::ostream& os);

}  // namespace sosgeom
