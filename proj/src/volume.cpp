#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "sosgeom/fit.hpp"
#include "sosgeom/geometry.hpp"

namespace sosgeom {

BaselineVolumes baseline_volumes(const PointCloud& cloud) {
  if (cloud.size() < 4) throw std::invalid_argument("baseline_volumes: need >= 4 points");
  const int n = cloud.dim();
  BaselineVolumes out;
  Sphere s = min_enclosing_sphere(cloud.points);
  out.sphere = ball_volume(n, s.radius);
  out.aabb = (cloud.aabb_max() - cloud.aabb_min()).prod();
  out.convex_hull = convex_hull_volume(cloud.points);
  return out;
}

Box default_box(const FittedBody& body, double inflate) {
  const int n = body.n_vars();
  Box box;
  box.lo.resize(n);
  box.hi.resize(n);
  const double r = body.normalization.scale * inflate;
  for (int i = 0; i < n; ++i) {
    box.lo[i] = body.normalization.center[i] - r;
    box.hi[i] = body.normalization.center[i] + r;
  }
  return box;
}

VolumeEstimate estimate_volume(const FittedBody& body, long samples, const Box& box,
                               unsigned long long seed) {
  const int n = body.n_vars();
  if (box.lo.size() != n || box.hi.size() != n)
    throw std::invalid_argument("estimate_volume: box dimension mismatch");
  if (samples <= 0) throw std::invalid_argument("estimate_volume: samples must be positive");

  VolumeEstimate out;

  // boundary shell check: points on the box faces should be outside the body
  {
    std::mt19937_64 rng(seed ^ 0xF00DF00DULL);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Eigen::VectorXd x(n);
    const int per_face = 512;
    for (int axis = 0; axis < n && out.boundary_ok; ++axis) {
      for (int side = 0; side < 2 && out.boundary_ok; ++side) {
        for (int k = 0; k < per_face; ++k) {
          for (int j = 0; j < n; ++j) x[j] = box.lo[j] + U(rng) * (box.hi[j] - box.lo[j]);
          x[axis] = side ? box.hi[axis] : box.lo[axis];
          if (body.eval_world(x) <= body.level) {
            out.boundary_ok = false;
            break;
          }
        }
      }
    }
  }

  // chunked counting with per-chunk generators merged in a fixed order, so
  // the result depends only on the seed
  const long chunk = 1L << 16;
  long long inside = 0;
  long done = 0;
  Eigen::VectorXd x(n);
  for (long c = 0; done < samples; ++c) {
    const long count = std::min(chunk, samples - done);
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<unsigned long long>(c + 1));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (long k = 0; k < count; ++k) {
      for (int j = 0; j < n; ++j) x[j] = box.lo[j] + U(rng) * (box.hi[j] - box.lo[j]);
      if (body.eval_world(x) <= body.level) ++inside;
    }
    done += count;
  }
  const double boxvol = box.volume();
  const double phat = static_cast<double>(inside) / static_cast<double>(samples);
  out.volume = boxvol * phat;
  out.stderr_ = boxvol * std::sqrt(std::max(phat * (1.0 - phat), 0.0) / static_cast<double>(samples));
  return out;
}

}  // namespace sosgeom
