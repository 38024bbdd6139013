#pragma once

#include <optional>
#include <string>

#include "sosgeom/gram.hpp"
#include "sosgeom/pointcloud.hpp"
#include "sosgeom/polynomial.hpp"
#include "sosgeom/sdp.hpp"

namespace sosgeom {

enum class FitFormulation { HessianLogdet, HessianTrace, GramLogdet, GramTrace, InverseMoment };
const char* to_string(FitFormulation f);
FitFormulation fit_formulation_from_string(const std::string& s);

enum class FitObjective { Logdet, Trace };

struct FitRequest {
  int degree = 2;  // even total degree 2d
  FitFormulation formulation = FitFormulation::GramLogdet;
  double convexity_c = 0.0;  // gram formulations only
  double level = 1.0;
  SolverConfig solver;
};

// A fitted sublevel-set body { x : p((x - center)/scale) <= level }. The
// polynomial and its certificates live in normalized coordinates.
struct FittedBody {
  Polynomial polynomial;
  double level = 1.0;
  Normalization normalization;
  std::optional<GramCertificate> gram_p;  // sos witness for p
  std::optional<GramCertificate> gram_h;  // sos-convex witness, when imposed
  double objective_value = 0.0;
  FitFormulation formulation = FitFormulation::GramLogdet;

  int n_vars() const { return polynomial.n_vars(); }
  double eval_world(const Eigen::VectorXd& x) const;
  bool contains_world(const Eigen::VectorXd& x, double margin = 1e-6) const;
  // p expressed in world coordinates (exact affine substitution)
  Polynomial polynomial_world() const;
  bool sos_convex_certified() const { return gram_h.has_value(); }
};

FittedBody fit_body(const PointCloud& cloud, const FitRequest& request);

FittedBody fit_hessian(const PointCloud& cloud, int degree, FitObjective objective,
                       const SolverConfig& config = {});
FittedBody fit_gram(const PointCloud& cloud, int degree, FitObjective objective,
                    double convexity_c = 0.0, const SolverConfig& config = {});
FittedBody fit_inverse_moment(const PointCloud& cloud, int degree,
                              double cond_limit = 1e12);

// Center x0 = argmin p, shift s = p(x0) and shape matrix M = A/(level - s)
// of a degree-2 body, so that { x : (x-x0)^T M (x-x0) <= 1 } is the sublevel
// set in normalized coordinates. World-space volume multiplies by scale^n.
struct EllipsoidForm {
  Eigen::MatrixXd shape;
  Eigen::VectorXd center;
  double volume_normalized = 0.0;
  double volume_world = 0.0;
};
EllipsoidForm ellipsoid_form(const FittedBody& body);

struct BaselineVolumes {
  double sphere = 0.0;
  double aabb = 0.0;
  double convex_hull = 0.0;
};
BaselineVolumes baseline_volumes(const PointCloud& cloud);

struct VolumeEstimate {
  double volume = 0.0;
  double stderr_ = 0.0;
  bool boundary_ok = true;  // false when the box boundary shell intersects the body
};

struct Box {
  Eigen::VectorXd lo, hi;
  double volume() const { return (hi - lo).prod(); }
};

// World-coordinate bounding box inflated 10% beyond the normalization cube.
Box default_box(const FittedBody& body, double inflate = 1.10);

// Monte Carlo volume of the body in world coordinates; deterministic for a
// fixed seed (chunked counters merged in order).
VolumeEstimate estimate_volume(const FittedBody& body, long samples, const Box& box,
                               unsigned long long seed = 20240817ULL);

}  // namespace sosgeom
