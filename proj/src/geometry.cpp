#include "sosgeom/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace sosgeom {

using Eigen::Vector3d;
using Eigen::VectorXd;

double ball_volume(int n, double radius) {
  return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0) * std::pow(radius, n);
}

namespace {

// Circumsphere of 1..d+1 affinely independent support points.
Sphere circumsphere(const std::vector<VectorXd>& R) {
  Sphere s;
  if (R.empty()) {
    s.radius = -1.0;
    return s;
  }
  const int k = static_cast<int>(R.size()) - 1;
  s.center = R[0];
  if (k == 0) {
    s.radius = 0.0;
    return s;
  }
  Eigen::MatrixXd A(k, k);
  VectorXd b(k);
  for (int i = 0; i < k; ++i) {
    VectorXd qi = R[static_cast<size_t>(i + 1)] - R[0];
    b[i] = qi.squaredNorm();
    for (int j = 0; j < k; ++j) A(i, j) = 2.0 * qi.dot(R[static_cast<size_t>(j + 1)] - R[0]);
  }
  VectorXd lam = A.fullPivLu().solve(b);
  for (int i = 0; i < k; ++i) s.center += lam[i] * (R[static_cast<size_t>(i + 1)] - R[0]);
  s.radius = (R[0] - s.center).norm();
  return s;
}

bool in_sphere(const Sphere& s, const VectorXd& p) {
  if (s.radius < 0) return false;
  return (p - s.center).norm() <= s.radius * (1.0 + 1e-10) + 1e-12;
}

Sphere welzl(std::vector<VectorXd>& pts, size_t n, std::vector<VectorXd> R, int d) {
  if (n == 0 || static_cast<int>(R.size()) == d + 1) return circumsphere(R);
  Sphere s = welzl(pts, n - 1, R, d);
  const VectorXd& p = pts[n - 1];
  if (in_sphere(s, p)) return s;
  R.push_back(p);
  return welzl(pts, n - 1, std::move(R), d);
}

}  // namespace

Sphere min_enclosing_sphere(const std::vector<VectorXd>& points, unsigned seed) {
  if (points.empty()) throw std::invalid_argument("min_enclosing_sphere: empty set");
  const int d = static_cast<int>(points[0].size());
  if (d > 3) throw std::invalid_argument("min_enclosing_sphere: n <= 3 only");
  std::vector<VectorXd> pts = points;
  std::mt19937 rng(seed);
  std::shuffle(pts.begin(), pts.end(), rng);
  return welzl(pts, pts.size(), {}, d);
}

namespace {

double hull_area_2d(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> h(2 * pts.size());
  size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  size_t lower = k + 1;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    while (k >= lower && cross(h[k - 2], h[k - 1], *it) <= 0) --k;
    h[k++] = *it;
  }
  h.resize(k - 1);
  double area = 0.0;
  for (size_t i = 0; i < h.size(); ++i) {
    const auto& a = h[i];
    const auto& b = h[(i + 1) % h.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(area);
}

struct Face {
  int a, b, c;
  Vector3d n;  // outward, unnormalized
  double off;  // n . x = off on the plane
  bool alive = true;
};

double hull_volume_3d(const std::vector<VectorXd>& points) {
  const size_t m = points.size();
  if (m < 4) throw std::invalid_argument("convex_hull_volume: need >= 4 points in 3D");
  std::vector<Vector3d> P(m);
  double scale = 0.0;
  for (size_t i = 0; i < m; ++i) {
    P[i] = points[i].head<3>();
    scale = std::max(scale, P[i].cwiseAbs().maxCoeff());
  }
  const double eps = 1e-10 * std::max(scale, 1.0);

  // initial affinely independent quadruple
  int i0 = 0, i1 = -1, i2 = -1, i3 = -1;
  for (size_t i = 1; i < m; ++i)
    if ((P[i] - P[static_cast<size_t>(i0)]).norm() > eps) {
      i1 = static_cast<int>(i);
      break;
    }
  if (i1 < 0) throw std::invalid_argument("convex_hull_volume: degenerate (single point)");
  Vector3d e1 = P[static_cast<size_t>(i1)] - P[static_cast<size_t>(i0)];
  for (size_t i = 0; i < m; ++i)
    if (e1.cross(P[i] - P[static_cast<size_t>(i0)]).norm() > eps * e1.norm()) {
      i2 = static_cast<int>(i);
      break;
    }
  if (i2 < 0) throw std::invalid_argument("convex_hull_volume: degenerate (collinear)");
  Vector3d nrm = e1.cross(P[static_cast<size_t>(i2)] - P[static_cast<size_t>(i0)]);
  for (size_t i = 0; i < m; ++i)
    if (std::abs(nrm.dot(P[i] - P[static_cast<size_t>(i0)])) > eps * nrm.norm()) {
      i3 = static_cast<int>(i);
      break;
    }
  if (i3 < 0) throw std::invalid_argument("convex_hull_volume: degenerate (coplanar)");

  Vector3d interior =
      0.25 * (P[static_cast<size_t>(i0)] + P[static_cast<size_t>(i1)] + P[static_cast<size_t>(i2)] +
              P[static_cast<size_t>(i3)]);

  std::vector<Face> faces;
  auto add_face = [&](int a, int b, int c) {
    Face f;
    f.a = a;
    f.b = b;
    f.c = c;
    f.n = (P[static_cast<size_t>(b)] - P[static_cast<size_t>(a)])
              .cross(P[static_cast<size_t>(c)] - P[static_cast<size_t>(a)]);
    f.off = f.n.dot(P[static_cast<size_t>(a)]);
    if (f.n.dot(interior) > f.off) {  // flip to outward
      std::swap(f.b, f.c);
      f.n = -f.n;
      f.off = f.n.dot(P[static_cast<size_t>(f.a)]);
    }
    faces.push_back(f);
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);

  for (size_t pi = 0; pi < m; ++pi) {
    const Vector3d& p = P[pi];
    std::vector<int> visible;
    for (size_t f = 0; f < faces.size(); ++f) {
      if (!faces[f].alive) continue;
      if (faces[f].n.dot(p) > faces[f].off + eps * faces[f].n.norm()) visible.push_back(static_cast<int>(f));
    }
    if (visible.empty()) continue;
    // horizon = directed edges of visible faces whose reverse is not visible
    std::map<std::pair<int, int>, int> edge_count;
    for (int fi : visible) {
      const Face& f = faces[static_cast<size_t>(fi)];
      edge_count[{f.a, f.b}]++;
      edge_count[{f.b, f.c}]++;
      edge_count[{f.c, f.a}]++;
    }
    std::vector<std::pair<int, int>> horizon;
    for (const auto& [e, cnt] : edge_count) {
      (void)cnt;
      if (!edge_count.count({e.second, e.first})) horizon.push_back(e);
    }
    for (int fi : visible) faces[static_cast<size_t>(fi)].alive = false;
    for (const auto& [u, v] : horizon) add_face(u, v, static_cast<int>(pi));
  }

  double vol = 0.0;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    vol += (P[static_cast<size_t>(f.a)] - interior)
               .cross(P[static_cast<size_t>(f.b)] - interior)
               .dot(P[static_cast<size_t>(f.c)] - interior);
  }
  return vol / 6.0;
}

}  // namespace

double convex_hull_volume(const std::vector<VectorXd>& points) {
  if (points.empty()) throw std::invalid_argument("convex_hull_volume: empty set");
  const int n = static_cast<int>(points[0].size());
  if (n == 2) {
    std::vector<Eigen::Vector2d> p2;
    p2.reserve(points.size());
    for (const auto& p : points) p2.emplace_back(p[0], p[1]);
    return hull_area_2d(std::move(p2));
  }
  if (n == 3) return hull_volume_3d(points);
  throw std::invalid_argument("convex_hull_volume: n in {2,3} only");
}

}  // namespace sosgeom
