#include "sosgeom/pointcloud.hpp"

#include <Eigen/Dense>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sosgeom {

Normalization Normalization::identity(int n) {
  Normalization nrm;
  nrm.center = Eigen::VectorXd::Zero(n);
  nrm.scale = 1.0;
  return nrm;
}

Normalization PointCloud::normalization() const {
  if (points.empty()) throw std::invalid_argument("normalization: empty cloud");
  const int n = dim();
  Normalization nrm;
  nrm.center = Eigen::VectorXd::Zero(n);
  for (const auto& p : points) nrm.center += p;
  nrm.center /= size();
  double s = 0.0;
  for (const auto& p : points) s = std::max(s, (p - nrm.center).cwiseAbs().maxCoeff());
  nrm.scale = s > 0 ? s : 1.0;
  return nrm;
}

std::vector<Eigen::VectorXd> PointCloud::normalized_points(const Normalization& nrm) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(nrm.to_normalized(p));
  return out;
}

bool PointCloud::full_dimensional(double tol) const {
  const int n = dim();
  if (size() < n + 1) return false;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (const auto& p : points) c += p;
  c /= size();
  Eigen::MatrixXd D(size(), n);
  for (int i = 0; i < size(); ++i) D.row(i) = (points[static_cast<size_t>(i)] - c).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) > tol * std::max(sv(0), 1e-30);
}

Eigen::VectorXd PointCloud::aabb_min() const {
  Eigen::VectorXd m = points.at(0);
  for (const auto& p : points) m = m.cwiseMin(p);
  return m;
}

Eigen::VectorXd PointCloud::aabb_max() const {
  Eigen::VectorXd m = points.at(0);
  for (const auto& p : points) m = m.cwiseMax(p);
  return m;
}

PointCloud read_xyz(std::istream& is) {
  PointCloud cloud;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<double> vals;
    double v;
    while (ls >> v) vals.push_back(v);
    if (vals.empty()) continue;
    cloud.points.push_back(
        Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
    if (cloud.points.back().size() != cloud.points.front().size())
      throw std::runtime_error("read_xyz: inconsistent point dimension");
  }
  return cloud;
}

PointCloud read_ply(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("ply", 0) != 0)
    throw std::runtime_error("read_ply: missing ply magic");
  long n_vertex = -1;
  bool ascii = false;
  int props_before_xyz = 0, n_props = 0;
  bool in_vertex_element = false, seen_x = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (tok == "element") {
      std::string name;
      long cnt;
      ls >> name >> cnt;
      in_vertex_element = name == "vertex";
      if (in_vertex_element) n_vertex = cnt;
    } else if (tok == "property" && in_vertex_element) {
      std::string type, name;
      ls >> type >> name;
      if (name == "x") seen_x = true;
      if (!seen_x) ++props_before_xyz;
      ++n_props;
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!ascii) throw std::runtime_error("read_ply: only ascii ply supported");
  if (n_vertex < 0) throw std::runtime_error("read_ply: no vertex element");
  PointCloud cloud;
  cloud.points.reserve(static_cast<size_t>(n_vertex));
  for (long i = 0; i < n_vertex; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("read_ply: truncated vertex data");
    std::istringstream ls(line);
    std::vector<double> vals;
    double v;
    while (ls >> v) vals.push_back(v);
    if (static_cast<int>(vals.size()) < props_before_xyz + 3)
      throw std::runtime_error("read_ply: short vertex line");
    Eigen::Vector3d p(vals[static_cast<size_t>(props_before_xyz)],
                      vals[static_cast<size_t>(props_before_xyz + 1)],
                      vals[static_cast<size_t>(props_before_xyz + 2)]);
    cloud.points.push_back(p);
  }
  return cloud;
}

PointCloud read_cloud_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open point cloud file: " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".ply") return read_ply(f);
  return read_xyz(f);
}

void write_xyz(const PointCloud& cloud, std::ostream& os) {
  os.precision(17);
  for (const auto& p : cloud.points) {
    for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? " " : "") << p[i];
    os << "\n";
  }
}

}  // namespace sosgeom
