#include "humanizer/structure.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "humanizer/error.hpp"

namespace humanizer {

BackboneCoordinates load_coordinates(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open coordinates file: ", path);
  BackboneCoordinates out;
  std::string line;
  std::size_t line_no = 0;
  int columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    require(values.size() == 3 || values.size() == 4, "coordinates file ", path, " line ",
            line_no, ": expected 3 (x y z) or 4 (index x y z) columns, got ",
            values.size());
    if (columns == 0) columns = static_cast<int>(values.size());
    require(static_cast<int>(values.size()) == columns, "coordinates file ", path,
            " line ", line_no, ": inconsistent column count");
    const std::size_t offset = values.size() == 4 ? 1 : 0;
    for (double c : values) {
      require(std::isfinite(c), "coordinates file ", path, " line ", line_no,
              ": non-finite value");
    }
    out.coords.push_back({values[offset], values[offset + 1], values[offset + 2]});
  }
  require(!out.coords.empty(), "coordinates file ", path, ": no coordinate rows");
  return out;
}

void save_coordinates_xyz(const std::string& path, const BackboneCoordinates& coords) {
  std::ofstream out(path);
  require(out.good(), "cannot open file for writing: ", path);
  char buf[128];
  for (const auto& row : coords.coords) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", row[0], row[1], row[2]);
    out << buf;
  }
  require(out.good(), "error writing coordinates file: ", path);
}

namespace {

Eigen::Matrix3Xd to_eigen(const BackboneCoordinates& bc) {
  Eigen::Matrix3Xd m(3, bc.length());
  for (std::size_t i = 0; i < bc.length(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) =
        Eigen::Vector3d(bc.coords[i][0], bc.coords[i][1], bc.coords[i][2]);
  }
  return m;
}

}  // namespace

BackboneCoordinates kabsch_align(const BackboneCoordinates& mobile,
                                 const BackboneCoordinates& reference) {
  require(mobile.length() == reference.length(), "kabsch_align: length mismatch (",
          mobile.length(), " vs ", reference.length(), ")");
  require(mobile.length() >= 3, "kabsch_align: need at least 3 points, got ",
          mobile.length());

  Eigen::Matrix3Xd p = to_eigen(mobile);
  Eigen::Matrix3Xd q = to_eigen(reference);
  const Eigen::Vector3d p_center = p.rowwise().mean();
  const Eigen::Vector3d q_center = q.rowwise().mean();
  p.colwise() -= p_center;
  q.colwise() -= q_center;

  const Eigen::Matrix3d h = p * q.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sigma = svd.singularValues();
  // Rank < 2 means the optimal rotation is not unique: all points coincident
  // or collinear in at least one of the two sets.
  const double scale = std::max(p.norm(), q.norm());
  require(scale > 0 && sigma(1) > 1e-12 * scale,
          "kabsch_align: degenerate point set (coincident or collinear points)");

  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) {
    d(2, 2) = -1;  // avoid reflections
  }
  const Eigen::Matrix3d rotation = svd.matrixV() * d * svd.matrixU().transpose();

  BackboneCoordinates out;
  out.coords.resize(mobile.length());
  for (std::size_t i = 0; i < mobile.length(); ++i) {
    const Eigen::Vector3d v = rotation * p.col(static_cast<Eigen::Index>(i)) + q_center;
    out.coords[i] = {v(0), v(1), v(2)};
  }
  return out;
}

double rmsd(const BackboneCoordinates& a, const BackboneCoordinates& b) {
  require(a.length() == b.length() && a.length() > 0, "rmsd: length mismatch");
  double total = 0;
  for (std::size_t i = 0; i < a.length(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double d = a.coords[i][k] - b.coords[i][k];
      total += d * d;
    }
  }
  return std::sqrt(total / static_cast<double>(a.length()));
}

double structure_score_prealigned(const BackboneCoordinates& candidate,
                                  const BackboneCoordinates& starter) {
  require(candidate.length() == starter.length(), "structure_score: length mismatch (",
          candidate.length(), " vs ", starter.length(), ")");
  require(candidate.length() > 0, "structure_score: empty coordinates");
  double sum_sq = 0;
  for (std::size_t i = 0; i < candidate.length(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double d = candidate.coords[i][k] - starter.coords[i][k];
      sum_sq += d * d;
    }
  }
  const double length = static_cast<double>(candidate.length());
  return -std::sqrt(sum_sq) / (9.0 * length * length);
}

double structure_score(const BackboneCoordinates& candidate,
                       const BackboneCoordinates& starter) {
  return structure_score_prealigned(kabsch_align(candidate, starter), starter);
}

}  // namespace humanizer
