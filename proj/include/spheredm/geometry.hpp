#pragma once

#include "spheredm/types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace spheredm {

struct SpherePoint {
  double x = 0.0, y = 0.0, z = 1.0;

  double dot(const SpherePoint& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }

  /// Rescale to exact unit norm. Throws if the input is too short to normalize.
  static SpherePoint normalized(double x, double y, double z) {
    const double r = std::sqrt(x * x + y * y + z * z);
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument("SpherePoint: cannot normalize zero/non-finite vector");
    return {x / r, y / r, z / r};
  }
};

/// Geodesic (great-circle) distance in radians; dot product clamped to [-1,1].
inline double geodesic_distance(const SpherePoint& a, const SpherePoint& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

enum class PointFamily { fibonacci, hammersley, min_energy, file };

inline const char* family_name(PointFamily f) {
  switch (f) {
    case PointFamily::fibonacci: return "fibonacci";
    case PointFamily::hammersley: return "hammersley";
    case PointFamily::min_energy: return "min_energy";
    case PointFamily::file: return "file";
  }
  return "?";
}

struct MeshMetrics {
  double h = 0.0;    ///< fill distance (radians), probe-estimated
  double q = 0.0;    ///< separation radius (radians), exact all-pairs
  double rho = 0.0;  ///< mesh ratio h/q
};

/// Ordered point set on S^2. Index j identifies x_j in every downstream matrix.
class PointSet {
 public:
  PointSet(std::vector<SpherePoint> pts, PointFamily family)
      : pts_(std::move(pts)), family_(family) {
    for (const auto& p : pts_) {
      if (std::abs(p.x * p.x + p.y * p.y + p.z * p.z - 1.0) > 1e-12)
        throw std::invalid_argument("PointSet: point off the unit sphere");
    }
    check_distinct();
  }

  int size() const { return static_cast<int>(pts_.size()); }
  const SpherePoint& operator[](int j) const { return pts_[static_cast<size_t>(j)]; }
  const std::vector<SpherePoint>& points() const { return pts_; }
  PointFamily family() const { return family_; }

  /// N x 3 coordinate matrix (row j = x_j).
  Matrix coords() const {
    Matrix c(size(), 3);
    for (int j = 0; j < size(); ++j) c.row(j) << pts_[j].x, pts_[j].y, pts_[j].z;
    return c;
  }

  /// All pairwise dot products, clamped to [-1,1], exact 1 on the diagonal.
  Matrix dot_matrix() const {
    Matrix c = coords();
    Matrix d = c * c.transpose();
    d = d.cwiseMax(-1.0).cwiseMin(1.0);
    d.diagonal().setOnes();
    return d;
  }

  const std::optional<MeshMetrics>& cached_metrics() const { return metrics_; }
  void cache_metrics(const MeshMetrics& m) const { metrics_ = m; }

 private:
  void check_distinct() const {
    const int n = size();
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        if (geodesic_distance(pts_[j], pts_[k]) <= 1e-10)
          throw std::invalid_argument("PointSet: coincident points at indices " +
                                      std::to_string(j) + ", " + std::to_string(k));
  }

  std::vector<SpherePoint> pts_;
  PointFamily family_;
  mutable std::optional<MeshMetrics> metrics_;
};

namespace detail {

inline std::vector<SpherePoint> fibonacci_points(int n) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<SpherePoint> pts;
  pts.reserve(static_cast<size_t>(n));
  const int half = (n - 1) / 2;
  for (int i = -half; i <= half; ++i) {
    const double lat = std::asin(2.0 * i / n);
    const double lon = std::fmod(two_pi * i / phi, two_pi);
    pts.push_back({std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)});
  }
  return pts;
}

}  // namespace detail

/// Spherical Fibonacci lattice, symmetric form: i = -(N-1)/2 ... (N-1)/2,
/// latitude asin(2i/N), longitude 2*pi*i/phi (phi the golden ratio).
inline PointSet generate_fibonacci(int n) {
  require(n >= 3, "fibonacci: N must be >= 3");
  require(n % 2 == 1, "fibonacci: N must be odd");
  return PointSet(detail::fibonacci_points(n), PointFamily::fibonacci);
}

/// Base-2 van der Corput radical inverse.
inline double van_der_corput2(unsigned i) {
  double v = 0.0, b = 0.5;
  while (i) {
    if (i & 1u) v += b;
    i >>= 1u;
    b *= 0.5;
  }
  return v;
}

/// Hammersley set: z area-uniform, longitude from the van der Corput sequence.
inline PointSet generate_hammersley(int n) {
  require(n >= 2, "hammersley: N must be >= 2");
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<SpherePoint> pts;
  pts.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double lon = two_pi * van_der_corput2(static_cast<unsigned>(i));
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts.push_back({r * std::cos(lon), r * std::sin(lon), z});
  }
  return PointSet(std::move(pts), PointFamily::hammersley);
}

namespace detail {

/// Riesz s=2 energy sum_{j != k} |x_j - x_k|^-2 over ordered pairs.
inline double riesz2_energy(const Matrix& c) {
  const int n = static_cast<int>(c.rows());
  double e = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const double d2 = (c.row(j) - c.row(k)).squaredNorm();
      e += 2.0 / d2;
    }
  return e;
}

inline Matrix riesz2_gradient(const Matrix& c) {
  const int n = static_cast<int>(c.rows());
  Matrix g = Matrix::Zero(n, 3);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      Eigen::RowVector3d diff = c.row(j) - c.row(k);
      const double d2 = diff.squaredNorm();
      Eigen::RowVector3d gj = -4.0 * diff / (d2 * d2);
      g.row(j) += gj;
      g.row(k) -= gj;
    }
  return g;
}

}  // namespace detail

/// Projected gradient descent on the Riesz s=2 energy with backtracking.
/// Starts from a Fibonacci lattice (Hammersley when N is even).
inline PointSet generate_min_energy(int n, int iterations) {
  require(n >= 4, "min_energy: N must be >= 4");
  PointSet init = (n % 2 == 1) ? generate_fibonacci(n) : generate_hammersley(n);
  Matrix c = init.coords();
  double energy = detail::riesz2_energy(c);
  double step = 1.0 / (n * n);
  for (int it = 0; it < iterations; ++it) {
    Matrix g = detail::riesz2_gradient(c);
    // remove the radial component so the step stays tangent-dominated
    for (int j = 0; j < n; ++j) g.row(j) -= g.row(j).dot(c.row(j)) * c.row(j);
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Matrix trial = c - step * g;
      for (int j = 0; j < n; ++j) trial.row(j).normalize();
      const double e_trial = detail::riesz2_energy(trial);
      if (e_trial < energy) {
        c = trial;
        energy = e_trial;
        step *= 1.5;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent direction at machine resolution
  }
  std::vector<SpherePoint> pts(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) pts[static_cast<size_t>(j)] = {c(j, 0), c(j, 1), c(j, 2)};
  return PointSet(std::move(pts), PointFamily::min_energy);
}

/// Read a point set from text: one point per line, 3 whitespace-separated
/// Cartesian coordinates, '#' comment lines ignored. Rows with norm within
/// 1e-6 of 1 are snapped to exact unit norm; anything further off is rejected.
inline PointSet load_pointset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_pointset: cannot open " + path);
  std::vector<SpherePoint> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z)) {
      throw std::invalid_argument("load_pointset: malformed row at line " +
                                  std::to_string(lineno));
    }
    std::string extra;
    if (ss >> extra) {
      throw std::invalid_argument("load_pointset: trailing tokens at line " +
                                  std::to_string(lineno));
    }
    const double r = std::sqrt(x * x + y * y + z * z);
    if (std::abs(r - 1.0) > 1e-6) {
      throw std::invalid_argument("load_pointset: row at line " + std::to_string(lineno) +
                                  " has norm " + std::to_string(r));
    }
    pts.push_back(SpherePoint::normalized(x, y, z));
  }
  require(!pts.empty(), "load_pointset: no points in " + path);
  return PointSet(std::move(pts), PointFamily::file);
}

/// Exact separation radius: half the minimum pairwise geodesic distance.
inline double separation_radius(const PointSet& x) {
  require(x.size() >= 2, "separation_radius: need N >= 2");
  Matrix d = x.dot_matrix();
  double max_dot = -2.0;
  const int n = x.size();
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) max_dot = std::max(max_dot, d(j, k));
  return 0.5 * std::acos(std::clamp(max_dot, -1.0, 1.0));
}

/// Fill distance estimated over a dense Fibonacci probe lattice of size
/// max(100 N, 1e5); a lower bound on the true fill distance.
inline double fill_distance_probe(const PointSet& x) {
  require(x.size() >= 2, "fill_distance_probe: need N >= 2");
  int probe_n = std::max(100 * x.size(), 100000);
  if (probe_n % 2 == 0) ++probe_n;
  const std::vector<SpherePoint> probe_pts = detail::fibonacci_points(probe_n);
  const Matrix cx = x.coords();
  Matrix cp(probe_n, 3);
  for (int j = 0; j < probe_n; ++j) {
    const SpherePoint& p = probe_pts[static_cast<size_t>(j)];
    cp.row(j) << p.x, p.y, p.z;
  }
  double min_dot_overall = 2.0;
  // blockwise max-dot to X over probe points
  const int block = 4096;
  for (int start = 0; start < probe_n; start += block) {
    const int rows = std::min(block, probe_n - start);
    Matrix dots = cp.middleRows(start, rows) * cx.transpose();
    Vector best = dots.rowwise().maxCoeff();
    min_dot_overall = std::min(min_dot_overall, best.minCoeff());
  }
  return std::acos(std::clamp(min_dot_overall, -1.0, 1.0));
}

inline MeshMetrics mesh_metrics(const PointSet& x) {
  if (x.cached_metrics()) return *x.cached_metrics();
  MeshMetrics m;
  m.q = separation_radius(x);
  m.h = fill_distance_probe(x);
  m.rho = m.h / m.q;
  if (!(m.q > 0.0) || !(m.h > 0.0))
    throw NumericalError("mesh_metrics: degenerate point set");
  x.cache_metrics(m);
  return m;
}

/// Indices of the n nearest points to x_j (including j), sorted by geodesic
/// distance, ties broken by smaller index.
inline std::vector<int> nearest_neighbors(const PointSet& x, int j, int n) {
  const int total = x.size();
  require(j >= 0 && j < total, "nearest_neighbors: index out of range");
  require(n >= 1 && n <= total, "nearest_neighbors: need 1 <= n <= N");
  std::vector<std::pair<double, int>> by_dist(static_cast<size_t>(total));
  for (int k = 0; k < total; ++k)
    by_dist[static_cast<size_t>(k)] = {-x[j].dot(x[k]), k};  // -dot is monotone in distance
  std::sort(by_dist.begin(), by_dist.end());
  std::vector<int> out(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) out[static_cast<size_t>(k)] = by_dist[static_cast<size_t>(k)].second;
  return out;
}

}  // namespace spheredm
