#include "romef/pod.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "romef/errors.hpp"

namespace romef {

namespace {

constexpr double kRankCutoff = 1e-12;

std::string fmt17(double x) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

}  // namespace

Eigen::MatrixXd correlation_matrix(const SnapshotMatrix& s, const Eigen::VectorXd& w) {
  if (s.cols() == 0) throw ConfigError("correlation matrix of an empty snapshot set '" + s.name + "'");
  if (w.size() != s.rows()) throw std::invalid_argument("correlation_matrix: weight length mismatch");
  const Eigen::MatrixXd ws = w.asDiagonal() * s.data;
  Eigen::MatrixXd C = s.data.transpose() * ws;
  return 0.5 * (C + C.transpose());
}

int modes_for_energy(const Eigen::VectorXd& cumulative, double target) {
  if (!(target > 0.0 && target <= 1.0)) throw ConfigError("energy target must lie in (0, 1]");
  for (Eigen::Index k = 0; k < cumulative.size(); ++k) {
    // tolerate rounding in the partial sums when target is 1
    if (cumulative[k] >= target - 1e-14) return static_cast<int>(k + 1);
  }
  return static_cast<int>(cumulative.size());
}

PodBasis compute_basis(const Eigen::MatrixXd& C, const SnapshotMatrix& s, const Eigen::VectorXd& w,
                       const PodRequest& request) {
  const Eigen::Index ns = s.cols();
  if (ns == 0) throw ConfigError("POD of an empty snapshot set '" + s.name + "'");
  if (C.rows() != ns || C.cols() != ns) throw std::invalid_argument("compute_basis: C does not match the set");
  if (request.count.has_value() == request.energy.has_value()) {
    throw ConfigError("POD request needs exactly one of a mode count or an energy target");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of the correlation matrix failed");

  PodBasis b;
  b.field = s.name;
  b.eigenvalues = es.eigenvalues().reverse().cwiseMax(0.0);
  b.Q = es.eigenvectors().rowwise().reverse();
  const double total = b.eigenvalues.sum();
  b.cumulative = Eigen::VectorXd::Zero(ns);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ns; ++i) {
    acc += b.eigenvalues[i];
    b.cumulative[i] = total > 0.0 ? acc / total : 1.0;
  }
  const double l1 = b.eigenvalues[0];
  b.rank = 0;
  for (Eigen::Index i = 0; i < ns; ++i) {
    if (l1 > 0.0 && b.eigenvalues[i] >= kRankCutoff * l1) ++b.rank;
  }

  int r = 0;
  if (request.count) {
    r = *request.count;
    if (r < 0) throw ConfigError("negative mode count for " + s.name);
  } else {
    r = std::min(modes_for_energy(b.cumulative, *request.energy), b.rank);
  }
  if (r > b.rank) {
    throw ConfigError("requested " + std::to_string(r) + " modes of " + s.name + " but the numerical rank is " +
                      std::to_string(b.rank));
  }

  b.modes = s;
  b.modes.name = s.name;
  b.modes.data.resize(s.rows(), r);
  b.modes.times.clear();
  const Eigen::ArrayXd wa = w.array();
  for (int i = 0; i < r; ++i) {
    Eigen::VectorXd z = s.data * b.Q.col(i) / std::sqrt(b.eigenvalues[i]);
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < i; ++j) z -= weighted_dot(w, b.modes.data.col(j), z) * b.modes.data.col(j);
    }
    z /= std::sqrt(weighted_dot(w, z, z));

    const Eigen::ArrayXd scaled = (z.array() * wa.sqrt()).abs();
    const double thresh = 1e-8 * scaled.maxCoeff();
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      if (scaled[k] > thresh) {
        if (z[k] < 0.0) {
          z = -z;
          b.Q.col(i) = -b.Q.col(i);
        }
        break;
      }
    }
    b.modes.data.col(i) = z;
    b.modes.times.push_back(static_cast<double>(i + 1));
  }
  return b;
}

Eigen::MatrixXd project(const PodBasis& basis, const Eigen::VectorXd& w, const Eigen::MatrixXd& data) {
  return basis.modes.data.transpose() * (w.asDiagonal() * data);
}

double reconstruction_error_sq(const PodBasis& basis, const Eigen::VectorXd& w, const SnapshotMatrix& s, int k) {
  const Eigen::MatrixXd Z = basis.modes.data.leftCols(k);
  const Eigen::MatrixXd R = s.data - Z * (Z.transpose() * (w.asDiagonal() * s.data));
  return (R.array().square().colwise() * w.array()).sum();
}

void save_basis(const PodBasis& b, const std::filesystem::path& modes_path, const std::filesystem::path& eig_path) {
  save_snapshots(b.modes, modes_path);
  std::ofstream os(eig_path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + eig_path.string());
  os << "index,eigenvalue,cumulative\n";
  for (Eigen::Index i = 0; i < b.eigenvalues.size(); ++i) {
    os << (i + 1) << ',' << fmt17(b.eigenvalues[i]) << ',' << fmt17(b.cumulative[i]) << '\n';
  }
}

PodBasis load_basis(const std::filesystem::path& modes_path, const std::filesystem::path& eig_path) {
  PodBasis b;
  b.modes = load_snapshots(modes_path);
  b.field = b.modes.name;
  std::ifstream is(eig_path);
  if (!is) throw std::runtime_error("cannot open " + eig_path.string());
  std::string line;
  std::getline(is, line);
  std::vector<double> ev, cum;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, e, c;
    std::getline(ss, a, ',');
    std::getline(ss, e, ',');
    std::getline(ss, c, ',');
    double x = 0.0, y = 0.0;
    if (std::from_chars(e.data(), e.data() + e.size(), x).ec != std::errc{} ||
        std::from_chars(c.data(), c.data() + c.size(), y).ec != std::errc{}) {
      throw FormatError(eig_path.string() + ": malformed line '" + line + "'");
    }
    ev.push_back(x);
    cum.push_back(y);
  }
  b.eigenvalues = Eigen::Map<Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
  b.cumulative = Eigen::Map<Eigen::VectorXd>(cum.data(), static_cast<Eigen::Index>(cum.size()));
  const double l1 = ev.empty() ? 0.0 : ev.front();
  for (double x : ev) {
    if (l1 > 0.0 && x >= kRankCutoff * l1) ++b.rank;
  }
  return b;
}

}  // namespace romef
