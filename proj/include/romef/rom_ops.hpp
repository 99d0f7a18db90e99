#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace romef {

enum class StabMode { Nos, Ppe, Sup1, Sup2 };

std::string to_string(StabMode m);
/// Accepts nos, ppe, sup1, sup2 (case-insensitive); throws ConfigError.
StabMode parse_stab_mode(const std::string& s);

/// Time law of the lifting coefficient by name: "benchmark" is
/// sin(pi t / 8), "unit" is 1. Throws ConfigError otherwise.
std::function<double(double)> inlet_law(const std::string& name);

/// Dense third-order tensor, index (i, j, k) stored at i + n0 (j + n1 k).
struct Tensor3 {
  int n0 = 0, n1 = 0, n2 = 0;
  std::vector<double> v;

  Tensor3() = default;
  Tensor3(int a, int b, int c) : n0(a), n1(b), n2(c), v(static_cast<std::size_t>(a) * b * c, 0.0) {}

  double& operator()(int i, int j, int k) { return v[i + static_cast<std::size_t>(n0) * (j + static_cast<std::size_t>(n1) * k)]; }
  double operator()(int i, int j, int k) const {
    return v[i + static_cast<std::size_t>(n0) * (j + static_cast<std::size_t>(n1) * k)];
  }
  /// Slice T(:, :, k) as an n0 x n1 matrix view.
  Eigen::Map<const Eigen::MatrixXd> slice(int k) const {
    return {v.data() + static_cast<std::size_t>(n0) * n1 * k, n0, n1};
  }
};

/// sum_k T(:, :, k) w_k, an n0 x n1 matrix.
Eigen::MatrixXd contract_last(const Tensor3& T, const Eigen::VectorXd& w);

/// out_i = sum_jk T_ijk b_j (2 a_k - a_old_k): the extrapolated convection
/// term of the reduced momentum equation.
Eigen::VectorXd tensor_contract(const Tensor3& T, const Eigen::VectorXd& a, const Eigen::VectorXd& a_old,
                                const Eigen::VectorXd& b);

/// Reduced operators and their metadata. Velocity trial dimensions are
/// augmented: column 0 belongs to the lifting function, columns 1.. to the
/// modes. Rows are always the test modes.
struct ReducedOperators {
  std::map<std::string, Eigen::MatrixXd> matrices;
  std::map<std::string, Tensor3> tensors;
  /// JSON object text; keys documented in docs/formats.md.
  std::string meta;

  const Eigen::MatrixXd& mat(const std::string& name) const;
  const Tensor3& tensor(const std::string& name) const;
  bool has(const std::string& name) const { return matrices.count(name) || tensors.count(name); }
};

/// Binary container "ROMEFOPS" version 1.
void save_operators(const ReducedOperators& ops, const std::filesystem::path& path);
ReducedOperators load_operators(const std::filesystem::path& path);

}  // namespace romef
