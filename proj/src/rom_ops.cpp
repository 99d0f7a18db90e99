#include "romef/rom_ops.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "romef/binary_io.hpp"
#include "romef/errors.hpp"
#include "romef/fom.hpp"

namespace romef {

namespace {

constexpr char kMagic[] = "ROMEFOPS";
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::string to_string(StabMode m) {
  switch (m) {
    case StabMode::Nos: return "nos";
    case StabMode::Ppe: return "ppe";
    case StabMode::Sup1: return "sup1";
    case StabMode::Sup2: return "sup2";
  }
  return "?";
}

StabMode parse_stab_mode(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (l == "nos") return StabMode::Nos;
  if (l == "ppe") return StabMode::Ppe;
  if (l == "sup1") return StabMode::Sup1;
  if (l == "sup2") return StabMode::Sup2;
  throw ConfigError("unknown stabilisation mode '" + s + "' (expected nos, ppe, sup1 or sup2)");
}

std::function<double(double)> inlet_law(const std::string& name) {
  if (name == "benchmark") return benchmark_inlet_law;
  if (name == "unit") return [](double) { return 1.0; };
  throw ConfigError("unknown inlet law '" + name + "'");
}

Eigen::MatrixXd contract_last(const Tensor3& T, const Eigen::VectorXd& w) {
  if (w.size() != T.n2) throw std::invalid_argument("contract_last: dimension mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(T.n0, T.n1);
  for (int k = 0; k < T.n2; ++k) out.noalias() += w[k] * T.slice(k);
  return out;
}

Eigen::VectorXd tensor_contract(const Tensor3& T, const Eigen::VectorXd& a, const Eigen::VectorXd& a_old,
                                const Eigen::VectorXd& b) {
  if (b.size() != T.n1) throw std::invalid_argument("tensor_contract: dimension mismatch");
  return contract_last(T, 2.0 * a - a_old) * b;
}

const Eigen::MatrixXd& ReducedOperators::mat(const std::string& name) const {
  auto it = matrices.find(name);
  if (it == matrices.end()) throw ConfigError("reduced operator '" + name + "' is missing");
  return it->second;
}

const Tensor3& ReducedOperators::tensor(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw ConfigError("reduced tensor '" + name + "' is missing");
  return it->second;
}

void save_operators(const ReducedOperators& ops, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  BinaryWriter w(os);
  w.bytes(kMagic, 8);
  w.u32(kVersion);
  w.str(ops.meta);
  w.u32(static_cast<std::uint32_t>(ops.matrices.size() + ops.tensors.size()));
  for (const auto& [name, m] : ops.matrices) {
    w.str(name);
    w.u32(2);
    w.u64(static_cast<std::uint64_t>(m.rows()));
    w.u64(static_cast<std::uint64_t>(m.cols()));
    w.f64_array(m.data(), static_cast<std::size_t>(m.size()));
  }
  for (const auto& [name, t] : ops.tensors) {
    w.str(name);
    w.u32(3);
    w.u64(static_cast<std::uint64_t>(t.n0));
    w.u64(static_cast<std::uint64_t>(t.n1));
    w.u64(static_cast<std::uint64_t>(t.n2));
    w.f64_array(t.v.data(), t.v.size());
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

ReducedOperators load_operators(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  BinaryReader r(is, path.string());
  r.expect_magic(std::string(kMagic, 8));
  const std::uint32_t version = r.u32();
  if (version != kVersion) r.fail("unsupported version " + std::to_string(version));
  ReducedOperators ops;
  ops.meta = r.str();
  const std::uint32_t n = r.u32();
  if (n > 4096) r.fail("array count out of range");
  for (std::uint32_t a = 0; a < n; ++a) {
    const std::string name = r.str(256);
    const std::uint32_t ndim = r.u32();
    std::vector<std::uint64_t> dims(ndim);
    std::uint64_t total = 1;
    for (auto& d : dims) {
      d = r.u64();
      if (d > (1u << 20)) r.fail("dimension out of range in '" + name + "'");
      total *= d;
    }
    if (total > (1ull << 28)) r.fail("array '" + name + "' too large");
    if (ndim == 2) {
      Eigen::MatrixXd m(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
      r.f64_array(m.data(), static_cast<std::size_t>(m.size()));
      ops.matrices[name] = std::move(m);
    } else if (ndim == 3) {
      Tensor3 t(static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]));
      r.f64_array(t.v.data(), t.v.size());
      ops.tensors[name] = std::move(t);
    } else {
      r.fail("array '" + name + "' has unsupported rank " + std::to_string(ndim));
    }
  }
  return ops;
}

}  // namespace romef
