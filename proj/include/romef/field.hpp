#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "romef/mesh.hpp"

namespace romef {

/// Cell-centred field with k components (1 = scalar, 2 = vector).
/// `b` holds one row per boundary face, in global face order starting at
/// mesh.n_internal_faces(). Operators read boundary values from `b`, so a
/// field is a complete function on the mesh once its boundary rows are set.
struct Field {
  Eigen::MatrixXd c;
  Eigen::MatrixXd b;

  Field() = default;
  Field(Eigen::MatrixXd cells, Eigen::MatrixXd bnd) : c(std::move(cells)), b(std::move(bnd)) {}

  static Field zeros(const Mesh& mesh, int ncomp);

  int ncomp() const { return static_cast<int>(c.cols()); }
  bool all_finite() const { return c.allFinite() && b.allFinite(); }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Flattened layout used by snapshot matrices: component-major cell block
/// followed by the component-major boundary block.
Eigen::VectorXd flatten(const Field& f);
Field unflatten(const Eigen::Ref<const Eigen::VectorXd>& v, int ncomp, int n_cells, int n_bfaces);

enum class BcKind { FixedValue, ZeroGradient, FixedGradient };

/// Boundary condition of one patch. For FixedValue `fn` gives the value at a
/// face centroid and time, for FixedGradient the outward normal derivative.
struct PatchBc {
  BcKind kind = BcKind::ZeroGradient;
  std::function<Eigen::RowVectorXd(const Vec2&, double)> fn;

  static PatchBc zero_gradient() { return {}; }
  static PatchBc fixed_value(std::function<Eigen::RowVectorXd(const Vec2&, double)> f) {
    return {BcKind::FixedValue, std::move(f)};
  }
  static PatchBc fixed_gradient(std::function<Eigen::RowVectorXd(const Vec2&, double)> f) {
    return {BcKind::FixedGradient, std::move(f)};
  }
  static PatchBc homogeneous(int ncomp) {
    return fixed_value([ncomp](const Vec2&, double) { return Eigen::RowVectorXd::Zero(ncomp); });
  }
};

/// One PatchBc per mesh patch, in patch order.
class BoundarySet {
 public:
  BoundarySet() = default;
  BoundarySet(const Mesh& mesh, int ncomp);

  int ncomp() const { return ncomp_; }
  void set(const Mesh& mesh, const std::string& patch, PatchBc bc);
  const PatchBc& operator[](int patch) const { return bcs_.at(patch); }
  PatchBc& operator[](int patch) { return bcs_.at(patch); }
  std::size_t size() const { return bcs_.size(); }

  /// Fills f.b from the cell values and the boundary data at time t.
  void apply(const Mesh& mesh, Field& f, double t) const;

  /// Same kinds on every patch, values replaced by zero (gradients too).
  BoundarySet homogeneous() const;

 private:
  int ncomp_ = 1;
  std::vector<PatchBc> bcs_;
};

/// Weighted L2 inner product over cells; boundary rows do not contribute.
double l2_inner(const Field& a, const Field& b, const Eigen::VectorXd& cell_areas);
double l2_norm(const Field& a, const Eigen::VectorXd& cell_areas);

}  // namespace romef
