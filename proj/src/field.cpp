#include "romef/field.hpp"

#include <cmath>

namespace romef {

Field Field::zeros(const Mesh& mesh, int ncomp) {
  return Field(Eigen::MatrixXd::Zero(mesh.n_cells(), ncomp),
               Eigen::MatrixXd::Zero(mesh.n_faces() - mesh.n_internal_faces(), ncomp));
}

Field& Field::operator+=(const Field& o) {
  c += o.c;
  b += o.b;
  return *this;
}

Field& Field::operator-=(const Field& o) {
  c -= o.c;
  b -= o.b;
  return *this;
}

Field& Field::operator*=(double a) {
  c *= a;
  b *= a;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Eigen::VectorXd flatten(const Field& f) {
  const Eigen::Index nc = f.c.rows(), nb = f.b.rows(), k = f.c.cols();
  Eigen::VectorXd v(k * (nc + nb));
  for (Eigen::Index j = 0; j < k; ++j) {
    v.segment(j * nc, nc) = f.c.col(j);
    v.segment(k * nc + j * nb, nb) = f.b.col(j);
  }
  return v;
}

Field unflatten(const Eigen::Ref<const Eigen::VectorXd>& v, int ncomp, int n_cells, int n_bfaces) {
  if (v.size() != static_cast<Eigen::Index>(ncomp) * (n_cells + n_bfaces)) {
    throw std::invalid_argument("unflatten: vector length does not match layout");
  }
  Field f(Eigen::MatrixXd(n_cells, ncomp), Eigen::MatrixXd(n_bfaces, ncomp));
  for (int j = 0; j < ncomp; ++j) {
    f.c.col(j) = v.segment(static_cast<Eigen::Index>(j) * n_cells, n_cells);
    f.b.col(j) = v.segment(static_cast<Eigen::Index>(ncomp) * n_cells + static_cast<Eigen::Index>(j) * n_bfaces,
                           n_bfaces);
  }
  return f;
}

BoundarySet::BoundarySet(const Mesh& mesh, int ncomp) : ncomp_(ncomp), bcs_(mesh.patches().size()) {}

void BoundarySet::set(const Mesh& mesh, const std::string& patch, PatchBc bc) {
  const int p = mesh.patch_index(patch);
  if (p < 0) throw std::invalid_argument("no patch named '" + patch + "'");
  bcs_[p] = std::move(bc);
}

void BoundarySet::apply(const Mesh& mesh, Field& f, double t) const {
  const int nint = mesh.n_internal_faces();
  if (f.b.rows() != mesh.n_faces() - nint || f.b.cols() != f.c.cols()) {
    f.b.resize(mesh.n_faces() - nint, f.c.cols());
  }
  for (std::size_t p = 0; p < bcs_.size(); ++p) {
    const Patch& patch = mesh.patches()[p];
    const PatchBc& bc = bcs_[p];
    for (int f_ = patch.start; f_ < patch.start + patch.size; ++f_) {
      const int bf = f_ - nint;
      const int o = mesh.owner(f_);
      switch (bc.kind) {
        case BcKind::ZeroGradient:
          f.b.row(bf) = f.c.row(o);
          break;
        case BcKind::FixedValue:
          f.b.row(bf) = bc.fn(mesh.face_centroid(f_), t);
          break;
        case BcKind::FixedGradient:
          f.b.row(bf) = f.c.row(o) + bc.fn(mesh.face_centroid(f_), t) * (mesh.face_mag(f_) / mesh.delta_coeff(f_));
          break;
      }
    }
  }
}

BoundarySet BoundarySet::homogeneous() const {
  BoundarySet h = *this;
  const int k = ncomp_;
  for (auto& bc : h.bcs_) {
    if (bc.kind != BcKind::ZeroGradient) {
      bc.fn = [k](const Vec2&, double) { return Eigen::RowVectorXd::Zero(k); };
    }
  }
  return h;
}

double l2_inner(const Field& a, const Field& b, const Eigen::VectorXd& w) {
  return (a.c.array() * b.c.array()).rowwise().sum().matrix().dot(w);
}

double l2_norm(const Field& a, const Eigen::VectorXd& w) { return std::sqrt(l2_inner(a, a, w)); }

}  // namespace romef
