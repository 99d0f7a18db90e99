#include "romef/fv.hpp"

#include <cmath>

#include "romef/errors.hpp"

namespace romef {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat build(int n, Triplets& t) {
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

}  // namespace

Eigen::MatrixXd face_interp_central(const Mesh& mesh, const Field& f) {
  const int nf = mesh.n_faces(), ni = mesh.n_internal_faces();
  Eigen::MatrixXd out(nf, f.ncomp());
  for (int i = 0; i < ni; ++i) {
    const double w = mesh.weight(i);
    out.row(i) = w * f.c.row(mesh.owner(i)) + (1.0 - w) * f.c.row(mesh.neighbour(i));
  }
  out.bottomRows(nf - ni) = f.b;
  return out;
}

Eigen::VectorXd interp_cells(const Mesh& mesh, const Eigen::VectorXd& cells) {
  const int nf = mesh.n_faces(), ni = mesh.n_internal_faces();
  Eigen::VectorXd out(nf);
  for (int i = 0; i < ni; ++i) {
    const double w = mesh.weight(i);
    out[i] = w * cells[mesh.owner(i)] + (1.0 - w) * cells[mesh.neighbour(i)];
  }
  for (int i = ni; i < nf; ++i) out[i] = cells[mesh.owner(i)];
  return out;
}

Eigen::MatrixXd gauss_gradient(const Mesh& mesh, const Eigen::MatrixXd& cells, const Eigen::MatrixXd& b) {
  const int nf = mesh.n_faces(), ni = mesh.n_internal_faces();
  const Eigen::Index k = cells.cols();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(mesh.n_cells(), 2 * k);
  for (int i = 0; i < nf; ++i) {
    const Vec2& S = mesh.face_area(i);
    const int o = mesh.owner(i);
    if (i < ni) {
      const int n = mesh.neighbour(i);
      const double w = mesh.weight(i);
      for (Eigen::Index j = 0; j < k; ++j) {
        const double v = w * cells(o, j) + (1.0 - w) * cells(n, j);
        g(o, 2 * j) += v * S.x();
        g(o, 2 * j + 1) += v * S.y();
        g(n, 2 * j) -= v * S.x();
        g(n, 2 * j + 1) -= v * S.y();
      }
    } else {
      for (Eigen::Index j = 0; j < k; ++j) {
        const double v = b(i - ni, j);
        g(o, 2 * j) += v * S.x();
        g(o, 2 * j + 1) += v * S.y();
      }
    }
  }
  for (int c = 0; c < mesh.n_cells(); ++c) g.row(c) /= mesh.area(c);
  return g;
}

Eigen::MatrixXd gauss_gradient(const Mesh& mesh, const Field& f) { return gauss_gradient(mesh, f.c, f.b); }

Eigen::VectorXd face_flux(const Mesh& mesh, const Field& u) {
  if (u.ncomp() != 2) throw std::invalid_argument("face_flux needs a vector field");
  const int nf = mesh.n_faces(), ni = mesh.n_internal_faces();
  Eigen::VectorXd phi(nf);
  for (int i = 0; i < ni; ++i) {
    const double w = mesh.weight(i);
    const int o = mesh.owner(i), n = mesh.neighbour(i);
    const Vec2& S = mesh.face_area(i);
    phi[i] = (w * u.c(o, 0) + (1.0 - w) * u.c(n, 0)) * S.x() + (w * u.c(o, 1) + (1.0 - w) * u.c(n, 1)) * S.y();
  }
  for (int i = ni; i < nf; ++i) {
    const Vec2& S = mesh.face_area(i);
    phi[i] = u.b(i - ni, 0) * S.x() + u.b(i - ni, 1) * S.y();
  }
  return phi;
}

Eigen::VectorXd surface_sum(const Mesh& mesh, const Eigen::VectorXd& flux) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(mesh.n_cells());
  const int ni = mesh.n_internal_faces();
  for (int i = 0; i < mesh.n_faces(); ++i) {
    s[mesh.owner(i)] += flux[i];
    if (i < ni) s[mesh.neighbour(i)] -= flux[i];
  }
  return s;
}

Eigen::VectorXd gauss_divergence(const Mesh& mesh, const Field& u) {
  return surface_sum(mesh, face_flux(mesh, u)).cwiseQuotient(mesh.cell_areas());
}

SparseOperator laplacian(const Mesh& mesh, const Eigen::VectorXd& gamma, const BoundarySet& bcs, double t) {
  const int nc = mesh.n_cells(), ni = mesh.n_internal_faces();
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    if (!(gamma[i] >= 0.0)) throw std::invalid_argument("laplacian: negative or non-finite diffusivity");
  }
  Triplets t_;
  t_.reserve(4 * ni + (mesh.n_faces() - ni));
  SparseOperator op;
  op.s = Eigen::MatrixXd::Zero(nc, bcs.ncomp());
  for (int i = 0; i < ni; ++i) {
    const double a = gamma[i] * mesh.delta_coeff(i);
    const int o = mesh.owner(i), n = mesh.neighbour(i);
    t_.emplace_back(o, o, -a);
    t_.emplace_back(o, n, a);
    t_.emplace_back(n, n, -a);
    t_.emplace_back(n, o, a);
  }
  for (std::size_t p = 0; p < bcs.size(); ++p) {
    const Patch& patch = mesh.patches()[p];
    const PatchBc& bc = bcs[static_cast<int>(p)];
    for (int i = patch.start; i < patch.start + patch.size; ++i) {
      const int o = mesh.owner(i);
      const double a = gamma[i] * mesh.delta_coeff(i);
      if (bc.kind == BcKind::FixedValue) {
        t_.emplace_back(o, o, -a);
        op.s.row(o) += a * bc.fn(mesh.face_centroid(i), t);
      } else if (bc.kind == BcKind::FixedGradient) {
        op.s.row(o) += gamma[i] * mesh.face_mag(i) * bc.fn(mesh.face_centroid(i), t);
      }
    }
  }
  op.A = build(nc, t_);
  return op;
}

SparseOperator laplacian(const Mesh& mesh, double gamma, const BoundarySet& bcs, double t) {
  return laplacian(mesh, Eigen::VectorXd::Constant(mesh.n_faces(), gamma), bcs, t);
}

Eigen::MatrixXd laplacian_correction(const Mesh& mesh, const Eigen::VectorXd& gamma, const Eigen::MatrixXd& grad) {
  const int ni = mesh.n_internal_faces();
  const Eigen::Index k = grad.cols() / 2;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mesh.n_cells(), k);
  for (int i = 0; i < ni; ++i) {
    const Vec2& kv = mesh.correction_vector(i);
    if (kv.x() == 0.0 && kv.y() == 0.0) continue;
    const int o = mesh.owner(i), n = mesh.neighbour(i);
    const double w = mesh.weight(i);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double gx = w * grad(o, 2 * j) + (1.0 - w) * grad(n, 2 * j);
      const double gy = w * grad(o, 2 * j + 1) + (1.0 - w) * grad(n, 2 * j + 1);
      const double v = gamma[i] * (kv.x() * gx + kv.y() * gy);
      out(o, j) += v;
      out(n, j) -= v;
    }
  }
  return out;
}

Eigen::MatrixXd apply_laplacian(const Mesh& mesh, const Eigen::VectorXd& gamma, const Field& f) {
  const int nf = mesh.n_faces(), ni = mesh.n_internal_faces();
  Eigen::MatrixXd out = laplacian_correction(mesh, gamma, gauss_gradient(mesh, f));
  for (int i = 0; i < ni; ++i) {
    const int o = mesh.owner(i), n = mesh.neighbour(i);
    const double a = gamma[i] * mesh.delta_coeff(i);
    for (int j = 0; j < f.ncomp(); ++j) {
      const double v = a * (f.c(n, j) - f.c(o, j));
      out(o, j) += v;
      out(n, j) -= v;
    }
  }
  for (int i = ni; i < nf; ++i) {
    const int o = mesh.owner(i);
    const double a = gamma[i] * mesh.delta_coeff(i);
    out.row(o) += a * (f.b.row(i - ni) - f.c.row(o));
  }
  return out;
}

Eigen::MatrixXd apply_laplacian(const Mesh& mesh, double gamma, const Field& f) {
  return apply_laplacian(mesh, Eigen::VectorXd::Constant(mesh.n_faces(), gamma), f);
}

SparseOperator convective_operator(const Mesh& mesh, const Eigen::VectorXd& flux, const BoundarySet& bcs, double t) {
  const int nc = mesh.n_cells(), ni = mesh.n_internal_faces();
  Triplets t_;
  t_.reserve(4 * ni + (mesh.n_faces() - ni));
  SparseOperator op;
  op.s = Eigen::MatrixXd::Zero(nc, bcs.ncomp());
  for (int i = 0; i < ni; ++i) {
    const double F = flux[i];
    if (F == 0.0) continue;
    const double w = mesh.weight(i);
    const int o = mesh.owner(i), n = mesh.neighbour(i);
    t_.emplace_back(o, o, F * w);
    t_.emplace_back(o, n, F * (1.0 - w));
    t_.emplace_back(n, n, -F * (1.0 - w));
    t_.emplace_back(n, o, -F * w);
  }
  for (std::size_t p = 0; p < bcs.size(); ++p) {
    const Patch& patch = mesh.patches()[p];
    const PatchBc& bc = bcs[static_cast<int>(p)];
    for (int i = patch.start; i < patch.start + patch.size; ++i) {
      const double F = flux[i];
      if (F == 0.0) continue;
      const int o = mesh.owner(i);
      switch (bc.kind) {
        case BcKind::FixedValue:
          op.s.row(o) += F * bc.fn(mesh.face_centroid(i), t);
          break;
        case BcKind::ZeroGradient:
          t_.emplace_back(o, o, F);
          break;
        case BcKind::FixedGradient:
          t_.emplace_back(o, o, F);
          op.s.row(o) += F * (mesh.face_mag(i) / mesh.delta_coeff(i)) * bc.fn(mesh.face_centroid(i), t);
          break;
      }
    }
  }
  op.A = build(nc, t_);
  return op;
}

Eigen::MatrixXd apply_convection(const Mesh& mesh, const Eigen::VectorXd& flux, const Field& f) {
  const int nf = mesh.n_faces(), ni = mesh.n_internal_faces();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mesh.n_cells(), f.ncomp());
  for (int i = 0; i < ni; ++i) {
    const double F = flux[i];
    const double w = mesh.weight(i);
    const int o = mesh.owner(i), n = mesh.neighbour(i);
    for (int j = 0; j < f.ncomp(); ++j) {
      const double v = F * (w * f.c(o, j) + (1.0 - w) * f.c(n, j));
      out(o, j) += v;
      out(n, j) -= v;
    }
  }
  for (int i = ni; i < nf; ++i) out.row(mesh.owner(i)) += flux[i] * f.b.row(i - ni);
  return out;
}

Eigen::VectorXd pressure_flux(const Mesh& mesh, const Eigen::VectorXd& gamma, const Field& p,
                              const Eigen::MatrixXd& grad) {
  const int nf = mesh.n_faces(), ni = mesh.n_internal_faces();
  Eigen::VectorXd out(nf);
  for (int i = 0; i < ni; ++i) {
    const int o = mesh.owner(i), n = mesh.neighbour(i);
    const double w = mesh.weight(i);
    const Vec2& kv = mesh.correction_vector(i);
    const double gx = w * grad(o, 0) + (1.0 - w) * grad(n, 0);
    const double gy = w * grad(o, 1) + (1.0 - w) * grad(n, 1);
    out[i] = gamma[i] * (mesh.delta_coeff(i) * (p.c(n, 0) - p.c(o, 0)) + kv.x() * gx + kv.y() * gy);
  }
  for (int i = ni; i < nf; ++i) {
    out[i] = gamma[i] * mesh.delta_coeff(i) * (p.b(i - ni, 0) - p.c(mesh.owner(i), 0));
  }
  return out;
}

Eigen::VectorXd rhie_chow_flux(const Mesh& mesh, const Field& HbyA, const Eigen::VectorXd& rAU, const Field& p) {
  for (Eigen::Index c = 0; c < rAU.size(); ++c) {
    if (!std::isfinite(rAU[c]) || !(rAU[c] > 0.0)) {
      throw NumericalError("rhie_chow_flux: zero or invalid momentum diagonal in cell " + std::to_string(c));
    }
  }
  return face_flux(mesh, HbyA) - pressure_flux(mesh, interp_cells(mesh, rAU), p, gauss_gradient(mesh, p));
}

}  // namespace romef
