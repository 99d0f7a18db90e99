#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "romef/field.hpp"
#include "romef/mesh.hpp"

namespace romef {

using SpMat = Eigen::SparseMatrix<double>;

/// Linear cell operator  x -> A x + s  acting column-wise on a k-component
/// field. Values are cell integrals (not divided by the cell area).
struct SparseOperator {
  SpMat A;
  Eigen::MatrixXd s;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& cells) const { return A * cells + s; }
};

/// Central face values (nf x k): weighted average on internal faces, the
/// stored boundary value on boundary faces.
Eigen::MatrixXd face_interp_central(const Mesh& mesh, const Field& f);

/// Face interpolation of a plain cell array; boundary faces take the owner value.
Eigen::VectorXd interp_cells(const Mesh& mesh, const Eigen::VectorXd& cells);

/// Green-Gauss gradient per unit area, nc x 2k: column 2j+d is d/dx_d of
/// component j.
Eigen::MatrixXd gauss_gradient(const Mesh& mesh, const Field& f);

/// Face flux u_f . S for a vector field.
Eigen::VectorXd face_flux(const Mesh& mesh, const Field& u);

/// Net outflow per cell of a face flux (cell integral of the divergence).
Eigen::VectorXd surface_sum(const Mesh& mesh, const Eigen::VectorXd& flux);

/// Divergence per unit area from central face interpolation.
Eigen::VectorXd gauss_divergence(const Mesh& mesh, const Field& u);

/// Implicit orthogonal part of the Laplacian  div(gamma grad f)  with the
/// boundary conditions absorbed at time t.
SparseOperator laplacian(const Mesh& mesh, const Eigen::VectorXd& gamma_f, const BoundarySet& bcs, double t);
SparseOperator laplacian(const Mesh& mesh, double gamma, const BoundarySet& bcs, double t);

/// Explicit non-orthogonal remainder  sum_f gamma_f k_f . (grad f)_f  computed
/// from a given cell gradient (nc x 2k, from gauss_gradient).
Eigen::MatrixXd laplacian_correction(const Mesh& mesh, const Eigen::VectorXd& gamma_f, const Eigen::MatrixXd& grad);

/// Full Laplacian of a field with boundary values set (orthogonal part plus
/// correction from the field's own Green-Gauss gradient).
Eigen::MatrixXd apply_laplacian(const Mesh& mesh, const Eigen::VectorXd& gamma_f, const Field& f);
Eigen::MatrixXd apply_laplacian(const Mesh& mesh, double gamma, const Field& f);

/// Central convection  sum_f phi_f f_f  with the boundary conditions absorbed.
SparseOperator convective_operator(const Mesh& mesh, const Eigen::VectorXd& flux, const BoundarySet& bcs, double t);
Eigen::MatrixXd apply_convection(const Mesh& mesh, const Eigen::VectorXd& flux, const Field& f);

/// Face flux of  gamma grad p : orthogonal part from p and its boundary
/// values plus the non-orthogonal part from `grad` (nc x 2).
Eigen::VectorXd pressure_flux(const Mesh& mesh, const Eigen::VectorXd& gamma_f, const Field& p,
                              const Eigen::MatrixXd& grad);

/// Momentum-interpolated face flux  HbyA_f . S - rAU_f grad(p)_f . S.
/// HbyA.b must hold the boundary velocity (Dirichlet data or extrapolated).
Eigen::VectorXd rhie_chow_flux(const Mesh& mesh, const Field& HbyA, const Eigen::VectorXd& rAU, const Field& p);

/// Gradient of every column of a plain cell array with boundary values
/// taken from `b` (nb x k).
Eigen::MatrixXd gauss_gradient(const Mesh& mesh, const Eigen::MatrixXd& cells, const Eigen::MatrixXd& b);

}  // namespace romef
