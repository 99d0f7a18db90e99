#pragma once

#include <string>
#include <vector>

#include "romef/field.hpp"
#include "romef/fom.hpp"
#include "romef/mesh.hpp"
#include "romef/postproc.hpp"
#include "romef/rom_ops.hpp"
#include "romef/snapshots.hpp"

namespace romef {

/// Bases the reduced systems are projected on. Velocity spaces hold
/// homogeneous modes; the lifting enters as trial column 0.
struct RomSpaces {
  const SnapshotMatrix* evolve_velocity = nullptr;
  const SnapshotMatrix* evolve_pressure = nullptr;
  const SnapshotMatrix* filter_velocity = nullptr;
  const SnapshotMatrix* filter_pressure = nullptr;
  const Field* lifting = nullptr;
};

struct AssemblyOptions {
  StabMode mode = StabMode::Sup2;
  PhysicsConfig physics;
  AeroReference aero;
  /// Patches where the pressure is prescribed; the tangential derivative of
  /// pressure modes vanishes there in the curl boundary term.
  std::vector<std::string> fixed_pressure_patches{"outlet"};
  /// Name of the lifting time law stored in the metadata.
  std::string inlet_law = "benchmark";
};

/// Galerkin projection of the FV operators. Every entry is the cell sum of
/// a test mode against the FV operator applied to a trial column (which
/// carries its own boundary values):
///   M  = (phi_i, phi_j)         Mt  = (phi_i, phibar_j)     A = (phi_i, L phi_j)
///   B  = (phi_i, grad psi_j)    P   = (psi_i, div phi_j)
///   G  = (phi_i, C(phibar_k) phi_j)
/// and the filter counterparts Mbar, MtT, Abar, Bbar, Pbar. For PPE mode
/// also
///   D  = (grad psi_i, grad psi_j)           J = (grad psi_i, C(phibar_k) phi_j)
///   N  = <n x grad psi_i, curl phi_j>       F = <psi_i, n . phi_j>
///   Fbar = <psi_i, n . phibar_j>            Dbar, Nbar on the filter spaces
/// where <.,.> sums over boundary faces. `aero_u`, `aero_q` give the force
/// coefficients per unit coefficient. Initial coefficients of `initial`
/// (rest when null) are stored as beta0 etc.
ReducedOperators assemble(const Mesh& mesh, const RomSpaces& spaces, const AssemblyOptions& opt,
                          const FomState* initial = nullptr);

/// Coefficients of a field in a (possibly non-orthogonal) space: Gram solve.
Eigen::VectorXd project_coefficients(const SnapshotMatrix& space, const Eigen::VectorXd& w,
                                     const Eigen::VectorXd& flat_field);

/// Dimensions read back from the metadata.
struct RomDims {
  int nv = 0, nq = 0, nu = 0, nqbar = 0;
};
RomDims rom_dims(const ReducedOperators& ops);

}  // namespace romef
