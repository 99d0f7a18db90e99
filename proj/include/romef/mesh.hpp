#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace romef {

using Vec2 = Eigen::Vector2d;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by load_mesh for malformed input; carries the 1-based line number.
class MeshParseError : public MeshError {
 public:
  MeshParseError(const std::string& what, int line)
      : MeshError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Boundary faces of one patch occupy [start, start + size) in global face order.
struct Patch {
  std::string name;
  int start = 0;
  int size = 0;
};

/// Face description used to build a mesh. The edge v0 -> v1 runs
/// counter-clockwise around the owner, so the area vector (dy, -dx) points
/// out of the owner. `neighbour` is -1 for boundary faces, which then name
/// their patch by index into the patch list.
struct FaceDef {
  int v0 = 0;
  int v1 = 0;
  int owner = 0;
  int neighbour = -1;
  int patch = -1;
};

struct QualityReport {
  double max_non_orthogonality_deg = 0.0;
  double avg_non_orthogonality_deg = 0.0;
  double max_skewness = 0.0;
  double max_aspect_ratio = 0.0;
};

/// Two-dimensional polygonal finite-volume mesh with unit depth.
///
/// Internal faces come first, followed by boundary faces grouped by patch in
/// patch order. The mesh is immutable after construction; all geometric
/// factors used by the discrete operators are computed once here.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec2> vertices, std::vector<FaceDef> faces, std::vector<std::string> patch_names);

  int n_cells() const { return static_cast<int>(cell_area_.size()); }
  int n_faces() const { return static_cast<int>(owner_.size()); }
  int n_internal_faces() const { return n_internal_; }
  int n_vertices() const { return static_cast<int>(vertices_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Patch>& patches() const { return patches_; }
  int patch_index(const std::string& name) const;  // -1 when absent
  const Patch& patch(const std::string& name) const;

  int owner(int f) const { return owner_[f]; }
  int neighbour(int f) const { return neighbour_[f]; }
  int face_patch(int f) const { return face_patch_[f]; }
  int face_v0(int f) const { return face_v0_[f]; }
  int face_v1(int f) const { return face_v1_[f]; }
  bool is_boundary(int f) const { return f >= n_internal_; }

  const Vec2& centroid(int c) const { return cell_centroid_[c]; }
  double area(int c) const { return cell_area_[c]; }
  const Eigen::VectorXd& cell_areas() const { return cell_area_; }

  const Vec2& face_centroid(int f) const { return face_centroid_[f]; }
  /// Area vector, length = face length, pointing out of the owner.
  const Vec2& face_area(int f) const { return face_area_[f]; }
  double face_mag(int f) const { return face_mag_[f]; }
  /// Owner interpolation weight: phi_f = w phi_P + (1 - w) phi_N.
  double weight(int f) const { return weight_[f]; }
  /// Orthogonal Laplacian coefficient |S|^2 / (d . S) with d = C_N - C_P
  /// (internal) or x_f - C_P (boundary).
  double delta_coeff(int f) const { return delta_coeff_[f]; }
  /// Non-orthogonal remainder k = S - d |S|^2 / (d . S); zero on boundary faces.
  const Vec2& correction_vector(int f) const { return correction_[f]; }

  const std::vector<int>& cell_faces(int c) const { return cell_faces_[c]; }

  double h_min() const { return h_min_; }
  double h_max() const { return h_max_; }
  double total_area() const { return cell_area_.sum(); }

  /// 64-bit FNV-1a hash of the topology and vertex coordinates.
  std::uint64_t fingerprint() const { return fingerprint_; }

  QualityReport quality() const;

  bool operator==(const Mesh& other) const;

 private:
  void build_geometry();

  std::vector<Vec2> vertices_;
  std::vector<int> face_v0_, face_v1_, owner_, neighbour_, face_patch_;
  std::vector<Patch> patches_;
  int n_internal_ = 0;

  std::vector<Vec2> cell_centroid_;
  Eigen::VectorXd cell_area_;
  std::vector<Vec2> face_centroid_, face_area_, correction_;
  std::vector<double> face_mag_, weight_, delta_coeff_;
  std::vector<std::vector<int>> cell_faces_;
  double h_min_ = 0.0, h_max_ = 0.0;
  std::uint64_t fingerprint_ = 0;
};

/// Geometry of the channel-with-cylinder benchmark.
struct CylinderGeometry {
  double length = 2.2;
  double height = 0.41;
  Vec2 center{0.2, 0.2};
  double radius = 0.05;
  /// Half width of the square box carrying the O-grid collar.
  double box_half = 0.1;
};

/// Quasi-structured quad mesh: O-grid collar between the cylinder and a
/// square box, surrounded by Cartesian blocks. `refinement_bias` is the
/// ratio between the largest and smallest spacing in the graded blocks
/// (collar radial direction and downstream block).
/// Patches: inlet, outlet, walls, cylinder.
Mesh generate_cylinder_mesh(int target_cells, double refinement_bias,
                            const CylinderGeometry& geometry = {});

/// Uniform nx x ny quad mesh of [x0, x0+lx] x [y0, y0+ly]. Patch names are
/// given for the left, right, bottom and top sides; sides sharing a name are
/// merged into one patch.
Mesh generate_rectangle_mesh(int nx, int ny, double lx, double ly,
                             const std::array<std::string, 4>& side_patches = {"inlet", "outlet", "walls",
                                                                                "walls"},
                             Vec2 origin = Vec2::Zero());

void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path);
std::string mesh_to_string(const Mesh& mesh);
Mesh mesh_from_string(const std::string& text);

}  // namespace romef
