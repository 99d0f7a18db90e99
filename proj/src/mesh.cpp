#include "romef/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <limits>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace romef {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<FaceDef> faces, std::vector<std::string> patch_names)
    : vertices_(std::move(vertices)) {
  const int np = static_cast<int>(patch_names.size());
  for (const auto& fd : faces) {
    if (fd.neighbour < 0 && (fd.patch < 0 || fd.patch >= np)) {
      throw MeshError("boundary face without a valid patch");
    }
    if (fd.v0 < 0 || fd.v1 < 0 || fd.v0 >= n_vertices() || fd.v1 >= n_vertices()) {
      throw MeshError("face references a vertex out of range");
    }
    if (fd.owner < 0) throw MeshError("face without owner");
  }
  // internal faces first, boundary faces grouped by patch; stable so that the
  // caller's ordering inside each group is kept
  std::stable_sort(faces.begin(), faces.end(), [](const FaceDef& a, const FaceDef& b) {
    const int ka = a.neighbour >= 0 ? -1 : a.patch;
    const int kb = b.neighbour >= 0 ? -1 : b.patch;
    return ka < kb;
  });
  const auto nf = faces.size();
  face_v0_.resize(nf);
  face_v1_.resize(nf);
  owner_.resize(nf);
  neighbour_.resize(nf);
  face_patch_.resize(nf);
  patches_.resize(np);
  for (int p = 0; p < np; ++p) patches_[p].name = patch_names[p];
  n_internal_ = 0;
  for (std::size_t f = 0; f < nf; ++f) {
    face_v0_[f] = faces[f].v0;
    face_v1_[f] = faces[f].v1;
    owner_[f] = faces[f].owner;
    neighbour_[f] = faces[f].neighbour;
    face_patch_[f] = faces[f].neighbour >= 0 ? -1 : faces[f].patch;
    if (faces[f].neighbour >= 0) {
      ++n_internal_;
    } else {
      patches_[faces[f].patch].size++;
    }
  }
  int start = n_internal_;
  for (auto& p : patches_) {
    p.start = start;
    start += p.size;
  }
  build_geometry();
}

void Mesh::build_geometry() {
  int nc = 0;
  for (int f = 0; f < n_faces(); ++f) nc = std::max({nc, owner_[f] + 1, neighbour_[f] + 1});
  const int nf = n_faces();

  face_centroid_.resize(nf);
  face_area_.resize(nf);
  face_mag_.resize(nf);
  weight_.assign(nf, 1.0);
  delta_coeff_.resize(nf);
  correction_.assign(nf, Vec2::Zero());
  cell_faces_.assign(nc, {});

  std::vector<double> twice_area(nc, 0.0);
  std::vector<Vec2> moment(nc, Vec2::Zero());
  std::vector<Vec2> closure(nc, Vec2::Zero());
  std::vector<double> perimeter(nc, 0.0);

  for (int f = 0; f < nf; ++f) {
    const Vec2& a = vertices_[face_v0_[f]];
    const Vec2& b = vertices_[face_v1_[f]];
    const Vec2 d = b - a;
    face_centroid_[f] = 0.5 * (a + b);
    face_area_[f] = Vec2(d.y(), -d.x());
    face_mag_[f] = d.norm();
    if (!(face_mag_[f] > 0.0)) throw MeshError("degenerate face " + std::to_string(f));

    // shoelace contributions with the edge oriented counter-clockwise around
    // each adjacent cell
    const double c = cross(a, b);
    const int o = owner_[f];
    twice_area[o] += c;
    moment[o] += c * (a + b);
    closure[o] += face_area_[f];
    perimeter[o] += face_mag_[f];
    cell_faces_[o].push_back(f);
    const int n = neighbour_[f];
    if (n >= 0) {
      twice_area[n] -= c;
      moment[n] -= c * (a + b);
      closure[n] -= face_area_[f];
      perimeter[n] += face_mag_[f];
      cell_faces_[n].push_back(f);
    }
  }

  cell_area_.resize(nc);
  cell_centroid_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const double area = 0.5 * twice_area[c];
    if (!(area > 0.0)) throw MeshError("cell " + std::to_string(c) + " has non-positive area");
    if (closure[c].norm() > 1e-12 * perimeter[c]) {
      throw MeshError("cell " + std::to_string(c) + " is not closed");
    }
    cell_area_[c] = area;
    cell_centroid_[c] = moment[c] / (6.0 * area);
  }

  for (int f = 0; f < nf; ++f) {
    const Vec2& S = face_area_[f];
    const Vec2& Cp = cell_centroid_[owner_[f]];
    const double s2 = S.squaredNorm();
    if (f < n_internal_) {
      const Vec2& Cn = cell_centroid_[neighbour_[f]];
      const Vec2 d = Cn - Cp;
      const double ds = d.dot(S);
      if (!(ds > 0.0)) throw MeshError("face " + std::to_string(f) + " is not oriented owner -> neighbour");
      const double dp = std::abs(S.dot(face_centroid_[f] - Cp));
      const double dn = std::abs(S.dot(Cn - face_centroid_[f]));
      weight_[f] = dn / (dp + dn);
      delta_coeff_[f] = s2 / ds;
      correction_[f] = S - d * (s2 / ds);
    } else {
      const Vec2 d = face_centroid_[f] - Cp;
      const double ds = d.dot(S);
      if (!(ds > 0.0)) throw MeshError("boundary face " + std::to_string(f) + " points into its cell");
      delta_coeff_[f] = s2 / ds;
    }
  }

  h_min_ = std::sqrt(cell_area_.minCoeff());
  h_max_ = std::sqrt(cell_area_.maxCoeff());

  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& v : vertices_) h = fnv1a(h, v.data(), 2 * sizeof(double));
  h = fnv1a(h, face_v0_.data(), face_v0_.size() * sizeof(int));
  h = fnv1a(h, face_v1_.data(), face_v1_.size() * sizeof(int));
  h = fnv1a(h, owner_.data(), owner_.size() * sizeof(int));
  h = fnv1a(h, neighbour_.data(), neighbour_.size() * sizeof(int));
  for (const auto& p : patches_) {
    h = fnv1a(h, p.name.data(), p.name.size());
    h = fnv1a(h, &p.size, sizeof(int));
  }
  fingerprint_ = h;
}

int Mesh::patch_index(const std::string& name) const {
  for (std::size_t p = 0; p < patches_.size(); ++p) {
    if (patches_[p].name == name) return static_cast<int>(p);
  }
  return -1;
}

const Patch& Mesh::patch(const std::string& name) const {
  const int p = patch_index(name);
  if (p < 0) throw MeshError("no patch named '" + name + "'");
  return patches_[p];
}

QualityReport Mesh::quality() const {
  QualityReport q;
  double sum = 0.0;
  for (int f = 0; f < n_internal_; ++f) {
    const Vec2 d = cell_centroid_[neighbour_[f]] - cell_centroid_[owner_[f]];
    const Vec2& S = face_area_[f];
    const double cosang = std::clamp(d.dot(S) / (d.norm() * S.norm()), -1.0, 1.0);
    const double ang = std::acos(cosang) * 180.0 / std::numbers::pi;
    q.max_non_orthogonality_deg = std::max(q.max_non_orthogonality_deg, ang);
    sum += ang;

    // distance between the face centre and the point where the centroid
    // connection crosses the face line, relative to |d|
    const Vec2& Cp = cell_centroid_[owner_[f]];
    const double t = S.dot(face_centroid_[f] - Cp) / S.dot(d);
    const Vec2 x = Cp + t * d;
    q.max_skewness = std::max(q.max_skewness, (face_centroid_[f] - x).norm() / d.norm());
  }
  if (n_internal_ > 0) q.avg_non_orthogonality_deg = sum / n_internal_;
  for (int c = 0; c < n_cells(); ++c) {
    double lo = std::numeric_limits<double>::max(), hi = 0.0;
    for (int f : cell_faces_[c]) {
      lo = std::min(lo, face_mag_[f]);
      hi = std::max(hi, face_mag_[f]);
    }
    q.max_aspect_ratio = std::max(q.max_aspect_ratio, hi / lo);
  }
  return q;
}

bool Mesh::operator==(const Mesh& o) const {
  if (vertices_.size() != o.vertices_.size()) return false;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (vertices_[i].x() != o.vertices_[i].x() || vertices_[i].y() != o.vertices_[i].y()) return false;
  }
  if (patches_.size() != o.patches_.size()) return false;
  for (std::size_t p = 0; p < patches_.size(); ++p) {
    if (patches_[p].name != o.patches_[p].name || patches_[p].size != o.patches_[p].size) return false;
  }
  return face_v0_ == o.face_v0_ && face_v1_ == o.face_v1_ && owner_ == o.owner_ && neighbour_ == o.neighbour_;
}

// ---------------------------------------------------------------------------
// Generators

namespace {

/// Collects quads by vertex coordinates, merging coincident vertices, and
/// turns them into owner/neighbour faces.
class QuadBuilder {
 public:
  explicit QuadBuilder(double tol) : tol_(tol) {}

  int vertex(const Vec2& p) {
    const long long kx = std::llround(p.x() / tol_);
    const long long ky = std::llround(p.y() / tol_);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = lookup_.find({kx + dx, ky + dy});
        if (it != lookup_.end() && (vertices_[it->second] - p).norm() <= tol_) return it->second;
      }
    }
    const int id = static_cast<int>(vertices_.size());
    vertices_.push_back(p);
    lookup_[{kx, ky}] = id;
    return id;
  }

  void quad(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    std::array<int, 4> ids{vertex(a), vertex(b), vertex(c), vertex(d)};
    const double twice = cross(a, b) + cross(b, c) + cross(c, d) + cross(d, a);
    if (twice < 0.0) std::reverse(ids.begin(), ids.end());
    cells_.push_back(ids);
  }

  /// `classify` maps a boundary face midpoint to a patch index.
  template <class Classify>
  Mesh build(const std::vector<std::string>& patch_names, Classify&& classify) const {
    std::map<std::pair<int, int>, int> edge_face;
    std::vector<FaceDef> faces;
    for (int c = 0; c < static_cast<int>(cells_.size()); ++c) {
      const auto& q = cells_[c];
      for (int e = 0; e < 4; ++e) {
        const int a = q[e], b = q[(e + 1) % 4];
        const auto key = std::minmax(a, b);
        auto it = edge_face.find(key);
        if (it == edge_face.end()) {
          edge_face.emplace(key, static_cast<int>(faces.size()));
          faces.push_back(FaceDef{a, b, c, -1, -1});
        } else {
          FaceDef& fd = faces[it->second];
          if (fd.neighbour >= 0) throw MeshError("edge shared by more than two cells");
          fd.neighbour = c;  // c > owner since cells are visited in order
        }
      }
    }
    for (auto& fd : faces) {
      if (fd.neighbour < 0) fd.patch = classify(0.5 * (vertices_[fd.v0] + vertices_[fd.v1]));
    }
    return Mesh(vertices_, std::move(faces), patch_names);
  }

 private:
  struct KeyHash {
    std::size_t operator()(const std::pair<long long, long long>& k) const {
      return std::hash<long long>()(k.first * 1000003LL + k.second);
    }
  };
  double tol_;
  std::vector<Vec2> vertices_;
  std::unordered_map<std::pair<long long, long long>, int, KeyHash> lookup_;
  std::vector<std::array<int, 4>> cells_;
};

std::vector<double> uniform_nodes(double a, double b, int n) {
  std::vector<double> x(n + 1);
  for (int i = 0; i <= n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / n;
  x[n] = b;
  return x;
}

/// Nodes on [0, 1] with geometric spacing; the last cell is `ratio` times
/// the first one.
std::vector<double> graded_unit_nodes(int n, double ratio) {
  std::vector<double> x(n + 1, 0.0);
  if (n == 1 || ratio == 1.0) return uniform_nodes(0.0, 1.0, n);
  const double r = std::pow(ratio, 1.0 / (n - 1));
  double acc = 0.0, total = 0.0;
  for (int i = 0; i < n; ++i) total += std::pow(r, i);
  for (int i = 0; i < n; ++i) {
    acc += std::pow(r, i);
    x[i + 1] = acc / total;
  }
  x[n] = 1.0;
  return x;
}

/// Nodes on [a, b] starting with spacing h0 and growing geometrically, so
/// the last spacing is about `ratio` * h0.
std::vector<double> stretched_nodes(double a, double b, double h0, double ratio, int* ncells) {
  const double len = b - a;
  int n;
  if (ratio <= 1.0 + 1e-12) {
    n = std::max(1, static_cast<int>(std::lround(len / h0)));
  } else {
    n = std::max(1, static_cast<int>(std::lround(len * std::log(ratio) / (h0 * (ratio - 1.0)))));
  }
  *ncells = n;
  if (ratio <= 1.0 + 1e-12 || n == 1) return uniform_nodes(a, b, n);
  // growth factor r with h0 (r^n - 1)/(r - 1) = len
  double lo = 1.0 + 1e-12, hi = 2.0;
  auto sum = [&](double r) { return h0 * (std::pow(r, n) - 1.0) / (r - 1.0); };
  if (sum(lo) > len) {
    lo = 0.5;
    hi = 1.0 - 1e-12;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sum(mid) < len ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  std::vector<double> x(n + 1, a);
  double h = h0;
  for (int i = 0; i < n; ++i) {
    x[i + 1] = x[i] + h;
    h *= r;
  }
  x[n] = b;
  return x;
}

struct CylinderCounts {
  int n = 0, nr = 0, nl = 0, nb = 0, nt = 0, nright = 0;
  long total() const { return 4L * n * nr + static_cast<long>(nl) * (nb + n + nt) + static_cast<long>(n) * (nb + nt) +
                              static_cast<long>(nright) * (nb + n + nt); }
};

CylinderCounts cylinder_counts(double h, double bias, const CylinderGeometry& g) {
  CylinderCounts k;
  const double box = 2.0 * g.box_half;
  const double ring = g.box_half - g.radius;
  k.n = std::max(2, static_cast<int>(std::lround(box / h)));
  k.nr = std::max(2, static_cast<int>(std::lround(1.2 * ring / h * std::sqrt(bias))));
  k.nl = std::max(1, static_cast<int>(std::lround((g.center.x() - g.box_half) / h)));
  k.nb = std::max(1, static_cast<int>(std::lround((g.center.y() - g.box_half) / h)));
  k.nt = std::max(1, static_cast<int>(std::lround((g.height - g.center.y() - g.box_half) / h)));
  stretched_nodes(g.center.x() + g.box_half, g.length, box / k.n, bias, &k.nright);
  return k;
}

constexpr int kCollarSmoothing = 20;

/// Relaxes interior ring nodes towards the mean of their four neighbours;
/// the arc and box rows stay fixed.
void smooth_ring(std::vector<std::vector<Vec2>>& P, int iters) {
  const int nring = static_cast<int>(P.size());
  const int nr = static_cast<int>(P[0].size()) - 1;
  for (int it = 0; it < iters; ++it) {
    auto Q = P;
    for (int I = 0; I < nring; ++I) {
      const int Im = (I + nring - 1) % nring, Ip = (I + 1) % nring;
      for (int j = 1; j < nr; ++j) Q[I][j] = 0.25 * (P[Im][j] + P[Ip][j] + P[I][j - 1] + P[I][j + 1]);
    }
    P.swap(Q);
  }
}

}  // namespace

Mesh generate_cylinder_mesh(int target_cells, double bias, const CylinderGeometry& g) {
  if (target_cells < 100) throw MeshError("target_cells must be at least 100");
  if (!(bias >= 1.0)) throw MeshError("refinement_bias must be >= 1");
  const double x0 = g.center.x() - g.box_half, x1 = g.center.x() + g.box_half;
  const double y0 = g.center.y() - g.box_half, y1 = g.center.y() + g.box_half;
  if (!(g.radius > 0.0) || g.box_half <= g.radius * 1.2 || x0 <= 0.0 || y0 <= 0.0 || x1 >= g.length ||
      y1 >= g.height) {
    throw MeshError("cylinder and its collar box must lie strictly inside the channel");
  }

  // base spacing whose block counts land closest to the target
  double lo = 1e-4, hi = 0.5 * std::min(g.height, 2.0 * g.box_half);
  for (int it = 0; it < 100; ++it) {
    const double mid = std::sqrt(lo * hi);
    (cylinder_counts(mid, bias, g).total() > target_cells ? lo : hi) = mid;
  }
  CylinderCounts k = cylinder_counts(hi, bias, g);
  if (std::abs(cylinder_counts(lo, bias, g).total() - target_cells) < std::abs(k.total() - target_cells)) {
    k = cylinder_counts(lo, bias, g);
  }

  const std::vector<double> xl = uniform_nodes(0.0, x0, k.nl);
  const std::vector<double> xb = uniform_nodes(x0, x1, k.n);
  int nright = 0;
  const std::vector<double> xr = stretched_nodes(x1, g.length, (x1 - x0) / k.n, bias, &nright);
  const std::vector<double> yb = uniform_nodes(0.0, y0, k.nb);
  const std::vector<double> ym = uniform_nodes(y0, y1, k.n);
  const std::vector<double> yt = uniform_nodes(y1, g.height, k.nt);

  QuadBuilder qb(1e-9 * std::max(g.length, g.height));
  auto cartesian = [&](const std::vector<double>& xs, const std::vector<double>& ys) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        qb.quad({xs[i], ys[j]}, {xs[i + 1], ys[j]}, {xs[i + 1], ys[j + 1]}, {xs[i], ys[j + 1]});
      }
    }
  };
  cartesian(xl, yb);
  cartesian(xl, ym);
  cartesian(xl, yt);
  cartesian(xb, yb);
  cartesian(xb, yt);
  cartesian(xr, yb);
  cartesian(xr, ym);
  cartesian(xr, yt);

  // collar: ring grid between the arc (equal angles) and the box boundary
  // (the Cartesian nodes), blended linearly and then relaxed so cells next
  // to the box corners are less sheared
  const std::vector<double> radial = graded_unit_nodes(k.nr, bias);
  const double pi = std::numbers::pi;
  const int n = k.n, nr = k.nr, nring = 4 * n;
  auto box_node = [&](int I) {
    const int side = I / n, i = I % n;
    switch (side) {
      case 0: return Vec2(xb[i], y0);
      case 1: return Vec2(x1, ym[i]);
      case 2: return Vec2(xb[n - i], y1);
      default: return Vec2(x0, ym[n - i]);
    }
  };
  std::vector<std::vector<Vec2>> P(nring, std::vector<Vec2>(nr + 1));
  for (int I = 0; I < nring; ++I) {
    const double th = -0.75 * pi + 0.5 * pi * static_cast<double>(I) / n;
    const Vec2 pc = g.center + g.radius * Vec2(std::cos(th), std::sin(th));
    const Vec2 pb = box_node(I);
    for (int j = 0; j <= nr; ++j) P[I][j] = pc + radial[j] * (pb - pc);
    P[I][0] = pc;
    P[I][nr] = pb;
  }
  smooth_ring(P, kCollarSmoothing);
  for (int I = 0; I < nring; ++I) {
    const int J = (I + 1) % nring;
    for (int j = 0; j < nr; ++j) qb.quad(P[I][j], P[J][j], P[J][j + 1], P[I][j + 1]);
  }

  const double eps = 1e-9 * std::max(g.length, g.height);
  return qb.build({"inlet", "outlet", "walls", "cylinder"}, [&](const Vec2& m) {
    if (m.x() < eps) return 0;
    if (m.x() > g.length - eps) return 1;
    if (m.y() < eps || m.y() > g.height - eps) return 2;
    if ((m - g.center).norm() < 0.5 * (g.radius + g.box_half)) return 3;
    throw MeshError("unclassified boundary face near (" + std::to_string(m.x()) + ", " + std::to_string(m.y()) + ")");
  });
}

Mesh generate_rectangle_mesh(int nx, int ny, double lx, double ly, const std::array<std::string, 4>& side_patches,
                             Vec2 origin) {
  if (nx < 1 || ny < 1 || !(lx > 0.0) || !(ly > 0.0)) throw MeshError("invalid rectangle mesh parameters");
  std::vector<std::string> names;
  std::array<int, 4> side_id{};
  for (int s = 0; s < 4; ++s) {
    auto it = std::find(names.begin(), names.end(), side_patches[s]);
    if (it == names.end()) {
      side_id[s] = static_cast<int>(names.size());
      names.push_back(side_patches[s]);
    } else {
      side_id[s] = static_cast<int>(it - names.begin());
    }
  }
  const auto xs = uniform_nodes(origin.x(), origin.x() + lx, nx);
  const auto ys = uniform_nodes(origin.y(), origin.y() + ly, ny);
  QuadBuilder qb(1e-9 * std::max(lx, ly));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      qb.quad({xs[i], ys[j]}, {xs[i + 1], ys[j]}, {xs[i + 1], ys[j + 1]}, {xs[i], ys[j + 1]});
    }
  }
  const double eps = 1e-9 * std::max(lx, ly);
  return qb.build(names, [&](const Vec2& m) {
    if (m.x() < origin.x() + eps) return side_id[0];
    if (m.x() > origin.x() + lx - eps) return side_id[1];
    if (m.y() < origin.y() + eps) return side_id[2];
    return side_id[3];
  });
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

template <class T>
T parse_number(const std::string& tok, int line) {
  T v{};
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw MeshParseError("expected a number, got '" + tok + "'", line);
  }
  return v;
}

}  // namespace

std::string mesh_to_string(const Mesh& m) {
  std::ostringstream os;
  os << "romef-mesh 1\n";
  os << "counts " << m.n_vertices() << ' ' << m.n_cells() << ' ' << m.n_faces() << ' ' << m.patches().size() << '\n';
  os << "vertices\n";
  for (const auto& v : m.vertices()) os << format_double(v.x()) << ' ' << format_double(v.y()) << '\n';
  os << "faces\n";
  for (int f = 0; f < m.n_faces(); ++f) {
    os << m.face_v0(f) << ' ' << m.face_v1(f) << ' ' << m.owner(f) << ' ';
    if (m.is_boundary(f)) {
      os << m.patches()[m.face_patch(f)].name;
    } else {
      os << m.neighbour(f);
    }
    os << '\n';
  }
  os << "patches\n";
  for (const auto& p : m.patches()) os << p.name << ' ' << p.size << '\n';
  return os.str();
}

Mesh mesh_from_string(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto next = [&](const char* what) {
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos && line[0] != '#') {
        return split(line);
      }
    }
    throw MeshParseError(std::string("unexpected end of file, expected ") + what, lineno + 1);
  };
  auto expect_keyword = [&](const char* kw) {
    auto t = next(kw);
    if (t.size() != 1 || t[0] != kw) throw MeshParseError(std::string("expected '") + kw + "'", lineno);
  };

  auto hdr = next("header");
  if (hdr.size() != 2 || hdr[0] != "romef-mesh") throw MeshParseError("missing 'romef-mesh' header", lineno);
  if (hdr[1] != "1") throw MeshParseError("unsupported mesh format version " + hdr[1], lineno);
  auto counts = next("counts");
  if (counts.size() != 5 || counts[0] != "counts") throw MeshParseError("expected 'counts nv nc nf np'", lineno);
  const int nv = parse_number<int>(counts[1], lineno);
  const int nc = parse_number<int>(counts[2], lineno);
  const int nf = parse_number<int>(counts[3], lineno);
  const int np = parse_number<int>(counts[4], lineno);
  if (nv < 3 || nc < 1 || nf < 3 || np < 1) throw MeshParseError("invalid counts", lineno);

  expect_keyword("vertices");
  std::vector<Vec2> verts(nv);
  for (int i = 0; i < nv; ++i) {
    auto t = next("vertex");
    if (t.size() != 2) throw MeshParseError("vertex line needs 2 coordinates", lineno);
    verts[i] = Vec2(parse_number<double>(t[0], lineno), parse_number<double>(t[1], lineno));
  }

  expect_keyword("faces");
  struct RawFace {
    int v0, v1, owner;
    std::string nb;
    int line;
  };
  std::vector<RawFace> raw(nf);
  for (int i = 0; i < nf; ++i) {
    auto t = next("face");
    if (t.size() != 4) throw MeshParseError("face line needs 'v0 v1 owner neighbour|patch'", lineno);
    raw[i] = {parse_number<int>(t[0], lineno), parse_number<int>(t[1], lineno), parse_number<int>(t[2], lineno), t[3],
              lineno};
    if (raw[i].v0 < 0 || raw[i].v0 >= nv || raw[i].v1 < 0 || raw[i].v1 >= nv) {
      throw MeshParseError("vertex index out of range", lineno);
    }
    if (raw[i].owner < 0 || raw[i].owner >= nc) throw MeshParseError("owner index out of range", lineno);
  }

  expect_keyword("patches");
  std::vector<std::string> names(np);
  std::vector<int> sizes(np);
  for (int p = 0; p < np; ++p) {
    auto t = next("patch");
    if (t.size() != 2) throw MeshParseError("patch line needs 'name size'", lineno);
    names[p] = t[0];
    sizes[p] = parse_number<int>(t[1], lineno);
  }

  std::vector<FaceDef> faces(nf);
  std::vector<int> seen(np, 0);
  for (int i = 0; i < nf; ++i) {
    const auto& r = raw[i];
    FaceDef fd{r.v0, r.v1, r.owner, -1, -1};
    const char c = r.nb[0];
    if ((c >= '0' && c <= '9') || c == '-') {
      fd.neighbour = parse_number<int>(r.nb, r.line);
      if (fd.neighbour < 0 || fd.neighbour >= nc) throw MeshParseError("neighbour index out of range", r.line);
    } else {
      auto it = std::find(names.begin(), names.end(), r.nb);
      if (it == names.end()) throw MeshParseError("unknown patch '" + r.nb + "'", r.line);
      fd.patch = static_cast<int>(it - names.begin());
      seen[fd.patch]++;
    }
    faces[i] = fd;
  }
  for (int p = 0; p < np; ++p) {
    if (seen[p] != sizes[p]) throw MeshParseError("patch '" + names[p] + "' size does not match its faces", lineno);
  }
  Mesh mesh(std::move(verts), std::move(faces), names);
  if (mesh.n_cells() != nc) throw MeshError("cell count in header does not match faces");
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MeshError("cannot open " + path.string() + " for writing");
  os << mesh_to_string(mesh);
  if (!os) throw MeshError("failed writing " + path.string());
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MeshError("cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return mesh_from_string(ss.str());
}

}  // namespace romef
