#pragma once

// Polytopal meshes in two and three dimensions.
//
// Orientation conventions used throughout the library:
//  * a global edge runs from its lower to its higher vertex index; in 2D its
//    global normal is (t_y, -t_x);
//  * a face carries the normal given by its vertex loop (right-hand rule);
//  * a 3D cell lists signed faces, sign +1 when the face normal points out;
//  * polygons (2D elements and faces in their own frame) are counterclockwise.

#include "vem/linalg.hpp"
#include "vem/poly.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace vem {

/// Malformed mesh document.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Geometric or topological defect, tagged with the offending object.
class GeometryError : public Error {
public:
  GeometryError(std::string object, const std::string& message)
      : Error(object + ": " + message), object_(std::move(object)) {}
  const std::string& object() const { return object_; }

private:
  std::string object_;
};

inline Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

inline Vector vec3(double x, double y, double z) {
  Vector v(3);
  v << x, y, z;
  return v;
}

inline Vector cross3(const Vector& a, const Vector& b) {
  return vec3(a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0));
}

inline double cross2(const Vector& a, const Vector& b) { return a(0) * b(1) - a(1) * b(0); }

inline double point_set_diameter(const std::vector<Vector>& pts) {
  double h = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) h = std::max(h, (pts[i] - pts[j]).norm());
  return h;
}

// ---------------------------------------------------------------------------
// Polygons

struct PolygonEdge {
  int global_id = -1;
  int orientation = 1;  // +1 when the loop direction agrees with the global tangent
  Vector start, end, midpoint;
  Vector tangent;  // loop direction (counterclockwise)
  Vector normal;   // outward
  double length = 0.0;

  Vector global_tangent() const { return orientation * tangent; }
  /// Arc-length chart s -> midpoint + s * global tangent.
  AffineChart chart() const {
    Matrix axis(2, 1);
    axis.col(0) = global_tangent();
    return {midpoint, axis};
  }
  /// P_k(e) in the chart coordinate, scaled by the edge length.
  MonomialBasis basis(int k) const { return MonomialBasis(1, k, Vector::Zero(1), length); }
};

struct Polygon {
  int id = -1;
  std::vector<int> vertex_ids;
  std::vector<Vector> vertices;
  std::vector<PolygonEdge> edges;
  double area = 0.0;
  Vector centroid;
  double diameter = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  MonomialBasis basis(int k) const { return MonomialBasis(2, k, centroid, diameter); }

  /// Builds a polygon from a counterclockwise loop of 2D points. Edge i joins
  /// vertex i to vertex i+1; `edge_ids` and `orientations` default to a local
  /// numbering with loop orientation.
  static Polygon make(int id, std::vector<Vector> pts, std::vector<int> vids = {}, std::vector<int> edge_ids = {},
                      std::vector<int> orientations = {}, const std::string& label = "element") {
    const std::string name = label + " " + std::to_string(id);
    const int n = static_cast<int>(pts.size());
    if (n < 3) throw GeometryError(name, "fewer than three vertices");
    Polygon p;
    p.id = id;
    p.vertices = std::move(pts);
    if (vids.empty())
      for (int i = 0; i < n; ++i) vids.push_back(i);
    if (edge_ids.empty())
      for (int i = 0; i < n; ++i) edge_ids.push_back(i);
    if (orientations.empty()) orientations.assign(static_cast<std::size_t>(n), 1);
    p.vertex_ids = std::move(vids);

    const Vector ref = p.vertices[0];
    double twice_area = 0.0;
    Vector moment = Vector::Zero(2);
    for (int i = 0; i < n; ++i) {
      const Vector& a = p.vertices[static_cast<std::size_t>(i)];
      const Vector& b = p.vertices[static_cast<std::size_t>((i + 1) % n)];
      const double c = cross2(a - ref, b - ref);
      twice_area += c;
      moment += c * (a + b - 2 * ref) / 3.0;
    }
    p.diameter = point_set_diameter(p.vertices);
    if (!(twice_area > 1e-14 * p.diameter * p.diameter))
      throw GeometryError(name, "vertex loop is not counterclockwise or is degenerate");
    p.area = 0.5 * twice_area;
    p.centroid = ref + moment / twice_area;

    for (int i = 0; i < n; ++i) {
      PolygonEdge e;
      e.global_id = edge_ids[static_cast<std::size_t>(i)];
      e.orientation = orientations[static_cast<std::size_t>(i)];
      e.start = p.vertices[static_cast<std::size_t>(i)];
      e.end = p.vertices[static_cast<std::size_t>((i + 1) % n)];
      e.midpoint = 0.5 * (e.start + e.end);
      e.length = (e.end - e.start).norm();
      if (!(e.length > 1e-14 * p.diameter)) throw GeometryError(name, "edge " + std::to_string(i) + " has zero length");
      e.tangent = (e.end - e.start) / e.length;
      e.normal = vec2(e.tangent(1), -e.tangent(0));
      p.edges.push_back(std::move(e));
    }
    return p;
  }

  /// Rigidly moved copy (rotation angle theta, then translation).
  Polygon transformed(double theta, const Vector& shift) const {
    const double c = std::cos(theta), s = std::sin(theta);
    std::vector<Vector> pts;
    for (const auto& v : vertices) pts.push_back(vec2(c * v(0) - s * v(1), s * v(0) + c * v(1)) + shift);
    std::vector<int> eids, orient;
    for (const auto& e : edges) {
      eids.push_back(e.global_id);
      orient.push_back(e.orientation);
    }
    return make(id, std::move(pts), vertex_ids, eids, orient);
  }
};

// ---------------------------------------------------------------------------
// Faces, edges and cells in 3D

struct FaceFrame {
  Vector origin;  // face centroid
  Vector a1, a2;  // orthonormal in-plane axes
  Vector normal;  // a1 x a2

  Matrix axes() const {
    Matrix a(3, 2);
    a.col(0) = a1;
    a.col(1) = a2;
    return a;
  }
  AffineChart chart() const { return {origin, axes()}; }
  Vector to_local(const Vector& x) const { return vec2((x - origin).dot(a1), (x - origin).dot(a2)); }
  Vector to_global(const Vector& s) const { return origin + s(0) * a1 + s(1) * a2; }
  /// Global 3-vector of in-plane frame components.
  Vector lift(const Vector& w) const { return w(0) * a1 + w(1) * a2; }
};

/// Frame coordinates of the tangential part phi - (phi.n) n.
inline Vector tangential_part(const Vector& phi, const FaceFrame& frame) {
  if (phi.size() != 3) throw PreconditionError("tangential_part: 3-vector expected");
  return vec2(phi.dot(frame.a1), phi.dot(frame.a2));
}

/// Frame coordinates of phi x n (the tangential part rotated by -pi/2).
inline Vector wedge_normal(const Vector& phi, const FaceFrame& frame) {
  const Vector t = tangential_part(phi, frame);
  return vec2(t(1), -t(0));
}

struct Edge3 {
  int id = -1;
  int v0 = -1, v1 = -1;  // v0 < v1
  Vector a, b, midpoint, tangent;
  double length = 0.0;

  AffineChart chart() const {
    Matrix axis(3, 1);
    axis.col(0) = tangent;
    return {midpoint, axis};
  }
  MonomialBasis basis(int k) const { return MonomialBasis(1, k, Vector::Zero(1), length); }
};

struct Face3 {
  int id = -1;
  std::vector<int> vertex_ids;
  std::vector<int> edge_ids;      // edge i joins loop vertex i and i+1
  std::vector<int> edge_orients;  // +1 when the loop runs low -> high
  FaceFrame frame;
  Polygon polygon;  // the face in frame coordinates
  double area = 0.0;
  Vector centroid;
  double diameter = 0.0;

  /// Monomials of the face in frame coordinates.
  MonomialBasis basis(int k) const { return polygon.basis(k); }
};

struct Polyhedron {
  int id = -1;
  std::vector<int> vertex_ids;
  std::vector<Vector> vertices;
  std::vector<Edge3> edges;
  std::vector<Face3> faces;
  std::vector<int> face_signs;  // +1 when the face normal points out of the cell
  double volume = 0.0;
  Vector centroid;
  double diameter = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  MonomialBasis basis(int k) const { return MonomialBasis(3, k, centroid, diameter); }
  Vector outward_normal(int f) const { return face_signs[static_cast<std::size_t>(f)] * faces[static_cast<std::size_t>(f)].frame.normal; }

  int local_edge(int global_id) const {
    for (int i = 0; i < num_edges(); ++i)
      if (edges[static_cast<std::size_t>(i)].id == global_id) return i;
    throw PreconditionError("edge " + std::to_string(global_id) + " not on cell " + std::to_string(id));
  }
  int local_vertex(int global_id) const {
    for (int i = 0; i < num_vertices(); ++i)
      if (vertex_ids[static_cast<std::size_t>(i)] == global_id) return i;
    throw PreconditionError("vertex " + std::to_string(global_id) + " not on cell " + std::to_string(id));
  }
};

// ---------------------------------------------------------------------------
// Meshes

struct Mesh2D {
  std::string name;
  std::vector<Vector> vertices;
  std::vector<std::pair<int, int>> edges;  // low, high
  std::vector<Polygon> elements;
  bool simply_connected = true;

  int euler_characteristic() const {
    return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) + static_cast<int>(elements.size());
  }
};

struct Mesh3D {
  std::string name;
  std::vector<Vector> vertices;
  std::vector<Edge3> edges;
  std::vector<Face3> faces;
  std::vector<Polyhedron> cells;
  std::vector<std::vector<int>> cell_faces_signed;  // as in the document
  bool edges_given = false;
  bool simply_connected = true;

  int euler_characteristic() const {
    return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) + static_cast<int>(faces.size()) -
           static_cast<int>(cells.size());
  }
};

using PolytopalMesh = std::variant<Mesh2D, Mesh3D>;

inline int mesh_dim(const PolytopalMesh& m) { return std::holds_alternative<Mesh2D>(m) ? 2 : 3; }

namespace detail {

inline std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

inline Edge3 make_edge3(int id, int a, int b, const std::vector<Vector>& verts) {
  Edge3 e;
  e.id = id;
  e.v0 = std::min(a, b);
  e.v1 = std::max(a, b);
  e.a = verts[static_cast<std::size_t>(e.v0)];
  e.b = verts[static_cast<std::size_t>(e.v1)];
  e.midpoint = 0.5 * (e.a + e.b);
  e.length = (e.b - e.a).norm();
  if (!(e.length > 0)) throw GeometryError("edge " + std::to_string(id), "zero length");
  e.tangent = (e.b - e.a) / e.length;
  return e;
}

inline Face3 make_face3(int id, const std::vector<int>& loop, const std::vector<Vector>& verts,
                        const std::map<std::pair<int, int>, int>& edge_index) {
  const std::string name = "face " + std::to_string(id);
  Face3 f;
  f.id = id;
  f.vertex_ids = loop;
  const std::size_t n = loop.size();
  std::vector<Vector> pts;
  for (int v : loop) pts.push_back(verts[static_cast<std::size_t>(v)]);

  // Newell normal and a provisional in-plane origin
  Vector nn = Vector::Zero(3);
  Vector avg = Vector::Zero(3);
  for (std::size_t i = 0; i < n; ++i) {
    nn += cross3(pts[i], pts[(i + 1) % n]);
    avg += pts[i];
  }
  avg /= static_cast<double>(n);
  f.diameter = point_set_diameter(pts);
  if (!(nn.norm() > 1e-14 * f.diameter * f.diameter)) throw GeometryError(name, "degenerate face");
  const Vector normal = nn / nn.norm();
  for (const auto& p : pts)
    if (std::abs((p - avg).dot(normal)) > 1e-10 * f.diameter) throw GeometryError(name, "face is not planar");

  auto frame_from = [&](const Vector& origin) {
    FaceFrame fr;
    fr.origin = origin;
    fr.normal = normal;
    Vector d = 0.5 * (pts[0] + pts[1 % n]) - origin;
    d -= d.dot(normal) * normal;
    if (!(d.norm() > 1e-12 * f.diameter)) {
      d = pts[1 % n] - pts[0];
      d -= d.dot(normal) * normal;
    }
    fr.a1 = d / d.norm();
    fr.a2 = cross3(normal, fr.a1);
    return fr;
  };
  FaceFrame provisional = frame_from(avg);
  std::vector<Vector> loc;
  for (const auto& p : pts) loc.push_back(provisional.to_local(p));
  const Polygon tmp = Polygon::make(id, loc, {}, {}, {}, "face");
  const Vector centroid = provisional.to_global(tmp.centroid);
  f.frame = frame_from(centroid);
  f.centroid = centroid;

  for (std::size_t i = 0; i < n; ++i) {
    const int a = loop[i], b = loop[(i + 1) % n];
    const auto it = edge_index.find(edge_key(a, b));
    if (it == edge_index.end())
      throw GeometryError(name, "boundary segment " + std::to_string(a) + "-" + std::to_string(b) + " is not a listed edge");
    f.edge_ids.push_back(it->second);
    f.edge_orients.push_back(a < b ? 1 : -1);
  }
  loc.clear();
  for (const auto& p : pts) loc.push_back(f.frame.to_local(p));
  f.polygon = Polygon::make(id, loc, loop, f.edge_ids, f.edge_orients, "face");
  f.area = f.polygon.area;
  return f;
}

inline Polyhedron make_cell(int id, const std::vector<int>& signed_faces, const Mesh3D& m) {
  const std::string name = "cell " + std::to_string(id);
  Polyhedron c;
  c.id = id;
  std::set<int> vset, eset;
  for (int s : signed_faces) {
    const int fid = s >= 0 ? s : -(s + 1);
    c.faces.push_back(m.faces[static_cast<std::size_t>(fid)]);
    c.face_signs.push_back(s >= 0 ? 1 : -1);
    for (int v : m.faces[static_cast<std::size_t>(fid)].vertex_ids) vset.insert(v);
    for (int e : m.faces[static_cast<std::size_t>(fid)].edge_ids) eset.insert(e);
  }
  for (int v : vset) {
    c.vertex_ids.push_back(v);
    c.vertices.push_back(m.vertices[static_cast<std::size_t>(v)]);
  }
  for (int e : eset) c.edges.push_back(m.edges[static_cast<std::size_t>(e)]);
  c.diameter = point_set_diameter(c.vertices);

  // Each edge must be traversed once in each direction by the oriented faces.
  std::map<int, int> balance;
  std::map<int, int> count;
  for (std::size_t f = 0; f < c.faces.size(); ++f) {
    const Face3& face = c.faces[f];
    for (std::size_t i = 0; i < face.edge_ids.size(); ++i) {
      balance[face.edge_ids[i]] += c.face_signs[f] * face.edge_orients[i];
      count[face.edge_ids[i]] += 1;
    }
  }
  for (const auto& [e, n] : count)
    if (n != 2) throw GeometryError(name, "boundary is not closed at edge " + std::to_string(e));
  std::vector<int> conflicts(c.faces.size(), 0);
  bool bad = false;
  for (std::size_t f = 0; f < c.faces.size(); ++f)
    for (int e : c.faces[f].edge_ids)
      if (balance[e] != 0) {
        ++conflicts[f];
        bad = true;
      }
  if (bad) {
    // the face whose loop disagrees with most of its neighbours
    const auto worst = std::max_element(conflicts.begin(), conflicts.end()) - conflicts.begin();
    const int fid = c.faces[static_cast<std::size_t>(worst)].id;
    throw GeometryError("face " + std::to_string(fid),
                        "orientation inconsistent with the other faces of cell " + std::to_string(id));
  }

  Vector closure = Vector::Zero(3);
  for (std::size_t f = 0; f < c.faces.size(); ++f)
    closure += c.face_signs[f] * c.faces[f].area * c.faces[f].frame.normal;
  if (closure.norm() > 1e-12 * c.diameter * c.diameter) throw GeometryError(name, "boundary is not closed");

  Vector p0 = Vector::Zero(3);
  for (const auto& v : c.vertices) p0 += v;
  p0 /= static_cast<double>(c.vertices.size());
  double vol = 0.0;
  Vector mom = Vector::Zero(3);
  for (std::size_t f = 0; f < c.faces.size(); ++f) {
    const Face3& face = c.faces[f];
    const std::size_t n = face.vertex_ids.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vector& x1 = m.vertices[static_cast<std::size_t>(face.vertex_ids[i])];
      const Vector& x2 = m.vertices[static_cast<std::size_t>(face.vertex_ids[(i + 1) % n])];
      const double v = c.face_signs[f] * (face.centroid - p0).dot(cross3(x1 - p0, x2 - p0)) / 6.0;
      vol += v;
      mom += v * (p0 + face.centroid + x1 + x2) / 4.0;
    }
  }
  if (!(vol > 0)) throw GeometryError(name, "faces are oriented inward");
  c.volume = vol;
  c.centroid = mom / vol;
  return c;
}

inline const nlohmann::json& require(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  return doc.at(key);
}

inline std::vector<std::vector<int>> int_lists(const nlohmann::json& arr, const char* what) {
  if (!arr.is_array()) throw SchemaError(std::string("'") + what + "' must be an array");
  std::vector<std::vector<int>> out;
  for (const auto& item : arr) {
    if (!item.is_array()) throw SchemaError(std::string("'") + what + "' entries must be arrays");
    std::vector<int> row;
    for (const auto& v : item) {
      if (!v.is_number_integer()) throw SchemaError(std::string("'") + what + "' entries must be integers");
      row.push_back(v.get<int>());
    }
    out.push_back(std::move(row));
  }
  return out;
}

inline void check_loop(const std::vector<int>& loop, std::size_t nverts, const std::string& name) {
  if (loop.size() < 3) throw SchemaError(name + ": fewer than three vertices");
  std::set<int> seen;
  for (int v : loop) {
    if (v < 0 || static_cast<std::size_t>(v) >= nverts) throw SchemaError(name + ": vertex index out of range");
    if (!seen.insert(v).second) throw SchemaError(name + ": repeated vertex");
  }
}

}  // namespace detail

inline Mesh2D build_mesh_2d(const std::vector<Vector>& verts, const std::vector<std::vector<int>>& loops,
                            bool simply_connected = true, std::string name = {}) {
  Mesh2D m;
  m.name = std::move(name);
  m.vertices = verts;
  m.simply_connected = simply_connected;
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> uses;  // key -> (element, direction)
  for (std::size_t c = 0; c < loops.size(); ++c) {
    detail::check_loop(loops[c], verts.size(), "element " + std::to_string(c));
    const std::size_t n = loops[c].size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = loops[c][i], b = loops[c][(i + 1) % n];
      uses[detail::edge_key(a, b)].push_back({static_cast<int>(c), a < b ? 1 : -1});
    }
  }
  std::map<std::pair<int, int>, int> index;
  for (const auto& [key, u] : uses) {
    const std::string ename = "edge " + std::to_string(key.first) + "-" + std::to_string(key.second);
    if (u.size() > 2) throw GeometryError(ename, "shared by more than two elements");
    if (u.size() == 2 && u[0].second == u[1].second)
      throw GeometryError("element " + std::to_string(u[1].first),
                          "traverses " + ename + " in the same direction as element " + std::to_string(u[0].first));
    index[key] = static_cast<int>(m.edges.size());
    m.edges.push_back(key);
  }
  std::vector<bool> used(verts.size(), false);
  for (std::size_t c = 0; c < loops.size(); ++c) {
    std::vector<Vector> pts;
    std::vector<int> eids, orient;
    const std::size_t n = loops[c].size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = loops[c][i], b = loops[c][(i + 1) % n];
      pts.push_back(verts[static_cast<std::size_t>(a)]);
      used[static_cast<std::size_t>(a)] = true;
      eids.push_back(index.at(detail::edge_key(a, b)));
      orient.push_back(a < b ? 1 : -1);
    }
    m.elements.push_back(Polygon::make(static_cast<int>(c), std::move(pts), loops[c], eids, orient));
  }
  for (std::size_t v = 0; v < used.size(); ++v)
    if (!used[v]) throw GeometryError("vertex " + std::to_string(v), "not used by any element");
  if (m.simply_connected && m.euler_characteristic() != 1)
    throw GeometryError("mesh", "declared simply connected but V - E + F = " + std::to_string(m.euler_characteristic()));
  return m;
}

inline Mesh3D build_mesh_3d(const std::vector<Vector>& verts, std::optional<std::vector<std::vector<int>>> edges,
                            const std::vector<std::vector<int>>& faces, const std::vector<std::vector<int>>& cells,
                            bool simply_connected = true, std::string name = {}) {
  Mesh3D m;
  m.name = std::move(name);
  m.vertices = verts;
  m.simply_connected = simply_connected;
  for (std::size_t f = 0; f < faces.size(); ++f) detail::check_loop(faces[f], verts.size(), "face " + std::to_string(f));

  std::map<std::pair<int, int>, int> index;
  if (edges) {
    m.edges_given = true;
    for (std::size_t e = 0; e < edges->size(); ++e) {
      const auto& pr = (*edges)[e];
      if (pr.size() != 2) throw SchemaError("edge " + std::to_string(e) + ": two vertex ids expected");
      for (int v : pr)
        if (v < 0 || static_cast<std::size_t>(v) >= verts.size())
          throw SchemaError("edge " + std::to_string(e) + ": vertex index out of range");
      if (pr[0] == pr[1]) throw SchemaError("edge " + std::to_string(e) + ": repeated vertex");
      if (!index.emplace(detail::edge_key(pr[0], pr[1]), static_cast<int>(e)).second)
        throw SchemaError("edge " + std::to_string(e) + ": duplicate edge");
      m.edges.push_back(detail::make_edge3(static_cast<int>(e), pr[0], pr[1], verts));
    }
  } else {
    std::set<std::pair<int, int>> keys;
    for (const auto& loop : faces)
      for (std::size_t i = 0; i < loop.size(); ++i) keys.insert(detail::edge_key(loop[i], loop[(i + 1) % loop.size()]));
    for (const auto& k : keys) {
      const int id = static_cast<int>(m.edges.size());
      index[k] = id;
      m.edges.push_back(detail::make_edge3(id, k.first, k.second, verts));
    }
  }
  for (std::size_t f = 0; f < faces.size(); ++f)
    m.faces.push_back(detail::make_face3(static_cast<int>(f), faces[f], verts, index));

  std::vector<std::vector<int>> face_users(faces.size());
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int s : cells[c]) {
      const int fid = s >= 0 ? s : -(s + 1);
      if (fid < 0 || static_cast<std::size_t>(fid) >= faces.size())
        throw SchemaError("cell " + std::to_string(c) + ": face index out of range");
      face_users[static_cast<std::size_t>(fid)].push_back(s >= 0 ? 1 : -1);
    }
  m.cell_faces_signed = cells;
  for (std::size_t c = 0; c < cells.size(); ++c) m.cells.push_back(detail::make_cell(static_cast<int>(c), cells[c], m));
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& u = face_users[f];
    const std::string fname = "face " + std::to_string(f);
    if (u.empty()) throw GeometryError(fname, "not used by any cell");
    if (u.size() > 2) throw GeometryError(fname, "shared by more than two cells");
    if (u.size() == 2 && u[0] == u[1]) throw GeometryError(fname, "both cells claim the same normal orientation");
  }
  std::vector<bool> eused(m.edges.size(), false), vused(verts.size(), false);
  for (const auto& f : m.faces) {
    for (int e : f.edge_ids) eused[static_cast<std::size_t>(e)] = true;
    for (int v : f.vertex_ids) vused[static_cast<std::size_t>(v)] = true;
  }
  for (std::size_t e = 0; e < eused.size(); ++e)
    if (!eused[e]) throw GeometryError("edge " + std::to_string(e), "not on any face");
  for (std::size_t v = 0; v < vused.size(); ++v)
    if (!vused[v]) throw GeometryError("vertex " + std::to_string(v), "not used by any face");
  if (m.simply_connected && m.euler_characteristic() != 1)
    throw GeometryError("mesh", "declared simply connected but V - E + F - C = " + std::to_string(m.euler_characteristic()));
  return m;
}

/// Parses and validates a mesh document.
inline PolytopalMesh mesh_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("mesh document must be a JSON object");
  const auto& dim_j = detail::require(doc, "dim");
  if (!dim_j.is_number_integer()) throw SchemaError("'dim' must be an integer");
  const int dim = dim_j.get<int>();
  if (dim != 2 && dim != 3) throw SchemaError("'dim' must be 2 or 3");
  const auto& vj = detail::require(doc, "vertices");
  if (!vj.is_array()) throw SchemaError("'vertices' must be an array");
  std::vector<Vector> verts;
  for (const auto& p : vj) {
    if (!p.is_array() || static_cast<int>(p.size()) != dim)
      throw SchemaError("vertex " + std::to_string(verts.size()) + ": expected " + std::to_string(dim) + " coordinates");
    Vector x(dim);
    for (int i = 0; i < dim; ++i) {
      if (!p[static_cast<std::size_t>(i)].is_number()) throw SchemaError("vertex coordinates must be numbers");
      x(i) = p[static_cast<std::size_t>(i)].get<double>();
      if (!std::isfinite(x(i))) throw SchemaError("vertex coordinates must be finite");
    }
    verts.push_back(x);
  }
  bool sc = true;
  if (doc.contains("simply_connected")) {
    if (!doc["simply_connected"].is_boolean()) throw SchemaError("'simply_connected' must be a boolean");
    sc = doc["simply_connected"].get<bool>();
  }
  std::string name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : "";
  const auto faces = detail::int_lists(detail::require(doc, "faces"), "faces");
  if (dim == 2) return build_mesh_2d(verts, faces, sc, name);
  std::optional<std::vector<std::vector<int>>> edges;
  if (doc.contains("edges")) edges = detail::int_lists(doc["edges"], "edges");
  const auto cells = detail::int_lists(detail::require(doc, "cells"), "cells");
  return build_mesh_3d(verts, edges, faces, cells, sc, name);
}

inline PolytopalMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open mesh file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
  }
  return mesh_from_json(doc);
}

inline nlohmann::ordered_json to_json(const PolytopalMesh& mesh) {
  nlohmann::ordered_json doc;
  auto points = [](const std::vector<Vector>& vs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& v : vs) {
      nlohmann::ordered_json p = nlohmann::ordered_json::array();
      for (Index i = 0; i < v.size(); ++i) p.push_back(v(i));
      arr.push_back(p);
    }
    return arr;
  };
  if (const auto* m = std::get_if<Mesh2D>(&mesh)) {
    if (!m->name.empty()) doc["name"] = m->name;
    doc["dim"] = 2;
    doc["vertices"] = points(m->vertices);
    doc["faces"] = nlohmann::ordered_json::array();
    for (const auto& e : m->elements) doc["faces"].push_back(e.vertex_ids);
    doc["simply_connected"] = m->simply_connected;
  } else {
    const auto& m3 = std::get<Mesh3D>(mesh);
    if (!m3.name.empty()) doc["name"] = m3.name;
    doc["dim"] = 3;
    doc["vertices"] = points(m3.vertices);
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : m3.edges) doc["edges"].push_back({e.v0, e.v1});
    doc["faces"] = nlohmann::ordered_json::array();
    for (const auto& f : m3.faces) doc["faces"].push_back(f.vertex_ids);
    doc["cells"] = m3.cell_faces_signed;
    doc["simply_connected"] = m3.simply_connected;
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Shape regularity

struct ShapeReport {
  int element = -1;
  double diameter = 0.0;
  double inradius = 0.0;        // centroid-based inscribed disk/ball radius estimate
  double disk_ratio = 0.0;      // inradius / diameter
  double min_edge_ratio = 0.0;  // min h_e / h (3D: relative to the face diameter)
  double min_face_ratio = 1.0;  // 3D: min h_f / h_P
  double min_face_disk_ratio = 1.0;  // 3D: worst face disk ratio
  bool star_shaped = false;     // w.r.t. the centroid
  bool pass = false;
  std::vector<std::string> failures;
};

namespace detail {

/// Distance from the centroid to the closest edge line (negative if outside).
inline double polygon_inradius(const Polygon& p, bool& star) {
  double r = 1e300;
  star = true;
  for (const auto& e : p.edges) {
    const double d = (e.start - p.centroid).dot(e.normal);
    if (!(d > 0)) star = false;
    r = std::min(r, d);
  }
  return r;
}

}  // namespace detail

inline std::vector<ShapeReport> check_shape_regularity(const PolytopalMesh& mesh, double kappa) {
  std::vector<ShapeReport> out;
  auto judge = [kappa](ShapeReport& r) {
    if (!r.star_shaped) r.failures.push_back("not star-shaped with respect to the centroid");
    if (r.disk_ratio < kappa) r.failures.push_back("inscribed radius ratio below kappa");
    if (r.min_edge_ratio < kappa) r.failures.push_back("edge length ratio below kappa");
    if (r.min_face_ratio < kappa) r.failures.push_back("face diameter ratio below kappa");
    if (r.min_face_disk_ratio < kappa) r.failures.push_back("face inscribed radius ratio below kappa");
    r.pass = r.failures.empty() || kappa <= 0.0;
    if (kappa <= 0.0) r.failures.clear();
  };
  if (const auto* m = std::get_if<Mesh2D>(&mesh)) {
    for (const auto& p : m->elements) {
      ShapeReport r;
      r.element = p.id;
      r.diameter = p.diameter;
      r.inradius = detail::polygon_inradius(p, r.star_shaped);
      r.disk_ratio = r.inradius / p.diameter;
      r.min_edge_ratio = 1.0;
      for (const auto& e : p.edges) r.min_edge_ratio = std::min(r.min_edge_ratio, e.length / p.diameter);
      judge(r);
      out.push_back(std::move(r));
    }
  } else {
    for (const auto& c : std::get<Mesh3D>(mesh).cells) {
      ShapeReport r;
      r.element = c.id;
      r.diameter = c.diameter;
      r.star_shaped = true;
      r.inradius = 1e300;
      r.min_edge_ratio = 1.0;
      for (int f = 0; f < c.num_faces(); ++f) {
        const Face3& face = c.faces[static_cast<std::size_t>(f)];
        const double d = (face.centroid - c.centroid).dot(c.outward_normal(f));
        if (!(d > 0)) r.star_shaped = false;
        r.inradius = std::min(r.inradius, d);
        r.min_face_ratio = std::min(r.min_face_ratio, face.diameter / c.diameter);
        bool fstar = true;
        const double fr = detail::polygon_inradius(face.polygon, fstar);
        if (!fstar) r.star_shaped = false;
        r.min_face_disk_ratio = std::min(r.min_face_disk_ratio, fr / face.diameter);
        for (const auto& e : face.polygon.edges) r.min_edge_ratio = std::min(r.min_edge_ratio, e.length / face.diameter);
      }
      r.disk_ratio = r.inradius / c.diameter;
      judge(r);
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace vem
