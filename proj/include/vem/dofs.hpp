#pragma once

// DOF layouts shared by the 2D and 3D spaces, and the global numbering built
// from them.

#include "vem/geom.hpp"
#include "vem/linalg.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace vem {

enum class Family { face, edge, vert, elem };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::face: return "face";
    case Family::edge: return "edge";
    case Family::vert: return "vert";
    case Family::elem: return "elem";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "face") return Family::face;
  if (s == "edge") return Family::edge;
  if (s == "vert") return Family::vert;
  if (s == "elem") return Family::elem;
  throw PreconditionError("unknown family '" + s + "' (expected face, edge, vert or elem)");
}

/// Boundary, divergence-side and rotation-side degrees of a space.
struct DegreeProfile {
  int kb = 1;
  int kd = 0;
  int kr = 0;

  static DegreeProfile standard(int k) { return {k, k - 1, k - 1}; }
  bool operator==(const DegreeProfile&) const = default;
  std::string str() const { return std::to_string(kb) + "," + std::to_string(kd) + "," + std::to_string(kr); }
};

inline DegreeProfile parse_profile(const std::string& s) {
  DegreeProfile p;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> p.kb >> c1 >> p.kd >> c2 >> p.kr) || c1 != ',' || c2 != ',' || !in.eof())
    throw PreconditionError("profile must look like kb,kd,kr");
  return p;
}

enum class EntityKind { vertex, edge, face, cell };

inline std::string to_string(EntityKind k) {
  switch (k) {
    case EntityKind::vertex: return "vertex";
    case EntityKind::edge: return "edge";
    case EntityKind::face: return "face";
    case EntityKind::cell: return "cell";
  }
  return "?";
}

/// Identity of one DOF functional: the mesh entity that owns it, its index
/// within that entity and the sign relating the local to the global value.
struct DofTag {
  EntityKind kind = EntityKind::cell;
  int entity = -1;
  int index = 0;
  int sign = 1;
};

struct DofBlock {
  std::string name;
  EntityKind kind = EntityKind::cell;
  int entity = -1;  // global id
  int local = -1;   // local index of the entity in the element
  Index offset = 0;
  Index size = 0;
  double weight = 1.0;  // normalization applied to the raw functional
};

struct DofLayout {
  Family family = Family::face;
  int dim = 2;
  int element = -1;
  int degree = 1;
  std::vector<DofBlock> blocks;
  std::vector<DofTag> tags;

  Index size() const { return static_cast<Index>(tags.size()); }

  Vector weights() const {
    Vector w(size());
    for (const auto& b : blocks) w.segment(b.offset, b.size).setConstant(b.weight);
    return w;
  }

  /// Blocks with the given name, in layout order.
  std::vector<DofBlock> find(const std::string& name) const {
    std::vector<DofBlock> out;
    for (const auto& b : blocks)
      if (b.name == name) out.push_back(b);
    return out;
  }

  const DofBlock& block(const std::string& name, int local = -1) const {
    for (const auto& b : blocks)
      if (b.name == name && (local < 0 || b.local == local)) return b;
    throw PreconditionError("layout has no block '" + name + "'");
  }

  /// Appends a block and its tags.
  void add(std::string name, EntityKind kind, int entity, int local, Index size, double weight, int sign = 1,
           int first_index = 0) {
    blocks.push_back({std::move(name), kind, entity, local, this->size(), size, weight});
    for (Index j = 0; j < size; ++j) tags.push_back({kind, entity, first_index + static_cast<int>(j), sign});
  }
};

/// A virtual function, represented only by its DOF values.
struct DofVector {
  DofLayout layout;
  Vector values;

  DofVector() = default;
  DofVector(DofLayout l, Vector v) : layout(std::move(l)), values(std::move(v)) {
    if (values.size() != layout.size()) throw PreconditionError("DofVector: length does not match layout");
  }
};

// ---------------------------------------------------------------------------
// Global numbering

struct GlobalDofMap {
  Family family = Family::face;
  int dim = 2;
  int degree = 1;
  Index size = 0;
  std::vector<std::vector<Index>> local_to_global;
  std::vector<std::vector<int>> signs;
  std::vector<DofTag> global_tags;
  Index closed_form = -1;  // dimension predicted by the closed-form count
  Index alternative_count = -1;  // alternative closed-form count, when it differs in form
  bool fault_injected = false;

  /// Local DOF values of element e from a global vector.
  Vector gather(int e, const Vector& global) const {
    const auto& l2g = local_to_global[static_cast<std::size_t>(e)];
    const auto& s = signs[static_cast<std::size_t>(e)];
    Vector out(static_cast<Index>(l2g.size()));
    for (std::size_t i = 0; i < l2g.size(); ++i) out(static_cast<Index>(i)) = s[i] * global(l2g[i]);
    return out;
  }

  /// Selection-with-signs matrix: local = P * global.
  Matrix local_selector(int e) const {
    const auto& l2g = local_to_global[static_cast<std::size_t>(e)];
    const auto& s = signs[static_cast<std::size_t>(e)];
    Matrix p = Matrix::Zero(static_cast<Index>(l2g.size()), size);
    for (std::size_t i = 0; i < l2g.size(); ++i) p(static_cast<Index>(i), l2g[i]) = s[i];
    return p;
  }
};

/// Numbers the DOFs of a collection of local layouts. DOFs are identified by
/// (entity kind, entity id, index) and numbered in that lexicographic order.
/// When `opposite_signs` is set, a DOF shared by two elements must be seen
/// with opposite signs (normal or tangential components of a conforming
/// field seen from both sides).
inline GlobalDofMap build_global_map(const std::vector<DofLayout>& layouts, bool opposite_signs) {
  using Key = std::tuple<int, int, int>;
  std::map<Key, std::vector<std::pair<int, int>>> uses;  // key -> (element, sign)
  for (std::size_t e = 0; e < layouts.size(); ++e)
    for (const auto& t : layouts[e].tags)
      uses[{static_cast<int>(t.kind), t.entity, t.index}].push_back({static_cast<int>(e), t.sign});
  GlobalDofMap m;
  if (!layouts.empty()) {
    m.family = layouts.front().family;
    m.dim = layouts.front().dim;
    m.degree = layouts.front().degree;
  }
  std::map<Key, Index> number;
  for (const auto& [key, u] : uses) {
    if (opposite_signs && u.size() == 2 && u[0].second == u[1].second)
      throw GeometryError(to_string(static_cast<EntityKind>(std::get<0>(key))) + " " + std::to_string(std::get<1>(key)),
                          "seen with the same orientation by elements " + std::to_string(u[0].first) + " and " +
                              std::to_string(u[1].first));
    number[key] = m.size++;
    m.global_tags.push_back({static_cast<EntityKind>(std::get<0>(key)), std::get<1>(key), std::get<2>(key), 1});
  }
  for (const auto& l : layouts) {
    std::vector<Index> g;
    std::vector<int> s;
    for (const auto& t : l.tags) {
      g.push_back(number.at({static_cast<int>(t.kind), t.entity, t.index}));
      s.push_back(t.sign);
    }
    m.local_to_global.push_back(std::move(g));
    m.signs.push_back(std::move(s));
  }
  return m;
}

/// Flips the local sign of the first DOF that is shared between elements.
/// Used to check that the complex verification notices a broken map.
inline bool inject_sign_flip(GlobalDofMap& m) {
  std::vector<int> count(static_cast<std::size_t>(m.size), 0);
  for (const auto& l2g : m.local_to_global)
    for (Index g : l2g) ++count[static_cast<std::size_t>(g)];
  for (std::size_t e = 0; e < m.local_to_global.size(); ++e)
    for (std::size_t i = 0; i < m.local_to_global[e].size(); ++i)
      if (count[static_cast<std::size_t>(m.local_to_global[e][i])] > 1) {
        m.signs[e][i] = -m.signs[e][i];
        m.fault_injected = true;
        return true;
      }
  return false;
}

}  // namespace vem
