#pragma once

// Command implementations behind the `vem` executable. Each command returns a
// RunReport; printing and exit codes are handled by the caller.

#include "vem/vem.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace vem::cli {

enum Exit : int { ok = 0, check_failed = 1, input_error = 2 };

struct Check {
  std::string name;
  std::string status;  // pass, fail, warn
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct RunReport {
  std::string command;
  std::string digest;
  std::vector<Check> checks;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  double wall_time = -1.0;  // seconds; negative when not requested

  void add(std::string name, bool pass, double value, double tol, std::string detail = {}) {
    checks.push_back({std::move(name), pass ? "pass" : "fail", value, tol, std::move(detail)});
  }
  void warn(std::string name, double value, double tol, std::string detail = {}) {
    checks.push_back({std::move(name), "warn", value, tol, std::move(detail)});
  }
  int failures() const {
    int n = 0;
    for (const auto& c : checks) n += c.status == "fail";
    return n;
  }
  int exit_code() const { return failures() ? check_failed : ok; }
};

inline nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["command"] = r.command;
  j["input_digest"] = r.digest;
  j["status"] = r.failures() ? "fail" : "pass";
  j["failures"] = r.failures();
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back(
        {{"name", c.name}, {"status", c.status}, {"value", c.value}, {"tolerance", c.tolerance}, {"detail", c.detail}});
  j["data"] = r.data;
  if (r.wall_time >= 0) j["wall_time_s"] = r.wall_time;
  return j;
}

inline std::string to_text(const RunReport& r) {
  std::ostringstream os;
  os << r.command << "  digest " << r.digest << "\n";
  for (const auto& c : r.checks) {
    std::string tag = c.status;
    for (auto& ch : tag) ch = static_cast<char>(std::toupper(ch));
    os << "  [" << tag << "] " << c.name;
    if (c.tolerance != 0.0 || c.value != 0.0) os << "  value " << std::setprecision(6) << c.value << "  tol " << c.tolerance;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << "\n";
  }
  if (r.wall_time >= 0) os << "  wall time " << std::fixed << std::setprecision(3) << r.wall_time << " s\n";
  os << (r.failures() ? "FAIL" : "PASS") << " (" << r.failures() << " failed of " << r.checks.size() << ")\n";
  return os.str();
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string digest(const std::vector<std::string>& parts) {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& p : parts) h = fnv1a(p + '\x1f', h);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

struct Options {
  std::string mesh;
  std::string family;
  int k = -1;
  std::string profile;
  double kappa = 0.0;
  std::string field;
  std::string mesh_dir;
  std::string fault;
};

namespace detail {

inline std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw SchemaError("field: '" + tok + "' is not a number");
    }
    if (tok.find_first_not_of(" \t", used) != std::string::npos) throw SchemaError("field: '" + tok + "' is not a number");
    out.push_back(v);
  }
  return out;
}

/// Coefficient list in the global monomials (graded lex, component-major).
inline PolyCoeffs parse_field(const std::string& spec, int dim, int comps) {
  const std::vector<double> c = parse_numbers(spec);
  for (int d = 0; d <= 12; ++d) {
    if (comps * dim_poly(d, dim) == static_cast<int>(c.size())) {
      PolyCoeffs p(MonomialBasis::global(dim, d), comps);
      for (std::size_t i = 0; i < c.size(); ++i) p.coeffs(static_cast<Index>(i)) = c[i];
      return p;
    }
    if (comps * dim_poly(d, dim) > static_cast<int>(c.size())) break;
  }
  throw SchemaError("field: " + std::to_string(c.size()) + " coefficients is not " + std::to_string(comps) +
                    " x dim P_d for any degree d");
}

/// Highest total degree carrying a non-negligible coefficient (-1 for zero).
inline int effective_degree(const PolyCoeffs& p) {
  if (p.coeffs.size() == 0) return -1;
  const double tol = 1e-12 * std::max(1.0, p.coeffs.cwiseAbs().maxCoeff());
  int deg = -1;
  const Index n = p.basis.size();
  for (int c = 0; c < p.components; ++c)
    for (Index i = 0; i < n; ++i)
      if (std::abs(p.coeffs(c * n + i)) > tol) deg = std::max(deg, total_degree(p.basis.index(i)));
  return deg;
}

inline double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

inline PolyCoeffs scalar_rot(const PolyCoeffs& v) {
  const PolyCoeffs g1 = apply(DiffOp::grad, v.component(1));
  const PolyCoeffs g0 = apply(DiffOp::grad, v.component(0));
  return add(g1.component(0), g0.component(1), -1.0);
}

/// Empty string when the polynomial lies in the local space, otherwise why not.
inline std::string membership_2d(const Polygon& p, Family f, int k, const PolyCoeffs& v) {
  if (f == Family::elem) return {};
  if (effective_degree(v) <= k) return {};
  if (f == Family::vert) return "vert family membership is only checked for degree <= k";
  if (effective_degree(apply(DiffOp::div, v)) > k - 1) return "div v is not in P_{k-1}";
  if (effective_degree(scalar_rot(v)) > k - 1) return "rot v is not in P_{k-1}";
  for (const auto& e : p.edges) {
    const Vector dir = f == Family::face ? e.normal : e.tangent;
    const Matrix r = ::vem::detail::edge_restriction(e, v.basis);
    const Vector tr = dir(0) * r * v.component(0).coeffs + dir(1) * r * v.component(1).coeffs;
    if (effective_degree(PolyCoeffs(e.basis(v.degree()), 1, tr)) > k)
      return "edge trace of v is not in P_k on edge " + std::to_string(e.global_id);
  }
  return {};
}

inline std::string membership_3d(const Polyhedron& c, Family f, int k, const PolyCoeffs& v) {
  if (f == Family::elem) return {};
  if (effective_degree(v) <= k) return {};
  if (f != Family::face) return to_string(f) + " family membership is only checked for degree <= k";
  if (effective_degree(apply(DiffOp::div, v)) > k - 1) return "div v is not in P_{k-1}";
  if (effective_degree(apply(DiffOp::curl, v)) > k - 1) return "curl v is not in (P_{k-1})^3";
  for (const auto& face : c.faces) {
    const Matrix r = ::vem::detail::face_restriction(face, v.basis);
    const Vector tr = ::vem::detail::directional_restriction(r, face.frame.normal) * v.coeffs;
    if (effective_degree(PolyCoeffs(face.basis(v.degree()), 1, tr)) > k)
      return "normal trace of v is not in P_k on face " + std::to_string(face.id);
  }
  return {};
}

/// Direct L2 projection of a polynomial: mass solve with exact moments.
template <class Element>
Vector direct_projection(const Element& el, const MomentTable& table, int k, const PolyCoeffs& v) {
  const PolyCoeffs q = rebase(v, el.basis(std::max(v.degree(), 0)));
  const Matrix m = vector_gram(gram_from_moments(table, k, k), v.components);
  const Matrix b = vector_gram(gram_from_moments(table, k, q.degree()), v.components);
  return m.ldlt().solve(b * q.coeffs);
}

inline double mass_rel_err(const MomentTable& t, int k, int comps, const Vector& a, const Vector& b) {
  const Matrix m = vector_gram(gram_from_moments(t, k, k), comps);
  const Vector d = a - b;
  return std::sqrt(std::max(0.0, d.dot(m * d))) / std::max(1e-300, std::sqrt(std::max(1e-300, b.dot(m * b))) + 1e-300);
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline RunReport cmd_validate(const Options& o) {
  RunReport r;
  r.command = "validate";
  r.digest = digest({"validate", read_file(o.mesh), std::to_string(o.kappa)});
  PolytopalMesh mesh;
  try {
    mesh = load_mesh(o.mesh);
  } catch (const GeometryError& e) {
    r.add("structure", false, 0, 0, std::string(e.what()));
    r.data["offending_object"] = e.object();
    return r;
  }
  r.add("structure", true, 0, 0, "orientation, closure and connectivity");
  std::visit(
      [&](const auto& m) {
        r.data["name"] = m.name;
        r.data["dim"] = mesh_dim(mesh);
        r.data["vertices"] = m.vertices.size();
        r.data["edges"] = m.edges.size();
        r.data["euler_characteristic"] = m.euler_characteristic();
        r.data["simply_connected"] = m.simply_connected;
      },
      mesh);
  const auto shapes = check_shape_regularity(mesh, o.kappa);
  r.data["kappa"] = o.kappa;
  r.data["elements"] = nlohmann::ordered_json::array();
  for (const auto& s : shapes) {
    r.data["elements"].push_back({{"id", s.element},
                                  {"diameter", s.diameter},
                                  {"disk_ratio", s.disk_ratio},
                                  {"min_edge_ratio", s.min_edge_ratio},
                                  {"star_shaped", s.star_shaped}});
    if (!s.pass) {
      std::string why;
      for (const auto& f : s.failures) why += (why.empty() ? "" : "; ") + f;
      r.warn("shape regularity element " + std::to_string(s.element), s.disk_ratio, o.kappa, why);
    }
  }
  return r;
}

inline RunReport cmd_dims(const Options& o) {
  RunReport r;
  r.command = "dims";
  r.digest = digest({"dims", read_file(o.mesh), o.family, std::to_string(o.k), o.profile});
  const PolytopalMesh mesh = load_mesh(o.mesh);
  const Family f = parse_family(o.family);
  std::optional<DegreeProfile> profile;
  if (!o.profile.empty()) profile = parse_profile(o.profile);
  const bool standard = !profile || *profile == DegreeProfile::standard(o.k);
  if (!profile) check_degree(f, o.k);
  r.data["family"] = to_string(f);
  r.data["k"] = o.k;
  if (profile) r.data["profile"] = profile->str();
  r.data["local"] = nlohmann::ordered_json::array();

  if (const auto* m = std::get_if<Mesh2D>(&mesh)) {
    for (const auto& p : m->elements) {
      const int closed = dim_local_2d(f, p, o.k, profile);
      nlohmann::ordered_json e = {{"id", p.id}, {"dim", closed}};
      if (standard) {
        const Index built = layout_2d(p, f, o.k).size();
        e["layout"] = built;
        r.add("local dim element " + std::to_string(p.id), built == closed, static_cast<double>(built), closed);
      }
      r.data["local"].push_back(e);
    }
    if (standard) {
      const GlobalDofMap g = assemble_global_2d(*m, f, o.k);
      r.data["global"] = g.size;
      r.add("global dim", g.size == g.closed_form, static_cast<double>(g.size), static_cast<double>(g.closed_form),
            "assembled vs closed form");
    }
  } else {
    const auto& m3 = std::get<Mesh3D>(mesh);
    for (const auto& c : m3.cells) {
      const int closed = dim_local_3d(f, c, o.k, profile);
      nlohmann::ordered_json e = {{"id", c.id}, {"dim", closed}};
      if (f == Family::edge) e["beta"] = beta_k(c, profile ? profile->kb : o.k);
      if (standard) {
        const Index built = layout_3d(c, f, o.k).size();
        e["layout"] = built;
        r.add("local dim cell " + std::to_string(c.id), built == closed, static_cast<double>(built), closed);
      }
      r.data["local"].push_back(e);
    }
    if (standard) {
      const GlobalDofMap g = assemble_global_3d(m3, f, o.k);
      r.data["global"] = g.size;
      if (g.alternative_count != g.closed_form) r.data["global_alternative_count"] = g.alternative_count;
      r.add("global dim", g.size == g.closed_form, static_cast<double>(g.size), static_cast<double>(g.closed_form),
            "assembled vs closed form");
    }
  }
  return r;
}

inline RunReport cmd_project(const Options& o) {
  RunReport r;
  r.command = "project";
  r.digest = digest({"project", read_file(o.mesh), o.family, std::to_string(o.k), o.field});
  const PolytopalMesh mesh = load_mesh(o.mesh);
  const Family f = parse_family(o.family);
  check_degree(f, o.k);
  if (f == Family::vert) throw PreconditionError("no L2 projector for the vert family");
  if (o.field.empty()) throw SchemaError("project needs --field");
  const int dim = mesh_dim(mesh);
  const int comps = f == Family::elem ? 1 : dim;
  const PolyCoeffs v = detail::parse_field(o.field, dim, comps);
  constexpr double tol = 1e-9;
  r.data["family"] = to_string(f);
  r.data["k"] = o.k;
  r.data["field_degree"] = v.degree();
  r.data["elements"] = nlohmann::ordered_json::array();

  auto record = [&](int id, const std::string& why, double err) {
    const std::string label = (dim == 2 ? "element " : "cell ") + std::to_string(id);
    if (!why.empty()) {
      r.add("membership " + label, false, 0, 0, why);
      r.data["elements"].push_back({{"id", id}, {"in_space", false}});
      return;
    }
    r.data["elements"].push_back({{"id", id}, {"in_space", true}, {"error", err}});
    r.add("projection " + label, err < tol, err, tol, "DOF pipeline vs direct projection");
  };

  if (const auto* m = std::get_if<Mesh2D>(&mesh)) {
    for (const auto& p : m->elements) {
      const std::string why = detail::membership_2d(p, f, o.k, v);
      if (!why.empty()) {
        record(p.id, why, 0);
        continue;
      }
      const LocalSpace2D s(p, f, o.k);
      const Vector pi = s.projector() * s.dofs(v);
      const MomentTable t = polygon_moments(p, o.k + std::max(v.degree(), o.k));
      record(p.id, {}, detail::mass_rel_err(t, o.k, comps, pi, detail::direct_projection(p, t, o.k, v)));
    }
  } else {
    for (const auto& c : std::get<Mesh3D>(mesh).cells) {
      const std::string why = detail::membership_3d(c, f, o.k, v);
      if (!why.empty()) {
        record(c.id, why, 0);
        continue;
      }
      const LocalSpace3D s(c, f, o.k);
      const Vector d = s.dofs(v);
      const Vector pi = f == Family::edge ? Vector(EnhancementOperator(s).projector() * d) : Vector(s.projector() * d);
      const MomentTable t = polyhedron_moments(c, o.k + std::max(v.degree(), o.k));
      record(c.id, {}, detail::mass_rel_err(t, o.k, comps, pi, detail::direct_projection(c, t, o.k, v)));
    }
  }
  return r;
}

inline Fault parse_fault(const std::string& s) {
  if (s.empty() || s == "none") return Fault::none;
  if (s == "sign-flip") return Fault::sign_flip;
  throw SchemaError("unknown fault '" + s + "' (expected sign-flip)");
}

inline void add_complex_checks(RunReport& r, const ComplexReport& c, const std::string& prefix) {
  for (const auto& s : c.sequences)
    for (const auto& ch : s.checks) r.add(prefix + s.name + ": " + ch.name, ch.pass, ch.value, ch.tolerance, ch.detail);
}

inline RunReport cmd_complex(const Options& o) {
  RunReport r;
  r.command = "complex";
  r.digest = digest({"complex", read_file(o.mesh), std::to_string(o.k), o.fault});
  const PolytopalMesh mesh = load_mesh(o.mesh);
  const ComplexReport c = verify_complex(mesh, o.k, parse_fault(o.fault));
  add_complex_checks(r, c, "");
  r.data = to_json(c);
  return r;
}

/// Runs the invariant suite on every mesh in a directory.
inline RunReport cmd_selftest(const Options& o) {
  namespace fs = std::filesystem;
  RunReport r;
  r.command = "selftest";
  std::vector<std::string> files;
  if (!fs::is_directory(o.mesh_dir)) throw SchemaError("mesh directory '" + o.mesh_dir + "' does not exist");
  for (const auto& e : fs::directory_iterator(o.mesh_dir))
    if (e.path().extension() == ".json") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw SchemaError("mesh directory '" + o.mesh_dir + "' contains no .json meshes");
  std::vector<std::string> parts{"selftest", o.fault};
  for (const auto& f : files) parts.push_back(read_file(f));
  r.digest = digest(parts);
  const Fault fault = parse_fault(o.fault);
  std::mt19937 rng(20);
  auto random_poly = [&](const MonomialBasis& b, int comps) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PolyCoeffs p(b, comps);
    for (Index i = 0; i < p.coeffs.size(); ++i) p.coeffs(i) = u(rng);
    return p;
  };
  r.data["meshes"] = nlohmann::ordered_json::array();

  for (const auto& path : files) {
    PolytopalMesh mesh;
    try {
      mesh = load_mesh(path);
    } catch (const GeometryError&) {
      // meshes with deliberate defects are exercised by validate
      continue;
    }
    const std::string name = std::visit([](const auto& m) { return m.name; }, mesh);
    r.data["meshes"].push_back(name);
    const std::string pre = name + ": ";
    if (const auto* m = std::get_if<Mesh2D>(&mesh)) {
      int dim_bad = 0;
      double proj = 0.0, rec = 0.0;
      for (Family f : {Family::face, Family::edge, Family::vert, Family::elem})
        for (int k = 1; k <= 3; ++k) {
          for (const auto& p : m->elements) dim_bad += layout_2d(p, f, k).size() != dim_local_2d(f, p, k);
          const GlobalDofMap g = assemble_global_2d(*m, f, k);
          dim_bad += g.size != g.closed_form;
        }
      for (const auto& p : m->elements)
        for (Family f : {Family::face, Family::edge})
          for (int k = 1; k <= 3; ++k) {
            const LocalSpace2D s(p, f, k);
            const PolyCoeffs v = random_poly(p.basis(k), 2);
            proj = std::max(proj, detail::rel_err(s.projector() * s.dofs(v), v.coeffs));
            const PolyCoeffs w = f == Family::face ? div_from_dofs(s, s.dofs(v)) : rot_from_dofs(s, s.dofs(v));
            const PolyCoeffs exact = f == Family::face ? apply(DiffOp::div, v) : detail::scalar_rot(v);
            rec = std::max(rec, detail::rel_err(rebase(w, exact.basis).coeffs, exact.coeffs));
          }
      r.add(pre + "dimensions", dim_bad == 0, dim_bad, 0, "local and global counts vs closed forms, k <= 3");
      r.add(pre + "projector reproduction", proj < 1e-10, proj, 1e-10);
      r.add(pre + "div/rot recovery", rec < 1e-10, rec, 1e-10);
      if (m->simply_connected) add_complex_checks(r, verify_complex(*m, 2, fault), pre);
    } else {
      const auto& m3 = std::get<Mesh3D>(mesh);
      int dim_bad = 0;
      double proj = 0.0, rec = 0.0, green = 0.0;
      for (Family f : {Family::face, Family::edge, Family::vert, Family::elem})
        for (int k = 1; k <= 2; ++k) {
          for (const auto& c : m3.cells) dim_bad += layout_3d(c, f, k).size() != dim_local_3d(f, c, k);
          const GlobalDofMap g = assemble_global_3d(m3, f, k);
          dim_bad += g.size != g.closed_form;
        }
      for (const auto& c : m3.cells) {
        for (int k = 1; k <= 2; ++k) {
          const LocalSpace3D s(c, Family::face, k);
          const PolyCoeffs v = random_poly(c.basis(k), 3);
          proj = std::max(proj, detail::rel_err(s.projector() * s.dofs(v), v.coeffs));
          const PolyCoeffs dv = apply(DiffOp::div, v);
          rec = std::max(rec, detail::rel_err(rebase(div_from_dofs_3d(s, s.dofs(v)), dv.basis).coeffs, dv.coeffs));
          const LocalSpace3D se(c, Family::edge, k);
          proj = std::max(proj, detail::rel_err(EnhancementOperator(se).projector() * se.dofs(v), v.coeffs));
        }
        for (int i = 0; i < 3; ++i) {
          const GreenResiduals g = green_residuals(c, random_poly(c.basis(2), 3), random_poly(c.basis(2), 3));
          green = std::max({green, g.curl, g.curlcurl});
        }
      }
      r.add(pre + "dimensions", dim_bad == 0, dim_bad, 0, "local and global counts vs closed forms, k <= 2");
      r.add(pre + "projector reproduction", proj < 1e-10, proj, 1e-10);
      r.add(pre + "div recovery", rec < 1e-10, rec, 1e-10);
      r.add(pre + "green identities", green < 1e-10, green, 1e-10);
      if (m3.simply_connected) add_complex_checks(r, verify_complex(m3, 3, fault), pre);
    }
  }
  return r;
}

}  // namespace vem::cli
