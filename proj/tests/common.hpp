#pragma once

#include "vem/vem.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

namespace vem::test {

inline std::string mesh_path(const std::string& name) { return std::string(VEM_DATA_DIR) + "/" + name + ".json"; }

inline Mesh2D mesh2(const std::string& name) { return std::get<Mesh2D>(load_mesh(mesh_path(name))); }
inline Mesh3D mesh3(const std::string& name) { return std::get<Mesh3D>(load_mesh(mesh_path(name))); }

inline const std::vector<std::string>& meshes_2d() {
  static const std::vector<std::string> names{"unit_square", "squares_2x2", "voronoi_5", "pentagon"};
  return names;
}

inline const std::vector<std::string>& meshes_3d() {
  static const std::vector<std::string> names{"unit_cube", "two_cubes", "prism"};
  return names;
}

/// Every element of every bundled 2D mesh.
inline std::vector<Polygon> sample_polygons() {
  std::vector<Polygon> out;
  for (const auto& n : meshes_2d())
    for (const auto& e : mesh2(n).elements) out.push_back(e);
  return out;
}

inline std::vector<Polyhedron> sample_polyhedra() {
  std::vector<Polyhedron> out;
  for (const auto& n : meshes_3d())
    for (const auto& c : mesh3(n).cells) out.push_back(c);
  return out;
}

inline Vector random_vector(std::mt19937& rng, Index n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline PolyCoeffs random_poly(std::mt19937& rng, const MonomialBasis& b, int comps) {
  return PolyCoeffs(b, comps, random_vector(rng, comps * b.size()));
}

}  // namespace vem::test

namespace vem::test {

/// Least-squares fit of a field sampled at random points; exact (up to
/// round-off) when f lies in the span of the basis.
template <class F>
PolyCoeffs fit_poly(const MonomialBasis& b, int comps, F&& f, std::uint32_t seed = 7) {
  std::mt19937 rng(seed);
  const Index n = 3 * b.size();
  Matrix a(n, b.size());
  Matrix rhs(n, comps);
  for (Index i = 0; i < n; ++i) {
    const Vector x = b.center() + b.scale() * random_vector(rng, b.dim());
    a.row(i) = b.evaluate(x).transpose();
    rhs.row(i) = Vector(f(x)).transpose();
  }
  const Matrix c = a.colPivHouseholderQr().solve(rhs);
  PolyCoeffs p(b, comps);
  for (int j = 0; j < comps; ++j) p.coeffs.segment(j * b.size(), b.size()) = c.col(j);
  return p;
}

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace vem::test
