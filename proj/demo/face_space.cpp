// Face space on a pentagon: DOFs of a field, divergence and L2 projection
// from the DOFs alone, then the exact-sequence check on a Voronoi mesh.

#include "vem/vem.hpp"

#include <iostream>

using namespace vem;

int main() {
  const auto pent = std::get<Mesh2D>(load_mesh(VEM_MESH_DIR "/pentagon.json"));
  const Polygon& p = pent.elements[0];
  const LocalSpace2D s(p, Family::face, 2);
  std::cout << "pentagon, face space k=2: " << s.size() << " DOFs\n";

  // v = (x^2, x y)
  PolyCoeffs v(MonomialBasis::global(2, 2), 2);
  v.coeffs(3) = 1.0;
  v.coeffs(6 + 4) = 1.0;
  const Vector d = s.dofs(v);

  const PolyCoeffs div = div_from_dofs(s, d);
  const Vector x = p.vertices[1];
  std::cout << "div v at a vertex: " << div(x)(0) << " (exact " << 3 * x(0) << ")\n";
  std::cout << "projection error: " << (s.projector() * d - rebase(v, p.basis(2)).coeffs).norm() << "\n";

  const auto vor = std::get<Mesh2D>(load_mesh(VEM_MESH_DIR "/voronoi_5.json"));
  const ComplexReport r = verify_complex(vor, 3);
  for (const auto& seq : r.sequences) {
    std::cout << seq.name << ": dims";
    for (auto n : seq.dims) std::cout << ' ' << n;
    std::cout << ", euler " << seq.euler << (seq.pass() ? ", exact\n" : ", FAILED\n");
  }
  return r.pass() ? 0 : 1;
}
