// vem: validate | dims | project | complex | selftest

#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

#ifndef VEM_MESH_DIR
#define VEM_MESH_DIR "data/meshes"
#endif

using namespace vem;

int main(int argc, char** argv) {
  CLI::App app{"H(div)/H(curl) virtual element spaces: dimensions, projections and exact sequences"};
  app.require_subcommand(1);
  cli::Options o;
  o.mesh_dir = VEM_MESH_DIR;
  bool json = false, timing = false;

  auto common = [&](CLI::App* c) {
    c->add_flag("--json", json, "JSON report instead of text");
    c->add_flag("--timing", timing, "include wall time (breaks byte-identical output)");
  };
  auto* validate = app.add_subcommand("validate", "check mesh structure and shape regularity");
  validate->add_option("--mesh", o.mesh, "mesh file")->required();
  validate->add_option("--kappa", o.kappa, "shape-regularity threshold (warnings only)")->check(CLI::NonNegativeNumber);
  common(validate);

  auto* dims = app.add_subcommand("dims", "local and global dimensions");
  dims->add_option("--mesh", o.mesh, "mesh file")->required();
  dims->add_option("--family", o.family, "face|edge|vert|elem")->required();
  dims->add_option("--k", o.k, "degree")->required();
  dims->add_option("--profile", o.profile, "degree profile kb,kd,kr");
  common(dims);

  auto* project = app.add_subcommand("project", "L2 projection of a polynomial field from its DOFs");
  project->add_option("--mesh", o.mesh, "mesh file")->required();
  project->add_option("--family", o.family, "face|edge|elem")->required();
  project->add_option("--k", o.k, "degree")->required();
  project->add_option("--field", o.field, "coefficients in global monomials, graded lex, component-major")->required();
  common(project);

  auto* complex = app.add_subcommand("complex", "verify the discrete exact sequences");
  complex->add_option("--mesh", o.mesh, "mesh file")->required();
  complex->add_option("--k", o.k, "degree of the vertex space")->required();
  complex->add_option("--inject-fault", o.fault, "sign-flip");
  common(complex);

  auto* selftest = app.add_subcommand("selftest", "invariant suite on the bundled meshes");
  selftest->add_option("--mesh-dir", o.mesh_dir, "directory of .json meshes");
  selftest->add_option("--inject-fault", o.fault, "sign-flip");
  common(selftest);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::input_error;
  }

  const auto start = std::chrono::steady_clock::now();
  cli::RunReport report;
  try {
    if (*validate) report = cli::cmd_validate(o);
    else if (*dims) report = cli::cmd_dims(o);
    else if (*project) report = cli::cmd_project(o);
    else if (*complex) report = cli::cmd_complex(o);
    else report = cli::cmd_selftest(o);
  } catch (const SchemaError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return cli::input_error;
  } catch (const PreconditionError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return cli::input_error;
  } catch (const GeometryError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return cli::input_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::check_failed;
  }
  if (timing) report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (json)
    std::cout << cli::to_json(report).dump(2) << "\n";
  else
    std::cout << cli::to_text(report);
  return report.exit_code();
}
