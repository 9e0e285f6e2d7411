#pragma once

#include "karcher/karcher.hpp"

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace karcher {

using Triangle = std::array<int, 3>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Icosahedron refined `level` times by 4-to-1 splits, vertices on the unit sphere.
struct SphereMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Triangle> triangles;
};
SphereMesh icosphere(int level);

/// Triangulation of a sphere by Karcher triangles. Edge lengths are geodesic
/// distances computed once per mesh edge and shared by both adjacent triangles.
struct KarcherTriangulation {
  ManifoldPtr manifold;
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  std::vector<FlatMetric> metrics;
  std::vector<KarcherChart> charts;
  double h = 0.0;          // longest edge
  double min_theta = 0.0;  // smallest per-triangle fullness (at that triangle's longest edge)

  /// Geodesic length of edge (i, j) as stored in triangle t's flat metric.
  double edge_length(int t, int i, int j) const;
};

KarcherTriangulation build_triangulation(const ManifoldPtr& manifold, int level, double min_fullness = 0.5);

enum class AssemblyMode { Flat, PulledBack };
std::string to_string(AssemblyMode mode);
AssemblyMode assembly_mode_from_string(const std::string& s);

using ScalarField = std::function<double(const Point&)>;
using GradientField = std::function<Vec(const Point&)>;

/// Discretization of Delta_g u = f (Delta_g negative semidefinite):
/// stiffness * u = load with load_i = -int f phi_i.
struct FemSystem {
  SparseMatrix stiffness;
  SparseMatrix mass;
  Vec load;
  AssemblyMode mode = AssemblyMode::Flat;
};

FemSystem assemble(const KarcherTriangulation& tri, const ScalarField& f, AssemblyMode mode);

struct SolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;
  bool dense = false;
};

/// Zero-mean solution of stiffness * u = load after projecting constants out of the load.
/// Jacobi-preconditioned CG with deflation of constants; dense solve below 500 unknowns.
Vec solve_poisson(const FemSystem& sys, SolveInfo* info = nullptr);

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;  // includes the L2 part
};

/// Norms of u_h - u over the Karcher triangles with the pulled-back metric
/// (degree-4 rule, six points per triangle).
ErrorNorms error_norms(const KarcherTriangulation& tri, const Vec& u_h, const ScalarField& u_exact,
                       const GradientField& grad_u_exact);

/// Nodal interpolant of u.
Vec interpolate(const KarcherTriangulation& tri, const ScalarField& u);

void write_off(const KarcherTriangulation& tri, std::ostream& os);

struct FemLevelResult {
  int level = 0;
  double h = 0.0;
  int dof = 0;
  double l2_error = 0.0;
  double h1_error = 0.0;
};

/// f = -2z on the unit sphere, exact solution u = z.
FemLevelResult run_poisson_level(int level, AssemblyMode mode = AssemblyMode::PulledBack);

}  // namespace karcher
