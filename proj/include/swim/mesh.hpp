#pragma once

#include <array>
#include <string>
#include <vector>

#include "swim/geometry.hpp"

namespace swim {

enum class Region : int { Fluid = 0, Solid = 1 };

enum class BoundaryTag : int { SolidBoundary = 0, OuterBoundary = 1 };

/// Conforming triangulation of a disk of radius `outer_radius` containing a
/// concentric solid disk of radius `solid_radius`.  Both regions are meshed;
/// the interface circle is resolved by mesh edges.  Cells are CCW.
///
/// Boundary edges live on the two circles and are stored CCW around the
/// origin, so the outward radial normal is -perp(tangent) for both tags.
struct Mesh {
  struct BoundaryEdge {
    int v0 = -1, v1 = -1;    // CCW order around the origin
    int cell = -1;           // adjacent cell inside the tagged region
    int cell_opposite = -1;  // adjacent cell across the circle (-1 outside)
    BoundaryTag tag = BoundaryTag::SolidBoundary;
  };

  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<Region> cell_region;
  std::vector<BoundaryEdge> boundary_edges;

  // Unique undirected edges (sorted vertex pairs) and the per-cell edge ids
  // for local edges (0-1), (1-2), (2-0); built by finalize().
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> cell_edges;

  double solid_radius = 0.0;
  double outer_radius = 0.0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  Vec2 cell_vertex(int c, int i) const { return vertices[cells[c][i]]; }

  double cell_area(int c) const {
    const Vec2 a = cell_vertex(c, 0), b = cell_vertex(c, 1), d = cell_vertex(c, 2);
    return 0.5 * cross2(b - a, d - a);
  }

  /// Edge endpoints of boundary edge `e` and its outward radial unit normal.
  Vec2 boundary_normal(int e) const {
    const BoundaryEdge& be = boundary_edges[e];
    const Vec2 tau = vertices[be.v1] - vertices[be.v0];
    return -perp(tau).normalized();
  }

  double boundary_edge_length(int e) const {
    const BoundaryEdge& be = boundary_edges[e];
    return (vertices[be.v1] - vertices[be.v0]).norm();
  }

  /// Builds edge connectivity, validates orientation, and attaches the
  /// adjacent cells to boundary edges; throws InvalidGeometry on inverted
  /// cells and TagError on dangling boundary records.
  void finalize();
};

/// Structured disk-in-disk triangulation.  `solid_rings` concentric vertex
/// rings resolve the solid disk (ring k carries 6k vertices), and the annulus
/// continues with rings of matching angular density, so element aspect ratios
/// stay near one at every radius.  Throws InvalidGeometry for bad radii or
/// resolution.
Mesh build_disk_in_disk_mesh(double solid_radius, double outer_radius,
                             int solid_rings);

/// Plain-text round-trip format (versioned header, fixed precision).
void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(const std::string& path);

}  // namespace swim
