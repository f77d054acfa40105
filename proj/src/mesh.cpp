#include "swim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "swim/error.hpp"

namespace swim {

void Mesh::finalize() {
  edges.clear();
  cell_edges.assign(cells.size(), {-1, -1, -1});
  std::map<std::array<int, 2>, int> edge_ids;
  for (int c = 0; c < n_cells(); ++c) {
    if (cell_area(c) <= 0.0) {
      throw InvalidGeometry("cell " + std::to_string(c) +
                            " is degenerate or clockwise");
    }
    for (int le = 0; le < 3; ++le) {
      std::array<int, 2> key{cells[c][le], cells[c][(le + 1) % 3]};
      if (key[0] > key[1]) std::swap(key[0], key[1]);
      auto [it, inserted] = edge_ids.try_emplace(key, n_edges());
      if (inserted) edges.push_back(key);
      cell_edges[c][le] = it->second;
    }
  }

  if (boundary_edges.empty()) return;
  std::map<std::array<int, 2>, int> want;
  for (int e = 0; e < static_cast<int>(boundary_edges.size()); ++e) {
    boundary_edges[e].cell = -1;
    boundary_edges[e].cell_opposite = -1;
    std::array<int, 2> key{boundary_edges[e].v0, boundary_edges[e].v1};
    if (key[0] > key[1]) std::swap(key[0], key[1]);
    want[key] = e;
  }
  for (int c = 0; c < n_cells(); ++c) {
    for (int le = 0; le < 3; ++le) {
      std::array<int, 2> key{cells[c][le], cells[c][(le + 1) % 3]};
      if (key[0] > key[1]) std::swap(key[0], key[1]);
      auto it = want.find(key);
      if (it == want.end()) continue;
      BoundaryEdge& be = boundary_edges[it->second];
      const bool solid_cell = cell_region[c] == Region::Solid;
      const bool want_solid = be.tag == BoundaryTag::SolidBoundary;
      (solid_cell == want_solid ? be.cell : be.cell_opposite) = c;
    }
  }
  for (const auto& be : boundary_edges) {
    if (be.cell < 0) throw TagError("boundary edge without owning cell");
    if (be.tag == BoundaryTag::SolidBoundary && be.cell_opposite < 0) {
      throw TagError("interface edge without a fluid-side cell");
    }
  }
}

namespace {

// Ring k >= 1 carries 6k vertices at angles 2*pi*j/(6k).
int ring_count(int k) { return k == 0 ? 1 : 6 * k; }

struct RingLayout {
  std::vector<double> radius;  // radius per ring, ring 0 is the center point
  std::vector<int> first;      // first vertex index per ring
  int solid_rings = 0;         // interface circle is ring `solid_rings`
};

// Zipper triangulation between two CCW vertex rings with different counts.
// Triangles are emitted CCW; every inner and outer arc is used exactly once.
void zip_rings(const RingLayout& lay, int k_in, int k_out,
               std::vector<std::array<int, 3>>& cells) {
  const int m_in = ring_count(k_in), m_out = ring_count(k_out);
  const int f_in = lay.first[k_in], f_out = lay.first[k_out];
  auto in_id = [&](int i) { return f_in + (i % m_in); };
  auto out_id = [&](int j) { return f_out + (j % m_out); };
  int i = 0, j = 0;
  while (i < m_in || j < m_out) {
    const double next_in = 2.0 * M_PI * (i + 1) / m_in;
    const double next_out = 2.0 * M_PI * (j + 1) / m_out;
    const bool advance_out =
        (j < m_out) && (i == m_in || next_out <= next_in + 1e-14);
    if (advance_out) {
      cells.push_back({in_id(i), out_id(j), out_id(j + 1)});
      ++j;
    } else {
      cells.push_back({in_id(i), out_id(j), in_id(i + 1)});
      ++i;
    }
  }
}

}  // namespace

Mesh build_disk_in_disk_mesh(double solid_radius, double outer_radius,
                             int solid_rings) {
  if (!(solid_radius > 0.0) || !(outer_radius > solid_radius)) {
    throw InvalidGeometry("need 0 < solid_radius < outer_radius, got " +
                          std::to_string(solid_radius) + ", " +
                          std::to_string(outer_radius));
  }
  if (solid_rings < 1) throw InvalidGeometry("solid_rings must be >= 1");

  const double dr = solid_radius / solid_rings;
  const int fluid_rings =
      std::max(1, static_cast<int>(std::lround((outer_radius - solid_radius) / dr)));
  const int total_rings = solid_rings + fluid_rings;

  RingLayout lay;
  lay.solid_rings = solid_rings;
  lay.radius.resize(total_rings + 1);
  lay.first.resize(total_rings + 1);
  for (int k = 0; k <= total_rings; ++k) {
    lay.radius[k] = (k <= solid_rings)
                        ? solid_radius * k / solid_rings
                        : solid_radius + (outer_radius - solid_radius) *
                                             (k - solid_rings) / fluid_rings;
  }

  Mesh mesh;
  mesh.solid_radius = solid_radius;
  mesh.outer_radius = outer_radius;
  int next = 0;
  for (int k = 0; k <= total_rings; ++k) {
    lay.first[k] = next;
    const int m = ring_count(k);
    for (int j = 0; j < m; ++j) {
      const double th = 2.0 * M_PI * j / m;
      mesh.vertices.emplace_back(lay.radius[k] * std::cos(th),
                                 lay.radius[k] * std::sin(th));
    }
    next += m;
  }

  // Center fan, then zipped bands.  Cells of band k live between rings k and
  // k+1 and belong to the solid iff the band is inside the interface ring.
  for (int j = 0; j < 6; ++j) {
    mesh.cells.push_back({0, lay.first[1] + j, lay.first[1] + (j + 1) % 6});
    mesh.cell_region.push_back(Region::Solid);
  }
  for (int k = 1; k < total_rings; ++k) {
    const std::size_t begin = mesh.cells.size();
    zip_rings(lay, k, k + 1, mesh.cells);
    const Region reg = (k < solid_rings) ? Region::Solid : Region::Fluid;
    mesh.cell_region.resize(mesh.cells.size(), reg);
    (void)begin;
  }

  // Boundary edges: consecutive vertices of the interface ring and of the
  // outermost ring, CCW; finalize() attaches the adjacent cells.
  auto add_circle = [&](int ring, BoundaryTag tag) {
    const int m = ring_count(ring);
    const int f = lay.first[ring];
    for (int j = 0; j < m; ++j) {
      Mesh::BoundaryEdge be;
      be.v0 = f + j;
      be.v1 = f + (j + 1) % m;
      be.tag = tag;
      mesh.boundary_edges.push_back(be);
    }
  };
  add_circle(solid_rings, BoundaryTag::SolidBoundary);
  add_circle(total_rings, BoundaryTag::OuterBoundary);

  mesh.finalize();
  return mesh;
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path + " for writing");
  out << "swimmesh 1\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "radii %.17g %.17g\n", mesh.solid_radius,
                mesh.outer_radius);
  out << buf;
  out << "vertices " << mesh.n_vertices() << "\n";
  for (const Vec2& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v[0], v[1]);
    out << buf;
  }
  out << "cells " << mesh.n_cells() << "\n";
  for (int c = 0; c < mesh.n_cells(); ++c) {
    out << mesh.cells[c][0] << ' ' << mesh.cells[c][1] << ' '
        << mesh.cells[c][2] << ' ' << static_cast<int>(mesh.cell_region[c])
        << "\n";
  }
  out << "boundary " << mesh.boundary_edges.size() << "\n";
  for (const auto& be : mesh.boundary_edges) {
    out << be.v0 << ' ' << be.v1 << ' ' << static_cast<int>(be.tag) << "\n";
  }
  if (!out) throw IOError("write failed for " + path);
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open " + path);
  std::string word;
  int version = 0;
  in >> word >> version;
  if (word != "swimmesh" || version != 1) {
    throw IOError("unrecognized mesh header in " + path);
  }
  Mesh mesh;
  int n = 0;
  in >> word >> mesh.solid_radius >> mesh.outer_radius;
  if (word != "radii") throw IOError("expected radii record");
  in >> word >> n;
  if (word != "vertices" || n < 3) throw IOError("bad vertex record");
  mesh.vertices.resize(n);
  for (Vec2& v : mesh.vertices) in >> v[0] >> v[1];
  in >> word >> n;
  if (word != "cells" || n < 1) throw IOError("bad cell record");
  mesh.cells.resize(n);
  mesh.cell_region.resize(n);
  for (int c = 0; c < n; ++c) {
    int reg = 0;
    in >> mesh.cells[c][0] >> mesh.cells[c][1] >> mesh.cells[c][2] >> reg;
    if (reg < 0 || reg > 1) throw TagError("bad region tag in " + path);
    mesh.cell_region[c] = static_cast<Region>(reg);
  }
  in >> word >> n;
  if (word != "boundary" || n < 1) throw IOError("bad boundary record");
  mesh.boundary_edges.resize(n);
  for (auto& be : mesh.boundary_edges) {
    int tag = 0;
    in >> be.v0 >> be.v1 >> tag;
    if (tag < 0 || tag > 1) throw TagError("bad boundary tag in " + path);
    be.tag = static_cast<BoundaryTag>(tag);
  }
  if (!in) throw IOError("truncated mesh file " + path);
  for (const auto& c : mesh.cells) {
    for (int v : c) {
      if (v < 0 || v >= mesh.n_vertices()) throw IOError("vertex id out of range");
    }
  }
  mesh.finalize();
  return mesh;
}

}  // namespace swim
