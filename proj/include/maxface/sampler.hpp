#pragma once

#include <iosfwd>

#include "maxface/weierstrass.hpp"

namespace maxface {

// Structured rectangular grid with vertices inside exclusion disks around
// the punctures removed. A puncture at infinity removes |z| > 1/exclusion.
struct MeshDomain {
    int nx = 0, ny = 0;
    Complex lo, hi;
    std::vector<int> index;  // nx*ny entries, vertex id or -1
    std::vector<Complex> vertices;
};

MeshDomain mesh_domain(Complex lo, Complex hi, int nx, int ny, const std::vector<PointExt>& punctures,
                       double exclusion);

struct SampledSurface {
    MeshDomain domain;
    std::vector<std::array<double, 3>> positions;
    double max_loop_defect = 0.0;
};

// Integrates the immersion over a BFS spanning tree of the grid graph,
// rooted at the vertex nearest the base point; the defect is the worst
// closure error over the non-tree edges.
SampledSurface integrate_tree(const WeierstrassData& data, const MeshDomain& domain, double tol = 1e-10);

// Wavefront OBJ: "v x y z" lines and quad faces where all corners exist.
void export_obj(const SampledSurface& surface, std::ostream& os);

// CSV polylines: "re,im" rows, components separated by a blank line.
void export_csv(const std::vector<std::vector<Complex>>& polylines, std::ostream& os);

}  // namespace maxface
