#include "maxface/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>

namespace maxface {

MeshDomain mesh_domain(Complex lo, Complex hi, int nx, int ny, const std::vector<PointExt>& punctures,
                       double exclusion) {
    if (nx < 2 || ny < 2) throw InvalidInput("mesh_domain: grid needs at least 2x2 vertices");
    if (!(hi.real() > lo.real()) || !(hi.imag() > lo.imag())) throw InvalidInput("mesh_domain: empty window");
    if (!(exclusion > 0.0)) throw InvalidInput("mesh_domain: exclusion must be positive");

    MeshDomain d;
    d.nx = nx;
    d.ny = ny;
    d.lo = lo;
    d.hi = hi;
    d.index.assign(static_cast<size_t>(nx) * static_cast<size_t>(ny), -1);
    const double dx = (hi.real() - lo.real()) / (nx - 1);
    const double dy = (hi.imag() - lo.imag()) / (ny - 1);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Complex z(lo.real() + i * dx, lo.imag() + j * dy);
            bool keep = true;
            for (const auto& p : punctures) {
                if (p.is_inf()) {
                    if (std::abs(z) > 1.0 / exclusion) keep = false;
                } else if (std::abs(z - p.z) < exclusion) {
                    keep = false;
                }
            }
            if (keep) {
                d.index[static_cast<size_t>(j) * nx + i] = static_cast<int>(d.vertices.size());
                d.vertices.push_back(z);
            }
        }
    }
    if (d.vertices.empty()) throw InvalidInput("mesh_domain: exclusion removed every vertex");
    return d;
}

SampledSurface integrate_tree(const WeierstrassData& data, const MeshDomain& domain, double tol) {
    SampledSurface out;
    out.domain = domain;
    const int nx = domain.nx, ny = domain.ny;
    const size_t nv = domain.vertices.size();
    out.positions.assign(nv, {0.0, 0.0, 0.0});

    // root = kept vertex nearest the base point
    size_t root = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t v = 0; v < nv; ++v) {
        double dist = std::abs(domain.vertices[v] - data.base_point);
        if (dist < best) {
            best = dist;
            root = v;
        }
    }
    out.positions[root] = evaluate_immersion(data, domain.vertices[root], tol);

    std::array<RationalFn, 3> phi = weierstrass_forms(data);
    auto edge_step = [&](size_t u, size_t v) {
        std::array<double, 3> d{};
        for (int k = 0; k < 3; ++k)
            d[static_cast<size_t>(k)] =
                integrate_segment(phi[static_cast<size_t>(k)], domain.vertices[u], domain.vertices[v], tol).real();
        return d;
    };

    // grid adjacency by vertex id
    std::vector<std::vector<size_t>> adj(nv);
    auto id_at = [&](int i, int j) { return domain.index[static_cast<size_t>(j) * nx + i]; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int u = id_at(i, j);
            if (u < 0) continue;
            if (i + 1 < nx && id_at(i + 1, j) >= 0) {
                adj[static_cast<size_t>(u)].push_back(static_cast<size_t>(id_at(i + 1, j)));
                adj[static_cast<size_t>(id_at(i + 1, j))].push_back(static_cast<size_t>(u));
            }
            if (j + 1 < ny && id_at(i, j + 1) >= 0) {
                adj[static_cast<size_t>(u)].push_back(static_cast<size_t>(id_at(i, j + 1)));
                adj[static_cast<size_t>(id_at(i, j + 1))].push_back(static_cast<size_t>(u));
            }
        }

    std::vector<char> visited(nv, 0);
    std::vector<std::pair<size_t, size_t>> tree_edges, cross_edges;
    std::deque<size_t> queue{root};
    visited[root] = 1;
    while (!queue.empty()) {
        size_t u = queue.front();
        queue.pop_front();
        for (size_t v : adj[u]) {
            if (!visited[v]) {
                visited[v] = 1;
                tree_edges.emplace_back(u, v);
                queue.push_back(v);
            } else if (u < v) {
                cross_edges.emplace_back(u, v);
            }
        }
    }
    // disconnected components anchor independently through the base point
    for (size_t v = 0; v < nv; ++v) {
        if (visited[v]) continue;
        visited[v] = 1;
        out.positions[v] = evaluate_immersion(data, domain.vertices[v], tol);
        std::deque<size_t> q2{v};
        while (!q2.empty()) {
            size_t u = q2.front();
            q2.pop_front();
            for (size_t w : adj[u]) {
                if (!visited[w]) {
                    visited[w] = 1;
                    tree_edges.emplace_back(u, w);
                    q2.push_back(w);
                } else if (u < w) {
                    cross_edges.emplace_back(u, w);
                }
            }
        }
    }

    for (const auto& [u, v] : tree_edges) {
        std::array<double, 3> step = edge_step(u, v);
        for (int k = 0; k < 3; ++k)
            out.positions[v][static_cast<size_t>(k)] = out.positions[u][static_cast<size_t>(k)] + step[static_cast<size_t>(k)];
    }

    for (const auto& [u, v] : cross_edges) {
        std::array<double, 3> step = edge_step(u, v);
        double defect = 0.0;
        for (int k = 0; k < 3; ++k)
            defect = std::max(defect, std::abs(out.positions[u][static_cast<size_t>(k)] + step[static_cast<size_t>(k)] -
                                               out.positions[v][static_cast<size_t>(k)]));
        out.max_loop_defect = std::max(out.max_loop_defect, defect);
    }
    return out;
}

void export_obj(const SampledSurface& surface, std::ostream& os) {
    char buf[128];
    for (const auto& p : surface.positions) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", p[0], p[1], p[2]);
        os << buf;
    }
    const MeshDomain& d = surface.domain;
    auto id_at = [&](int i, int j) { return d.index[static_cast<size_t>(j) * d.nx + i]; };
    for (int j = 0; j + 1 < d.ny; ++j)
        for (int i = 0; i + 1 < d.nx; ++i) {
            int a = id_at(i, j), b = id_at(i + 1, j), c = id_at(i + 1, j + 1), e = id_at(i, j + 1);
            if (a < 0 || b < 0 || c < 0 || e < 0) continue;
            std::snprintf(buf, sizeof(buf), "f %d %d %d %d\n", a + 1, b + 1, c + 1, e + 1);
            os << buf;
        }
}

void export_csv(const std::vector<std::vector<Complex>>& polylines, std::ostream& os) {
    char buf[96];
    bool first = true;
    for (const auto& line : polylines) {
        if (!first) os << "\n";
        first = false;
        for (Complex z : line) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", z.real(), z.imag());
            os << buf;
        }
    }
}

}  // namespace maxface
