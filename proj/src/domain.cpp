#include "wpharm/domain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace wpharm {

namespace {

double tri_area(const std::array<double, 3>& a, const std::array<double, 3>& b,
                const std::array<double, 3>& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

double corner_cot(const std::array<double, 3>& O, const std::array<double, 3>& A,
                  const std::array<double, 3>& B) {
    const double ux = A[0] - O[0], uy = A[1] - O[1];
    const double vx = B[0] - O[0], vy = B[1] - O[1];
    const double cross = std::fabs(ux * vy - uy * vx);
    const double dot = ux * vx + uy * vy;
    return dot / std::max(cross, 1e-300);
}

// Lawson flips to the Delaunay triangulation: afterwards every interior
// edge has nonnegative cotangent weight, so the graph Laplacian reproduces
// linear functions exactly.
void delaunay_flips(const std::vector<std::array<double, 3>>& verts,
                    std::vector<std::array<int, 4>>& cells) {
    for (int pass = 0; pass < 60; ++pass) {
        std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edge2tri;
        for (std::size_t t = 0; t < cells.size(); ++t)
            for (int k = 0; k < 3; ++k) {
                const int a = cells[t][k], b = cells[t][(k + 1) % 3];
                auto key = std::minmax(a, b);
                edge2tri[{key.first, key.second}].push_back(
                    {static_cast<int>(t), cells[t][(k + 2) % 3]});
            }
        std::vector<char> touched(cells.size(), 0);
        bool changed = false;
        for (const auto& [edge, tris] : edge2tri) {
            if (tris.size() != 2) continue;
            const auto [t1, c] = tris[0];
            const auto [t2, d] = tris[1];
            if (touched[t1] || touched[t2]) continue;
            const int a = edge.first, b = edge.second;
            const double cot_sum =
                corner_cot(verts[c], verts[a], verts[b]) +
                corner_cot(verts[d], verts[a], verts[b]);
            if (cot_sum >= -1e-12) continue;
            // flip (a,b) -> (c,d) when the quad is strictly convex
            const double a1 = tri_area(verts[c], verts[d], verts[b]);
            const double a2 = tri_area(verts[d], verts[c], verts[a]);
            if (std::fabs(a1) < 1e-16 || std::fabs(a2) < 1e-16) continue;
            if ((a1 > 0) != (a2 > 0)) continue;
            cells[t1] = {c, d, b, -1};
            cells[t2] = {d, c, a, -1};
            touched[t1] = touched[t2] = 1;
            changed = true;
        }
        if (!changed) break;
    }
}

} // namespace

double Mesh::total_weight(int v) const {
    double w = 0.0;
    for (const auto& nb : adj_[v]) w += nb.weight;
    return w;
}

double Mesh::triangle_area(int t) const {
    const auto& c = cells[t];
    return std::fabs(tri_area(vertices[c[0]], vertices[c[1]], vertices[c[2]]));
}

std::array<double, 3> Mesh::barycentric(int t, double x, double y) const {
    const auto& c = cells[t];
    const auto& A = vertices[c[0]];
    const auto& B = vertices[c[1]];
    const auto& C = vertices[c[2]];
    const double det = (B[0] - A[0]) * (C[1] - A[1]) - (C[0] - A[0]) * (B[1] - A[1]);
    const double l1 = ((B[0] - x) * (C[1] - y) - (C[0] - x) * (B[1] - y)) / det;
    const double l2 = ((C[0] - x) * (A[1] - y) - (A[0] - x) * (C[1] - y)) / det;
    return {l1, l2, 1.0 - l1 - l2};
}

int Mesh::locate(double x, double y) const {
    if (grid_n_ == 0) return -1;
    int gx = static_cast<int>((x + 1.0) / grid_cell_);
    int gy = static_cast<int>((y + 1.0) / grid_cell_);
    gx = std::clamp(gx, 0, grid_n_ - 1);
    gy = std::clamp(gy, 0, grid_n_ - 1);
    const double eps = -1e-10;
    for (int t : grid_[gy * grid_n_ + gx]) {
        const auto l = barycentric(t, x, y);
        if (l[0] >= eps && l[1] >= eps && l[2] >= eps) return t;
    }
    // rounding near cell borders: check the 8 surrounding cells
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const int cx = gx + dx, cy = gy + dy;
            if (cx < 0 || cy < 0 || cx >= grid_n_ || cy >= grid_n_) continue;
            for (int t : grid_[cy * grid_n_ + cx]) {
                const auto l = barycentric(t, x, y);
                if (l[0] >= eps && l[1] >= eps && l[2] >= eps) return t;
            }
        }
    return -1;
}

int Mesh::nearest_vertex(double x, double y) const {
    int best = 0;
    double bd = 1e300;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const double dx = vertices[i][0] - x, dy = vertices[i][1] - y;
        const double d = dx * dx + dy * dy;
        if (d < bd) {
            bd = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

std::array<double, 2> Mesh::triangle_gradient(
    int t, const std::vector<double>& f) const {
    const auto& c = cells[t];
    const auto& A = vertices[c[0]];
    const auto& B = vertices[c[1]];
    const auto& C = vertices[c[2]];
    const double det =
        (B[0] - A[0]) * (C[1] - A[1]) - (C[0] - A[0]) * (B[1] - A[1]);
    const double fa = f[c[0]], fb = f[c[1]], fc = f[c[2]];
    const double gx = ((fb - fa) * (C[1] - A[1]) - (fc - fa) * (B[1] - A[1])) / det;
    const double gy = ((fc - fa) * (B[0] - A[0]) - (fb - fa) * (C[0] - A[0])) / det;
    return {gx, gy};
}

std::vector<std::array<double, 2>> Mesh::vertex_gradients(
    const std::vector<double>& f) const {
    std::vector<std::array<double, 2>> g(vertices.size(), {0.0, 0.0});
    std::vector<double> wsum(vertices.size(), 0.0);
    for (std::size_t t = 0; t < cells.size(); ++t) {
        const double area = triangle_area(static_cast<int>(t));
        const auto gt = triangle_gradient(static_cast<int>(t), f);
        for (int k = 0; k < 3; ++k) {
            const int v = cells[t][k];
            g[v][0] += area * gt[0];
            g[v][1] += area * gt[1];
            wsum[v] += area;
        }
    }
    for (std::size_t v = 0; v < g.size(); ++v)
        if (wsum[v] > 0.0) {
            g[v][0] /= wsum[v];
            g[v][1] /= wsum[v];
        }
    return g;
}

double Mesh::triangle_disk_fraction(int t, std::array<double, 2> center,
                                    double r, int depth) const {
    const auto& c = cells[t];
    std::array<std::array<double, 2>, 3> P = {
        {{vertices[c[0]][0], vertices[c[0]][1]},
         {vertices[c[1]][0], vertices[c[1]][1]},
         {vertices[c[2]][0], vertices[c[2]][1]}}};
    const double r2 = r * r;
    std::function<double(const std::array<std::array<double, 2>, 3>&, int)> rec =
        [&](const std::array<std::array<double, 2>, 3>& tri, int d) -> double {
        int inside = 0;
        for (const auto& p : tri) {
            const double dx = p[0] - center[0], dy = p[1] - center[1];
            if (dx * dx + dy * dy <= r2) ++inside;
        }
        if (inside == 3 && d < depth) {
            // circle could still bulge in; cheap conservative check via
            // the farthest corner against r:
            // corners inside and triangle small => fully inside
        }
        if (inside == 3) return 1.0;
        if (d == 0) {
            // classify by centroid
            const double cx = (tri[0][0] + tri[1][0] + tri[2][0]) / 3.0;
            const double cy = (tri[0][1] + tri[1][1] + tri[2][1]) / 3.0;
            const double dx = cx - center[0], dy = cy - center[1];
            return (dx * dx + dy * dy <= r2) ? 1.0 : 0.0;
        }
        if (inside == 0) {
            // may still intersect near an edge; recurse only when the
            // triangle is close to the circle
            double dmin = 1e300;
            for (const auto& p : tri) {
                const double dx = p[0] - center[0], dy = p[1] - center[1];
                dmin = std::min(dmin, std::sqrt(dx * dx + dy * dy));
            }
            double diam = 0.0;
            for (int k = 0; k < 3; ++k) {
                const auto& a = tri[k];
                const auto& b = tri[(k + 1) % 3];
                diam = std::max(diam, std::hypot(a[0] - b[0], a[1] - b[1]));
            }
            if (dmin - diam > r) return 0.0;
        }
        const std::array<double, 2> m01 = {0.5 * (tri[0][0] + tri[1][0]),
                                           0.5 * (tri[0][1] + tri[1][1])};
        const std::array<double, 2> m12 = {0.5 * (tri[1][0] + tri[2][0]),
                                           0.5 * (tri[1][1] + tri[2][1])};
        const std::array<double, 2> m20 = {0.5 * (tri[2][0] + tri[0][0]),
                                           0.5 * (tri[2][1] + tri[0][1])};
        return 0.25 * (rec({tri[0], m01, m20}, d - 1) +
                       rec({m01, tri[1], m12}, d - 1) +
                       rec({m20, m12, tri[2]}, d - 1) +
                       rec({m01, m12, m20}, d - 1));
    };
    return rec(P, depth);
}

void Mesh::finalize() {
    adj_.assign(vertices.size(), {});
    for (const auto& e : edges) {
        adj_[e.a].push_back({e.b, e.w});
        adj_[e.b].push_back({e.a, e.w});
    }
    vertex_area.assign(vertices.size(), 0.0);
    if (dim == 2) {
        for (std::size_t t = 0; t < cells.size(); ++t) {
            const double a = triangle_area(static_cast<int>(t)) / 3.0;
            for (int k = 0; k < 3; ++k) vertex_area[cells[t][k]] += a;
        }
    } else {
        for (std::size_t t = 0; t < cells.size(); ++t) {
            const auto& c = cells[t];
            const auto& A = vertices[c[0]];
            const auto& B = vertices[c[1]];
            const auto& C = vertices[c[2]];
            const auto& D = vertices[c[3]];
            const double v =
                std::fabs((B[0] - A[0]) * ((C[1] - A[1]) * (D[2] - A[2]) -
                                           (C[2] - A[2]) * (D[1] - A[1])) -
                          (B[1] - A[1]) * ((C[0] - A[0]) * (D[2] - A[2]) -
                                           (C[2] - A[2]) * (D[0] - A[0])) +
                          (B[2] - A[2]) * ((C[0] - A[0]) * (D[1] - A[1]) -
                                           (C[1] - A[1]) * (D[0] - A[0]))) /
                6.0;
            for (int k = 0; k < 4; ++k) vertex_area[c[k]] += v / 4.0;
        }
    }
    if (!psi.empty())
        for (std::size_t v = 0; v < vertices.size(); ++v)
            vertex_area[v] *= std::exp(2.0 * psi[v]);

    // locator grid (2-D only)
    if (dim == 2) {
        grid_n_ = std::max(4, static_cast<int>(2.0 / std::max(h, 1e-3)));
        grid_cell_ = 2.0 / grid_n_;
        grid_.assign(static_cast<std::size_t>(grid_n_) * grid_n_, {});
        for (std::size_t t = 0; t < cells.size(); ++t) {
            double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
            for (int k = 0; k < 3; ++k) {
                const auto& p = vertices[cells[t][k]];
                xmin = std::min(xmin, p[0]);
                xmax = std::max(xmax, p[0]);
                ymin = std::min(ymin, p[1]);
                ymax = std::max(ymax, p[1]);
            }
            int gx0 = std::clamp(static_cast<int>((xmin + 1.0) / grid_cell_), 0,
                                 grid_n_ - 1);
            int gx1 = std::clamp(static_cast<int>((xmax + 1.0) / grid_cell_), 0,
                                 grid_n_ - 1);
            int gy0 = std::clamp(static_cast<int>((ymin + 1.0) / grid_cell_), 0,
                                 grid_n_ - 1);
            int gy1 = std::clamp(static_cast<int>((ymax + 1.0) / grid_cell_), 0,
                                 grid_n_ - 1);
            for (int gy = gy0; gy <= gy1; ++gy)
                for (int gx = gx0; gx <= gx1; ++gx)
                    grid_[gy * grid_n_ + gx].push_back(static_cast<int>(t));
        }
    }
}

Mesh build_disk_mesh(double h, const MetricSpec& metric) {
    if (!(h > 0.0) || !(h < 1.0))
        throw std::domain_error("build_disk_mesh: need 0 < h < 1");
    Mesh mesh;
    mesh.dim = 2;
    mesh.h = h;
    mesh.metric_c = metric.c2_bound;

    const int nr = std::max(1, static_cast<int>(std::lround(1.0 / h)));
    std::vector<int> ring_start(nr + 1, 0);
    std::vector<int> ring_size(nr + 1, 0);
    ring_size[0] = 1;
    mesh.vertices.push_back({0.0, 0.0, 0.0});
    for (int k = 1; k <= nr; ++k) {
        const double r = static_cast<double>(k) / nr;
        const int m = std::max(
            6, static_cast<int>(std::ceil(2.0 * M_PI * r / h)));
        ring_start[k] = static_cast<int>(mesh.vertices.size());
        ring_size[k] = m;
        for (int j = 0; j < m; ++j) {
            const double th = 2.0 * M_PI * j / m;
            mesh.vertices.push_back({r * std::cos(th), r * std::sin(th), 0.0});
        }
    }

    auto add_tri = [&](int a, int b, int c) {
        // keep counterclockwise orientation
        if (tri_area(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]) < 0.0)
            std::swap(b, c);
        mesh.cells.push_back({a, b, c, -1});
    };

    // center fan
    for (int j = 0; j < ring_size[1]; ++j)
        add_tri(0, ring_start[1] + j, ring_start[1] + (j + 1) % ring_size[1]);

    // stitch consecutive rings with a two-pointer walk over angles
    for (int k = 1; k < nr; ++k) {
        const int ma = ring_size[k], mb = ring_size[k + 1];
        const int sa = ring_start[k], sb = ring_start[k + 1];
        int i = 0, j = 0;
        while (i < ma || j < mb) {
            const double next_a = 2.0 * M_PI * (i + 1) / ma;
            const double next_b = 2.0 * M_PI * (j + 1) / mb;
            if (i < ma && (j >= mb || next_a <= next_b)) {
                add_tri(sa + i % ma, sa + (i + 1) % ma, sb + j % mb);
                ++i;
            } else {
                add_tri(sb + j % mb, sb + (j + 1) % mb, sa + i % ma);
                ++j;
            }
        }
    }

    delaunay_flips(mesh.vertices, mesh.cells);

    // cotangent weights (conformally invariant in two dimensions)
    std::map<std::pair<int, int>, double> wmap;
    for (const auto& c : mesh.cells) {
        for (int k = 0; k < 3; ++k) {
            const int a = c[k], b = c[(k + 1) % 3], o = c[(k + 2) % 3];
            auto key = std::minmax(a, b);
            wmap[{key.first, key.second}] +=
                0.5 * corner_cot(mesh.vertices[o], mesh.vertices[a],
                                 mesh.vertices[b]);
        }
    }
    for (auto& [key, w] : wmap) {
        if (w < 0.0) {
            w = 0.0;
            ++mesh.clamped_edges;
        }
        mesh.edges.push_back({key.first, key.second, w});
    }

    mesh.boundary.assign(mesh.vertices.size(), 0);
    for (int j = 0; j < ring_size[nr]; ++j)
        mesh.boundary[ring_start[nr] + j] = 1;

    if (!metric.euclidean()) {
        mesh.psi.resize(mesh.vertices.size());
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            mesh.psi[v] = metric.psi(mesh.vertices[v][0], mesh.vertices[v][1]);
    }
    mesh.finalize();
    return mesh;
}

Mesh build_ball_mesh(double h, const MetricSpec& metric) {
    if (!(h > 0.0) || !(h < 1.0))
        throw std::domain_error("build_ball_mesh: need 0 < h < 1");
    Mesh mesh;
    mesh.dim = 3;
    mesh.h = h;
    mesh.metric_c = metric.c2_bound;

    const int n = std::max(2, static_cast<int>(std::lround(1.0 / h)));
    const double step = 1.0 / n;
    const int side = 2 * n + 1;
    std::vector<int> id(static_cast<std::size_t>(side) * side * side, -1);
    auto gid = [&](int i, int j, int k) {
        return (static_cast<std::size_t>(i) * side + j) * side + k;
    };
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j)
            for (int k = 0; k < side; ++k) {
                const double x = (i - n) * step, y = (j - n) * step,
                             z = (k - n) * step;
                if (x * x + y * y + z * z <= 1.0 + 1e-12) {
                    id[gid(i, j, k)] = static_cast<int>(mesh.vertices.size());
                    mesh.vertices.push_back({x, y, z});
                }
            }
    // six tetrahedra per fully interior cube
    static const int tets[6][4][3] = {
        {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 1, 1}},
        {{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {1, 1, 1}},
        {{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 1, 1}},
        {{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {1, 1, 1}},
        {{0, 0, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}},
        {{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}}};
    for (int i = 0; i + 1 < side; ++i)
        for (int j = 0; j + 1 < side; ++j)
            for (int k = 0; k + 1 < side; ++k) {
                bool ok = true;
                for (int di = 0; di < 2 && ok; ++di)
                    for (int dj = 0; dj < 2 && ok; ++dj)
                        for (int dk = 0; dk < 2 && ok; ++dk)
                            ok = id[gid(i + di, j + dj, k + dk)] >= 0;
                if (!ok) continue;
                for (const auto& t : tets) {
                    std::array<int, 4> c{};
                    for (int v = 0; v < 4; ++v)
                        c[v] = id[gid(i + t[v][0], j + t[v][1], k + t[v][2])];
                    mesh.cells.push_back(c);
                }
            }

    // linear element stiffness, accumulated per edge
    std::map<std::pair<int, int>, double> wmap;
    std::map<std::array<int, 3>, int> face_count;
    for (const auto& c : mesh.cells) {
        const auto& A = mesh.vertices[c[0]];
        const auto& B = mesh.vertices[c[1]];
        const auto& C = mesh.vertices[c[2]];
        const auto& D = mesh.vertices[c[3]];
        const double M[3][3] = {{B[0] - A[0], B[1] - A[1], B[2] - A[2]},
                                {C[0] - A[0], C[1] - A[1], C[2] - A[2]},
                                {D[0] - A[0], D[1] - A[1], D[2] - A[2]}};
        const double det = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                           M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                           M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
        const double vol = std::fabs(det) / 6.0;
        // gradients of the barycentric functions
        double inv[3][3];
        const double invdet = 1.0 / det;
        inv[0][0] = (M[1][1] * M[2][2] - M[1][2] * M[2][1]) * invdet;
        inv[0][1] = (M[0][2] * M[2][1] - M[0][1] * M[2][2]) * invdet;
        inv[0][2] = (M[0][1] * M[1][2] - M[0][2] * M[1][1]) * invdet;
        inv[1][0] = (M[1][2] * M[2][0] - M[1][0] * M[2][2]) * invdet;
        inv[1][1] = (M[0][0] * M[2][2] - M[0][2] * M[2][0]) * invdet;
        inv[1][2] = (M[0][2] * M[1][0] - M[0][0] * M[1][2]) * invdet;
        inv[2][0] = (M[1][0] * M[2][1] - M[1][1] * M[2][0]) * invdet;
        inv[2][1] = (M[0][1] * M[2][0] - M[0][0] * M[2][1]) * invdet;
        inv[2][2] = (M[0][0] * M[1][1] - M[0][1] * M[1][0]) * invdet;
        double grads[4][3];
        for (int r = 0; r < 3; ++r) {
            grads[r + 1][0] = inv[0][r];
            grads[r + 1][1] = inv[1][r];
            grads[r + 1][2] = inv[2][r];
        }
        for (int d = 0; d < 3; ++d)
            grads[0][d] = -grads[1][d] - grads[2][d] - grads[3][d];
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                const double kab = vol * (grads[a][0] * grads[b][0] +
                                          grads[a][1] * grads[b][1] +
                                          grads[a][2] * grads[b][2]);
                auto key = std::minmax(c[a], c[b]);
                wmap[{key.first, key.second}] -= kab;
            }
        for (int f = 0; f < 4; ++f) {
            std::array<int, 3> face{};
            int idx = 0;
            for (int v = 0; v < 4; ++v)
                if (v != f) face[idx++] = c[v];
            std::sort(face.begin(), face.end());
            ++face_count[face];
        }
    }
    for (auto& [key, w] : wmap) {
        if (w < 0.0) {
            w = 0.0;
            ++mesh.clamped_edges;
        }
        mesh.edges.push_back({key.first, key.second, w});
    }
    mesh.boundary.assign(mesh.vertices.size(), 0);
    for (const auto& [face, cnt] : face_count)
        if (cnt == 1)
            for (int v : face) mesh.boundary[v] = 1;
    // grid vertices that ended up in no tetrahedron are boundary-ish too
    std::vector<char> used(mesh.vertices.size(), 0);
    for (const auto& c : mesh.cells)
        for (int v = 0; v < 4; ++v) used[c[v]] = 1;
    for (std::size_t v = 0; v < used.size(); ++v)
        if (!used[v]) mesh.boundary[v] = 1;

    if (!metric.euclidean()) {
        mesh.psi.resize(mesh.vertices.size());
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            mesh.psi[v] = metric.psi(mesh.vertices[v][0], mesh.vertices[v][1]);
    }
    mesh.finalize();
    return mesh;
}

CircleTrace circle_trace_at(const Mesh& mesh, std::array<double, 2> center,
                            double r, int samples) {
    if (mesh.dim != 2)
        throw std::domain_error("circle_trace: two-dimensional meshes only");
    if (!(r > 0.0))
        throw std::domain_error("circle_trace: radius must be positive");
    const double cr = std::hypot(center[0], center[1]);
    if (cr + r > 1.0 + 1e-9)
        throw std::domain_error("circle_trace: circle leaves the mesh");
    CircleTrace out;
    out.radius = r;
    out.center = center;
    out.samples = samples;
    out.stencil_vertex.resize(samples);
    out.stencil_weight.resize(samples);
    out.measure_factor.assign(samples, 1.0);
    for (int k = 0; k < samples; ++k) {
        const double th = 2.0 * M_PI * k / samples;
        const double x = center[0] + r * std::cos(th);
        const double y = center[1] + r * std::sin(th);
        const int t = mesh.locate(x, y);
        if (t >= 0) {
            const auto l = mesh.barycentric(t, x, y);
            out.stencil_vertex[k] = {mesh.cells[t][0], mesh.cells[t][1],
                                     mesh.cells[t][2]};
            out.stencil_weight[k] = l;
        } else {
            const int v = mesh.nearest_vertex(x, y);
            out.stencil_vertex[k] = {v, v, v};
            out.stencil_weight[k] = {1.0, 0.0, 0.0};
        }
        if (!mesh.psi.empty()) {
            const auto& sv = out.stencil_vertex[k];
            const auto& sw = out.stencil_weight[k];
            const double p = sw[0] * mesh.psi[sv[0]] + sw[1] * mesh.psi[sv[1]] +
                             sw[2] * mesh.psi[sv[2]];
            out.measure_factor[k] = std::exp(p);
        }
    }
    return out;
}

CircleTrace circle_trace(const Mesh& mesh, double r, int samples) {
    return circle_trace_at(mesh, {0.0, 0.0}, r, samples);
}

double trace_value(const CircleTrace& trace, const std::vector<double>& f,
                   int k) {
    const auto& sv = trace.stencil_vertex[k];
    const auto& sw = trace.stencil_weight[k];
    return sw[0] * f[sv[0]] + sw[1] * f[sv[1]] + sw[2] * f[sv[2]];
}

double integrate_circle(const CircleTrace& trace,
                        const std::vector<double>& values) {
    if (static_cast<int>(values.size()) != trace.samples)
        throw std::domain_error("integrate_circle: value count mismatch");
    double mean = 0.0;
    for (int k = 0; k < trace.samples; ++k)
        mean += values[k] * trace.measure_factor[k];
    mean /= trace.samples;
    return mean * 2.0 * M_PI * trace.radius;
}

double scalar_dirichlet_energy(const Mesh& mesh, const std::vector<double>& f) {
    double e = 0.0;
    for (const auto& edge : mesh.edges) {
        const double d = f[edge.a] - f[edge.b];
        e += edge.w * d * d;
    }
    return e;
}

std::vector<double> scalar_harmonic(const Mesh& mesh,
                                    const std::vector<double>& boundary_values,
                                    double tol, int max_iter) {
    const std::size_t n = mesh.n_vertices();
    std::vector<double> x(n, 0.0);
    std::vector<int> interior;
    for (std::size_t v = 0; v < n; ++v) {
        if (mesh.boundary[v])
            x[v] = boundary_values[v];
        else
            interior.push_back(static_cast<int>(v));
    }
    const std::size_t m = interior.size();
    std::vector<int> pos(n, -1);
    for (std::size_t i = 0; i < m; ++i) pos[interior[i]] = static_cast<int>(i);

    std::vector<double> diag(m, 0.0), b(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const int v = interior[i];
        for (const auto& nb : mesh.neighbors(v)) {
            diag[i] += nb.weight;
            if (mesh.boundary[nb.vertex])
                b[i] += nb.weight * boundary_values[nb.vertex];
        }
    }
    auto apply = [&](const std::vector<double>& u, std::vector<double>& out) {
        for (std::size_t i = 0; i < m; ++i) {
            const int v = interior[i];
            double acc = diag[i] * u[i];
            for (const auto& nb : mesh.neighbors(v))
                if (!mesh.boundary[nb.vertex])
                    acc -= nb.weight * u[pos[nb.vertex]];
            out[i] = acc;
        }
    };

    std::vector<double> u(m, 0.0), r(m), z(m), p(m), Ap(m);
    apply(u, Ap);
    for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - Ap[i];
    double bnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) bnorm += b[i] * b[i];
    bnorm = std::sqrt(std::max(bnorm, 1e-300));
    for (std::size_t i = 0; i < m; ++i)
        z[i] = r[i] / std::max(diag[i], 1e-300);
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < m; ++i) rz += r[i] * z[i];
    for (int it = 0; it < max_iter; ++it) {
        double rn = 0.0;
        for (std::size_t i = 0; i < m; ++i) rn += r[i] * r[i];
        if (std::sqrt(rn) <= tol * bnorm) break;
        apply(p, Ap);
        double pAp = 0.0;
        for (std::size_t i = 0; i < m; ++i) pAp += p[i] * Ap[i];
        const double alpha = rz / std::max(pAp, 1e-300);
        for (std::size_t i = 0; i < m; ++i) {
            u[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        for (std::size_t i = 0; i < m; ++i)
            z[i] = r[i] / std::max(diag[i], 1e-300);
        double rz_new = 0.0;
        for (std::size_t i = 0; i < m; ++i) rz_new += r[i] * z[i];
        const double beta = rz_new / std::max(rz, 1e-300);
        rz = rz_new;
        for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
    }
    for (std::size_t i = 0; i < m; ++i) x[interior[i]] = u[i];
    return x;
}

} // namespace wpharm
