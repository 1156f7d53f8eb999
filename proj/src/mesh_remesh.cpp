#include "cflow/tri_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace cflow {

namespace {

struct Work {
    std::vector<Vector3> pos, normal;
    std::vector<Eigen::Matrix3d> shape;  // ambient shape operator
    std::vector<Face> faces;
    std::vector<char> face_alive;

    double normal_curvature(int v, const Vector3 &dir) const { return dir.dot(shape[v] * dir); }

    // Edge midpoint lifted onto the osculating surface.
    Vector3 curved_midpoint(int a, int b) const
    {
        Vector3 e = pos[b] - pos[a];
        const double L = e.norm();
        e /= L;
        const double k = 0.5 * (normal_curvature(a, e) + normal_curvature(b, e));
        Vector3 n = (normal[a] + normal[b]).normalized();
        return 0.5 * (pos[a] + pos[b]) + L * L / 8.0 * k * n;
    }

    int add_vertex(const Vector3 &p, int a, int b)
    {
        pos.push_back(p);
        normal.push_back((normal[a] + normal[b]).normalized());
        shape.push_back(0.5 * (shape[a] + shape[b]));
        return int(pos.size()) - 1;
    }

    // Directed edge -> face index.
    std::map<std::pair<int, int>, int> half_edges() const
    {
        std::map<std::pair<int, int>, int> h;
        for (int f = 0; f < int(faces.size()); ++f)
            if (face_alive[f])
                for (int k = 0; k < 3; ++k) h[{faces[f][k], faces[f][(k + 1) % 3]}] = f;
        return h;
    }

    Vector3 face_normal(const Face &f) const
    {
        return (pos[f[1]] - pos[f[0]]).cross(pos[f[2]] - pos[f[0]]);
    }

    double mean_edge() const
    {
        double total = 0.0;
        int count = 0;
        for (const auto &[e, f] : half_edges()) {
            total += (pos[e.first] - pos[e.second]).norm();
            ++count;
        }
        return total / count;
    }
};

int opposite(const Face &f, int a, int b)
{
    for (int v : f)
        if (v != a && v != b) return v;
    return -1;
}

double quality(const Vector3 &a, const Vector3 &b, const Vector3 &c)
{
    const double area = 0.5 * (b - a).cross(c - a).norm();
    const double l2 = (b - a).squaredNorm() + (c - b).squaredNorm() + (a - c).squaredNorm();
    return l2 > 0.0 ? 4.0 * std::sqrt(3.0) * area / l2 : 0.0;
}

bool split_pass(Work &w, double target)
{
    auto half = w.half_edges();
    std::vector<std::pair<double, std::pair<int, int>>> edges;
    for (const auto &[e, f] : half)
        if (e.first < e.second) {
            double L = (w.pos[e.first] - w.pos[e.second]).norm();
            if (L > 4.0 / 3.0 * target) edges.push_back({L, e});
        }
    std::sort(edges.begin(), edges.end(), [](const auto &x, const auto &y) { return x.first > y.first; });
    std::vector<char> touched(w.faces.size(), 0);
    bool changed = false;
    for (const auto &[L, e] : edges) {
        const auto [a, b] = e;
        const int f1 = half.at({a, b}), f2 = half.at({b, a});
        if (touched[f1] || touched[f2]) continue;
        const int c = opposite(w.faces[f1], a, b), d = opposite(w.faces[f2], a, b);
        const int m = w.add_vertex(w.curved_midpoint(a, b), a, b);
        w.faces[f1] = {a, m, c};
        w.faces[f2] = {b, m, d};
        w.faces.push_back({m, b, c});
        w.faces.push_back({m, a, d});
        w.face_alive.push_back(1);
        w.face_alive.push_back(1);
        touched[f1] = touched[f2] = 1;
        changed = true;
    }
    return changed;
}

bool collapse_pass(Work &w, double target)
{
    auto half = w.half_edges();
    std::vector<std::set<int>> ring(w.pos.size());
    std::vector<std::vector<int>> vf(w.pos.size());
    for (const auto &[e, f] : half) ring[e.first].insert(e.second);
    for (int f = 0; f < int(w.faces.size()); ++f)
        if (w.face_alive[f])
            for (int v : w.faces[f]) vf[v].push_back(f);

    std::vector<std::pair<double, std::pair<int, int>>> edges;
    for (const auto &[e, f] : half)
        if (e.first < e.second) {
            double L = (w.pos[e.first] - w.pos[e.second]).norm();
            if (L < 0.8 * target) edges.push_back({L, e});
        }
    std::sort(edges.begin(), edges.end());
    std::vector<char> locked(w.pos.size(), 0);
    bool changed = false;
    for (const auto &[L, e] : edges) {
        const auto [a, b] = e;
        if (locked[a] || locked[b]) continue;
        const int f1 = half.at({a, b}), f2 = half.at({b, a});
        const int c = opposite(w.faces[f1], a, b), d = opposite(w.faces[f2], a, b);
        std::vector<int> common;
        std::set_intersection(ring[a].begin(), ring[a].end(), ring[b].begin(), ring[b].end(),
                              std::back_inserter(common));
        if (common.size() != 2 || ring[a].size() <= 3 || ring[b].size() <= 3 || ring[c].size() <= 3 ||
            ring[d].size() <= 3)
            continue;
        const Vector3 m = w.curved_midpoint(a, b);
        bool ok = true;
        for (int v : {a, b})
            for (int f : vf[v]) {
                if (f == f1 || f == f2) continue;
                Face nf = w.faces[f];
                for (int &x : nf)
                    if (x == b) x = a;
                const Vector3 before = w.face_normal(w.faces[f]);
                Vector3 saved = w.pos[a];
                w.pos[a] = m;
                const Vector3 after = w.face_normal(nf);
                for (int x : nf)
                    if (x != a && (w.pos[x] - m).norm() > 4.0 / 3.0 * target) ok = false;
                w.pos[a] = saved;
                if (after.dot(before) <= 0.5 * before.norm() * after.norm()) ok = false;
            }
        if (!ok) continue;
        w.pos[a] = m;
        w.normal[a] = (w.normal[a] + w.normal[b]).normalized();
        w.shape[a] = 0.5 * (w.shape[a] + w.shape[b]);
        w.face_alive[f1] = w.face_alive[f2] = 0;
        for (int f : vf[b])
            for (int &x : w.faces[f])
                if (x == b) x = a;
        for (int v : ring[a]) locked[v] = 1;
        for (int v : ring[b]) locked[v] = 1;
        locked[a] = locked[b] = 1;
        changed = true;
    }
    return changed;
}

void flip_pass(Work &w)
{
    auto half = w.half_edges();
    std::set<std::pair<int, int>> undirected;
    for (const auto &[e, f] : half) undirected.insert({std::min(e.first, e.second), std::max(e.first, e.second)});
    std::vector<char> touched(w.faces.size(), 0);
    for (const auto &[e, f1] : half) {
        const auto [a, b] = e;
        if (a > b) continue;
        const int f2 = half.at({b, a});
        if (touched[f1] || touched[f2]) continue;
        const int c = opposite(w.faces[f1], a, b), d = opposite(w.faces[f2], a, b);
        if (undirected.count({std::min(c, d), std::max(c, d)})) continue;
        // Delaunay test on the opposite angles.
        auto angle = [&](int apex, int p, int q) {
            Vector3 u = w.pos[p] - w.pos[apex], v = w.pos[q] - w.pos[apex];
            return std::atan2(u.cross(v).norm(), u.dot(v));
        };
        if (angle(c, a, b) + angle(d, a, b) <= std::numbers::pi + 1e-9) continue;
        // Faces a,b,c and b,a,d become a,d,c and d,b,c.
        Face g1{a, d, c}, g2{d, b, c};
        const double q_old = std::min(quality(w.pos[a], w.pos[b], w.pos[c]), quality(w.pos[b], w.pos[a], w.pos[d]));
        const double q_new = std::min(quality(w.pos[a], w.pos[d], w.pos[c]), quality(w.pos[d], w.pos[b], w.pos[c]));
        const Vector3 n_old = w.face_normal(w.faces[f1]).normalized() + w.face_normal(w.faces[f2]).normalized();
        if (q_new <= q_old || w.face_normal(g1).dot(n_old) <= 0.0 || w.face_normal(g2).dot(n_old) <= 0.0) continue;
        w.faces[f1] = g1;
        w.faces[f2] = g2;
        undirected.erase({a, b});
        undirected.insert({std::min(c, d), std::max(c, d)});
        touched[f1] = touched[f2] = 1;
    }
}

// Tangential relaxation toward the 1-ring centroid, lifted back onto the
// osculating quadric of each vertex.
void relax(Work &w)
{
    std::vector<std::set<int>> ring(w.pos.size());
    for (int f = 0; f < int(w.faces.size()); ++f)
        if (w.face_alive[f])
            for (int k = 0; k < 3; ++k) ring[w.faces[f][k]].insert(w.faces[f][(k + 1) % 3]);
    std::vector<Vector3> next(w.pos);
    for (size_t v = 0; v < w.pos.size(); ++v) {
        if (ring[v].empty()) continue;
        Vector3 c = Vector3::Zero();
        for (int u : ring[v]) c += w.pos[u];
        c /= double(ring[v].size());
        const Vector3 &n = w.normal[v];
        Vector3 t = 0.5 * (c - w.pos[v]);
        t -= t.dot(n) * n;
        next[v] = w.pos[v] + t - 0.5 * t.dot(w.shape[v] * t) * n;
    }
    w.pos = next;
}

}  // namespace

std::unique_ptr<Surface> TriMesh::remeshed() const
{
    Work w;
    w.pos = m_vertices;
    w.faces = m_faces;
    w.face_alive.assign(m_faces.size(), 1);
    for (int i = 0; i < size(); ++i) {
        w.normal.push_back(Vector3(m_points[i].normal));
        const auto &F = m_frame[i];
        w.shape.push_back(F * m_points[i].principal.asDiagonal() * F.transpose());
    }
    const double target = w.mean_edge();
    for (int round = 0; round < 4; ++round) {
        bool changed = split_pass(w, target);
        changed = collapse_pass(w, target) || changed;
        flip_pass(w);
        relax(w);
        if (!changed && round > 0) break;
    }
    flip_pass(w);

    // Compact.
    std::vector<int> used(w.pos.size(), -1);
    std::vector<Vector3> verts;
    std::vector<Face> faces;
    for (int f = 0; f < int(w.faces.size()); ++f) {
        if (!w.face_alive[f]) continue;
        Face g = w.faces[f];
        for (int &x : g) {
            if (used[x] < 0) {
                used[x] = int(verts.size());
                verts.push_back(w.pos[x]);
            }
            x = used[x];
        }
        faces.push_back(g);
    }
    return std::make_unique<TriMesh>(std::move(verts), std::move(faces), m_genus, m_policy);
}

}  // namespace cflow
