#include "cflow/tri_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace cflow {

namespace {

using Frame = Eigen::Matrix<double, 3, 2>;

Vector3 any_perpendicular(const Vector3 &n)
{
    Vector3 a = std::abs(n.x()) < 0.9 ? Vector3::UnitX() : Vector3::UnitY();
    return (a - a.dot(n) * n).normalized();
}

int fit_columns(int order)
{
    return (order + 1) * (order + 2) / 2 - 1;
}

// Monomials u^a v^b with 1 <= a + b <= order, ordered by degree.
void monomials(double u, double v, int order, double *out)
{
    double pu[5] = {1.0, u, u * u, u * u * u, u * u * u * u};
    double pv[5] = {1.0, v, v * v, v * v * v, v * v * v * v};
    int k = 0;
    for (int deg = 1; deg <= order; ++deg)
        for (int a = deg; a >= 0; --a) out[k++] = pu[a] * pv[deg - a];
}

double face_quality(const Vector3 &a, const Vector3 &b, const Vector3 &c)
{
    const double area = 0.5 * (b - a).cross(c - a).norm();
    const double l2 = (b - a).squaredNorm() + (c - b).squaredNorm() + (a - c).squaredNorm();
    return l2 > 0.0 ? 4.0 * std::sqrt(3.0) * area / l2 : 0.0;
}

// Inverse square root of a symmetric positive definite 2x2 matrix.
Eigen::Matrix2d inv_sqrt(const Eigen::Matrix2d &G)
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(G);
    return es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

double solid_angle(const Vector3 &p, const Vector3 &a0, const Vector3 &b0, const Vector3 &c0)
{
    Vector3 a = a0 - p, b = b0 - p, c = c0 - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    return 2.0 * std::atan2(num, den);
}

}  // namespace

double point_triangle_distance(const Vector3 &p, const Vector3 &a, const Vector3 &b, const Vector3 &c)
{
    // Closest point by Voronoi regions of the triangle.
    const Vector3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();
    const Vector3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return bp.norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + d1 / (d1 - d3) * ab)).norm();
    const Vector3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return cp.norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + d2 / (d2 - d6) * ac)).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0)
        return (p - (b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b))).norm();
    const double denom = 1.0 / (va + vb + vc);
    return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

////////////////////////////////////////////////////////////////////////////////
// Minimal enclosing ball
////////////////////////////////////////////////////////////////////////////////
namespace {

struct Ball {
    Vector3 c = Vector3::Zero();
    double r2 = -1.0;
    bool contains(const Vector3 &p) const { return (p - c).squaredNorm() <= r2 * (1.0 + 1e-12) + 1e-300; }
};

Ball ball2(const Vector3 &a, const Vector3 &b)
{
    Ball B;
    B.c = 0.5 * (a + b);
    B.r2 = (a - B.c).squaredNorm();
    return B;
}

Ball ball3(const Vector3 &a, const Vector3 &b, const Vector3 &c)
{
    const Vector3 u = b - a, v = c - a, w = u.cross(v);
    const double d = 2.0 * w.squaredNorm();
    if (d < 1e-300) {
        Ball best = ball2(a, b);
        for (Ball cand : {ball2(a, c), ball2(b, c)})
            if (cand.r2 > best.r2) best = cand;
        return best;
    }
    Ball B;
    B.c = a + (u.squaredNorm() * v.cross(w) + v.squaredNorm() * w.cross(u)) / d;
    B.r2 = (a - B.c).squaredNorm();
    return B;
}

Ball ball4(const Vector3 &a, const Vector3 &b, const Vector3 &c, const Vector3 &e)
{
    Eigen::Matrix3d M;
    M.row(0) = (b - a).transpose();
    M.row(1) = (c - a).transpose();
    M.row(2) = (e - a).transpose();
    Vector3 rhs(0.5 * (b - a).squaredNorm(), 0.5 * (c - a).squaredNorm(), 0.5 * (e - a).squaredNorm());
    const double det = M.determinant();
    const double scale = (b - a).norm() * (c - a).norm() * (e - a).norm();
    if (std::abs(det) < 1e-12 * scale) {
        Ball best;
        for (Ball cand : {ball3(a, b, c), ball3(a, b, e), ball3(a, c, e), ball3(b, c, e)})
            if (cand.contains(a) && cand.contains(b) && cand.contains(c) && cand.contains(e) &&
                (best.r2 < 0.0 || cand.r2 < best.r2))
                best = cand;
        return best.r2 >= 0.0 ? best : ball3(a, b, c);
    }
    Ball B;
    B.c = a + M.partialPivLu().solve(rhs);
    B.r2 = (a - B.c).squaredNorm();
    return B;
}

}  // namespace

std::pair<Vector3, double> min_enclosing_ball(std::vector<Vector3> P, std::uint64_t seed)
{
    if (P.empty()) throw DegenerateInput("empty point set");
    std::mt19937_64 rng(seed);
    std::shuffle(P.begin(), P.end(), rng);
    Ball B;
    B.c = P[0];
    B.r2 = 0.0;
    for (size_t i = 1; i < P.size(); ++i) {
        if (B.contains(P[i])) continue;
        B.c = P[i];
        B.r2 = 0.0;
        for (size_t j = 0; j < i; ++j) {
            if (B.contains(P[j])) continue;
            B = ball2(P[i], P[j]);
            for (size_t k = 0; k < j; ++k) {
                if (B.contains(P[k])) continue;
                B = ball3(P[i], P[j], P[k]);
                for (size_t l = 0; l < k; ++l)
                    if (!B.contains(P[l])) B = ball4(P[i], P[j], P[k], P[l]);
            }
        }
    }
    return {B.c, std::sqrt(B.r2)};
}

////////////////////////////////////////////////////////////////////////////////
// TriMesh
////////////////////////////////////////////////////////////////////////////////
TriMesh::TriMesh(std::vector<Vector3> vertices, std::vector<Face> faces, int genus, MeshRemeshPolicy policy)
    : m_vertices(std::move(vertices)), m_faces(std::move(faces)), m_genus(genus), m_policy(policy)
{
    if (m_policy.fit_order < 2 || m_policy.fit_order > 4) throw ConfigError("fit_order must be 2, 3 or 4");
    build_topology();
    double vol = 0.0;
    for (const Face &f : m_faces)
        vol += m_vertices[f[0]].dot(m_vertices[f[1]].cross(m_vertices[f[2]])) / 6.0;
    if (vol < 0.0) {
        for (Face &f : m_faces) std::swap(f[1], f[2]);
        build_topology();
    }
    build_geometry();
}

// Same connectivity as `parent`, new positions.
TriMesh::TriMesh(std::vector<Vector3> vertices, const TriMesh &parent)
    : m_vertices(std::move(vertices)), m_faces(parent.m_faces), m_genus(parent.m_genus), m_policy(parent.m_policy),
      m_topo(parent.m_topo)
{
    build_geometry();
}

void TriMesh::build_geometry()
{
    const int V = int(m_vertices.size());
    m_vertex_area.assign(V, 0.0);
    m_area_normal.assign(V, Vector3::Zero());
    for (const Face &f : m_faces) {
        Vector3 w = (m_vertices[f[1]] - m_vertices[f[0]]).cross(m_vertices[f[2]] - m_vertices[f[0]]);
        if (!w.allFinite() || w.norm() == 0.0) throw DegenerateInput("collapsed mesh face");
        for (int k = 0; k < 3; ++k) {
            m_vertex_area[f[k]] += w.norm() / 6.0;
            m_area_normal[f[k]] += w;
        }
    }
    m_stencil.assign(V, 0.0);
    double total = 0.0;
    for (int i = 0; i < V; ++i)
        for (int j : m_topo->ring1[i]) {
            double l = (m_vertices[j] - m_vertices[i]).norm();
            m_stencil[i] = std::max(m_stencil[i], 2.0 * l);
            total += l;
        }
    m_mean_edge = total / (2.0 * m_topo->edges);
    m_points.clear();
    m_points.reserve(V);
    m_frame.resize(V);
    for (int i = 0; i < V; ++i) fit_vertex(i);
}

void TriMesh::build_topology()
{
    const int V = int(m_vertices.size());
    std::map<std::pair<int, int>, int> half;
    for (int f = 0; f < int(m_faces.size()); ++f)
        for (int k = 0; k < 3; ++k) {
            int a = m_faces[f][k], b = m_faces[f][(k + 1) % 3];
            if (a < 0 || a >= V || b < 0 || b >= V || a == b) throw DegenerateInput("invalid face index");
            if (!half.emplace(std::make_pair(a, b), f).second)
                throw DegenerateInput("non-manifold or inconsistently oriented mesh (edge " + std::to_string(a) +
                                      "-" + std::to_string(b) + ")");
        }
    for (const auto &[e, f] : half)
        if (!half.count({e.second, e.first}))
            throw DegenerateInput("open mesh: edge " + std::to_string(e.first) + "-" + std::to_string(e.second) +
                                  " has one face");
    const int E = int(half.size()) / 2, F = int(m_faces.size());
    if (V - E + F != 2 - 2 * m_genus)
        throw DegenerateInput("Euler characteristic " + std::to_string(V - E + F) + " does not match genus " +
                              std::to_string(m_genus));

    auto topo = std::make_shared<Topology>();
    topo->edges = E;
    auto &ring1 = topo->ring1, &ring2 = topo->ring2;
    ring1.assign(V, {});
    for (const auto &[e, f] : half) ring1[e.first].push_back(e.second);
    for (auto &r : ring1) {
        if (r.empty()) throw DegenerateInput("isolated vertex");
        std::sort(r.begin(), r.end());
    }
    ring2.assign(V, {});
    for (int i = 0; i < V; ++i) {
        std::set<int> s(ring1[i].begin(), ring1[i].end());
        for (int j : ring1[i]) s.insert(ring1[j].begin(), ring1[j].end());
        s.erase(i);
        ring2[i].assign(s.begin(), s.end());
    }
    m_topo = std::move(topo);
}

void TriMesh::fit_vertex(int i)
{
    const Vector3 &p = m_vertices[i];
    const std::vector<int> &nb = m_topo->ring2[i];
    int order = m_policy.fit_order;
    while (order > 2 && int(nb.size()) < fit_columns(order) + 1) --order;
    const int cols = fit_columns(order);
    if (nb.size() > 64) throw DegenerateInput("vertex " + std::to_string(i) + " has more than 64 2-ring neighbors");
    if (int(nb.size()) < cols) throw DegenerateInput("vertex " + std::to_string(i) + " has too few neighbors for a fit");

    double h = 0.0;
    for (int j : nb) h += (m_vertices[j] - p).squaredNorm();
    h = std::sqrt(h / nb.size());

    Vector3 n0 = m_area_normal[i].normalized();
    double d = 0.0, e = 0.0, a = 0.0, b = 0.0, c = 0.0;
    Vector3 e1, e2;
    using FitMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 64, 14>;
    using FitVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 64, 1>;
    FitMatrix A(nb.size(), cols);
    FitVector w(nb.size());
    double row[14];
    for (int pass = 0; pass < 2; ++pass) {
        e1 = any_perpendicular(n0);
        e2 = n0.cross(e1);
        for (size_t r = 0; r < nb.size(); ++r) {
            Vector3 q = m_vertices[nb[r]] - p;
            monomials(q.dot(e1) / h, q.dot(e2) / h, order, row);
            for (int k = 0; k < cols; ++k) A(r, k) = row[k];
            w[r] = q.dot(n0) / h;
        }
        Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 14, 1> x = A.householderQr().solve(w);
        d = x[0], e = x[1], a = x[2] / h, b = x[3] / h, c = x[4] / h;
        if (pass == 0) n0 = (n0 - d * e1 - e * e2).normalized();
    }

    const double s = std::sqrt(1.0 + d * d + e * e);
    Vector3 normal = (n0 - d * e1 - e * e2) / s;
    Frame J;
    J.col(0) = e1 + d * n0;
    J.col(1) = e2 + e * n0;
    Eigen::Matrix2d G = J.transpose() * J;
    Eigen::Matrix2d II;
    II << 2.0 * a, b, b, 2.0 * c;
    II /= -s;
    Eigen::Matrix2d Gi = inv_sqrt(G);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Gi * II * Gi);
    Frame dirs = J * Gi * es.eigenvectors();
    dirs.col(0).normalize();
    dirs.col(1) = normal.cross(dirs.col(0));
    m_frame[i] = dirs;
    m_points.push_back(make_point(Vector(p), Vector(normal), Vector(es.eigenvalues())));
}

double TriMesh::spacing_min() const
{
    double h = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i)
        for (int j : m_topo->ring1[i]) h = std::min(h, (m_vertices[j] - m_vertices[i]).norm());
    return h;
}

double TriMesh::min_quality() const
{
    double q = 1.0;
    for (const Face &f : m_faces) q = std::min(q, face_quality(m_vertices[f[0]], m_vertices[f[1]], m_vertices[f[2]]));
    return q;
}

double TriMesh::gauss_integral() const
{
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += m_points[i].principal.prod() * m_vertex_area[i];
    return s;
}

GlobalGeometry TriMesh::global_geometry() const
{
    GlobalGeometry g;
    for (const Face &f : m_faces) {
        const Vector3 &a = m_vertices[f[0]], &b = m_vertices[f[1]], &c = m_vertices[f[2]];
        g.area += 0.5 * (b - a).cross(c - a).norm();
        g.volume += a.dot(b.cross(c)) / 6.0;
    }
    g.circumradius = min_enclosing_ball(m_vertices).second;
    double d2 = 0.0;
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j) d2 = std::max(d2, (m_vertices[i] - m_vertices[j]).squaredNorm());
    g.diameter = std::sqrt(d2);

    auto depth = [&](const Vector3 &q) {
        double wind = 0.0;
        for (const Face &f : m_faces) wind += solid_angle(q, m_vertices[f[0]], m_vertices[f[1]], m_vertices[f[2]]);
        if (wind < 2.0 * std::numbers::pi) return -1.0;
        double best = std::numeric_limits<double>::infinity();
        for (const Face &f : m_faces)
            best = std::min(best, point_triangle_distance(q, m_vertices[f[0]], m_vertices[f[1]], m_vertices[f[2]]));
        return best;
    };
    Vector3 lo = m_vertices[0], hi = m_vertices[0];
    for (const Vector3 &v : m_vertices) lo = lo.cwiseMin(v), hi = hi.cwiseMax(v);
    const int grid = 10;
    std::vector<std::pair<double, Vector3>> seeds;
    for (int ix = 1; ix < grid; ++ix)
        for (int iy = 1; iy < grid; ++iy)
            for (int iz = 1; iz < grid; ++iz) {
                Vector3 t(double(ix) / grid, double(iy) / grid, double(iz) / grid);
                Vector3 q = lo + (hi - lo).cwiseProduct(t);
                double dq = depth(q);
                if (dq > 0.0) seeds.emplace_back(dq, q);
            }
    std::sort(seeds.begin(), seeds.end(), [](const auto &u, const auto &v) { return u.first > v.first; });
    if (seeds.size() > 4) seeds.resize(4);
    const double scale = (hi - lo).maxCoeff();
    for (auto [best, q] : seeds) {
        double step = scale / grid;
        while (step > 1e-7 * scale) {
            bool moved = false;
            for (int axis = 0; axis < 3 && !moved; ++axis)
                for (double sgn : {1.0, -1.0}) {
                    Vector3 cand = q;
                    cand[axis] += sgn * step;
                    double dc = depth(cand);
                    if (dc > best) {
                        best = dc, q = cand, moved = true;
                        break;
                    }
                }
            if (!moved) step *= 0.5;
        }
        g.inradius = std::max(g.inradius, best);
    }
    return g;
}

double TriMesh::chord_extreme(int i, bool upper) const
{
    const Vector3 &x = m_vertices[i];
    const Vector3 nu = Vector3(m_points[i].normal);
    const double excl = 2.0 * m_stencil[i];
    double best = upper ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (int j = 0; j < size(); ++j) {
        Vector3 d = x - m_vertices[j];
        double d2 = d.squaredNorm();
        if (j == i || d2 < excl * excl) continue;
        double k = 2.0 * d.dot(nu) / d2;
        best = upper ? std::max(best, k) : std::min(best, k);
    }
    return best;
}

double TriMesh::inscribed_curvature(int i) const
{
    return std::max(chord_extreme(i, true), m_points.at(i).kappa.max());
}

double TriMesh::exscribed_curvature(int i) const
{
    return std::min(chord_extreme(i, false), m_points.at(i).kappa.min());
}

double TriMesh::curvature_gradient_norm(int i) const
{
    // Differences of the shape operator, expressed in the frame at i, fitted
    // linearly against the tangential offsets over the 1-ring.
    const Frame &T = m_frame[i];
    auto shape = [&](int j) {
        const Frame &F = m_frame[j];
        Eigen::Matrix3d S = F * m_points[j].principal.asDiagonal() * F.transpose();
        return Eigen::Matrix2d(T.transpose() * S * T);
    };
    const Eigen::Matrix2d Si = shape(i);
    const std::vector<int> &nb = m_topo->ring1[i];
    Eigen::MatrixXd D(nb.size(), 2), R(nb.size(), 3);
    for (size_t r = 0; r < nb.size(); ++r) {
        Vector3 q = m_vertices[nb[r]] - m_vertices[i];
        D.row(r) = (T.transpose() * q).transpose();
        Eigen::Matrix2d dS = shape(nb[r]) - Si;
        R.row(r) << dS(0, 0), dS(0, 1), dS(1, 1);
    }
    Eigen::MatrixXd grad = D.colPivHouseholderQr().solve(R);  // 2 x 3: rows = direction
    double s = 0.0;
    for (int k = 0; k < 2; ++k) s += grad(k, 0) * grad(k, 0) + 2.0 * grad(k, 1) * grad(k, 1) + grad(k, 2) * grad(k, 2);
    return std::sqrt(s);
}

FieldDerivatives TriMesh::field_derivatives(const Vector &u, int i) const
{
    if (u.size() != size()) throw DimensionMismatch("field size differs from node count");
    const Frame &T = m_frame[i];
    const std::vector<int> &nb = m_topo->ring2[i];
    Matrix A(nb.size(), 5);
    Vector rhs(nb.size());
    for (size_t r = 0; r < nb.size(); ++r) {
        Eigen::Vector2d x = T.transpose() * (m_vertices[nb[r]] - m_vertices[i]);
        A.row(r) << x[0], x[1], 0.5 * x[0] * x[0], x[0] * x[1], 0.5 * x[1] * x[1];
        rhs[r] = u[nb[r]] - u[i];
    }
    Vector c = A.colPivHouseholderQr().solve(rhs);
    FieldDerivatives fd;
    fd.gradient = c.head(2);
    fd.hessian.resize(2, 2);
    fd.hessian << c[2], c[3], c[3], c[4];
    return fd;
}

std::unique_ptr<Surface> TriMesh::displaced(const Vector &normal_displacement) const
{
    if (normal_displacement.size() != size()) throw DimensionMismatch("displacement size differs from node count");
    std::vector<Vector3> v(m_vertices);
    for (int i = 0; i < size(); ++i) v[i] += normal_displacement[i] * Vector3(m_points[i].normal);
    return std::unique_ptr<TriMesh>(new TriMesh(std::move(v), *this));
}

std::unique_ptr<Surface> TriMesh::scaled(double lambda) const
{
    std::vector<Vector3> v(m_vertices);
    for (auto &p : v) p *= lambda;
    return std::unique_ptr<TriMesh>(new TriMesh(std::move(v), *this));
}

bool TriMesh::needs_remesh() const
{
    for (int i = 0; i < size(); ++i)
        for (int j : m_topo->ring1[i]) {
            double ratio = (m_vertices[j] - m_vertices[i]).norm() / m_mean_edge;
            if (ratio < m_policy.min_ratio || ratio > m_policy.max_ratio) return true;
        }
    return min_quality() < m_policy.min_quality;
}

}  // namespace cflow
