#include "cflow/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace cflow {

std::vector<std::string> shape_catalog()
{
    return {"sphere", "ellipsoid", "capsule", "dumbbell", "torus", "obj"};
}

std::unique_ptr<ProfileSurface> profile_sphere(int n, double R, int segments, ProfileRemeshPolicy policy)
{
    if (!(R > 0.0)) throw ConfigError("sphere radius must be positive");
    std::vector<Vector2> nodes(segments + 1);
    for (int i = 0; i <= segments; ++i) {
        const double t = std::numbers::pi * i / segments;
        nodes[i] = {-R * std::cos(t), R * std::sin(t)};
    }
    return std::make_unique<ProfileSurface>(std::move(nodes), n, policy);
}

std::unique_ptr<ProfileSurface> profile_ellipsoid(int n, double axial, double radial, int segments,
                                                  ProfileRemeshPolicy policy)
{
    if (!(axial > 0.0 && radial > 0.0)) throw ConfigError("ellipsoid semi-axes must be positive");
    auto nodes = sample_meridian(
        [&](double t) { return Vector2(-axial * std::cos(t), radial * std::sin(t)); }, segments);
    return std::make_unique<ProfileSurface>(std::move(nodes), n, policy);
}

std::unique_ptr<TriMesh> icosphere(int level, double R, MeshRemeshPolicy policy)
{
    if (level < 0 || level > 7) throw ConfigError("icosphere level must lie in [0, 7]");
    if (!(R > 0.0)) throw ConfigError("sphere radius must be positive");
    const double t = 0.5 * (1.0 + std::sqrt(5.0));
    std::vector<Vector3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                              {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    std::vector<Face> f = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                           {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                           {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (auto &p : v) p.normalize();
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            return mid[key] = int(v.size()) - 1;
        };
        std::vector<Face> next;
        for (const Face &g : f) {
            int a = midpoint(g[0], g[1]), b = midpoint(g[1], g[2]), c = midpoint(g[2], g[0]);
            next.push_back({g[0], a, c});
            next.push_back({g[1], b, a});
            next.push_back({g[2], c, b});
            next.push_back({a, b, c});
        }
        f = std::move(next);
    }
    for (auto &p : v) p *= R;
    return std::make_unique<TriMesh>(std::move(v), std::move(f), 0, policy);
}

std::unique_ptr<TriMesh> mesh_ellipsoid(int level, double a, double b, double c, MeshRemeshPolicy policy)
{
    if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw ConfigError("ellipsoid semi-axes must be positive");
    auto s = icosphere(level, 1.0, policy);
    std::vector<Vector3> v = s->vertices();
    for (auto &p : v) p = p.cwiseProduct(Vector3(a, b, c));
    return std::make_unique<TriMesh>(std::move(v), s->faces(), 0, policy);
}

std::unique_ptr<TriMesh> mesh_torus(double R, double rho, int rings, int sides, MeshRemeshPolicy policy)
{
    if (!(rho > 0.0 && R > rho)) throw ConfigError("torus needs 0 < tube < radius");
    if (rings < 3 || sides < 3) throw ConfigError("torus needs at least 3 rings and sides");
    std::vector<Vector3> v;
    std::vector<Face> f;
    for (int i = 0; i < rings; ++i)
        for (int j = 0; j < sides; ++j) {
            const double u = 2.0 * std::numbers::pi * i / rings, w = 2.0 * std::numbers::pi * j / sides;
            v.emplace_back((R + rho * std::cos(w)) * std::cos(u), (R + rho * std::cos(w)) * std::sin(u),
                           rho * std::sin(w));
        }
    auto id = [&](int i, int j) { return ((i + rings) % rings) * sides + (j + sides) % sides; };
    for (int i = 0; i < rings; ++i)
        for (int j = 0; j < sides; ++j) {
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return std::make_unique<TriMesh>(std::move(v), std::move(f), 1, policy);
}

std::unique_ptr<Surface> make_shape(const ShapeSpec &s)
{
    const bool mesh = s.representation == "mesh";
    if (!mesh && s.representation != "profile")
        throw ConfigError("unknown representation '" + s.representation + "'; available: profile, mesh");
    if (s.n < 2) throw ConfigError("shape dimension n must be >= 2");
    if (mesh && s.n != 2) throw ConfigError("mesh shapes require n = 2");

    if (s.kind == "sphere") {
        if (mesh) return icosphere(s.resolution, s.radius, s.mesh_policy);
        return profile_sphere(s.n, s.radius, s.resolution, s.profile_policy);
    }
    if (s.kind == "ellipsoid") {
        if (s.axes.size() != 3) throw ConfigError("ellipsoid needs three semi-axes");
        if (mesh) return mesh_ellipsoid(s.resolution, s.axes[0], s.axes[1], s.axes[2], s.mesh_policy);
        if (s.axes[1] != s.axes[2])
            throw ConfigError("profile ellipsoids need equal second and third semi-axes");
        return profile_ellipsoid(s.n, s.axes[0], s.axes[1], s.resolution, s.profile_policy);
    }
    if (s.kind == "capsule") {
        if (mesh) throw ConfigError("capsule is available as a profile only");
        if (!(s.radius > 0.0 && s.length >= 0.0)) throw ConfigError("capsule needs radius > 0 and length >= 0");
        const double R = s.radius, L = s.length, S = std::numbers::pi * R + 2.0 * L;
        auto gamma = [=](double t) -> Vector2 {
            double arc = S * t / std::numbers::pi;
            const double cap = 0.5 * std::numbers::pi * R;
            if (arc <= cap) return {-L - R * std::cos(arc / R), R * std::sin(arc / R)};
            if (arc <= cap + 2.0 * L) return {-L + (arc - cap), R};
            double th = 0.5 * std::numbers::pi + (arc - cap - 2.0 * L) / R;
            return {L - R * std::cos(th), R * std::sin(th)};
        };
        return std::make_unique<ProfileSurface>(sample_meridian(gamma, s.resolution), s.n, s.profile_policy);
    }
    if (s.kind == "dumbbell") {
        if (mesh) throw ConfigError("dumbbell is available as a profile only");
        const double a = s.length, Rb = s.radius, d = s.neck_depth, w = s.neck_width;
        if (!(a > 0.0 && Rb > 0.0 && d >= 0.0 && d < 1.0 && w > 0.0))
            throw ConfigError("dumbbell needs length > 0, radius > 0, 0 <= neck_depth < 1, neck_width > 0");
        auto gamma = [=](double t) -> Vector2 {
            const double x = -a * std::cos(t);
            return {x, Rb * std::sin(t) * (1.0 - d * std::exp(-x * x / (w * w)))};
        };
        return std::make_unique<ProfileSurface>(sample_meridian(gamma, s.resolution), s.n, s.profile_policy);
    }
    if (s.kind == "torus") {
        if (!mesh) throw ConfigError("torus is available as a mesh only");
        return mesh_torus(s.radius, s.tube, s.resolution, std::max(3, int(std::lround(s.resolution * s.tube / s.radius))),
                          s.mesh_policy);
    }
    if (s.kind == "obj") {
        if (!mesh) throw ConfigError("obj input is a mesh");
        if (s.path.empty()) throw ConfigError("obj shape needs a path");
        return read_obj(s.path, s.genus, s.mesh_policy);
    }
    std::string avail;
    for (const auto &k : shape_catalog()) avail += (avail.empty() ? "" : ", ") + k;
    throw ConfigError("unknown shape '" + s.kind + "'; available: " + avail);
}

}  // namespace cflow
