#include "cflow/profile_surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cflow {

double unit_sphere_area(int k)
{
    return 2.0 * std::pow(std::numbers::pi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

double unit_ball_volume(int k)
{
    return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

namespace {

double cross(const Vector2 &a, const Vector2 &b) { return a.x() * b.y() - a.y() * b.x(); }

// Signed curvature of the circle through a, b, c (counterclockwise positive).
double circumcurvature(const Vector2 &a, const Vector2 &b, const Vector2 &c)
{
    const double ab = (b - a).norm(), bc = (c - b).norm(), ca = (a - c).norm();
    if (ab == 0.0 || bc == 0.0 || ca == 0.0) throw DegenerateInput("collapsed profile stencil");
    return 2.0 * cross(b - a, c - b) / (ab * bc * ca);
}

// sum_{k=0}^{d} a^k b^{d-k}
double power_sum(double a, double b, int d)
{
    double s = 0.0, ak = 1.0;
    for (int k = 0; k <= d; ++k) {
        s += ak * std::pow(b, d - k);
        ak *= a;
    }
    return s;
}

Vector2 meridian(const PointGeometry &p) { return {p.position[0], p.position[1]}; }

double segment_distance(const Vector2 &p, const Vector2 &a, const Vector2 &b)
{
    Vector2 d = b - a;
    double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    return (p - a - t * d).norm();
}

}  // namespace

ProfileSurface::ProfileSurface(std::vector<Vector2> nodes, int n, ProfileRemeshPolicy policy, int orientation)
    : m_nodes(std::move(nodes)), m_n(n), m_policy(policy), m_orientation(orientation >= 0 ? 1 : -1)
{
    if (n < 2) throw DimensionMismatch("profile surfaces need n >= 2");
    const int N = int(m_nodes.size()) - 1;
    if (N < 4) throw DegenerateInput("profile needs at least 5 nodes");
    if (!(m_nodes.front().x() < m_nodes.back().x()))
        throw DegenerateInput("profile must run from the left pole to the right pole");
    m_nodes.front().y() = 0.0;
    m_nodes.back().y() = 0.0;
    for (int i = 1; i < N; ++i)
        if (!(m_nodes[i].y() > 0.0) || !m_nodes[i].allFinite())
            throw DegenerateInput("profile node " + std::to_string(i) + " touches the axis");

    m_seg.resize(N);
    m_arclength.assign(N + 1, 0.0);
    for (int i = 0; i < N; ++i) {
        m_seg[i] = (m_nodes[i + 1] - m_nodes[i]).norm();
        if (!(m_seg[i] > 0.0)) throw DegenerateInput("coincident profile nodes");
        m_arclength[i + 1] = m_arclength[i] + m_seg[i];
    }

    auto ghost = [&](int i) { return Vector2(m_nodes[i].x(), -m_nodes[i].y()); };
    auto prev = [&](int i) { return i == 0 ? ghost(1) : m_nodes[i - 1]; };
    auto next = [&](int i) { return i == N ? ghost(N - 1) : m_nodes[i + 1]; };

    m_tangent.resize(N + 1);
    m_points.reserve(N + 1);
    const double sgn = m_orientation;
    for (int i = 0; i <= N; ++i) {
        const Vector2 a = prev(i), b = m_nodes[i], c = next(i);
        const double h1 = (b - a).norm(), h2 = (c - b).norm();
        Vector2 t = (h1 * h1 * (c - b) + h2 * h2 * (b - a)) / (h1 * h2 * (h1 + h2));
        t.normalize();
        if (i == 0) t = {0.0, 1.0};
        if (i == N) t = {0.0, -1.0};
        m_tangent[i] = t;

        const double kp = -circumcurvature(a, b, c);
        const double kr = (i == 0 || i == N) ? kp : t.x() / b.y();

        Vector pos = Vector::Zero(n + 1), nu = Vector::Zero(n + 1);
        pos << b, Vector::Zero(n - 1);
        nu[0] = -sgn * t.y();
        nu[1] = sgn * t.x();
        Vector principal = Vector::Constant(n, sgn * kr);
        principal[0] = sgn * kp;
        m_points.push_back(make_point(pos, nu, principal));
    }

    const double area_unit = unit_sphere_area(n - 1);
    m_weights.assign(N + 1, 0.0);
    for (int i = 0; i < N; ++i) {
        const double ra = m_nodes[i].y(), rb = m_nodes[i + 1].y();
        const double mu = area_unit * m_seg[i] * power_sum(ra, rb, n - 1) / n;
        m_weights[i] += 0.5 * mu;
        m_weights[i + 1] += 0.5 * mu;
    }
}

double ProfileSurface::spacing_min() const
{
    return *std::min_element(m_seg.begin(), m_seg.end());
}

GlobalGeometry ProfileSurface::global_geometry() const
{
    const int N = int(m_nodes.size()) - 1;
    GlobalGeometry g;
    for (double w : m_weights) g.area += w;
    double vol = 0.0;
    for (int i = 0; i < N; ++i) {
        const double ra = m_nodes[i].y(), rb = m_nodes[i + 1].y();
        vol += (m_nodes[i + 1].x() - m_nodes[i].x()) * power_sum(ra, rb, m_n) / (m_n + 1);
    }
    g.volume = unit_ball_volume(m_n) * vol;

    // Circumradius: the optimal center lies on the axis by symmetry.
    auto enclose = [&](double xc) {
        double worst = 0.0;
        for (const Vector2 &p : m_nodes) worst = std::max(worst, (p.x() - xc) * (p.x() - xc) + p.y() * p.y());
        return worst;
    };
    double lo = m_nodes.front().x(), hi = m_nodes.back().x();
    for (const Vector2 &p : m_nodes) lo = std::min(lo, p.x()), hi = std::max(hi, p.x());
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = enclose(c), fd = enclose(d);
    for (int it = 0; it < 200 && b - a > 1e-15 * (hi - lo); ++it) {
        if (fc < fd) {
            b = d, d = c, fd = fc;
            c = b - phi * (b - a);
            fc = enclose(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + phi * (b - a);
            fd = enclose(d);
        }
    }
    g.circumradius = std::sqrt(enclose(0.5 * (a + b)));

    for (int i = 0; i <= N; ++i)
        for (int j = i; j <= N; ++j) {
            const double dx = m_nodes[i].x() - m_nodes[j].x(), sr = m_nodes[i].y() + m_nodes[j].y();
            g.diameter = std::max(g.diameter, std::sqrt(dx * dx + sr * sr));
        }

    // Inradius: distance to the meridian polyline maximized over the region
    // bounded by the profile and the axis.
    auto inside = [&](const Vector2 &q) {
        if (q.y() < 0.0) return false;
        bool in = false;
        for (int i = 0; i <= N; ++i) {
            const Vector2 &p0 = m_nodes[i];
            const Vector2 &p1 = m_nodes[(i + 1) % (N + 1)];
            if ((p0.y() > q.y()) != (p1.y() > q.y())) {
                double xs = p0.x() + (q.y() - p0.y()) * (p1.x() - p0.x()) / (p1.y() - p0.y());
                if (q.x() < xs) in = !in;
            }
        }
        return in;
    };
    auto depth = [&](const Vector2 &q) {
        Vector2 r(q.x(), std::abs(q.y()));
        if (!inside(r)) return -1.0;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < N; ++i) best = std::min(best, segment_distance(r, m_nodes[i], m_nodes[i + 1]));
        return best;
    };
    double rmax = 0.0;
    for (const Vector2 &p : m_nodes) rmax = std::max(rmax, p.y());
    const int gx = 48, gy = 24;
    std::vector<std::pair<double, Vector2>> seeds;
    for (int ix = 0; ix <= gx; ++ix)
        for (int iy = 0; iy <= gy; ++iy) {
            Vector2 q(lo + (hi - lo) * ix / gx, rmax * iy / gy);
            double dq = depth(q);
            if (dq > 0.0) seeds.emplace_back(dq, q);
        }
    std::sort(seeds.begin(), seeds.end(), [](const auto &u, const auto &v) { return u.first > v.first; });
    if (seeds.size() > 6) seeds.resize(6);
    const double scale = std::max(hi - lo, rmax);
    for (auto [best, q] : seeds) {
        double step = scale / gx;
        while (step > 1e-13 * scale) {
            bool moved = false;
            for (const Vector2 &dir : {Vector2(1, 0), Vector2(-1, 0), Vector2(0, 1), Vector2(0, -1),
                                       Vector2(0.7071067811865476, 0.7071067811865476),
                                       Vector2(-0.7071067811865476, 0.7071067811865476),
                                       Vector2(0.7071067811865476, -0.7071067811865476),
                                       Vector2(-0.7071067811865476, -0.7071067811865476)}) {
                Vector2 cand = q + step * dir;
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

double ProfileSurface::chord_extreme(int i, bool upper) const
{
    // k(x, y) for y = (x_j, r_j cos(phi), r_j sin(phi), ...) is a Moebius
    // function of cos(phi), so only the two extremes cos(phi) = +-1 matter.
    const int N = int(m_nodes.size()) - 1;
    const PointGeometry &p = m_points[i];
    const Vector2 x = meridian(p);
    const Vector2 nu(p.normal[0], p.normal[1]);
    const double hb = i > 0 ? m_seg[i - 1] : m_seg[0];
    const double hf = i < N ? m_seg[i] : m_seg[N - 1];
    const double excl = 2.0 * (hb + hf);
    double best = upper ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (int j = 0; j <= N; ++j) {
        for (double c : {1.0, -1.0}) {
            if (c < 0.0 && m_nodes[j].y() == 0.0) continue;
            Vector2 y(m_nodes[j].x(), c * m_nodes[j].y());
            Vector2 d = x - y;
            double d2 = d.squaredNorm();
            if (d2 < excl * excl) continue;
            double k = 2.0 * d.dot(nu) / d2;
            best = upper ? std::max(best, k) : std::min(best, k);
        }
    }
    return best;
}

double ProfileSurface::inscribed_curvature(int i) const
{
    return std::max(chord_extreme(i, true), m_points.at(i).kappa.max());
}

double ProfileSurface::exscribed_curvature(int i) const
{
    return std::min(chord_extreme(i, false), m_points.at(i).kappa.min());
}

double ProfileSurface::derivative(const Vector &u, int i, double *second) const
{
    const int N = int(m_nodes.size()) - 1;
    if (i == 0 || i == N) {
        // Even reflection across the axis.
        const int j = i == 0 ? 1 : N - 1;
        const double h = i == 0 ? m_seg[0] : m_seg[N - 1];
        if (second) *second = 2.0 * (u[j] - u[i]) / (h * h);
        return 0.0;
    }
    const double h1 = m_seg[i - 1], h2 = m_seg[i];
    if (second)
        *second = 2.0 * (u[i - 1] / (h1 * (h1 + h2)) - u[i] / (h1 * h2) + u[i + 1] / (h2 * (h1 + h2)));
    return -h2 / (h1 * (h1 + h2)) * u[i - 1] + (h2 - h1) / (h1 * h2) * u[i] + h1 / (h2 * (h1 + h2)) * u[i + 1];
}

double ProfileSurface::curvature_gradient_norm(int i) const
{
    const int N = int(m_nodes.size()) - 1;
    Vector kp(N + 1), kr(N + 1);
    for (int j = 0; j <= N; ++j) {
        kp[j] = m_points[j].principal[0];
        kr[j] = m_points[j].principal[1];
    }
    const double dp = derivative(kp, i, nullptr), dr = derivative(kr, i, nullptr);
    return std::sqrt(dp * dp + 3.0 * (m_n - 1) * dr * dr);
}

FieldDerivatives ProfileSurface::field_derivatives(const Vector &u, int i) const
{
    if (u.size() != size()) throw DimensionMismatch("field size differs from node count");
    const int N = int(m_nodes.size()) - 1;
    double u2 = 0.0;
    const double u1 = derivative(u, i, &u2);
    FieldDerivatives fd;
    fd.gradient = Vector::Zero(m_n);
    fd.gradient[0] = u1;
    fd.hessian = Matrix::Zero(m_n, m_n);
    fd.hessian(0, 0) = u2;
    const double rot = (i == 0 || i == N) ? u2 : m_tangent[i].y() / m_nodes[i].y() * u1;
    for (int k = 1; k < m_n; ++k) fd.hessian(k, k) = rot;
    return fd;
}

std::unique_ptr<Surface> ProfileSurface::displaced(const Vector &normal_displacement) const
{
    if (normal_displacement.size() != size()) throw DimensionMismatch("displacement size differs from node count");
    std::vector<Vector2> moved(m_nodes.size());
    for (int i = 0; i < size(); ++i) {
        const PointGeometry &p = m_points[i];
        moved[i] = m_nodes[i] + normal_displacement[i] * Vector2(p.normal[0], p.normal[1]);
    }
    return std::make_unique<ProfileSurface>(std::move(moved), m_n, m_policy, m_orientation);
}

Vector ProfileSurface::monitor_density() const
{
    const int N = int(m_nodes.size()) - 1;
    Vector w = Vector::Ones(N + 1);
    if (m_policy.curvature_weight > 0.0) {
        const double L = m_arclength.back();
        for (int i = 0; i <= N; ++i) w[i] += m_policy.curvature_weight * L * m_points[i].principal.cwiseAbs().maxCoeff();
    }
    return w;
}

bool ProfileSurface::needs_remesh() const
{
    const int N = int(m_nodes.size()) - 1;
    Vector w = monitor_density();
    double total = 0.0;
    for (int i = 0; i < N; ++i) total += m_seg[i] * 0.5 * (w[i] + w[i + 1]);
    for (int i = 0; i < N; ++i) {
        double ratio = m_seg[i] * 0.5 * (w[i] + w[i + 1]) / (total / N);
        if (ratio < m_policy.min_ratio || ratio > m_policy.max_ratio) return true;
    }
    return false;
}

ProfileSurface ProfileSurface::resampled(int count) const
{
    const int N = int(m_nodes.size()) - 1;
    const int M = count - 1;
    if (M < 4) throw DegenerateInput("profile needs at least 5 nodes");
    const double L = m_arclength.back();

    // Parameter values and points extended by three reflected ghosts per side.
    std::vector<double> s;
    std::vector<Vector2> q;
    for (int k = 3; k >= 1; --k) {
        s.push_back(-m_arclength[k]);
        q.emplace_back(m_nodes[k].x(), -m_nodes[k].y());
    }
    for (int i = 0; i <= N; ++i) {
        s.push_back(m_arclength[i]);
        q.push_back(m_nodes[i]);
    }
    for (int k = 1; k <= 3; ++k) {
        s.push_back(2.0 * L - m_arclength[N - k]);
        q.emplace_back(m_nodes[N - k].x(), -m_nodes[N - k].y());
    }
    auto interpolate = [&](double t) {
        int j = int(std::upper_bound(s.begin() + 3, s.begin() + 3 + N, t) - s.begin()) - 1;
        j = std::clamp(j, 3, 3 + N - 1);
        Vector2 out = Vector2::Zero();
        for (int a = j - 1; a <= j + 2; ++a) {
            double l = 1.0;
            for (int b = j - 1; b <= j + 2; ++b)
                if (b != a) l *= (t - s[b]) / (s[a] - s[b]);
            out += l * q[a];
        }
        return out;
    };

    Vector w = monitor_density();
    std::vector<double> cum(N + 1, 0.0);
    for (int i = 0; i < N; ++i) cum[i + 1] = cum[i] + m_seg[i] * 0.5 * (w[i] + w[i + 1]);
    std::vector<Vector2> out(M + 1);
    out[0] = m_nodes.front();
    out[M] = m_nodes.back();
    for (int k = 1; k < M; ++k) {
        const double target = cum[N] * k / M;
        int i = int(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
        i = std::clamp(i, 0, N - 1);
        // Linear density on the segment: solve the quadratic for the offset.
        const double wa = w[i], wb = w[i + 1], h = m_seg[i], rem = target - cum[i];
        const double slope = (wb - wa) / h;
        double ds = std::abs(slope) < 1e-14 ? rem / wa : (-wa + std::sqrt(wa * wa + 2.0 * slope * rem)) / slope;
        out[k] = interpolate(m_arclength[i] + std::clamp(ds, 0.0, h));
    }
    return ProfileSurface(std::move(out), m_n, m_policy, m_orientation);
}

std::unique_ptr<Surface> ProfileSurface::remeshed() const
{
    return std::make_unique<ProfileSurface>(resampled(size()));
}

std::unique_ptr<Surface> ProfileSurface::scaled(double lambda) const
{
    std::vector<Vector2> s(m_nodes);
    for (auto &p : s) p *= lambda;
    return std::make_unique<ProfileSurface>(std::move(s), m_n, m_policy, m_orientation);
}

std::vector<Vector2> sample_meridian(const std::function<Vector2(double)> &gamma, int segments,
                                     const std::function<double(double)> &density)
{
    if (segments < 4) throw DegenerateInput("profile needs at least 4 segments");
    const int fine = 256 * segments;
    std::vector<double> t(fine + 1), cum(fine + 1, 0.0);
    Vector2 prev = gamma(0.0);
    t[0] = 0.0;
    for (int k = 1; k <= fine; ++k) {
        t[k] = std::numbers::pi * k / fine;
        Vector2 cur = gamma(t[k]);
        double w = density ? density(0.5 * (t[k - 1] + t[k])) : 1.0;
        cum[k] = cum[k - 1] + w * (cur - prev).norm();
        prev = cur;
    }
    std::vector<Vector2> out(segments + 1);
    for (int i = 0; i <= segments; ++i) {
        double target = cum[fine] * i / segments;
        int k = int(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
        k = std::clamp(k, 0, fine - 1);
        double lo = t[k], hi = t[k + 1];
        // Refine the parameter so that the node lies exactly on the curve.
        const double base = cum[k];
        const Vector2 pk = gamma(lo);
        const double wk = density ? density(0.5 * (t[k] + t[k + 1])) : 1.0;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            if (base + wk * (gamma(mid) - pk).norm() < target)
                lo = mid;
            else
                hi = mid;
        }
        out[i] = gamma(0.5 * (lo + hi));
    }
    out.front().y() = 0.0;
    out.back().y() = 0.0;
    return out;
}

}  // namespace cflow
