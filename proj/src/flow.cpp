#include "cflow/flow.hpp"

#include <cmath>
#include <sstream>

namespace cflow {

SymmetricCone make_cone(const ConeSpec &spec, const SpeedFunction &speed)
{
    const int n = speed.dim();
    SymmetricCone base = speed.cone();
    if (spec.type == "positive")
        base = SymmetricCone::positive(n);
    else if (spec.type == "m_convex")
        base = SymmetricCone::m_convex(n, spec.m);
    else if (spec.type == "half_space")
        base = SymmetricCone::half_space(n);
    else if (spec.type != "speed")
        throw ConfigError("unknown cone '" + spec.type + "'; available: speed, positive, m_convex, half_space");
    if (spec.margin < 0.0) throw ConfigError("cone margin must be non-negative");
    return spec.margin > 0.0 ? SymmetricCone::shrunken(base, spec.margin) : base;
}

FlowConfig scaled_config(const FlowConfig &cfg, double lambda)
{
    if (!(lambda > 0.0)) throw ConfigError("scale factor must be positive");
    FlowConfig c = cfg;
    c.shape.radius *= lambda;
    for (double &a : c.shape.axes) a *= lambda;
    c.shape.length *= lambda;
    c.shape.neck_width *= lambda;
    c.shape.tube *= lambda;
    c.max_time *= lambda * lambda;
    return c;
}

double stable_dt(const Surface &s, const SpeedFunction &speed, double c_cfl)
{
    if (!(c_cfl > 0.0 && c_cfl < 1.0)) throw ConfigError("c_cfl must lie in (0, 1)");
    double trace = 0.0;
    for (int i = 0; i < s.size(); ++i) {
        const PointGeometry &p = s.point(i);
        if (!contains(speed.cone(), p.kappa))
            throw ConeViolation("type-0 hazard: node " + std::to_string(i) + " left the speed cone");
        trace = std::max(trace, speed.gradient(p.principal).sum());
    }
    const double h = s.spacing_min();
    return c_cfl * h * h / (2.0 * trace);
}

namespace {

std::string describe_tuple(const CurvatureTuple &k)
{
    std::ostringstream os;
    os.precision(6);
    os << "(";
    for (int i = 0; i < k.dim(); ++i) os << (i ? ", " : "") << k[i];
    os << ")";
    return os.str();
}

// Index of the node deepest outside (or closest to leaving) the cone.
int worst_node(const Surface &s, const SymmetricCone &cone, double *distance)
{
    int worst = 0;
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.size(); ++i) {
        double di = s.point(i).kappa.norm() > 0.0 ? normalized_boundary_distance(cone, s.point(i).kappa) : -1.0;
        if (di < d) d = di, worst = i;
    }
    if (distance) *distance = d;
    return worst;
}

void check_cone(const Surface &s, const SymmetricCone &cone)
{
    for (int i = 0; i < s.size(); ++i)
        if (!contains(cone, s.point(i).kappa)) {
            double d = 0.0;
            int w = worst_node(s, cone, &d);
            throw ConeViolation("type-0: curvature left " + cone.describe() + " at node " + std::to_string(w) +
                                ", kappa = " + describe_tuple(s.point(w).kappa) +
                                ", boundary distance " + std::to_string(d));
        }
}

}  // namespace

std::unique_ptr<Surface> step(const Surface &s, const SpeedFunction &speed, const SymmetricCone &cone, double dt)
{
    check_cone(s, cone);
    Vector F = speed_values(s, speed);
    return s.displaced(-dt * F);
}

SnapshotSummary summarize(const Surface &s, const SpeedFunction &speed, int m, bool full)
{
    SnapshotSummary sum;
    const int n = s.dim();
    double c_m = std::numeric_limits<double>::quiet_NaN();
    try {
        c_m = cylinder_constant(speed, m);
    } catch (const Error &) {
    }
    Vector F = speed_values(s, speed);
    sum.max_F = -std::numeric_limits<double>::infinity();
    sum.min_F = std::numeric_limits<double>::infinity();
    sum.max_cyl_ratio = sum.max_insc_ratio = sum.max_insc_pinching = sum.max_grad_ratio =
        -std::numeric_limits<double>::infinity();
    sum.min_convexity_ratio = sum.min_exsc_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.size(); ++i) {
        const PointGeometry &p = s.point(i);
        const double f = F[i];
        if (f > sum.max_F) sum.max_F = f, sum.argmax_F = i;
        sum.min_F = std::min(sum.min_F, f);
        sum.max_cyl_ratio = std::max(sum.max_cyl_ratio, (p.kappa.max() - c_m * f) / f);
        sum.min_convexity_ratio = std::min(sum.min_convexity_ratio, p.kappa.min() / f);
        const double g = s.curvature_gradient_norm(i);
        sum.max_grad_ratio = std::max(sum.max_grad_ratio, g * g / (f * f * f * f));
        if (full) {
            const double kb = s.inscribed_curvature(i), ku = s.exscribed_curvature(i);
            sum.max_insc_ratio = std::max(sum.max_insc_ratio, kb / f);
            sum.min_exsc_ratio = std::min(sum.min_exsc_ratio, ku / f);
            sum.max_insc_pinching = std::max(sum.max_insc_pinching, (kb - c_m * f) / f);
        }
    }
    for (int j = 0; j < n; ++j) sum.cyl_distance_at_max.push_back(cyl_distance(s.point(sum.argmax_F).kappa, j));
    if (full) {
        GlobalGeometry g = s.global_geometry();
        sum.area = g.area, sum.volume = g.volume, sum.inradius = g.inradius;
        sum.circumradius = g.circumradius, sum.diameter = g.diameter;
    } else {
        for (int i = 0; i < s.size(); ++i) sum.area += s.weight(i);
        sum.max_insc_ratio = sum.min_exsc_ratio = sum.max_insc_pinching = std::numeric_limits<double>::quiet_NaN();
        sum.volume = sum.inradius = sum.circumradius = sum.diameter = std::numeric_limits<double>::quiet_NaN();
    }
    return sum;
}

FlowHistory run(const FlowConfig &cfg)
{
    return run(cfg, make_shape(cfg.shape));
}

FlowHistory run(const FlowConfig &cfg, std::unique_ptr<Surface> initial)
{
    if (!(cfg.c_cfl > 0.0 && cfg.c_cfl < 1.0)) throw ConfigError("c_cfl must lie in (0, 1)");
    if (cfg.snapshot_every < 1) throw ConfigError("snapshot_every must be positive");
    const int n = initial->dim();
    SpeedFunction speed(cfg.speed, n);
    const SymmetricCone cone = make_cone(cfg.cone, speed);
    if (cfg.pinching_m < 0 || cfg.pinching_m > n - 1) throw ConfigError("m must satisfy 0 ≤ m ≤ n−1");

    FlowHistory h;
    h.config = cfg;
    std::shared_ptr<const Surface> s = std::move(initial);
    double t = 0.0;
    long steps = 0;
    long last_recorded = -1;

    auto record = [&] {
        SnapshotSummary sum = summarize(*s, speed, cfg.pinching_m, cfg.full_summaries);
        sum.t = t;
        sum.step = steps;
        sum.remeshes = h.remeshes;
        h.entries.push_back({sum, s});
        last_recorded = steps;
    };
    auto stop = [&](const std::string &cause, const std::string &detail) {
        h.termination = cause;
        h.termination_detail = detail;
    };

    // The initial diameter normalizes the blow-up threshold.
    {
        double d2 = 0.0;
        if (s->representation() == Representation::Profile) {
            h.initial_diameter = s->global_geometry().diameter;
        } else {
            for (int i = 0; i < s->size(); ++i)
                for (int j = i + 1; j < s->size(); ++j)
                    d2 = std::max(d2, (s->point(i).position - s->point(j).position).squaredNorm());
            h.initial_diameter = std::sqrt(d2);
        }
    }

    try {
        check_cone(*s, cone);
    } catch (const ConeViolation &e) {
        stop("cone_exit", e.what());
        h.entries.push_back({SnapshotSummary{}, s});
        h.entries.back().summary.t = 0.0;
        return h;
    }
    record();

    while (true) {
        if (steps >= cfg.max_steps) {
            stop("max_steps", "step budget " + std::to_string(cfg.max_steps) + " reached");
            break;
        }
        if (t >= cfg.max_time * (1.0 - 1e-14)) {
            stop("max_time", "reached t = " + std::to_string(t));
            break;
        }
        Vector F;
        try {
            check_cone(*s, cone);
            F = speed_values(*s, speed);
        } catch (const ConeViolation &e) {
            stop("cone_exit", e.what());
            break;
        }
        const double maxF = F.maxCoeff();
        if (maxF * h.initial_diameter > cfg.blowup_factor) {
            stop("blowup", "max F * initial diameter = " + std::to_string(maxF * h.initial_diameter));
            break;
        }
        double max_curv = 0.0;
        for (int i = 0; i < s->size(); ++i) max_curv = std::max(max_curv, s->point(i).principal.cwiseAbs().maxCoeff());
        const double hmin = s->spacing_min();
        if (max_curv * cfg.resolution_factor * hmin > 1.0) {
            stop("resolution", "curvature radius " + std::to_string(1.0 / max_curv) + " below resolution " +
                                   std::to_string(cfg.resolution_factor * hmin));
            break;
        }
        double dt = stable_dt(*s, speed, cfg.c_cfl);
        if (t + dt > cfg.max_time) dt = cfg.max_time - t;
        try {
            std::shared_ptr<const Surface> next = s->displaced(-dt * F);
            if (cfg.remesh && next->needs_remesh()) {
                next = next->remeshed();
                ++h.remeshes;
            }
            s = std::move(next);
        } catch (const DegenerateInput &e) {
            stop("degenerate", e.what());
            break;
        }
        t += dt;
        ++steps;
        if (steps % cfg.snapshot_every == 0) {
            try {
                record();
            } catch (const ConeViolation &e) {
                stop("cone_exit", e.what());
                break;
            }
        }
    }
    h.steps = steps;
    if (last_recorded != steps) {
        try {
            record();
        } catch (const ConeViolation &) {
            // The stop cause already describes the offending node.
        }
    }
    return h;
}

}  // namespace cflow
