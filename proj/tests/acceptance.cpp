// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "oracles.hpp"

#include "cflow/analysis.hpp"
#include "cflow/history_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

using namespace cflow;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string &what)
    {
        if (!ok) {
            pass = false;
            detail << " FAILED[" << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

bool all_passed = true;

void criterion(int id, const std::string &title, const std::function<void(Outcome &)> &body,
               double budget_seconds = 1e300)
{
    Outcome o;
    const auto t0 = Clock::now();
    try {
        body(o);
    } catch (const std::exception &e) {
        o.pass = false;
        o.detail << " exception: " << e.what();
    }
    if (seconds_since(t0) > budget_seconds) o.require(false, "runtime over " + sci(budget_seconds) + " s");
    all_passed = all_passed && o.pass;
    std::printf("criterion %2d %-28s %s  (%.1f s)%s\n", id, title.c_str(), o.pass ? "PASS" : "FAIL", seconds_since(t0),
                o.detail.str().c_str());
    std::fflush(stdout);
}

////////////////////////////////////////////////////////////////////////////////

void derivative_calculus(Outcome &o)
{
    double grad = 0.0, assembly = 0.0, euler = 0.0;
    int points = 0;
    for (int n : {2, 3, 5}) {
        for (auto &inst : oracle::catalog_instances(n)) {
            SpeedFunction f(inst.spec, n);
            auto inner = SymmetricCone::shrunken(f.cone(), 0.02);
            for (int s = 0; s < 100; ++s) {
                auto rng = indexed_rng(2024 + n, s);
                Vector z = sample_cone_slice(inner, rng);
                std::sort(z.data(), z.data() + n);
                const Vector g = f.gradient(z);
                const Vector fd = oracle::central_gradient(f, z, 1e-5 * z.norm());
                grad = std::max(grad, (g - fd).norm() / g.norm());
                euler = std::max(euler, std::abs(g.dot(z) - f.value(z)) / f.value(z));
                const Matrix V = oracle::random_symmetric(n, rng);
                const double exact = oracle::matrix_second_difference(f, z, V / V.norm(), 1e-3 * z.norm());
                const double got = second_derivative_form(f, CurvatureTuple(z), V / V.norm());
                assembly = std::max(assembly, std::abs(got - exact) / (1 + std::abs(exact)));
                ++points;
            }
        }
    }
    o.detail << " points=" << points << " gradient=" << sci(grad) << " assembly=" << sci(assembly)
             << " euler=" << sci(euler);
    o.require(grad <= 1e-6, "gradient");
    o.require(assembly <= 1e-5, "assembly");
    o.require(euler <= 1e-10, "euler");
}

void form_signs(Outcome &o)
{
    const int samples = 10000;
    double worst31 = kNegInf, worst5 = std::numeric_limits<double>::infinity(), min_gamma = 1e300, min41 = 1e300;
    int c31 = 0, c5 = 0, c32 = 0, c41 = 0;
    std::uint64_t seed = 31;
    for (int n : {2, 3}) {
        for (auto &inst : oracle::catalog_instances(n)) {
            const SpeedFunction f(inst.spec, n);
            const auto cone = SymmetricCone::shrunken(f.cone(), 0.05);
            if (f.convex()) {
                TraceNormFunction N(n, -1.0);
                worst5 = std::min(worst5, sample_q_extremes(N, f, cone, samples, ++seed).min_normalized);
                ++c5;
            }
            if (!f.concave()) continue;
            for (int m = 0; m < n; ++m) {
                double cm;
                try {
                    cm = cylinder_constant(f, m);
                } catch (const DegenerateInput &) {
                    continue;
                }
                CylindricalG1 g(f.impl(), cm);
                worst31 = std::max(worst31, sample_q_extremes(g, f, cone, samples, ++seed).max_normalized);
                ++c31;
                const auto ctx = make_pinching_context(f, PinchingKind::Cylindrical, m, cone, 0.05, 0.1, 10);
                min_gamma = std::min(min_gamma, sample_q_extremes(*g2_function(ctx), f, cone, samples, ++seed).empirical_gamma);
                ++c32;
                if (m == n - 1) {
                    const auto ictx = make_pinching_context(f, PinchingKind::Inscribed, m, cone, 0.05, 0.1, 10);
                    min41 = std::min(min41, sample_lemma41(ictx, ictx.sigma, samples, ++seed).min_normalized);
                    ++c41;
                }
            }
        }
    }
    o.detail << " g1 sweeps=" << c31 << " max=" << sci(worst31) << "; convex sweeps=" << c5 << " min=" << sci(worst5)
             << "; g2 gamma over " << c32 << " min=" << sci(min_gamma) << "; combined over " << c41
             << " min=" << sci(min41);
    o.require(c31 > 0 && worst31 <= 1e-10, "g1 sign");
    o.require(c5 > 0 && worst5 >= -1e-10, "convex form sign");
    o.require(c32 > 0 && min_gamma > 0.0, "g2 gamma");
    o.require(c41 > 0 && min41 > 0.0, "combined form");
}

////////////////////////////////////////////////////////////////////////////////

void sphere_law(Outcome &o)
{
    for (const char *rep : {"mesh", "profile"}) {
        for (const char *name : {"mean_curvature", "harmonic_mean", "norm", "two_harmonic"}) {
            const auto t0 = Clock::now();
            FlowConfig c;
            c.speed = SpeedSpec(name);
            c.shape.kind = "sphere";
            c.shape.representation = rep;
            const bool mesh = std::string(rep) == "mesh";
            c.shape.n = mesh ? 2 : 3;
            c.shape.resolution = mesh ? 4 : 400;
            c.full_summaries = false;
            c.snapshot_every = mesh ? 200 : 2000;
            const double f1 = SpeedFunction(c.speed, c.shape.n).value(Vector::Ones(c.shape.n));
            c.max_time = 0.96 / (2 * f1);
            const FlowHistory h = run(c);
            double err = 0.0, cyl = 0.0;
            for (const HistoryEntry &e : h.entries) {
                const double R = std::sqrt(1.0 - 2 * f1 * e.summary.t);
                for (int i = 0; i < e.surface->size(); ++i)
                    err = std::max(err, std::abs(e.surface->point(i).position.norm() - R) / R);
                cyl = std::max(cyl, std::abs(e.summary.max_cyl_ratio));
            }
            const double R_end = std::sqrt(1.0 - 2 * f1 * h.entries.back().summary.t);
            const double secs = seconds_since(t0);
            o.detail << "\n    " << rep << " " << name << " nodes=" << h.entries.front().surface->size()
                     << " R_end=" << sci(R_end) << " radius_err=" << sci(err) << " cyl=" << sci(cyl) << " ("
                     << sci(secs) << " s)";
            o.require(h.termination == "max_time" && R_end <= 0.2 + 1e-6, std::string(name) + " horizon");
            o.require(err <= 0.01, std::string(name) + " radius");
            o.require(cyl <= 1e-3, std::string(name) + " cylindrical");
            o.require(secs < 300, std::string(name) + " runtime");
        }
    }
}

void area_decay(Outcome &o)
{
    for (const char *kind : {"sphere", "ellipsoid"}) {
        for (const char *rep : {"profile", "mesh"}) {
            const bool mesh = std::string(rep) == "mesh";
            double res[2];
            for (int lev : {0, 1}) {
                FlowConfig c;
                c.shape.kind = kind;
                c.shape.representation = rep;
                c.shape.resolution = mesh ? 3 + lev : 100 << lev;
                c.full_summaries = false;
                c.max_time = 0.1;
                // dt ~ h^2: equal snapshot spacing in time
                c.snapshot_every = (mesh ? 20 : 50) << (2 * lev);
                res[lev] = area_decay_report(run(c)).scalars.at("max_residual");
            }
            o.detail << "\n    " << kind << " " << rep << " residual " << sci(res[0]) << " -> " << sci(res[1]);
            o.require(res[0] <= 0.02 && res[1] <= 0.02, std::string(kind) + " " + rep + " residual");
            o.require(res[1] <= 0.5 * res[0], std::string(kind) + " " + rep + " refinement");
        }
    }
}

struct EllipsoidRuns {
    FlowHistory H, harmonic;
};

const EllipsoidRuns &ellipsoid_runs()
{
    static const EllipsoidRuns runs = [] {
        auto go = [](const char *speed) {
            FlowConfig c;
            c.speed = SpeedSpec(speed);
            c.shape.kind = "ellipsoid";
            c.shape.n = 2;
            c.shape.resolution = 200;
            c.snapshot_every = 200;
            return run(c);
        };
        return EllipsoidRuns{go("mean_curvature"), go("harmonic_mean")};
    }();
    return runs;
}

void noncollapsing(Outcome &o)
{
    const EllipsoidRuns &r = ellipsoid_runs();
    for (const auto &[label, h] : {std::pair{"H", &r.H}, std::pair{"harmonic_mean", &r.harmonic}}) {
        const MonitorReport in = pinching_series(*h, PinchingSeriesKind::NoncollapseInterior, 0, 1e-3);
        const MonitorReport ex = pinching_series(*h, PinchingSeriesKind::NoncollapseExterior, 0, 1e-3);
        o.detail << "\n    " << label << " (" << h->termination << ", " << h->entries.size() << " snapshots): "
                 << in.detail << "; " << ex.detail;
        o.require(in.verdict == Verdict::Pass, std::string(label) + " interior");
        o.require(ex.verdict == Verdict::Pass, std::string(label) + " exterior");
    }
}

void lp_norm(Outcome &o)
{
    const FlowHistory &h = ellipsoid_runs().H;
    const SpeedFunction H = SpeedFunction::mean_curvature(2);
    const auto cone = SymmetricCone::shrunken(SymmetricCone::positive(2), 0.05);
    const auto ctx = make_pinching_context(H, PinchingKind::Cylindrical, 0, cone, 0.05, 0.1, 10);
    const MonitorReport r = lp_pinching_norm(h, ctx, 0.02);
    const auto &log_norm = r.series.at("log_norm");
    int below = 0, below_finite = 0;
    for (size_t i = 0; i < h.entries.size(); ++i) {
        const Surface &s = *h.entries[i].surface;
        double ratio = 0.0;
        for (int k = 0; k < s.size(); ++k) ratio = std::max(ratio, g_ratio(ctx, s.point(k).kappa) / H.value(s.point(k).kappa.values()));
        if (ratio < ctx.epsilon) {
            ++below;
            if (log_norm[i] != kNegInf) ++below_finite;
        }
    }
    o.detail << " " << r.detail << "; snapshots with max G/F < eps: " << below << "/" << h.entries.size()
             << ", of which finite: " << below_finite;
    o.require(r.verdict == Verdict::Pass, "monotone");
    o.require(below_finite == 0, "empty support");

    const auto ctx0 = make_pinching_context(H, PinchingKind::Cylindrical, 0, cone, 0.0, 0.1, 10);
    const MonitorReport r0 = lp_pinching_norm(h, ctx0, 0.02);
    const auto &l0 = r0.series.at("log_norm");
    o.detail << "\n    supplementary eps=0: " << to_string(r0.verdict) << ", log norm " << sci(l0.front()) << " -> "
             << sci(l0.back()) << "; " << r0.detail;
}

void round_point(Outcome &o)
{
    const EllipsoidRuns &r = ellipsoid_runs();
    for (const auto &[label, h] : {std::pair{"H", &r.H}, std::pair{"harmonic_mean", &r.harmonic}}) {
        const MonitorReport c = pinching_series(*h, PinchingSeriesKind::Cylindrical, 0, 1e-3, 0.2);
        const double last = c.series.begin()->second.back();
        o.detail << "\n    ellipsoid " << label << ": " << c.detail << ", final " << sci(last);
        o.require(c.verdict == Verdict::Pass, std::string(label) + " decrease");
        o.require(last <= 0.05, std::string(label) + " final");
    }

    auto dumbbell = [](double length, double width) {
        FlowConfig d;
        d.shape.kind = "dumbbell";
        d.shape.n = 3;
        d.shape.resolution = 300;
        d.shape.length = length;
        d.shape.neck_width = width;
        d.snapshot_every = 200;
        d.pinching_m = 1;
        d.full_summaries = false;
        return run(d);
    };
    auto describe = [&](const char *label, const FlowHistory &h) {
        const MonitorReport c = pinching_series(h, PinchingSeriesKind::CylDistanceAtMax, 1, 1e-3, 0.2);
        const auto &v = c.series.begin()->second;
        const SnapshotSummary &last = h.entries.back().summary;
        o.detail << "\n    " << label << " (" << h.termination << ", " << h.entries.size() << " snapshots, final max F at x="
                 << sci(h.entries.back().surface->point(last.argmax_F).position[0]) << "): " << c.detail
                 << ", cyl distance " << sci(v.front()) << " -> " << sci(v.back());
        return c;
    };
    const FlowHistory thin = dumbbell(2.0, 0.5);
    o.require(describe("dumbbell n=3, half length 2", thin).verdict == Verdict::Pass, "dumbbell decrease");
    o.require(std::abs(thin.entries.back().surface->point(thin.entries.back().summary.argmax_F).position[0]) < 0.2,
              "dumbbell pinches at the neck");
    describe("supplementary, default dumbbell (half length 1)", dumbbell(1.0, 0.6));
}

////////////////////////////////////////////////////////////////////////////////

void poincare(Outcome &o)
{
    double min_gamma = 1e300, drift = 0.0;
    int done = 0;
    for (int s = 0; s < 20; ++s) {
        auto rng = indexed_rng(808, s);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        const double a = 1.4 + 1.6 * U(rng), width = 0.3 + 0.4 * U(rng), centre = 0.4 * U(rng) - 0.2;
        const double r = 0.5 + 3.5 * U(rng);
        std::unique_ptr<Surface> surf;
        switch (s % 3) {
            case 0: surf = profile_ellipsoid(2, a, 1.0, 300); break;
            case 1: surf = profile_ellipsoid(3, a, 1.0, 300); break;
            default: surf = mesh_ellipsoid(3, a, 1.0, 1.0); break;
        }
        Vector u(surf->size());
        for (int i = 0; i < surf->size(); ++i) {
            const double z = surf->point(i).position[0] / a - centre;
            u[i] = std::abs(z) < width ? std::pow(width * width - z * z, 3) : 0.0;
        }
        const double gamma = poincare_check(*surf, u, r, 0, 0.01).scalars.at("gamma");
        min_gamma = std::min(min_gamma, gamma);
        for (double lambda : {0.5, 3.0})
            drift = std::max(drift, std::abs(poincare_check(*surf->scaled(lambda), u, r, 0, 0.01).scalars.at("gamma") - gamma) / gamma);
        ++done;
    }
    o.detail << " triples=" << done << " min gamma=" << sci(min_gamma) << " scale drift=" << sci(drift);
    o.require(done == 20 && min_gamma > 0.0, "gamma");
    o.require(drift <= 1e-8, "scale invariance");
}

void ancient(Outcome &o)
{
    for (int n : {2, 3}) {
        FlowConfig c;
        c.shape.kind = "sphere";
        c.shape.n = n;
        c.shape.resolution = 400;
        const double T = sphere_extinction_time(c);
        const FlowHistory h = exact_sphere_history(c, 25, 0.9 * T);
        AncientOptions opt;
        opt.extinction_time = T;
        const MonitorReport r = ancient_diagnostics(h, opt);
        double ecc = 0.0, grad = 0.0;
        for (double v : r.series.at("eccentricity")) ecc = std::max(ecc, std::abs(v - 1));
        for (double v : r.series.at("max_grad_ratio")) grad = std::max(grad, std::abs(v));
        const double spread = r.scalars.at("sqrt_tau_max_F_spread"), r_hat = r.scalars.at("r_hat");
        const MonitorReport harnack = harnack_report(h, kNegInf, 50, 17);
        o.detail << "\n    n=" << n << " sqrt(T-t) maxF spread=" << sci(spread) << " |ecc-1|=" << sci(ecc)
                 << " grad ratio=" << sci(grad) << " r_hat=" << r_hat << " harnack min=" << sci(harnack.scalars.at("min_normalized"));
        o.require(spread <= 1e-8, "sqrt tau");
        o.require(ecc <= 1e-3, "eccentricity");
        o.require(grad <= 1e-10, "gradient ratio");
        o.require(std::abs(r_hat - (n + 1) / 2.0) <= 1e-3, "r_hat");
        o.require(harnack.verdict == Verdict::Pass && harnack.scalars.at("min_normalized") > 0.0, "harnack");
    }
}

// Dimensionless outputs of every monitor, relative to the magnitude of each series.
double monitor_drift(const std::vector<MonitorReport> &a, const std::vector<MonitorReport> &b)
{
    static const std::set<std::string> dimensional{"min_quantity"};
    if (a.size() != b.size()) return 1e300;
    double worst = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        if (a[k].verdict != b[k].verdict) return 1e300;
        for (const auto &[name, v] : a[k].scalars) {
            if (dimensional.count(name)) continue;
            const double w = b[k].scalars.at(name);
            if (v != w) worst = std::max(worst, std::abs(v - w) / std::max(std::abs(v), 1e-300));
        }
        for (const auto &[name, v] : a[k].series) {
            if (dimensional.count(name)) continue;
            const auto &w = b[k].series.at(name);
            if (v.size() != w.size()) return 1e300;
            double scale = 0.0;
            for (double x : v) scale = std::max(scale, std::abs(x));
            for (size_t i = 0; i < v.size(); ++i)
                if (v[i] != w[i]) worst = std::max(worst, std::abs(v[i] - w[i]) / std::max(scale, 1e-300));
        }
    }
    return worst;
}

void scaling(Outcome &o)
{
    for (const char *text : {R"({"command": "simulate", "seed": 5, "shape": {"kind": "ellipsoid", "n": 2, "resolution": 150},
                                 "flow": {"max_time": 0.2, "snapshot_every": 100}})",
                             R"({"command": "simulate", "seed": 5, "shape": {"kind": "ellipsoid", "n": 3, "resolution": 150},
                                 "flow": {"max_time": 0.1, "snapshot_every": 100, "pinching_m": 1}})",
                             R"({"command": "simulate", "seed": 5, "speed": "harmonic_mean",
                                 "shape": {"kind": "ellipsoid", "representation": "mesh", "resolution": 3},
                                 "flow": {"max_time": 0.1, "snapshot_every": 20}})"}) {
        const RunConfig cfg = parse_config(text);
        const FlowHistory h = run(cfg.flow);
        const auto base = run_monitors(cfg, h);
        for (double lambda : {0.5, 3.0}) {
            RunConfig scaled = cfg;
            scaled.flow = scaled_config(cfg.flow, lambda);
            const FlowHistory hs = run(scaled.flow);
            const double drift = monitor_drift(base, run_monitors(scaled, hs));
            o.detail << "\n    " << cfg.flow.shape.representation << " n=" << cfg.flow.shape.n << " "
                     << cfg.flow.speed.family << " lambda=" << lambda << ": " << base.size()
                     << " monitors, drift " << sci(drift);
            o.require(hs.steps == h.steps && drift <= 1e-8, "monitors at lambda " + sci(lambda));
        }
    }

    double degree = 0.0;
    for (int n : {2, 3}) {
        const auto f = SpeedFunction::mean_curvature(n);
        const auto cone = SymmetricCone::shrunken(SymmetricCone::positive(n), 0.05);
        const auto ctx = make_pinching_context(f, PinchingKind::Cylindrical, 0, cone, 0.05, 0.3, 10);
        for (int s = 0; s < 200; ++s) {
            auto rng = indexed_rng(10, s);
            const CurvatureTuple k(sample_cone_slice(cone, rng));
            const double base = g_sigma(ctx, k).value;
            for (double lambda : {0.5, 3.0}) {
                const CurvatureTuple kl(Vector(lambda * k.values()));
                degree = std::max(degree, std::abs(g_sigma(ctx, kl).value - std::pow(lambda, ctx.sigma) * base) / std::abs(base));
            }
        }
    }
    o.detail << "\n    G_sigma degree sigma: max relative deviation " << sci(degree);
    o.require(degree <= 1e-10, "G_sigma degree");
}

}  // namespace

int main()
{
    criterion(1, "derivative calculus", derivative_calculus, 10);
    criterion(2, "quadratic form signs", form_signs, 60);
    criterion(3, "sphere law", sphere_law);
    criterion(4, "area decay", area_decay);
    criterion(5, "non-collapsing", noncollapsing);
    criterion(6, "L^p pinching", lp_norm);
    criterion(7, "round point / neckpinch", round_point);
    criterion(8, "Poincare inequality", poincare);
    criterion(9, "ancient diagnostics", ancient);
    criterion(10, "scaling audit", scaling);
    std::printf("%s\n", all_passed ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
    return all_passed ? 0 : 1;
}
