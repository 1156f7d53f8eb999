#include "doctest.h"

#include "cflow/history_io.hpp"
#include "cflow/monitors.hpp"

#include "json.hpp"

#include <cmath>

using namespace cflow;

namespace {

FlowConfig sphere_config(int n, const char *speed = "mean_curvature", double R = 1.0, int segments = 400)
{
    FlowConfig c;
    c.speed = SpeedSpec(speed);
    c.shape.kind = "sphere";
    c.shape.n = n;
    c.shape.radius = R;
    c.shape.resolution = segments;
    return c;
}

double radius_at(const FlowConfig &c, double t)
{
    const SpeedFunction f(c.speed, c.shape.n);
    return std::sqrt(c.shape.radius * c.shape.radius - 2 * f.value(Vector::Ones(c.shape.n)) * t);
}

PinchingContext cylindrical_context(int n, int m, double epsilon = 0.05, int p = 10)
{
    return make_pinching_context(SpeedFunction::mean_curvature(n), PinchingKind::Cylindrical, m,
                                 SymmetricCone::shrunken(SymmetricCone::positive(n), 0.05), epsilon, 0.1, p);
}

// u = bump of the height x_axis about the pole, smooth and compactly supported
Vector polar_bump(const Surface &s, double cutoff)
{
    Vector u(s.size());
    for (int i = 0; i < s.size(); ++i) {
        const Vector &x = s.point(i).position;
        const double z = x[0] / x.norm();
        u[i] = z > cutoff ? std::pow(z - cutoff, 3) : 0.0;
    }
    return u;
}

}  // namespace

TEST_CASE("exact sphere history")
{
    const FlowConfig c = sphere_config(2, "mean_curvature", 1.0, 200);
    const double T = sphere_extinction_time(c);
    CHECK(T == doctest::Approx(0.25).epsilon(1e-15));
    const FlowHistory h = exact_sphere_history(c, 25, 0.9 * T);
    REQUIRE(h.entries.size() == 25);
    for (const HistoryEntry &e : h.entries) {
        const double R = radius_at(c, e.summary.t);
        for (int i = 0; i < e.surface->size(); i += 20)
            CHECK(e.surface->point(i).position.norm() == doctest::Approx(R).epsilon(1e-14));
        CHECK(e.summary.max_F == doctest::Approx(2 / R).epsilon(1e-9));
    }
}

TEST_CASE("area decay")
{
    const FlowConfig c = sphere_config(2, "mean_curvature", 1.0, 200);
    const FlowHistory h = exact_sphere_history(c, 25, 0.9 * sphere_extinction_time(c));
    for (int i = 1; i + 1 < int(h.entries.size()); ++i) CHECK(area_decay_residual(h, i) <= 1e-8);
    CHECK_THROWS_AS(area_decay_residual(h, 0), DegenerateInput);
    const MonitorReport r = area_decay_report(h);
    CHECK(r.verdict == Verdict::Pass);
    CHECK(r.times.size() == h.entries.size() - 2);

    for (const char *speed : {"harmonic_mean", "norm"}) {
        const FlowConfig d = sphere_config(2, speed, 2.0, 200);
        const FlowHistory hd = exact_sphere_history(d, 9, 0.5 * sphere_extinction_time(d));
        CHECK(area_decay_report(hd, 1e-8).verdict == Verdict::Pass);
    }
}

TEST_CASE("F evolution on the exact sphere")
{
    // closely spaced snapshots: the three-point difference is O(dt^2), the
    // curvature round-off enters as O(eps/dt)
    const FlowConfig c = sphere_config(2, "two_harmonic", 1.0, 100);
    const FlowHistory h = exact_sphere_history(c, 5, 6e-5);
    const SpeedFunction f(c.speed, 2);
    const double f1 = f.value(Vector::Ones(2));
    for (int index : {0, 17, 50, 83}) {
        const EvolutionResidual e = evolution_residual(h, EvolutionQuantity::F, index, 2);
        const double R = radius_at(c, h.entries[2].summary.t);
        CHECK(e.rhs == doctest::Approx(f1 * f1 / (R * R * R)).epsilon(1e-9));
        CHECK(std::abs(e.residual) <= 1e-8 * e.scale);
    }

    // scale covariance of the raw residual: degree -3
    const FlowConfig far = sphere_config(2, "mean_curvature", 1.0, 200);
    const FlowHistory h1 = exact_sphere_history(far, 7, 0.15);
    for (double lambda : {0.5, 3.0}) {
        const FlowHistory hl = exact_sphere_history(scaled_config(far, lambda), 7, 0.15 * lambda * lambda);
        const EvolutionResidual a = evolution_residual(h1, EvolutionQuantity::F, 50, 3);
        const EvolutionResidual b = evolution_residual(hl, EvolutionQuantity::F, 50, 3);
        CHECK(b.residual / a.residual == doctest::Approx(std::pow(lambda, -3)).epsilon(1e-8));
    }
}

TEST_CASE("evolution report on the exact sphere")
{
    const FlowConfig c = sphere_config(2, "mean_curvature", 1.0, 200);
    const FlowHistory h = exact_sphere_history(c, 25, 0.5 * sphere_extinction_time(c));
    const MonitorReport a = evolution_report(h, EvolutionQuantity::F, 20, 0.05, 7);
    const MonitorReport b = evolution_report(h, EvolutionQuantity::F, 20, 0.05, 7);
    CHECK(a.verdict == Verdict::Pass);
    CHECK(a.series == b.series);
    CHECK(report_json(a) == report_json(b));
    // k-bar equals kappa_n on the sphere: no point lies in the domain
    const MonitorReport insc = evolution_report(h, EvolutionQuantity::Inscribed, 20, 0.05, 7);
    CHECK(insc.verdict == Verdict::Informational);
    CHECK(insc.scalars.at("points") == 0.0);
}

TEST_CASE("tracking")
{
    const FlowConfig c = sphere_config(2, "mean_curvature", 1.0, 200);
    const FlowHistory h = exact_sphere_history(c, 5, 0.1);
    CHECK(track(h, 1, 17, 2) == 17);

    FlowConfig e;
    e.shape.kind = "ellipsoid";
    e.shape.n = 2;
    e.shape.resolution = 100;
    e.shape.profile_policy.max_ratio = 1.05;
    e.shape.profile_policy.min_ratio = 0.95;
    e.max_time = 0.2;
    e.snapshot_every = 40;
    e.full_summaries = false;
    const FlowHistory r = run(e);
    int from = -1;
    for (int i = 0; i + 1 < int(r.entries.size()); ++i)
        if (r.entries[i + 1].summary.remeshes != r.entries[i].summary.remeshes) from = i;
    REQUIRE(from >= 0);
    const Surface &a = *r.entries[from].surface, &b = *r.entries[from + 1].surface;
    for (int k = 5; k < a.size(); k += 23) {
        const int j = track(r, from, k, from + 1);
        CHECK(j == b.nearest(a.point(k).position));
    }
}

TEST_CASE("pinching series on the sphere")
{
    const FlowConfig c = sphere_config(3, "mean_curvature", 1.0, 200);
    const FlowHistory h = exact_sphere_history(c, 12, 0.15);
    const MonitorReport cyl = pinching_series(h, PinchingSeriesKind::Cylindrical, 0, 0.0, 0.0);
    for (double v : cyl.series.at("ratio")) CHECK(std::abs(v) <= 1e-12);
    CHECK(cyl.verdict == Verdict::Pass);
    const MonitorReport in = pinching_series(h, PinchingSeriesKind::NoncollapseInterior, 0, 1e-3);
    const MonitorReport ex = pinching_series(h, PinchingSeriesKind::NoncollapseExterior, 0, 1e-3);
    CHECK(in.verdict == Verdict::Pass);
    CHECK(ex.verdict == Verdict::Pass);
    for (double v : in.series.at("ratio")) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-9));
    CHECK(pinching_series_kind_from_string(to_string(PinchingSeriesKind::CylDistanceAtMax)) ==
          PinchingSeriesKind::CylDistanceAtMax);
    CHECK_THROWS_AS(pinching_series_kind_from_string("sideways"), ConfigError);

    // Cyl_1 points of a capsule: kappa_n - c_1 F = 0
    ShapeSpec capsule;
    capsule.kind = "capsule";
    capsule.n = 3;
    capsule.length = 2.0;
    capsule.resolution = 400;
    CHECK(std::abs(pinching_ratio(*make_shape(capsule), SpeedFunction::mean_curvature(3),
                                  PinchingSeriesKind::Cylindrical, 1)) <= 1e-9);
}

TEST_CASE("non-collapsing ratios on a flowing ellipsoid")
{
    FlowConfig c;
    c.shape.kind = "ellipsoid";
    c.shape.n = 2;
    c.shape.resolution = 150;
    c.max_time = 0.2;
    c.snapshot_every = 100;
    const FlowHistory h = run(c);
    REQUIRE(h.entries.size() >= 3);
    CHECK(pinching_series(h, PinchingSeriesKind::NoncollapseInterior, 0).verdict == Verdict::Pass);
    CHECK(pinching_series(h, PinchingSeriesKind::NoncollapseExterior, 0).verdict == Verdict::Pass);
    const MonitorReport r1 = pinching_series(h, PinchingSeriesKind::NoncollapseInterior, 0);
    const MonitorReport r2 = pinching_series(h, PinchingSeriesKind::NoncollapseInterior, 0);
    CHECK(r1.series == r2.series);
}

TEST_CASE("L^p pinching norm")
{
    const FlowConfig c = sphere_config(3, "mean_curvature", 1.0, 200);
    const FlowHistory h = exact_sphere_history(c, 8, 0.1);
    const MonitorReport r = lp_pinching_norm(h, cylindrical_context(3, 0));
    for (double v : r.series.at("log_norm")) CHECK(v == -std::numeric_limits<double>::infinity());
    CHECK(r.scalars.at("first_empty_snapshot") == 0.0);
    CHECK(r.verdict == Verdict::Pass);

    // on a convex ellipsoid G is ~1e-39, far below eps F: empty support
    auto e = profile_ellipsoid(3, 2.0, 1.0, 200);
    CHECK(log_lp_norm(*e, cylindrical_context(3, 0)) == -std::numeric_limits<double>::infinity());

    // eps = 0: G_sigma^p ~ 1e-780 is out of double range, its log is not
    const PinchingContext ctx = cylindrical_context(3, 0, 0.0);
    const double base = log_lp_norm(*e, ctx);
    REQUIRE(std::isfinite(base));
    CHECK(base < -1700.0);
    // lengths x lambda: G_sigma^p has degree -sigma p, the measure degree n
    for (double lambda : {0.5, 3.0}) {
        const double shifted = log_lp_norm(*e->scaled(lambda), ctx);
        CHECK(shifted - base == doctest::Approx((3 - ctx.sigma * ctx.p) * std::log(lambda)).epsilon(1e-10));
    }

    CHECK(std::isfinite(log_lp_norm(*e->scaled(1e-3), cylindrical_context(3, 0, 0.0, 50))));
}

TEST_CASE("Poincare inequality")
{
    auto s = profile_sphere(2, 1.0, 400);
    const Vector u = polar_bump(*s, 0.5);
    const MonitorReport r = poincare_check(*s, u, 2.0, 1, 0.05);
    CHECK(r.verdict == Verdict::Informational);
    CHECK(r.scalars.at("gamma") > 0.0);
    CHECK(r.scalars.at("grad_A_term") <= 1e-9 * r.scalars.at("grad_u_term"));
    // the sphere is umbilic, so m = 0 violates the support hypothesis
    CHECK_THROWS_AS(poincare_check(*s, u, 2.0, 0, 0.05), DegenerateInput);
    const MonitorReport zero = poincare_check(*s, Vector::Zero(s->size()), 2.0, 1, 0.05);
    CHECK(std::isnan(zero.scalars.at("gamma")));
    CHECK(zero.detail.find("degenerate") != std::string::npos);

    for (double lambda : {0.5, 3.0}) {
        auto t = s->scaled(lambda);
        CHECK(poincare_check(*t, u, 2.0, 1, 0.05).scalars.at("gamma") ==
              doctest::Approx(r.scalars.at("gamma")).epsilon(1e-8));
    }

    auto e = profile_ellipsoid(2, 2.0, 1.0, 400);
    Vector band(e->size());
    for (int i = 0; i < e->size(); ++i) {
        const double z = e->point(i).position[0] / 2.0;
        band[i] = std::abs(z) < 0.6 ? std::pow(0.36 - z * z, 3) : 0.0;
    }
    const MonitorReport re = poincare_check(*e, band, 1.0, 0, 0.01);
    CHECK(re.scalars.at("gamma") > 0.0);
    CHECK(re.scalars.at("grad_A_term") > 0.0);
}

TEST_CASE("Harnack quantity")
{
    const FlowConfig c = sphere_config(2, "mean_curvature", 1.0, 200);
    const FlowHistory h = exact_sphere_history(c, 201, 0.2);
    const double t0 = -0.3;
    for (int i = 1; i < 200; i += 33) {
        const double t = h.entries[i].summary.t, R = radius_at(c, t);
        const double closed = 4 / (R * R * R) + (2 / R) / (2 * (t - t0));
        CHECK(harnack_quantity(h, 0, i, t0) == doctest::Approx(closed).epsilon(1e-3));
        CHECK(harnack_quantity(h, 0, i, t0) > 0.0);
        CHECK(harnack_quantity(h, 0, i, -std::numeric_limits<double>::infinity()) > 0.0);
    }
    const MonitorReport r = harnack_report(h, -std::numeric_limits<double>::infinity(), 20);
    CHECK(r.verdict == Verdict::Pass);

    auto torus_history = [] {
        FlowHistory t;
        t.entries.resize(3);
        for (int i = 0; i < 3; ++i) {
            t.entries[i].surface = mesh_torus(3.0, 1.0, 48, 16);
            t.entries[i].summary.t = 0.01 * i;
        }
        return t;
    }();
    const Surface &torus = *torus_history.entries[1].surface;
    int inner = 0;
    for (int i = 0; i < torus.size(); ++i)
        if (torus.point(i).kappa[0] < torus.point(inner).kappa[0]) inner = i;
    CHECK_THROWS_AS(harnack_quantity(torus_history, inner, 1, -1.0), DegenerateInput);
}

TEST_CASE("ancient diagnostics on the exact sphere")
{
    for (int n : {2, 3}) {
        const FlowConfig c = sphere_config(n, "mean_curvature", 1.0, 400);
        const double T = sphere_extinction_time(c);
        const FlowHistory h = exact_sphere_history(c, 25, 0.9 * T);
        AncientOptions opt;
        opt.extinction_time = T;
        const MonitorReport r = ancient_diagnostics(h, opt);
        const double f1 = n;
        for (double v : r.series.at("sqrt_tau_max_F")) CHECK(v == doctest::Approx(std::sqrt(f1 / 2)).epsilon(1e-8));
        for (double v : r.series.at("diameter_over_sqrt_tau"))
            CHECK(v == doctest::Approx(2 * std::sqrt(2 * f1)).epsilon(1e-8));
        for (double v : r.series.at("eccentricity")) CHECK(v == doctest::Approx(1.0).epsilon(1e-3));
        for (double v : r.series.at("max_grad_ratio")) CHECK(v <= 1e-12);
        CHECK(r.scalars.at("r_hat") == doctest::Approx((n + 1) / 2.0).epsilon(1e-3));
        CHECK(r.scalars.at("sqrt_tau_max_F_spread") <= 1e-8);
        CHECK(r.verdict == Verdict::Informational);
    }
    CHECK(power_law_exponent({1, 2, 4, 8}, {3, 3 * std::pow(2, 1.5), 3 * std::pow(4, 1.5), 3 * std::pow(8, 1.5)}) ==
          doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("Gauss integral")
{
    CHECK(gauss_integral(*icosphere(4, 1.0)).verdict == Verdict::Pass);
    CHECK(gauss_integral(*mesh_ellipsoid(4, 2, 1, 1)).verdict == Verdict::Pass);
    CHECK(gauss_integral(*mesh_torus(3.0, 1.0, 128, 43)).verdict == Verdict::Pass);
    CHECK(gauss_integral(*mesh_torus(3.0, 1.0, 48, 16)).verdict == Verdict::Fail);
    CHECK_THROWS_AS(gauss_integral(*profile_sphere(2, 1.0, 50)), ConfigError);
}

TEST_CASE("report artifacts")
{
    const FlowConfig c = sphere_config(2, "mean_curvature", 1.0, 100);
    const FlowHistory h = exact_sphere_history(c, 6, 0.1);
    MonitorReport a = area_decay_report(h);
    MonitorReport l = lp_pinching_norm(h, cylindrical_context(2, 0));
    const auto j = nlohmann::json::parse(report_json(l));
    CHECK(j["name"] == l.name);
    CHECK(j["series"]["log_norm"][0] == "-inf");
    CHECK(j["verdict"] == "pass");

    const std::string csv = combined_csv({a, l});
    const std::string header = csv.substr(0, csv.find('\n'));
    CHECK(header.rfind("t,", 0) == 0);
    CHECK(header.find("area_decay.residual") != std::string::npos);
    CHECK(header.find(l.name + ".log_norm") != std::string::npos);
    // one row per distinct time
    CHECK(std::count(csv.begin(), csv.end(), '\n') == int(h.entries.size()) + 1);
}
