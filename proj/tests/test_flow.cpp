#include "doctest.h"

#include "cflow/flow.hpp"

#include <cmath>

using namespace cflow;

namespace {

double mean_radius(const Surface &s)
{
    double r = 0.0;
    for (int i = 0; i < s.size(); ++i) r += s.point(i).position.norm();
    return r / s.size();
}

FlowConfig profile_sphere_config(int n, int segments)
{
    FlowConfig c;
    c.shape.kind = "sphere";
    c.shape.n = n;
    c.shape.resolution = segments;
    c.full_summaries = false;
    return c;
}

}  // namespace

TEST_CASE("stable time step law")
{
    const SpeedFunction H = SpeedFunction::mean_curvature(3);
    auto s = profile_sphere(3, 1.0, 200);
    const double h = s->spacing_min();
    CHECK(stable_dt(*s, H, 0.5) == doctest::Approx(0.5 * h * h / (2 * 3)).epsilon(1e-12));
    auto fine = profile_sphere(3, 1.0, 400);
    const double ratio = stable_dt(*fine, H, 0.5) / stable_dt(*s, H, 0.5);
    CHECK(ratio == doctest::Approx(std::pow(fine->spacing_min() / h, 2)).epsilon(1e-12));
    CHECK(ratio == doctest::Approx(0.25).epsilon(1e-4));

    auto m = icosphere(3, 1.0);
    const SpeedFunction H2 = SpeedFunction::mean_curvature(2);
    CHECK(stable_dt(*m, H2, 0.4) == doctest::Approx(0.4 * std::pow(m->spacing_min(), 2) / 4).epsilon(1e-12));
    CHECK_THROWS_AS(stable_dt(*m, H2, 1.0), ConfigError);

    // harmonic mean: fdot of a small slot grows toward the boundary of the positive cone
    const SpeedFunction hm(SpeedSpec("harmonic_mean"), 2);
    double previous = 0.0;
    for (double a : {1.0, 0.3, 0.1, 0.03}) {
        auto e = profile_ellipsoid(2, 1.0 / a, 1.0, 200);
        double trace = 0.0;
        for (int i = 0; i < e->size(); ++i) trace = std::max(trace, hm.gradient(e->point(i).kappa.values()).sum());
        CHECK(trace > previous);
        previous = trace;
    }
    for (double a : {0.3, 0.1}) {
        const Vector k = (Vector(2) << a, 1.0).finished();
        const Vector k2 = (Vector(2) << a / 3, 1.0).finished();
        CHECK(hm.gradient(k2).sum() > hm.gradient(k).sum());
    }
}

TEST_CASE("one step of a sphere")
{
    for (const char *name : {"mean_curvature", "harmonic_mean", "norm", "two_harmonic"}) {
        const SpeedFunction f{SpeedSpec(name), 3};
        const double f1 = f.value(Vector::Ones(3));
        auto s = profile_sphere(3, 2.0, 400);
        const double dt = stable_dt(*s, f, 0.5);
        auto next = step(*s, f, f.cone(), dt);
        const double expected = 2.0 - dt * f1 / 2.0;
        CHECK(mean_radius(*next) == doctest::Approx(expected).epsilon(1e-12));
        const double exact = std::sqrt(4.0 - 2 * f1 * dt);
        CHECK(std::abs(mean_radius(*next) - exact) <= 2 * dt * dt * f1 * f1 / 8);
    }
}

TEST_CASE("positive speed")
{
    auto e = profile_ellipsoid(3, 2.0, 1.0, 200);
    for (const char *name : {"mean_curvature", "harmonic_mean", "norm", "two_harmonic"}) {
        const SpeedFunction f{SpeedSpec(name), 3};
        CHECK(speed_values(*e, f).minCoeff() > 0.0);
    }
}

TEST_CASE("torus leaves the positive cone")
{
    auto t = mesh_torus(3.0, 1.0, 48, 16);
    const SpeedFunction hm(SpeedSpec("harmonic_mean"), 2);
    CHECK_THROWS_AS(stable_dt(*t, hm, 0.5), ConeViolation);
    CHECK_THROWS_AS(step(*t, hm, hm.cone(), 1e-4), ConeViolation);
    try {
        step(*t, hm, hm.cone(), 1e-4);
    } catch (const ConeViolation &e) {
        CHECK(std::string(e.what()).find("type-0") != std::string::npos);
    }

    FlowConfig c;
    c.speed = SpeedSpec("harmonic_mean");
    c.shape.kind = "torus";
    c.shape.representation = "mesh";
    c.shape.resolution = 48;
    c.shape.radius = 3.0;
    c.shape.tube = 1.0;
    const FlowHistory h = run(c);
    CHECK(h.termination == "cone_exit");
    CHECK(h.steps == 0);
}

TEST_CASE("sphere law on profiles")
{
    // n = 3, H: R(t)^2 = R0^2 - 6t
    FlowConfig c = profile_sphere_config(3, 200);
    c.max_time = 0.96 / 6;
    c.snapshot_every = 200;
    const FlowHistory h = run(c);
    CHECK(h.termination == "max_time");
    REQUIRE(h.entries.size() >= 3);
    for (const HistoryEntry &e : h.entries) {
        const double exact = std::sqrt(1.0 - 6 * e.summary.t);
        CHECK(std::abs(mean_radius(*e.surface) - exact) / exact <= 0.01);
        CHECK(std::abs(e.summary.max_cyl_ratio) <= 1e-3);
    }
    for (size_t i = 1; i < h.entries.size(); ++i) CHECK(h.entries[i].summary.t > h.entries[i - 1].summary.t);

    // O(dt) + O(h^2): the error at a fixed time falls under refinement
    std::vector<double> err;
    for (int N : {50, 100, 200}) {
        FlowConfig r = profile_sphere_config(3, N);
        r.max_time = 0.1;
        r.snapshot_every = 1000000;
        const FlowHistory hr = run(r);
        err.push_back(std::abs(mean_radius(*hr.entries.back().surface) - std::sqrt(1.0 - 0.6)));
    }
    CHECK(err[1] < 0.5 * err[0]);
    CHECK(err[2] < 0.5 * err[1]);
}

TEST_CASE("runs are deterministic")
{
    FlowConfig c;
    c.shape.kind = "ellipsoid";
    c.shape.n = 2;
    c.shape.resolution = 120;
    c.max_time = 0.05;
    c.snapshot_every = 100;
    const FlowHistory a = run(c), b = run(c);
    REQUIRE(a.entries.size() == b.entries.size());
    for (size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].summary.t == b.entries[i].summary.t);
        CHECK(a.entries[i].summary.max_F == b.entries[i].summary.max_F);
        CHECK(a.entries[i].summary.max_insc_ratio == b.entries[i].summary.max_insc_ratio);
    }
}

TEST_CASE("parabolic rescaling")
{
    FlowConfig c;
    c.shape.kind = "ellipsoid";
    c.shape.n = 3;
    c.shape.resolution = 150;
    c.max_time = 0.1;
    c.snapshot_every = 100;
    c.pinching_m = 0;
    const FlowHistory base = run(c);
    for (double lambda : {0.5, 3.0}) {
        const FlowHistory h = run(scaled_config(c, lambda));
        REQUIRE(h.entries.size() == base.entries.size());
        CHECK(h.steps == base.steps);
        CHECK(h.remeshes == base.remeshes);
        for (size_t i = 0; i < h.entries.size(); ++i) {
            const SnapshotSummary &s = h.entries[i].summary, &r = base.entries[i].summary;
            CHECK(s.t / (lambda * lambda) == doctest::Approx(r.t).epsilon(1e-12));
            CHECK(s.max_cyl_ratio == doctest::Approx(r.max_cyl_ratio).epsilon(1e-8));
            CHECK(s.min_convexity_ratio == doctest::Approx(r.min_convexity_ratio).epsilon(1e-8));
            CHECK(s.max_insc_ratio == doctest::Approx(r.max_insc_ratio).epsilon(1e-8));
            CHECK(s.min_exsc_ratio == doctest::Approx(r.min_exsc_ratio).epsilon(1e-8));
            CHECK(s.circumradius / s.inradius == doctest::Approx(r.circumradius / r.inradius).epsilon(1e-8));
            CHECK(s.max_F * lambda == doctest::Approx(r.max_F).epsilon(1e-8));
        }
    }
    CHECK_THROWS_AS(scaled_config(c, -1.0), ConfigError);
}

TEST_CASE("enclosing sphere keeps enclosing")
{
    FlowConfig c;
    c.shape.kind = "ellipsoid";
    c.shape.n = 2;
    c.shape.resolution = 200;
    c.max_time = 0.3;
    c.snapshot_every = 200;
    c.full_summaries = false;
    const FlowHistory h = run(c);
    REQUIRE(h.entries.size() >= 3);
    // the ball of radius 2.05 about the origin encloses the initial ellipsoid
    for (const HistoryEntry &e : h.entries) {
        const double R = std::sqrt(2.05 * 2.05 - 2 * 2 * e.summary.t);
        double far = 0.0;
        for (int i = 0; i < e.surface->size(); ++i) far = std::max(far, e.surface->point(i).position.norm());
        CHECK(far < R);
    }
}

TEST_CASE("dumbbell pinches at the neck")
{
    FlowConfig c;
    c.shape.kind = "dumbbell";
    c.shape.n = 3;
    c.shape.resolution = 300;
    c.snapshot_every = 200;
    c.pinching_m = 1;
    c.full_summaries = false;
    const FlowHistory h = run(c);
    CHECK((h.termination == "blowup" || h.termination == "resolution"));
    const SnapshotSummary &last = h.entries.back().summary;
    const Vector x = h.entries.back().surface->point(last.argmax_F).position;
    CHECK(std::abs(x[0]) < 0.2);
    CHECK(last.cyl_distance_at_max[1] < h.entries.front().summary.cyl_distance_at_max[1]);
}

TEST_CASE("invalid flow configuration")
{
    FlowConfig c;
    c.c_cfl = 1.5;
    CHECK_THROWS_AS(run(c), ConfigError);
}
