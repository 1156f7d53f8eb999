#include "doctest.h"

#include "cflow/certify.hpp"
#include "cflow/speed.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace cflow;

TEST_CASE("evaluate examples")
{
    CHECK(evaluate(SpeedFunction::mean_curvature(3), {1, 2, 3}) == 6.0);
    CHECK(evaluate(SpeedFunction::harmonic_mean(3), {1, 2, 2}) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(evaluate(SpeedFunction::two_harmonic(3), {1, 1, 1}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(evaluate(SpeedFunction::power_mean(3, 0.0), {1, 2, 4}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(evaluate(SpeedFunction::harmonic_mean(3), {-1, 2, 2}), ConeViolation);
    CHECK_THROWS_WITH(evaluate(SpeedFunction::harmonic_mean(3), {-1, 2, 2}), doctest::Contains("type-0"));
    CHECK_THROWS_AS(evaluate(SpeedFunction::harmonic_mean(3), {1, 2}), DimensionMismatch);
    CHECK_THROWS_AS(SpeedFunction(SpeedSpec{"gauss"}, 3), ConfigError);
}

TEST_CASE("derivative examples")
{
    auto d = derivatives(SpeedFunction::mean_curvature(3), {1, 2, 3});
    CHECK(d.gradient == Vector::Ones(3));
    CHECK(d.eigen_hessian.norm() == 0.0);

    auto p = derivatives(SpeedFunction::power_mean(2, 2.0), {1, 1});
    CHECK(p.value == doctest::Approx(1.0));
    CHECK(p.gradient[0] == doctest::Approx(0.5));
    CHECK(p.gradient[1] == doctest::Approx(0.5));

    auto e = SpeedFunction::elementary_ratio(3, 2, 1);
    Vector z(3);
    z << 1, 2, 3;
    CHECK(evaluate(e, CurvatureTuple(z)) == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
    Vector fd = oracle::central_gradient(e, z, 1e-5 * z.norm());
    CHECK((e.gradient(z) - fd).norm() / fd.norm() <= 1e-6);
}

TEST_CASE("second derivative form examples")
{
    Matrix V(2, 2);
    V << 0, 1, 1, 0;
    CHECK(second_derivative_form(SpeedFunction::norm(2), {1, 2}, V) == doctest::Approx(2 / std::sqrt(5.0)));
    CHECK(second_derivative_form(SpeedFunction::mean_curvature(2), {1, 2}, V) == 0.0);

    std::mt19937_64 rng(1);
    auto f = SpeedFunction::power_mean(3, 0.5);
    Vector z(3);
    z << 1, 2, 3;
    for (int s = 0; s < 10; ++s) {
        Matrix W = oracle::random_symmetric(3, rng);
        const double exact = oracle::matrix_second_difference(f, z, W, 1e-2);
        CHECK(std::abs(second_derivative_form(f, CurvatureTuple(z), W) - exact) <= 1e-5 * std::abs(exact));
    }
}

TEST_CASE("coincident eigenvalues use the analytic limit")
{
    std::mt19937_64 rng(2);
    Vector z(3);
    z << 1, 1, 2;
    for (auto &inst : oracle::catalog_instances(3)) {
        SpeedFunction f(inst.spec, 3);
        for (int s = 0; s < 5; ++s) {
            Matrix W = oracle::random_symmetric(3, rng);
            const double exact = oracle::matrix_second_difference(f, z, W, 1e-2);
            INFO(inst.label);
            CHECK(std::abs(second_derivative_form(f, CurvatureTuple(z), W) - exact) <= 1e-5 * (1 + std::abs(exact)));
        }
    }
    LambdaFunction fd("fd", 3, [](const Vector &v) { return v.norm(); }, [](const Vector &v) -> Vector { return v / v.norm(); });
    Matrix W = Matrix::Ones(3, 3);
    CHECK_THROWS_AS(matrix_second_derivative(fd, z, W), DegenerateInput);
}

TEST_CASE("catalog calculus at random cone points")
{
    // Points of a uniformly elliptic inner cone: a boundary layer of width
    // 0.02 is excluded, where the fixed-step difference oracle itself loses
    // accuracy.
    for (int n : {2, 3, 5}) {
        for (auto &inst : oracle::catalog_instances(n)) {
            SpeedFunction f(inst.spec, n);
            auto inner = SymmetricCone::shrunken(f.cone(), 0.02);
            INFO(inst.label << " n=" << n);
            for (int s = 0; s < 100; ++s) {
                auto rng = indexed_rng(99, s);
                Vector z = sample_cone_slice(inner, rng);
                std::sort(z.data(), z.data() + n);
                Vector g = f.gradient(z);
                CHECK(g.minCoeff() > 0.0);
                CHECK(std::abs(g.dot(z) - f.value(z)) <= 1e-10 * f.value(z));
                Vector fd = oracle::central_gradient(f, z, 1e-5 * z.norm());
                CHECK((g - fd).norm() <= 1e-6 * g.norm());
                Matrix H = f.hessian(z);
                CHECK((H - H.transpose()).norm() <= 1e-12 * (1 + H.norm()));
                CHECK((H * z).norm() * z.norm() / f.value(z) <= 1e-8 * (1 + H.norm()));
                CHECK(f.value(3.0 * z) == doctest::Approx(3.0 * f.value(z)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("cylinder constants")
{
    CHECK(cylinder_constant(SpeedFunction::mean_curvature(3), 1) == 0.5);
    CHECK(cylinder_constant(SpeedFunction::mean_curvature(3), 0) == doctest::Approx(1.0 / 3.0));
    CHECK(cylinder_constant(SpeedFunction::two_harmonic(3), 1) == doctest::Approx(2.5));
    CHECK_THROWS_AS(cylinder_constant(SpeedFunction::two_harmonic(3), 2), DegenerateInput);
    CHECK_THROWS_AS(cylinder_constant(SpeedFunction::mean_curvature(3), 3), ConfigError);
}

TEST_CASE("theta constant")
{
    auto H2 = SpeedFunction::mean_curvature(2);
    CHECK(theta_constant(H2, SymmetricCone::positive(2), ThetaVariant::Concave) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(theta_constant(H2, SymmetricCone::positive(2), ThetaVariant::Concave, {5.0}) == 5.0);

    // Unit directions within chord distance 0.1 of the diagonal: angle to the
    // diagonal at most 2 asin(0.05).
    const double a0 = 2 * std::asin(0.05);
    auto cone = SymmetricCone::shrunken(SymmetricCone::positive(2), std::sin(M_PI / 4 - a0));
    double grid = 0;
    for (int i = 0; i <= 100000; ++i) {
        const double t = M_PI / 4 - a0 + 2 * a0 * i / 100000.0;
        grid = std::max(grid, (std::cos(t) + std::sin(t) + 1) / (std::cos(t) + std::sin(t)));
    }
    CHECK(grid > (2 + std::sqrt(2.0)) / 2);
    CHECK(theta_constant(H2, cone, ThetaVariant::Concave) == doctest::Approx(grid).epsilon(1e-8));

    CHECK(theta_constant(SpeedFunction::mean_curvature(3), SymmetricCone::positive(3), ThetaVariant::Concave) ==
          doctest::Approx(2.0).epsilon(1e-6));
    CHECK_THROWS_AS(theta_constant(SpeedFunction::two_harmonic(3), SymmetricCone::m_convex(3, 1), ThetaVariant::Concave),
                    DegenerateInput);

    // Theta dominates the ratio on sampled points of the cone.
    auto hm = SpeedFunction::harmonic_mean(3);
    auto g0 = SymmetricCone::shrunken(SymmetricCone::positive(3), 0.1);
    const double th = theta_constant(hm, g0, ThetaVariant::Concave);
    std::mt19937_64 rng(4);
    for (int s = 0; s < 2000; ++s) {
        Vector u = sample_cone_slice(g0, rng);
        CHECK((u.sum() + u.norm()) / hm.value(u) <= th * (1 + 1e-9));
    }
}

TEST_CASE("inverse dual derivatives")
{
    for (auto &inst : oracle::catalog_instances(3)) {
        SpeedFunction f(inst.spec, 3);
        InverseDual d(f.impl());
        Vector w(3);
        w << 0.7, 1.3, 2.1;
        INFO(inst.label);
        CHECK(d.value(w) == doctest::Approx(1.0 / f.value(w.cwiseInverse())));
        Vector fd = oracle::central_gradient(d, w, 1e-5 * w.norm());
        CHECK((d.gradient(w) - fd).norm() <= 1e-6 * fd.norm());
        Matrix Hfd(3, 3);
        for (int j = 0; j < 3; ++j) {
            Vector wp = w, wm = w;
            wp[j] += 1e-5;
            wm[j] -= 1e-5;
            Hfd.col(j) = (d.gradient(wp) - d.gradient(wm)) / 2e-5;
        }
        CHECK((d.hessian(w) - Hfd).norm() <= 1e-6 * (1 + Hfd.norm()));
    }
}

TEST_CASE("certification")
{
    auto H = SpeedFunction::mean_curvature(3);
    for (auto p : {SpeedProperty::OneHomogeneous, SpeedProperty::Monotone, SpeedProperty::Concave,
                   SpeedProperty::Convex, SpeedProperty::InverseConcave})
        CHECK(certify(H, H.cone(), p, 500, 1).passed);

    auto A = SpeedFunction::norm(3);
    CHECK(certify(A, A.cone(), SpeedProperty::Convex, 500, 1).passed);
    auto bad = certify(A, A.cone(), SpeedProperty::Concave, 500, 1);
    CHECK_FALSE(bad.passed);
    REQUIRE(bad.witness_v.size() == 9);
    CHECK(matrix_second_derivative(A, bad.witness_kappa, bad.witness_v) > 0.0);

    auto hm = SpeedFunction::harmonic_mean(3);
    CHECK(certify(hm, hm.cone(), SpeedProperty::Concave, 10000, 2).passed);
    CHECK(certify(SpeedFunction::power_mean(3, 2.0), SymmetricCone::positive(3), SpeedProperty::Concave, 500, 1)
              .passed == false);
    CHECK(property_from_string("inverse_concave") == SpeedProperty::InverseConcave);
    CHECK_THROWS_AS(property_from_string("smooth"), ConfigError);
}

TEST_CASE("trace comparison for concave and convex speeds")
{
    for (int n : {2, 3, 4}) {
        for (auto &inst : oracle::catalog_instances(n)) {
            SpeedFunction f(inst.spec, n);
            if (f.convexity() == Convexity::Neither) continue;
            const double c = f.value(Vector::Ones(n)) / n;
            std::mt19937_64 rng(8);
            INFO(inst.label);
            for (int s = 0; s < 300; ++s) {
                Vector u = sample_cone_slice(f.cone(), rng);
                if (f.concave()) CHECK(f.value(u) <= c * u.sum() * (1 + 1e-12) + 1e-14);
                if (f.convex()) CHECK(f.value(u) >= c * u.sum() * (1 - 1e-12) - 1e-14);
            }
        }
    }
}
