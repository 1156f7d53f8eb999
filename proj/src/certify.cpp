#include "cflow/certify.hpp"

#include <cmath>

namespace cflow {

std::string to_string(SpeedProperty p)
{
    switch (p) {
        case SpeedProperty::OneHomogeneous: return "one_homogeneous";
        case SpeedProperty::Monotone: return "monotone";
        case SpeedProperty::Concave: return "concave";
        case SpeedProperty::Convex: return "convex";
        case SpeedProperty::InverseConcave: return "inverse_concave";
    }
    return "?";
}

SpeedProperty property_from_string(const std::string &name)
{
    for (auto p : {SpeedProperty::OneHomogeneous, SpeedProperty::Monotone, SpeedProperty::Concave,
                   SpeedProperty::Convex, SpeedProperty::InverseConcave})
        if (to_string(p) == name) return p;
    throw ConfigError("unknown property '" + name +
                      "'; available: one_homogeneous, monotone, concave, convex, inverse_concave");
}

namespace {

Matrix random_direction(int n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> gauss;
    Matrix V(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) V(i, j) = V(j, i) = gauss(rng);
    return V / V.norm();
}

}  // namespace

CertificationReport certify(const SpeedFunction &speed, const SymmetricCone &cone, SpeedProperty property,
                            int samples, std::uint64_t seed)
{
    const int n = speed.dim();
    if (cone.dim() != n) throw DimensionMismatch("certify: cone and speed dimensions differ");
    if (samples < 1) throw ConfigError("certify: samples must be positive");

    CertificationReport rep;
    rep.property = property;
    rep.samples = samples;
    rep.tolerance = 1e-9;
    rep.worst_margin = std::numeric_limits<double>::infinity();

    InverseDual dual(speed.impl());
    std::uniform_real_distribution<double> scale(0.1, 10.0);

    for (int s = 0; s < samples; ++s) {
        auto rng = indexed_rng(seed, s);
        Vector u;
        if (property == SpeedProperty::InverseConcave) {
            do u = sample_cone_slice(cone, rng);
            while (u.minCoeff() <= 1e-3);
        } else {
            u = sample_cone_slice(cone, rng);
        }
        const CurvatureTuple kappa(u);
        if (!contains(speed.cone(), kappa))
            throw ConeViolation("certify: sampled cone " + cone.describe() + " leaves the domain of " + speed.name());
        double margin = 0.0;
        Matrix V;
        switch (property) {
            case SpeedProperty::OneHomogeneous: {
                const double lambda = scale(rng);
                const double f = speed.value(u);
                margin = -std::abs(speed.value(lambda * u) - lambda * f) / (lambda * f);
                break;
            }
            case SpeedProperty::Monotone: {
                Vector g = speed.gradient(u);
                margin = g.minCoeff();
                // Strict monotonicity: a vanishing entry counts as a violation.
                if (margin <= 0.0) margin = std::min(margin, -2.0 * rep.tolerance);
                break;
            }
            case SpeedProperty::Concave:
            case SpeedProperty::Convex: {
                V = random_direction(n, rng);
                const double q = matrix_second_derivative(speed, kappa.values(), V);
                margin = property == SpeedProperty::Concave ? -q : q;
                break;
            }
            case SpeedProperty::InverseConcave: {
                V = random_direction(n, rng);
                Vector w = kappa.values().cwiseInverse();
                std::sort(w.data(), w.data() + n);
                margin = -matrix_second_derivative(dual, w, V) * w.norm() / dual.value(w);
                break;
            }
        }
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.witness_kappa = kappa.values();
            rep.witness_v = V;
        }
    }
    rep.passed = rep.worst_margin >= -rep.tolerance;
    return rep;
}

}  // namespace cflow
