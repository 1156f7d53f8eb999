////////////////////////////////////////////////////////////////////////////////
// speed.hpp
////////////////////////////////////////////////////////////////////////////////
//  The admissible-speed catalog: smooth, symmetric, one-homogeneous,
//  monotone f : Gamma -> R_+, each with analytic first and second eigenvalue
//  derivatives, a natural domain cone and a declared convexity class.
//
//  Catalog families (SpeedSpec::family):
//    mean_curvature      H = sum z_i                         linear, {H > 0}
//    power_mean (r)      (n^-1 sum z_i^r)^(1/r), r = 0 geometric   Gamma_+
//    harmonic_mean       power_mean with r = -1                    Gamma_+
//    norm                |z|                                convex, Gamma_+
//    elementary_ratio    (E_k/E_l)^(1/(k-l)), k > l >= 0   concave, Gamma_+
//    two_harmonic        (sum_{i<j} (z_i+z_j)^-1)^-1       concave, Gamma_2
//    combination         sum_t w_t f_t, w_t >= 0
////////////////////////////////////////////////////////////////////////////////
#ifndef CFLOW_SPEED_HPP
#define CFLOW_SPEED_HPP

#include "cflow/cone.hpp"
#include "cflow/symmetric_function.hpp"

#include <string>
#include <vector>

namespace cflow {

enum class Convexity { Linear, Concave, Convex, Neither };

std::string to_string(Convexity c);

struct SpeedSpec {
    SpeedSpec() = default;
    SpeedSpec(std::string name) : family(std::move(name)) {}

    std::string family = "mean_curvature";
    double r = 1.0;                 // power_mean
    int k = 2, l = 1;               // elementary_ratio
    std::vector<double> weights;    // combination
    std::vector<SpeedSpec> terms;   // combination

    bool operator==(const SpeedSpec &) const = default;
};

class SpeedFunction : public SymmetricFunction {
public:
    SpeedFunction(SpeedSpec spec, int n);

    static SpeedFunction mean_curvature(int n) { return {SpeedSpec{"mean_curvature"}, n}; }
    static SpeedFunction power_mean(int n, double r)
    {
        SpeedSpec s{"power_mean"};
        s.r = r;
        return {s, n};
    }
    static SpeedFunction harmonic_mean(int n) { return power_mean(n, -1.0); }
    static SpeedFunction norm(int n) { return {SpeedSpec{"norm"}, n}; }
    static SpeedFunction elementary_ratio(int n, int k, int l)
    {
        SpeedSpec s{"elementary_ratio"};
        s.k = k;
        s.l = l;
        return {s, n};
    }
    static SpeedFunction two_harmonic(int n) { return {SpeedSpec{"two_harmonic"}, n}; }

    int dim() const override { return m_n; }
    double value(const Vector &z) const override { return m_impl->value(z); }
    Vector gradient(const Vector &z) const override { return m_impl->gradient(z); }
    Matrix hessian(const Vector &z) const override { return m_impl->hessian(z); }
    bool analytic_hessian() const override { return m_impl->analytic_hessian(); }
    std::string name() const override;

    const SpeedSpec &spec() const { return m_spec; }
    const SymmetricCone &cone() const { return m_cone; }
    Convexity convexity() const { return m_convexity; }
    bool concave() const { return m_convexity == Convexity::Linear || m_convexity == Convexity::Concave; }
    bool convex() const { return m_convexity == Convexity::Linear || m_convexity == Convexity::Convex; }
    SymmetricFunctionPtr impl() const { return m_impl; }

private:
    SpeedSpec m_spec;
    int m_n;
    SymmetricFunctionPtr m_impl;
    SymmetricCone m_cone;
    Convexity m_convexity;
};

/// Names accepted in SpeedSpec::family.
std::vector<std::string> speed_catalog();

/// f(kappa); throws ConeViolation ("type-0") outside the speed's cone.
double evaluate(const SpeedFunction &speed, const CurvatureTuple &kappa);

DerivativeBundle derivatives(const SpeedFunction &speed, const CurvatureTuple &kappa);

/// f''(diag(kappa))[V, V].
double second_derivative_form(const SpeedFunction &speed, const CurvatureTuple &kappa, const Matrix &V);

/// c_m = 1 / f(0,...,0,1,...,1) with m zeros.
double cylinder_constant(const SpeedFunction &speed, int m);

enum class ThetaVariant {
    Concave,  // (tr z + |z|) / f
    Convex    // (|z| - tr z) / f
};

/// Maximum of the variant ratio over the closure of cone ∩ S^{n-1}, raised to
/// every extra lower bound. Throws DegenerateInput when f vanishes on the
/// slice closure (unbounded ratio).
double theta_constant(const SpeedFunction &speed, const SymmetricCone &cone, ThetaVariant variant,
                      const std::vector<double> &lower_bounds = {}, std::uint64_t seed = 7);

/// f_*(w) = 1 / f(1/w_1, ..., 1/w_n), defined on Gamma_+.
class InverseDual : public SymmetricFunction {
public:
    explicit InverseDual(SymmetricFunctionPtr f) : m_f(std::move(f)) {}
    int dim() const override { return m_f->dim(); }
    double value(const Vector &w) const override;
    Vector gradient(const Vector &w) const override;
    Matrix hessian(const Vector &w) const override;
    bool analytic_hessian() const override { return m_f->analytic_hessian(); }
    std::string name() const override { return m_f->name() + "_*"; }

private:
    SymmetricFunctionPtr m_f;
};

}  // namespace cflow

#endif
