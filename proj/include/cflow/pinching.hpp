////////////////////////////////////////////////////////////////////////////////
// pinching.hpp
////////////////////////////////////////////////////////////////////////////////
//  Pinching functions built from a speed f and the cutoff
//
//      phi(r) = r^4 exp(-1/r^2)  (r < 0),   0  (r >= 0),
//
//  namely G1 (cylindrical / inscribed / exscribed), G2, G = G1^2/G2 and
//  G_sigma = (G - eps F) F^(sigma-1) - K, together with the quadratic forms
//
//      Q_{g,f}(T) = sum_k [ g^k f''(Z)[T_k, T_k] - f^k g''(Z)[T_k, T_k] ],
//
//  T_k = (T_kpq)_pq, evaluated at diagonal Z = diag(z).
////////////////////////////////////////////////////////////////////////////////
#ifndef CFLOW_PINCHING_HPP
#define CFLOW_PINCHING_HPP

#include "cflow/speed.hpp"

#include <optional>
#include <vector>

namespace cflow {

struct PhiValue {
    double value, first, second;
};

PhiValue phi(double r);

enum class PinchingKind { Cylindrical, Inscribed, Exscribed };

std::string to_string(PinchingKind k);
PinchingKind pinching_kind_from_string(const std::string &name);

struct PinchingContext {
    std::shared_ptr<const SpeedFunction> speed;
    PinchingKind kind = PinchingKind::Cylindrical;
    int m = 0;
    std::shared_ptr<const SymmetricCone> cone;  // Gamma_0
    double theta = 0.0;
    double epsilon = 0.0;
    double sigma = 0.25;
    double K = 0.0;
    int p = 2;
    double c_m = 0.0;  // filled from the speed; unused by the exscribed kind

    int dim() const { return speed->dim(); }
};

/// Checks sigma, p, m, eps, K and that cone and speed agree. Throws ConfigError.
void validate(const PinchingContext &ctx);

/// Builds a context with c_m from the speed and, unless given, Theta from
/// theta_constant over the cone (concave variant for the cylindrical and
/// inscribed kinds, convex variant for the exscribed kind) raised to the floors.
PinchingContext make_pinching_context(const SpeedFunction &speed, PinchingKind kind, int m,
                                      const SymmetricCone &cone, double epsilon, double sigma, int p,
                                      double K = 0.0, const std::vector<double> &theta_floors = {},
                                      std::optional<double> theta = std::nullopt);

/// g1(z) = f(z) sum_i phi((c_m f(z) - z_i)/f(z)) with analytic derivatives.
class CylindricalG1 : public SymmetricFunction {
public:
    CylindricalG1(SymmetricFunctionPtr f, double c_m) : m_f(std::move(f)), m_c(c_m) {}
    int dim() const override { return m_f->dim(); }
    double value(const Vector &z) const override;
    Vector gradient(const Vector &z) const override;
    Matrix hessian(const Vector &z) const override;
    bool analytic_hessian() const override { return m_f->analytic_hessian(); }
    std::string name() const override { return "g1"; }

private:
    SymmetricFunctionPtr m_f;
    double m_c;
};

/// g2 as a symmetric function: 2 Theta f - tr - |.| (cylindrical, inscribed)
/// or 2 Theta f + tr - |.| (exscribed).
SymmetricFunctionPtr g2_function(const PinchingContext &ctx);

double g1(const PinchingContext &ctx, const CurvatureTuple &kappa, std::optional<double> k_upper = std::nullopt,
          std::optional<double> k_lower = std::nullopt);
/// Throws DegenerateInput if the value is not positive (Theta too small).
double g2(const PinchingContext &ctx, const CurvatureTuple &kappa);
double g_ratio(const PinchingContext &ctx, const CurvatureTuple &kappa, std::optional<double> k_upper = std::nullopt,
               std::optional<double> k_lower = std::nullopt);

struct GSigma {
    double value;
    double positive_part;
};

GSigma g_sigma(const PinchingContext &ctx, const CurvatureTuple &kappa, std::optional<double> k_upper = std::nullopt,
               std::optional<double> k_lower = std::nullopt);

/// Totally symmetric n x n x n array stored as n symmetric slices T[k](p,q).
using SymTensor3 = std::vector<Matrix>;

SymTensor3 symmetrize(const SymTensor3 &T);
double tensor_norm(const SymTensor3 &T);
/// Gaussian totally symmetric tensor normalized to |T| = 1.
SymTensor3 random_sym_tensor(int n, std::mt19937_64 &rng);

/// Q_{gA,gB}(T) at diag(kappa); T is symmetrized first.
double quadratic_form_Q(const SymmetricFunction &gA, const SymmetricFunction &gB, const CurvatureTuple &kappa,
                        const SymTensor3 &T);

struct QSignReport {
    std::string config;
    int samples = 0;
    double min_normalized = 0.0;  // min of Q F / |T|^2 over |kappa| = |T| = 1
    double max_normalized = 0.0;
    double empirical_gamma = 0.0;  // = min_normalized
    Vector witness_min_kappa, witness_max_kappa;
    SymTensor3 witness_min_T, witness_max_T;
};

/// F is taken to be gB.
QSignReport sample_q_extremes(const SymmetricFunction &gA, const SymmetricFunction &gB, const SymmetricCone &cone,
                              int samples, std::uint64_t seed, const std::string &config = "");

/// sigma^-1 Theta^-1 f Q_{g2,f}(T) + sum_k f^k (sum_p f^p T_kpp)^2.
double lemma41_combined(const PinchingContext &ctx, const CurvatureTuple &kappa, const SymTensor3 &T, double sigma);

/// Q_{g2,f}(T)/g2 + (sigma/2) |grad F|_F^2 / F^2 with grad_k F = sum_p f^p T_kpp.
double lemma41_lhs(const PinchingContext &ctx, const CurvatureTuple &kappa, const SymTensor3 &T, double sigma);

/// lemma41_lhs - 4 gamma sigma |T|^2 / F^2.
double lemma41_form(const PinchingContext &ctx, const CurvatureTuple &kappa, const SymTensor3 &T, double sigma,
                    double gamma);

/// Minimum of lemma41_combined over seeded samples with |kappa| = |T| = 1.
QSignReport sample_lemma41(const PinchingContext &ctx, double sigma, int samples, std::uint64_t seed);

}  // namespace cflow

#endif
