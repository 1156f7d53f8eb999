#include "cflow/pinching.hpp"

#include <cmath>
#include <sstream>

namespace cflow {

PhiValue phi(double r)
{
    if (r >= 0.0) return {0.0, 0.0, 0.0};
    const double e = std::exp(-1.0 / (r * r));
    const double r2 = r * r;
    return {r2 * r2 * e, (4.0 * r2 * r + 2.0 * r) * e, (12.0 * r2 + 10.0 + 4.0 / r2) * e};
}

std::string to_string(PinchingKind k)
{
    switch (k) {
        case PinchingKind::Cylindrical: return "cylindrical";
        case PinchingKind::Inscribed: return "inscribed";
        case PinchingKind::Exscribed: return "exscribed";
    }
    return "?";
}

PinchingKind pinching_kind_from_string(const std::string &name)
{
    if (name == "cylindrical") return PinchingKind::Cylindrical;
    if (name == "inscribed") return PinchingKind::Inscribed;
    if (name == "exscribed") return PinchingKind::Exscribed;
    throw ConfigError("unknown pinching kind '" + name + "'; available: cylindrical, inscribed, exscribed");
}

void validate(const PinchingContext &ctx)
{
    if (!ctx.speed || !ctx.cone) throw ConfigError("pinching context needs a speed and a cone");
    const int n = ctx.dim();
    if (ctx.cone->dim() != n) throw DimensionMismatch("pinching context: cone and speed dimensions differ");
    if (!(ctx.sigma > 0.0 && ctx.sigma < 0.5)) throw ConfigError("sigma must lie in (0, 0.5)");
    if (ctx.m < 0 || ctx.m > n - 1) throw ConfigError("m must satisfy 0 ≤ m ≤ n−1");
    if (ctx.p < 2) throw ConfigError("p must be at least 2");
    if (!(ctx.epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
    if (!(ctx.K >= 0.0)) throw ConfigError("K must be non-negative");
    if (!(ctx.theta > 0.0)) throw ConfigError("Theta must be positive");
}

PinchingContext make_pinching_context(const SpeedFunction &speed, PinchingKind kind, int m,
                                      const SymmetricCone &cone, double epsilon, double sigma, int p, double K,
                                      const std::vector<double> &theta_floors, std::optional<double> theta)
{
    PinchingContext ctx;
    ctx.speed = std::make_shared<SpeedFunction>(speed);
    ctx.kind = kind;
    ctx.m = m;
    ctx.cone = std::make_shared<SymmetricCone>(cone);
    ctx.epsilon = epsilon;
    ctx.sigma = sigma;
    ctx.p = p;
    ctx.K = K;
    if (m < 0 || m > speed.dim() - 1) throw ConfigError("m must satisfy 0 ≤ m ≤ n−1");
    if (kind != PinchingKind::Exscribed) ctx.c_m = cylinder_constant(speed, m);
    if (theta) {
        ctx.theta = *theta;
        for (double lb : theta_floors) ctx.theta = std::max(ctx.theta, lb);
    } else {
        ctx.theta = theta_constant(speed, cone,
                                   kind == PinchingKind::Exscribed ? ThetaVariant::Convex : ThetaVariant::Concave,
                                   theta_floors);
    }
    validate(ctx);
    return ctx;
}

////////////////////////////////////////////////////////////////////////////////
// g1
////////////////////////////////////////////////////////////////////////////////
double CylindricalG1::value(const Vector &z) const
{
    const double f = m_f->value(z);
    double s = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) s += phi((m_c * f - z[i]) / f).value;
    return f * s;
}

Vector CylindricalG1::gradient(const Vector &z) const
{
    const double f = m_f->value(z);
    Vector fd = m_f->gradient(z);
    Vector dphi(z.size());
    double S = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        PhiValue p = phi((m_c * f - z[i]) / f);
        dphi[i] = p.first;
        S += p.value + z[i] / f * p.first;
    }
    return -dphi + S * fd;
}

Matrix CylindricalG1::hessian(const Vector &z) const
{
    const Eigen::Index n = z.size();
    const double f = m_f->value(z);
    Vector fd = m_f->gradient(z);
    Matrix H = Matrix::Zero(n, n);
    double S = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        PhiValue p = phi((m_c * f - z[i]) / f);
        S += p.value + z[i] / f * p.first;
        if (p.second == 0.0) continue;
        Vector w = z[i] / f * fd;
        w[i] -= 1.0;
        H += p.second / f * w * w.transpose();
    }
    H += S * m_f->hessian(z);
    return H;
}

SymmetricFunctionPtr g2_function(const PinchingContext &ctx)
{
    const int n = ctx.dim();
    if (ctx.kind == PinchingKind::Exscribed)
        return std::make_shared<LinearCombination>(2.0 * ctx.theta, ctx.speed, 1.0,
                                                   std::make_shared<TraceNormFunction>(n, -1.0));
    return std::make_shared<LinearCombination>(2.0 * ctx.theta, ctx.speed, -1.0,
                                               std::make_shared<TraceNormFunction>(n, 1.0));
}

double g1(const PinchingContext &ctx, const CurvatureTuple &kappa, std::optional<double> k_upper,
          std::optional<double> k_lower)
{
    switch (ctx.kind) {
        case PinchingKind::Cylindrical:
            return CylindricalG1(ctx.speed, ctx.c_m).value(kappa.values());
        case PinchingKind::Inscribed:
            if (!k_upper) throw ConfigError("inscribed G1 needs the inscribed curvature");
            return std::max(*k_upper - ctx.c_m * evaluate(*ctx.speed, kappa), 0.0);
        case PinchingKind::Exscribed:
            if (!k_lower) throw ConfigError("exscribed G1 needs the exscribed curvature");
            return std::max(-*k_lower, 0.0);
    }
    return 0.0;
}

double g2(const PinchingContext &ctx, const CurvatureTuple &kappa)
{
    const double v = g2_function(ctx)->value(kappa.values());
    if (!(v > 0.0)) {
        std::ostringstream os;
        os << "G2 = " << v << " is not positive: Theta = " << ctx.theta << " is too small for this tuple";
        throw DegenerateInput(os.str());
    }
    return v;
}

double g_ratio(const PinchingContext &ctx, const CurvatureTuple &kappa, std::optional<double> k_upper,
               std::optional<double> k_lower)
{
    const double a = g1(ctx, kappa, k_upper, k_lower);
    return a * a / g2(ctx, kappa);
}

GSigma g_sigma(const PinchingContext &ctx, const CurvatureTuple &kappa, std::optional<double> k_upper,
               std::optional<double> k_lower)
{
    const double F = evaluate(*ctx.speed, kappa);
    const double G = g_ratio(ctx, kappa, k_upper, k_lower);
    const double v = (G - ctx.epsilon * F) * std::pow(F, ctx.sigma - 1.0) - ctx.K;
    return {v, std::max(v, 0.0)};
}

////////////////////////////////////////////////////////////////////////////////
// Quadratic forms
////////////////////////////////////////////////////////////////////////////////
SymTensor3 symmetrize(const SymTensor3 &T)
{
    const int n = static_cast<int>(T.size());
    SymTensor3 S(n, Matrix::Zero(n, n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                S[a](b, c) = (T[a](b, c) + T[a](c, b) + T[b](a, c) + T[b](c, a) + T[c](a, b) + T[c](b, a)) / 6.0;
    return S;
}

double tensor_norm(const SymTensor3 &T)
{
    double s = 0.0;
    for (auto &slice : T) s += slice.squaredNorm();
    return std::sqrt(s);
}

SymTensor3 random_sym_tensor(int n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> gauss;
    SymTensor3 T(n, Matrix::Zero(n, n));
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b)
            for (int c = b; c < n; ++c) {
                const double v = gauss(rng);
                T[a](b, c) = T[a](c, b) = T[b](a, c) = T[b](c, a) = T[c](a, b) = T[c](b, a) = v;
            }
    const double len = tensor_norm(T);
    for (auto &slice : T) slice /= len;
    return T;
}

double quadratic_form_Q(const SymmetricFunction &gA, const SymmetricFunction &gB, const CurvatureTuple &kappa,
                        const SymTensor3 &T)
{
    const int n = kappa.dim();
    if (static_cast<int>(T.size()) != n || gA.dim() != n || gB.dim() != n)
        throw DimensionMismatch("quadratic form: dimensions of T, kappa and the functions differ");
    const SymTensor3 S = symmetrize(T);
    const DerivativeBundle a = derivative_bundle(gA, kappa.values());
    const DerivativeBundle b = derivative_bundle(gB, kappa.values());
    double q = 0.0;
    for (int k = 0; k < n; ++k)
        q += a.gradient[k] * matrix_second_derivative(b, S[k]) - b.gradient[k] * matrix_second_derivative(a, S[k]);
    return q;
}

QSignReport sample_q_extremes(const SymmetricFunction &gA, const SymmetricFunction &gB, const SymmetricCone &cone,
                              int samples, std::uint64_t seed, const std::string &config)
{
    QSignReport rep;
    rep.config = config.empty() ? "Q_{" + gA.name() + "," + gB.name() + "}" : config;
    rep.samples = samples;
    rep.min_normalized = std::numeric_limits<double>::infinity();
    rep.max_normalized = -std::numeric_limits<double>::infinity();
    const int n = cone.dim();
    for (int s = 0; s < samples; ++s) {
        auto rng = indexed_rng(seed, s);
        const CurvatureTuple kappa(sample_cone_slice(cone, rng));
        const SymTensor3 T = random_sym_tensor(n, rng);
        const double v = quadratic_form_Q(gA, gB, kappa, T) * gB.value(kappa.values());
        if (v < rep.min_normalized) {
            rep.min_normalized = v;
            rep.witness_min_kappa = kappa.values();
            rep.witness_min_T = T;
        }
        if (v > rep.max_normalized) {
            rep.max_normalized = v;
            rep.witness_max_kappa = kappa.values();
            rep.witness_max_T = T;
        }
    }
    rep.empirical_gamma = rep.min_normalized;
    return rep;
}

namespace {

double gradient_f_energy(const Vector &fd, const SymTensor3 &T)
{
    double s = 0.0;
    for (size_t k = 0; k < T.size(); ++k) {
        double gk = 0.0;
        for (size_t p = 0; p < T.size(); ++p) gk += fd[p] * T[k](p, p);
        s += fd[k] * gk * gk;
    }
    return s;
}

}  // namespace

double lemma41_combined(const PinchingContext &ctx, const CurvatureTuple &kappa, const SymTensor3 &T, double sigma)
{
    if (!(sigma > 0.0 && sigma <= 1.0)) throw ConfigError("sigma must lie in (0, 1]");
    const SymTensor3 S = symmetrize(T);
    const auto g2f = g2_function(ctx);
    const double f = evaluate(*ctx.speed, kappa);
    const double q = quadratic_form_Q(*g2f, *ctx.speed, kappa, S);
    return q * f / (sigma * ctx.theta) + gradient_f_energy(ctx.speed->gradient(kappa.values()), S);
}

double lemma41_lhs(const PinchingContext &ctx, const CurvatureTuple &kappa, const SymTensor3 &T, double sigma)
{
    if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("sigma must lie in (0, 1)");
    const SymTensor3 S = symmetrize(T);
    const auto g2f = g2_function(ctx);
    const double F = evaluate(*ctx.speed, kappa);
    const double q = quadratic_form_Q(*g2f, *ctx.speed, kappa, S);
    return q / g2(ctx, kappa) + 0.5 * sigma * gradient_f_energy(ctx.speed->gradient(kappa.values()), S) / (F * F);
}

double lemma41_form(const PinchingContext &ctx, const CurvatureTuple &kappa, const SymTensor3 &T, double sigma,
                    double gamma)
{
    const double F = evaluate(*ctx.speed, kappa);
    const double t = tensor_norm(symmetrize(T));
    return lemma41_lhs(ctx, kappa, T, sigma) - 4.0 * gamma * sigma * t * t / (F * F);
}

QSignReport sample_lemma41(const PinchingContext &ctx, double sigma, int samples, std::uint64_t seed)
{
    QSignReport rep;
    std::ostringstream os;
    os << "lemma41(" << ctx.speed->name() << ", sigma=" << sigma << ")";
    rep.config = os.str();
    rep.samples = samples;
    rep.min_normalized = std::numeric_limits<double>::infinity();
    rep.max_normalized = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        auto rng = indexed_rng(seed, s);
        const CurvatureTuple kappa(sample_cone_slice(*ctx.cone, rng));
        const SymTensor3 T = random_sym_tensor(ctx.dim(), rng);
        const double v = lemma41_combined(ctx, kappa, T, sigma);
        if (v < rep.min_normalized) {
            rep.min_normalized = v;
            rep.witness_min_kappa = kappa.values();
            rep.witness_min_T = T;
        }
        if (v > rep.max_normalized) {
            rep.max_normalized = v;
            rep.witness_max_kappa = kappa.values();
            rep.witness_max_T = T;
        }
    }
    rep.empirical_gamma = rep.min_normalized / 4.0;
    return rep;
}

}  // namespace cflow
