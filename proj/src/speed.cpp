#include "cflow/speed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cflow {

std::string to_string(Convexity c)
{
    switch (c) {
        case Convexity::Linear: return "linear";
        case Convexity::Concave: return "concave";
        case Convexity::Convex: return "convex";
        case Convexity::Neither: return "neither";
    }
    return "?";
}

std::vector<std::string> speed_catalog()
{
    return {"mean_curvature", "power_mean", "harmonic_mean", "norm",
            "elementary_ratio", "two_harmonic", "combination"};
}

namespace {

class MeanCurvature : public SymmetricFunction {
public:
    explicit MeanCurvature(int n) : m_n(n) {}
    int dim() const override { return m_n; }
    double value(const Vector &z) const override { return z.sum(); }
    Vector gradient(const Vector &z) const override { return Vector::Ones(z.size()); }
    Matrix hessian(const Vector &z) const override { return Matrix::Zero(z.size(), z.size()); }
    bool analytic_hessian() const override { return true; }
    std::string name() const override { return "H"; }

private:
    int m_n;
};

class PowerMean : public SymmetricFunction {
public:
    PowerMean(int n, double r) : m_n(n), m_r(r) {}
    int dim() const override { return m_n; }
    bool analytic_hessian() const override { return true; }
    std::string name() const override
    {
        std::ostringstream os;
        os << "power_mean(r=" << m_r << ")";
        return os.str();
    }

    double value(const Vector &z) const override
    {
        const double n = double(m_n);
        if (m_r == 0.0) {
            double s = 0.0;
            for (double zi : z) s += std::log(zi);
            return std::exp(s / n);
        }
        double s = 0.0;
        for (double zi : z) s += std::pow(zi, m_r);
        return std::pow(s / n, 1.0 / m_r);
    }

    Vector gradient(const Vector &z) const override
    {
        const double f = value(z);
        Vector g(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i)
            g[i] = m_r == 0.0 ? f / (m_n * z[i]) : std::pow(z[i] / f, m_r - 1.0) / m_n;
        return g;
    }

    Matrix hessian(const Vector &z) const override
    {
        const double f = value(z);
        const Eigen::Index n = z.size();
        Matrix H(n, n);
        if (m_r == 0.0) {
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    H(i, j) = f / (double(m_n) * m_n * z[i] * z[j]) - (i == j ? f / (m_n * z[i] * z[i]) : 0.0);
            return H;
        }
        Vector g = gradient(z);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double c = (m_r - 1.0) / (m_n * f) * std::pow(z[i] / f, m_r - 2.0);
            for (Eigen::Index j = 0; j < n; ++j) H(i, j) = c * ((i == j ? 1.0 : 0.0) - z[i] * g[j] / f);
        }
        return 0.5 * (H + H.transpose());
    }

private:
    int m_n;
    double m_r;
};

class EuclideanNorm : public SymmetricFunction {
public:
    explicit EuclideanNorm(int n) : m_n(n) {}
    int dim() const override { return m_n; }
    double value(const Vector &z) const override { return z.norm(); }
    Vector gradient(const Vector &z) const override { return z / z.norm(); }
    Matrix hessian(const Vector &z) const override
    {
        const double len = z.norm();
        Vector u = z / len;
        return (Matrix::Identity(z.size(), z.size()) - u * u.transpose()) / len;
    }
    bool analytic_hessian() const override { return true; }
    std::string name() const override { return "|A|"; }

private:
    int m_n;
};

// Elementary symmetric polynomials E_0..E_k of z.
Vector elementary(const Vector &z, int k)
{
    Vector e = Vector::Zero(k + 1);
    e[0] = 1.0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        for (int j = std::min<int>(k, int(i) + 1); j >= 1; --j) e[j] += z[i] * e[j - 1];
    return e;
}

Vector drop(const Vector &z, Eigen::Index a, Eigen::Index b = -1)
{
    Vector out(z.size() - (b >= 0 ? 2 : 1));
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        if (i != a && i != b) out[c++] = z[i];
    return out;
}

class ElementaryRatio : public SymmetricFunction {
public:
    ElementaryRatio(int n, int k, int l) : m_n(n), m_k(k), m_l(l)
    {
        if (!(k > l && l >= 0 && k <= n))
            throw ConfigError("elementary_ratio requires n >= k > l >= 0");
    }
    int dim() const override { return m_n; }
    bool analytic_hessian() const override { return true; }
    std::string name() const override
    {
        return "(E" + std::to_string(m_k) + "/E" + std::to_string(m_l) + ")^(1/" + std::to_string(m_k - m_l) + ")";
    }

    double value(const Vector &z) const override
    {
        Vector e = elementary(z, m_k);
        return std::pow(e[m_k] / e[m_l], 1.0 / (m_k - m_l));
    }

    // d E_j / dz_i = E_{j-1}(z without i).
    Vector grad_e(const Vector &z, int j) const
    {
        Vector g = Vector::Zero(z.size());
        if (j == 0) return g;
        for (Eigen::Index i = 0; i < z.size(); ++i) g[i] = elementary(drop(z, i), j - 1)[j - 1];
        return g;
    }

    Matrix hess_e(const Vector &z, int j) const
    {
        const Eigen::Index n = z.size();
        Matrix H = Matrix::Zero(n, n);
        if (j < 2) return H;
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < a; ++b)
                H(a, b) = H(b, a) = elementary(drop(z, a, b), j - 2)[j - 2];
        return H;
    }

    Vector gradient(const Vector &z) const override
    {
        Vector e = elementary(z, m_k);
        const double a = 1.0 / (m_k - m_l);
        const double f = std::pow(e[m_k] / e[m_l], a);
        return f * a * (grad_e(z, m_k) / e[m_k] - grad_e(z, m_l) / e[m_l]);
    }

    Matrix hessian(const Vector &z) const override
    {
        Vector e = elementary(z, m_k);
        const double a = 1.0 / (m_k - m_l);
        const double f = std::pow(e[m_k] / e[m_l], a);
        Vector gk = grad_e(z, m_k), gl = grad_e(z, m_l);
        Vector g = f * a * (gk / e[m_k] - gl / e[m_l]);
        Matrix inner = hess_e(z, m_k) / e[m_k] - gk * gk.transpose() / (e[m_k] * e[m_k]) -
                       hess_e(z, m_l) / e[m_l] + gl * gl.transpose() / (e[m_l] * e[m_l]);
        Matrix H = g * g.transpose() / f + f * a * inner;
        return 0.5 * (H + H.transpose());
    }

private:
    int m_n, m_k, m_l;
};

class TwoHarmonic : public SymmetricFunction {
public:
    explicit TwoHarmonic(int n) : m_n(n) {}
    int dim() const override { return m_n; }
    bool analytic_hessian() const override { return true; }
    std::string name() const override { return "two_harmonic"; }

    double value(const Vector &z) const override
    {
        double s = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i)
            for (Eigen::Index j = 0; j < i; ++j) s += 1.0 / (z[i] + z[j]);
        return 1.0 / s;
    }

    Vector pair_sums(const Vector &z, double power) const
    {
        Vector a = Vector::Zero(z.size());
        for (Eigen::Index k = 0; k < z.size(); ++k)
            for (Eigen::Index j = 0; j < z.size(); ++j)
                if (j != k) a[k] += std::pow(z[k] + z[j], power);
        return a;
    }

    Vector gradient(const Vector &z) const override
    {
        const double f = value(z);
        return f * f * pair_sums(z, -2.0);
    }

    Matrix hessian(const Vector &z) const override
    {
        const double f = value(z);
        const Eigen::Index n = z.size();
        Vector a = pair_sums(z, -2.0), b = pair_sums(z, -3.0);
        Matrix H(n, n);
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index l = 0; l < n; ++l) {
                double da = k == l ? -2.0 * b[k] : -2.0 * std::pow(z[k] + z[l], -3.0);
                H(k, l) = 2.0 * f * f * f * a[k] * a[l] + f * f * da;
            }
        return H;
    }

private:
    int m_n;
};

class WeightedSum : public SymmetricFunction {
public:
    WeightedSum(std::vector<double> w, std::vector<SymmetricFunctionPtr> terms)
        : m_w(std::move(w)), m_terms(std::move(terms))
    {}
    int dim() const override { return m_terms.front()->dim(); }
    double value(const Vector &z) const override
    {
        double s = 0.0;
        for (size_t t = 0; t < m_terms.size(); ++t) s += m_w[t] * m_terms[t]->value(z);
        return s;
    }
    Vector gradient(const Vector &z) const override
    {
        Vector g = Vector::Zero(z.size());
        for (size_t t = 0; t < m_terms.size(); ++t) g += m_w[t] * m_terms[t]->gradient(z);
        return g;
    }
    Matrix hessian(const Vector &z) const override
    {
        Matrix H = Matrix::Zero(z.size(), z.size());
        for (size_t t = 0; t < m_terms.size(); ++t) H += m_w[t] * m_terms[t]->hessian(z);
        return H;
    }
    bool analytic_hessian() const override
    {
        return std::all_of(m_terms.begin(), m_terms.end(), [](auto &t) { return t->analytic_hessian(); });
    }
    std::string name() const override
    {
        std::ostringstream os;
        for (size_t t = 0; t < m_terms.size(); ++t)
            os << (t ? " + " : "") << m_w[t] << "*" << m_terms[t]->name();
        return os.str();
    }

private:
    std::vector<double> m_w;
    std::vector<SymmetricFunctionPtr> m_terms;
};

}  // namespace

SpeedFunction::SpeedFunction(SpeedSpec spec, int n)
    : m_spec(std::move(spec)), m_n(n), m_cone(SymmetricCone::positive(n)), m_convexity(Convexity::Linear)
{
    const std::string &fam = m_spec.family;
    if (fam == "mean_curvature") {
        m_impl = std::make_shared<MeanCurvature>(n);
        m_cone = SymmetricCone::half_space(n);
        m_convexity = Convexity::Linear;
    } else if (fam == "power_mean" || fam == "harmonic_mean") {
        if (fam == "harmonic_mean") {
            m_spec = SpeedSpec("power_mean");
            m_spec.r = -1.0;
        }
        const double r = m_spec.r;
        if (!std::isfinite(r)) throw ConfigError("power_mean requires a finite exponent r");
        m_impl = std::make_shared<PowerMean>(n, r);
        m_convexity = r == 1.0 ? Convexity::Linear : (r > 1.0 ? Convexity::Convex : Convexity::Concave);
        // r = 1 is H/n: domain is still declared Gamma_+ as for the family.
    } else if (fam == "norm") {
        m_impl = std::make_shared<EuclideanNorm>(n);
        m_convexity = Convexity::Convex;
    } else if (fam == "elementary_ratio") {
        m_impl = std::make_shared<ElementaryRatio>(n, m_spec.k, m_spec.l);
        m_convexity = (m_spec.k == 1 && m_spec.l == 0) ? Convexity::Linear : Convexity::Concave;
    } else if (fam == "two_harmonic") {
        m_impl = std::make_shared<TwoHarmonic>(n);
        m_cone = SymmetricCone::m_convex(n, 1);
        m_convexity = Convexity::Concave;
    } else if (fam == "combination") {
        if (m_spec.terms.empty() || m_spec.terms.size() != m_spec.weights.size())
            throw ConfigError("combination needs matching 'weights' and 'terms'");
        std::vector<SymmetricFunctionPtr> parts;
        bool all_concave = true, all_convex = true, all_linear = true;
        int order = n - 1;
        for (size_t t = 0; t < m_spec.terms.size(); ++t) {
            if (!(m_spec.weights[t] > 0.0)) throw ConfigError("combination weights must be positive");
            SpeedFunction part(m_spec.terms[t], n);
            parts.push_back(std::make_shared<SpeedFunction>(part));
            all_concave = all_concave && part.concave();
            all_convex = all_convex && part.convex();
            all_linear = all_linear && part.convexity() == Convexity::Linear;
            order = std::min(order, part.cone().facet_order());
        }
        m_impl = std::make_shared<WeightedSum>(m_spec.weights, parts);
        m_cone = order == n - 1 ? SymmetricCone::half_space(n)
                                : (order == 0 ? SymmetricCone::positive(n) : SymmetricCone::m_convex(n, order));
        m_convexity = all_linear    ? Convexity::Linear
                      : all_concave ? Convexity::Concave
                      : all_convex  ? Convexity::Convex
                                    : Convexity::Neither;
    } else {
        std::string names;
        for (auto &s : speed_catalog()) names += (names.empty() ? "" : ", ") + s;
        throw ConfigError("unknown speed '" + fam + "'; available: " + names);
    }
}

std::string SpeedFunction::name() const { return m_impl->name(); }

////////////////////////////////////////////////////////////////////////////////
// Operations
////////////////////////////////////////////////////////////////////////////////
namespace {

void require_in_cone(const SpeedFunction &speed, const CurvatureTuple &kappa)
{
    if (kappa.dim() != speed.dim())
        throw DimensionMismatch("speed " + speed.name() + " has dimension " + std::to_string(speed.dim()));
    if (!contains(speed.cone(), kappa)) {
        std::ostringstream os;
        os << "type-0 hazard: curvature tuple (" << kappa.values().transpose() << ") left the cone "
           << speed.cone().describe() << " of " << speed.name();
        throw ConeViolation(os.str());
    }
}

}  // namespace

double evaluate(const SpeedFunction &speed, const CurvatureTuple &kappa)
{
    require_in_cone(speed, kappa);
    const double f = speed.value(kappa.values());
    if (!(std::isfinite(f) && f > 0.0))
        throw ConeViolation("type-0 hazard: " + speed.name() + " is not positive at this tuple");
    return f;
}

DerivativeBundle derivatives(const SpeedFunction &speed, const CurvatureTuple &kappa)
{
    require_in_cone(speed, kappa);
    return derivative_bundle(speed, kappa.values());
}

double second_derivative_form(const SpeedFunction &speed, const CurvatureTuple &kappa, const Matrix &V)
{
    require_in_cone(speed, kappa);
    return matrix_second_derivative(speed, kappa.values(), V);
}

double cylinder_constant(const SpeedFunction &speed, int m)
{
    const int n = speed.dim();
    if (m < 0 || m > n - 1) throw ConfigError("m must satisfy 0 ≤ m ≤ n−1");
    Vector z = Vector::Zero(n);
    z.tail(n - m).setOnes();
    const double f = speed.value(z);
    if (!(std::isfinite(f) && f > 0.0)) {
        std::ostringstream os;
        os << speed.name() << " vanishes or is undefined on the cylinder tuple with m=" << m
           << " (f = " << f << "), so c_m is infinite";
        throw DegenerateInput(os.str());
    }
    return 1.0 / f;
}

////////////////////////////////////////////////////////////////////////////////
// Theta
////////////////////////////////////////////////////////////////////////////////
namespace {

double signed_distance(const SymmetricCone &cone, const Vector &u)
{
    return normalized_boundary_distance(cone, CurvatureTuple(u));
}

// Last point of the closure along the great circle from `inside` towards
// `outside` (bisection on the signed boundary distance).
Vector boundary_point(const SymmetricCone &cone, const Vector &inside, const Vector &outside)
{
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        Vector u = ((1 - mid) * inside + mid * outside).normalized();
        if (signed_distance(cone, u) >= 0.0) lo = mid; else hi = mid;
    }
    return ((1 - lo) * inside + lo * outside).normalized();
}

struct RatioEval {
    const SpeedFunction &speed;
    ThetaVariant variant;

    double operator()(const Vector &u) const
    {
        const double f = speed.value(u);
        const double num = variant == ThetaVariant::Concave ? u.sum() + u.norm() : u.norm() - u.sum();
        if (!(std::isfinite(f) && f > 1e-12 * u.norm())) {
            std::ostringstream os;
            os << "theta ratio is unbounded: " << speed.name() << " vanishes on the cone slice near direction ("
               << u.transpose() << ")";
            throw DegenerateInput(os.str());
        }
        return num / f;
    }
};

}  // namespace

double theta_constant(const SpeedFunction &speed, const SymmetricCone &cone, ThetaVariant variant,
                      const std::vector<double> &lower_bounds, std::uint64_t seed)
{
    const int n = speed.dim();
    if (cone.dim() != n) throw DimensionMismatch("theta: cone and speed dimensions differ");
    RatioEval ratio{speed, variant};
    const Vector diag = Vector::Constant(n, 1.0 / std::sqrt(double(n)));
    if (signed_distance(cone, diag) <= 0.0) throw DegenerateInput("theta: cone is empty");

    double best = -std::numeric_limits<double>::infinity();
    if (n == 2) {
        // Sorted chamber: u = (cos t, sin t), t in [pi/4, 5pi/4]; the closure is
        // [pi/4, t_b] with t_b found by bisection.
        auto at = [](double t) { return Vector2(std::cos(t), std::sin(t)); };
        double lo = M_PI / 4, hi = 5 * M_PI / 4;
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            if (signed_distance(cone, at(mid)) >= 0.0) lo = mid; else hi = mid;
        }
        const double tb = lo;
        const int samples = 20000;
        int arg = 0;
        for (int s = 0; s <= samples; ++s) {
            double v = ratio(at(M_PI / 4 + (tb - M_PI / 4) * s / samples));
            if (v > best) { best = v; arg = s; }
        }
        // Golden-section polish in the bracketing cell.
        double a = M_PI / 4 + (tb - M_PI / 4) * std::max(arg - 1, 0) / samples;
        double b = M_PI / 4 + (tb - M_PI / 4) * std::min(arg + 1, samples) / samples;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 100; ++it) {
            double c = b - g * (b - a), d = a + g * (b - a);
            if (ratio(at(c)) > ratio(at(d))) b = d; else a = c;
        }
        best = std::max(best, ratio(at(0.5 * (a + b))));
    } else {
        std::mt19937_64 rng(derive_seed(seed, 0));
        std::normal_distribution<double> gauss;
        std::vector<std::pair<double, Vector>> pool;
        const int samples = 3000;
        for (int s = 0; s < samples; ++s) {
            Vector u = sample_cone_slice(cone, rng);
            pool.emplace_back(ratio(u), u);
            Vector dir(n);
            for (int i = 0; i < n; ++i) dir[i] = gauss(rng);
            Vector far = (u + 3.0 * dir.normalized()).normalized();
            if (signed_distance(cone, far) < 0.0) {
                Vector b = boundary_point(cone, u, far);
                pool.emplace_back(ratio(b), b);
            }
        }
        std::sort(pool.begin(), pool.end(), [](auto &x, auto &y) { return x.first > y.first; });
        // Projected pattern search from the best candidates, staying in the closure.
        for (size_t c = 0; c < std::min<size_t>(pool.size(), 8); ++c) {
            Vector u = pool[c].second;
            double v = pool[c].first, step = 0.05;
            while (step > 1e-10) {
                bool improved = false;
                for (int i = 0; i < n && !improved; ++i)
                    for (double sgn : {1.0, -1.0}) {
                        Vector w = u;
                        w[i] += sgn * step;
                        w.normalize();
                        if (signed_distance(cone, w) < 0.0) w = boundary_point(cone, u, w);
                        double vw = ratio(w);
                        if (vw > v) { u = w; v = vw; improved = true; break; }
                    }
                if (!improved) step *= 0.5;
            }
            best = std::max(best, v);
        }
    }
    for (double lb : lower_bounds) best = std::max(best, lb);
    return best;
}

////////////////////////////////////////////////////////////////////////////////
// Inverse dual
////////////////////////////////////////////////////////////////////////////////
double InverseDual::value(const Vector &w) const { return 1.0 / m_f->value(w.cwiseInverse()); }

Vector InverseDual::gradient(const Vector &w) const
{
    Vector z = w.cwiseInverse();
    const double f = m_f->value(z);
    return m_f->gradient(z).cwiseProduct(z.cwiseAbs2()) / (f * f);
}

Matrix InverseDual::hessian(const Vector &w) const
{
    Vector z = w.cwiseInverse();
    const double f = m_f->value(z);
    Vector g = m_f->gradient(z);
    Matrix Hf = m_f->hessian(z);
    const Eigen::Index n = w.size();
    Matrix H(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            double dzj = -2.0 * g[j] * g[i] * z[i] * z[i] / (f * f * f) + Hf(i, j) * z[i] * z[i] / (f * f) +
                         (i == j ? 2.0 * g[i] * z[i] / (f * f) : 0.0);
            H(i, j) = -z[j] * z[j] * dzj;
        }
    return 0.5 * (H + H.transpose());
}

}  // namespace cflow
