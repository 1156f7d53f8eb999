#include "cflow/cone.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cflow {

CurvatureTuple::CurvatureTuple(Vector values) : m_values(std::move(values))
{
    if (m_values.size() < 2)
        throw DimensionMismatch("curvature tuple needs dimension n >= 2");
    if (!m_values.allFinite())
        throw DegenerateInput("curvature tuple has non-finite entries");
    std::sort(m_values.data(), m_values.data() + m_values.size());
}

CurvatureTuple::CurvatureTuple(std::initializer_list<double> values)
    : CurvatureTuple(Vector(Eigen::Map<const Vector>(values.begin(), values.size())))
{}

CurvatureTuple CurvatureTuple::scaled(double lambda) const
{
    return CurvatureTuple(Vector(lambda * m_values));
}

Vector CurvatureTuple::normalized() const
{
    double len = m_values.norm();
    if (!(len > 0.0)) throw DegenerateInput("zero curvature tuple has no direction");
    return m_values / len;
}

////////////////////////////////////////////////////////////////////////////////
// SymmetricCone
////////////////////////////////////////////////////////////////////////////////
SymmetricCone SymmetricCone::positive(int n)
{
    if (n < 2) throw DimensionMismatch("cone dimension must be >= 2");
    return SymmetricCone(ConeKind::Positive, n, 0);
}

SymmetricCone SymmetricCone::m_convex(int n, int m)
{
    if (n < 2) throw DimensionMismatch("cone dimension must be >= 2");
    if (m < 0 || m > n - 1) throw ConfigError("m must satisfy 0 ≤ m ≤ n−1");
    return SymmetricCone(ConeKind::MConvex, n, m);
}

SymmetricCone SymmetricCone::half_space(int n)
{
    if (n < 2) throw DimensionMismatch("cone dimension must be >= 2");
    return SymmetricCone(ConeKind::HalfSpace, n, n - 1);
}

SymmetricCone SymmetricCone::shrunken(const SymmetricCone &base, double margin)
{
    if (!(margin > 0.0)) throw ConfigError("shrunken cone margin must be positive");
    SymmetricCone c(ConeKind::Shrunken, base.dim(), base.facet_order());
    c.m_margin = margin;
    c.m_base = std::make_shared<const SymmetricCone>(base);
    return c;
}

int SymmetricCone::facet_order() const
{
    return m_base ? m_base->facet_order() : m_m;
}

const SymmetricCone &SymmetricCone::root() const
{
    return m_base ? m_base->root() : *this;
}

std::string SymmetricCone::describe() const
{
    std::ostringstream os;
    switch (m_kind) {
        case ConeKind::Positive: os << "Gamma_+"; break;
        case ConeKind::HalfSpace: os << "{H>0}"; break;
        case ConeKind::MConvex: os << "Gamma_" << (m_m + 1); break;
        case ConeKind::Shrunken: os << m_base->describe() << "[margin " << m_margin << "]"; break;
    }
    os << " (n=" << m_n << ")";
    return os.str();
}

namespace {

void check_dim(const SymmetricCone &cone, const CurvatureTuple &kappa)
{
    if (cone.dim() != kappa.dim())
        throw DimensionMismatch("cone has dimension " + std::to_string(cone.dim()) +
                                " but tuple has dimension " + std::to_string(kappa.dim()));
}

// Signed distance of a sorted unit vector to the facet through its m+1
// smallest entries.
double facet_distance(const Vector &u, int m)
{
    return u.head(m + 1).sum() / std::sqrt(double(m + 1));
}

}  // namespace

bool contains(const SymmetricCone &cone, const CurvatureTuple &kappa)
{
    check_dim(cone, kappa);
    if (cone.kind() == ConeKind::Shrunken) {
        if (kappa.norm() == 0.0) return false;
        return normalized_boundary_distance(*cone.base(), kappa) > cone.margin();
    }
    return kappa.values().head(cone.facet_order() + 1).sum() > 0.0;
}

double normalized_boundary_distance(const SymmetricCone &cone, const CurvatureTuple &kappa)
{
    check_dim(cone, kappa);
    if (cone.kind() == ConeKind::Shrunken)
        return normalized_boundary_distance(*cone.base(), kappa) - cone.margin();
    return facet_distance(kappa.normalized(), cone.facet_order());
}

Vector cylinder_direction(int n, int m)
{
    if (m < 0 || m > n - 1) throw ConfigError("m must satisfy 0 ≤ m ≤ n−1");
    Vector c = Vector::Zero(n);
    c.tail(n - m).setConstant(1.0 / std::sqrt(double(n - m)));
    return c;
}

double cyl_distance(const CurvatureTuple &kappa, std::optional<int> m)
{
    const int n = kappa.dim();
    Vector u = kappa.normalized();
    if (m) return (u - cylinder_direction(n, *m)).norm();
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) best = std::min(best, (u - cylinder_direction(n, j)).norm());
    return best;
}

Vector sample_cone_slice(const SymmetricCone &cone, std::mt19937_64 &rng)
{
    const int n = cone.dim();
    std::normal_distribution<double> gauss;
    Vector g(n);
    for (int attempt = 0; attempt < 400; ++attempt) {
        for (int i = 0; i < n; ++i) g[i] = gauss(rng);
        double len = g.norm();
        if (len == 0.0) continue;
        g /= len;
        if (contains(cone, CurvatureTuple(g))) return g;
    }
    // Narrow cone: shrink random perturbations of the diagonal until accepted.
    Vector diag = Vector::Constant(n, 1.0 / std::sqrt(double(n)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double scale = 1.0;
    for (int attempt = 0; attempt < 2000; ++attempt) {
        for (int i = 0; i < n; ++i) g[i] = gauss(rng);
        Vector u = (diag + scale * unif(rng) * g).normalized();
        if (contains(cone, CurvatureTuple(u))) return u;
        if (attempt % 20 == 19) scale *= 0.7;
    }
    throw DegenerateInput("cone " + cone.describe() + " appears empty");
}

}  // namespace cflow
