#include "cflow/surface.hpp"

#include "cflow/speed.hpp"

namespace cflow {

PointGeometry make_point(Vector position, Vector normal, Vector principal)
{
    CurvatureTuple kappa(principal);
    const double H = principal.sum(), norm_A = principal.norm();
    return {std::move(position), std::move(normal), std::move(principal), std::move(kappa), H, norm_A};
}

int Surface::nearest(const Vector &position) const
{
    int best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i) {
        double d = (point(i).position - position).squaredNorm();
        if (d < dist) dist = d, best = i;
    }
    return best;
}

double Surface::integrate(const Vector &values) const
{
    if (values.size() != size()) throw DimensionMismatch("field size differs from node count");
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += values[i] * weight(i);
    return s;
}

double laplacian_F(const Surface &s, const SymmetricFunction &f, const Vector &u, int i)
{
    const PointGeometry &p = s.point(i);
    Vector fdot = f.gradient(p.principal);
    FieldDerivatives d = s.field_derivatives(u, i);
    return fdot.dot(d.hessian.diagonal());
}

double weighted_norm_A(const SymmetricFunction &f, const PointGeometry &p)
{
    Vector fdot = f.gradient(p.principal);
    return fdot.dot(p.principal.cwiseAbs2());
}

Vector speed_values(const Surface &s, const SpeedFunction &speed)
{
    Vector F(s.size());
    for (int i = 0; i < s.size(); ++i) F[i] = evaluate(speed, s.point(i).kappa);
    return F;
}

}  // namespace cflow
