////////////////////////////////////////////////////////////////////////////////
// cone.hpp
////////////////////////////////////////////////////////////////////////////////
//  Principal-curvature tuples and the open symmetric cones they live in:
//  the positive cone, the m-convex cones Gamma_{m+1}, the mean-convex
//  half-space {H > 0}, and "shrunken" inner cones given by a base cone plus a
//  normalized margin.
//
//  Every cone here is an intersection of facet half-spaces
//      <e_S, z> > 0,   e_S = sum_{i in S} e_i / sqrt(|S|),  |S| = m + 1,
//  so on sorted tuples the binding facet is always the one through the m + 1
//  smallest entries.
////////////////////////////////////////////////////////////////////////////////
#ifndef CFLOW_CONE_HPP
#define CFLOW_CONE_HPP

#include "cflow/common.hpp"

#include <initializer_list>
#include <memory>
#include <optional>
#include <random>
#include <string>

namespace cflow {

/// Principal curvatures kappa_1 <= ... <= kappa_n, n >= 2. Input is sorted on
/// construction; non-finite entries are rejected.
class CurvatureTuple {
public:
    explicit CurvatureTuple(Vector values);
    CurvatureTuple(std::initializer_list<double> values);

    int dim() const { return static_cast<int>(m_values.size()); }
    const Vector &values() const { return m_values; }
    double operator[](int i) const { return m_values[i]; }
    double min() const { return m_values[0]; }
    double max() const { return m_values[m_values.size() - 1]; }
    double norm() const { return m_values.norm(); }
    double trace() const { return m_values.sum(); }

    CurvatureTuple scaled(double lambda) const;
    Vector normalized() const;  // throws DegenerateInput on the zero tuple

private:
    Vector m_values;
};

enum class ConeKind { Positive, MConvex, HalfSpace, Shrunken };

class SymmetricCone {
public:
    static SymmetricCone positive(int n);
    /// Gamma_{m+1}: every (m+1)-fold partial sum positive, 0 <= m <= n-1.
    static SymmetricCone m_convex(int n, int m);
    static SymmetricCone half_space(int n);
    /// Inner cone { z : normalized distance to base boundary > margin }.
    static SymmetricCone shrunken(const SymmetricCone &base, double margin);

    ConeKind kind() const { return m_kind; }
    int dim() const { return m_n; }
    /// Number of entries in the binding partial sum minus one: 0 for the
    /// positive cone, n-1 for the half-space. For shrunken cones, that of
    /// the base.
    int facet_order() const;
    double margin() const { return m_margin; }
    const SymmetricCone *base() const { return m_base.get(); }
    /// The cone with all margins stripped.
    const SymmetricCone &root() const;

    std::string describe() const;

private:
    SymmetricCone(ConeKind kind, int n, int m) : m_kind(kind), m_n(n), m_m(m) {}

    ConeKind m_kind;
    int m_n;
    int m_m;
    double m_margin = 0.0;
    std::shared_ptr<const SymmetricCone> m_base;
};

bool contains(const SymmetricCone &cone, const CurvatureTuple &kappa);

/// Signed Euclidean distance from kappa/|kappa| to the boundary of the cone:
/// positive inside, zero on the boundary, negative outside (minus the worst
/// facet violation). For shrunken cones this is the base distance minus the
/// margin.
double normalized_boundary_distance(const SymmetricCone &cone, const CurvatureTuple &kappa);

/// Distance from kappa/|kappa| to the unit point of Cyl_m = (0,...,0,k,...,k)
/// (m zeros); with no m, the minimum over m = 0..n-1.
double cyl_distance(const CurvatureTuple &kappa, std::optional<int> m = std::nullopt);

/// Unit vector (0,...,0,1,...,1)/sqrt(n-m).
Vector cylinder_direction(int n, int m);

/// Draws a point of cone ∩ S^{n-1}: uniform rejection sampling, falling back to
/// perturbations of the diagonal for very narrow cones.
Vector sample_cone_slice(const SymmetricCone &cone, std::mt19937_64 &rng);

}  // namespace cflow

#endif
