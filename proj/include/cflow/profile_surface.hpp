// Rotationally symmetric hypersurfaces M^n in R^{n+1} generated by a meridian
// polyline (x_i, r_i), i = 0..N, with r_0 = r_N = 0 on the rotation axis.
//
// Frame order at every node: index 0 is the profile direction, indices
// 1..n-1 the rotational directions.
#ifndef CFLOW_PROFILE_SURFACE_HPP
#define CFLOW_PROFILE_SURFACE_HPP

#include "cflow/surface.hpp"

#include <functional>
#include <vector>

namespace cflow {

struct ProfileRemeshPolicy {
    double min_ratio = 0.5;  // segment length / target length
    double max_ratio = 2.0;
    double curvature_weight = 0.0;  // 0: uniform arclength

    bool operator==(const ProfileRemeshPolicy &) const = default;
};

class ProfileSurface final : public Surface {
public:
    /// `nodes` run from the left pole over r > 0 to the right pole.
    /// orientation = -1 flips the normal (inward).
    ProfileSurface(std::vector<Vector2> nodes, int n, ProfileRemeshPolicy policy = {}, int orientation = 1);

    Representation representation() const override { return Representation::Profile; }
    int dim() const override { return m_n; }
    int size() const override { return int(m_nodes.size()); }
    const PointGeometry &point(int i) const override { return m_points.at(i); }
    double weight(int i) const override { return m_weights.at(i); }
    double spacing_min() const override;

    GlobalGeometry global_geometry() const override;
    double inscribed_curvature(int i) const override;
    double exscribed_curvature(int i) const override;
    double curvature_gradient_norm(int i) const override;
    FieldDerivatives field_derivatives(const Vector &u, int i) const override;

    std::unique_ptr<Surface> displaced(const Vector &normal_displacement) const override;
    bool needs_remesh() const override;
    std::unique_ptr<Surface> remeshed() const override;
    std::unique_ptr<Surface> scaled(double lambda) const override;
    std::unique_ptr<Surface> clone() const override { return std::make_unique<ProfileSurface>(*this); }

    const std::vector<Vector2> &nodes() const { return m_nodes; }
    const ProfileRemeshPolicy &policy() const { return m_policy; }
    int orientation() const { return m_orientation; }
    double arclength(int i) const { return m_arclength.at(i); }
    double kappa_profile(int i) const { return m_points.at(i).principal[0]; }
    double kappa_rot(int i) const { return m_points.at(i).principal[m_n > 1 ? 1 : 0]; }
    /// Resample to `count` nodes by cubic interpolation, equidistributing
    /// the policy's monitor function.
    ProfileSurface resampled(int count) const;

private:
    double chord_extreme(int i, bool upper) const;
    double derivative(const Vector &u, int i, double *second) const;
    Vector monitor_density() const;

    std::vector<Vector2> m_nodes;
    int m_n;
    ProfileRemeshPolicy m_policy;
    int m_orientation;
    std::vector<double> m_seg;
    std::vector<double> m_arclength;
    std::vector<Vector2> m_tangent;
    std::vector<PointGeometry> m_points;
    std::vector<double> m_weights;
};

/// Area of the unit sphere S^{k}.
double unit_sphere_area(int k);
/// Volume of the unit ball in R^k.
double unit_ball_volume(int k);

/// Points on a parametric meridian gamma(t), t in [0, pi], equidistributed in
/// arclength (weighted by `density` when given). gamma(0), gamma(pi) must lie
/// on the axis.
std::vector<Vector2> sample_meridian(const std::function<Vector2(double)> &gamma, int segments,
                                     const std::function<double(double)> &density = {});

}  // namespace cflow

#endif
