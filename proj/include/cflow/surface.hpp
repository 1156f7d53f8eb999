////////////////////////////////////////////////////////////////////////////////
// surface.hpp
////////////////////////////////////////////////////////////////////////////////
//  Common interface of discrete closed hypersurfaces M^n in R^{n+1}.
//
//  Every node carries a PointGeometry: position, outward normal, principal
//  curvatures in a fixed principal frame (`principal`, frame order) and the
//  same values sorted (`kappa`). Scalar fields on the nodes are differentiated
//  in that frame: gradient g_k = e_k(u), Hessian H_kl = Hess u(e_k, e_l).
////////////////////////////////////////////////////////////////////////////////
#ifndef CFLOW_SURFACE_HPP
#define CFLOW_SURFACE_HPP

#include "cflow/cone.hpp"
#include "cflow/symmetric_function.hpp"

#include <memory>
#include <optional>
#include <string>

namespace cflow {

struct PointGeometry {
    Vector position;
    Vector normal;
    Vector principal;  // frame order
    CurvatureTuple kappa;
    double H = 0.0;
    double norm_A = 0.0;
};

PointGeometry make_point(Vector position, Vector normal, Vector principal);

struct GlobalGeometry {
    double area = 0.0;
    double volume = 0.0;
    double inradius = 0.0;
    double circumradius = 0.0;
    double diameter = 0.0;
};

struct FieldDerivatives {
    Vector gradient;  // frame components
    Matrix hessian;
};

enum class Representation { Profile, Mesh };

class Surface {
public:
    virtual ~Surface() = default;

    virtual Representation representation() const = 0;
    /// Hypersurface dimension n (ambient n + 1).
    virtual int dim() const = 0;
    virtual int size() const = 0;
    virtual const PointGeometry &point(int i) const = 0;
    /// Quadrature weight of node i for integrals over M.
    virtual double weight(int i) const = 0;
    /// Smallest stencil spacing.
    virtual double spacing_min() const = 0;

    virtual GlobalGeometry global_geometry() const = 0;
    virtual double inscribed_curvature(int i) const = 0;
    virtual double exscribed_curvature(int i) const = 0;
    virtual double curvature_gradient_norm(int i) const = 0;
    virtual FieldDerivatives field_derivatives(const Vector &u, int i) const = 0;

    /// New snapshot with every node moved by displacement[i] * normal.
    virtual std::unique_ptr<Surface> displaced(const Vector &normal_displacement) const = 0;
    /// Whether the stencil spacing has drifted outside the remesh thresholds.
    virtual bool needs_remesh() const = 0;
    virtual std::unique_ptr<Surface> remeshed() const = 0;
    virtual std::unique_ptr<Surface> scaled(double lambda) const = 0;
    virtual std::unique_ptr<Surface> clone() const = 0;

    /// Index of the node closest to a point.
    int nearest(const Vector &position) const;
    double integrate(const Vector &values) const;
};

using SurfacePtr = std::shared_ptr<const Surface>;

/// sum_k fdot_k H_kk in the principal frame, with fdot from `f` at the
/// node's frame-ordered curvatures.
double laplacian_F(const Surface &s, const SymmetricFunction &f, const Vector &u, int i);

/// |A|_F^2 = sum_k fdot_k kappa_k^2.
double weighted_norm_A(const SymmetricFunction &f, const PointGeometry &p);

/// Per-node values of a speed (throws ConeViolation when a node leaves its cone).
Vector speed_values(const Surface &s, const class SpeedFunction &speed);

}  // namespace cflow

#endif
