////////////////////////////////////////////////////////////////////////////////
// symmetric_function.hpp
////////////////////////////////////////////////////////////////////////////////
//  Smooth symmetric functions g(z) of an n-tuple, viewed simultaneously as
//  orthogonally invariant functions g(Z) of symmetric matrices. At a diagonal
//  matrix Z = diag(z) the matrix second derivative reduces to eigenvalue data:
//
//    g''(Z)[V,V] = sum_ij g_ij(z) V_ii V_jj
//                + 2 sum_{i>j} (g_i(z) - g_j(z)) / (z_i - z_j) V_ij^2.
//
//  For z_i = z_j the quotient is replaced by its limit g_ii - g_ij (smoothness
//  plus symmetry), which requires a Hessian we trust; finite-difference
//  Hessians refuse instead.
////////////////////////////////////////////////////////////////////////////////
#ifndef CFLOW_SYMMETRIC_FUNCTION_HPP
#define CFLOW_SYMMETRIC_FUNCTION_HPP

#include "cflow/common.hpp"

#include <functional>
#include <memory>
#include <string>

namespace cflow {

class SymmetricFunction {
public:
    virtual ~SymmetricFunction() = default;

    virtual int dim() const = 0;
    virtual double value(const Vector &z) const = 0;
    virtual Vector gradient(const Vector &z) const = 0;
    /// Eigenvalue Hessian g_ij. Default: central differences of the gradient.
    virtual Matrix hessian(const Vector &z) const;
    virtual bool analytic_hessian() const { return false; }
    virtual std::string name() const = 0;
};

using SymmetricFunctionPtr = std::shared_ptr<const SymmetricFunction>;

/// Relative eigenvalue gap below which difference quotients switch to the
/// analytic limit.
inline constexpr double kCoincidenceGap = 1e-7;

struct DerivativeBundle {
    double value = 0.0;
    Vector gradient;
    Matrix eigen_hessian;
    /// (g_i - g_j)/(z_i - z_j) off the diagonal; diagonal entries unused (0).
    Matrix off_diagonal_quotients;
};

DerivativeBundle derivative_bundle(const SymmetricFunction &g, const Vector &z);

/// d^2/ds^2 g(diag(z) + sV) at s = 0, assembled from eigenvalue derivatives.
double matrix_second_derivative(const SymmetricFunction &g, const Vector &z, const Matrix &V);
double matrix_second_derivative(const DerivativeBundle &d, const Matrix &V);

/// g evaluated on a general symmetric matrix through its eigenvalues.
double matrix_value(const SymmetricFunction &g, const Matrix &Z);

/// Central-difference gradient, step h * max(|z|, 1e-300).
Vector fd_gradient(const std::function<double(const Vector &)> &f, const Vector &z, double rel_step);

/// A symmetric function given by closures; Hessian by finite differences.
class LambdaFunction : public SymmetricFunction {
public:
    LambdaFunction(std::string name, int n, std::function<double(const Vector &)> value,
                   std::function<Vector(const Vector &)> gradient)
        : m_name(std::move(name)), m_n(n), m_value(std::move(value)), m_gradient(std::move(gradient))
    {}
    int dim() const override { return m_n; }
    double value(const Vector &z) const override { return m_value(z); }
    Vector gradient(const Vector &z) const override { return m_gradient(z); }
    std::string name() const override { return m_name; }

private:
    std::string m_name;
    int m_n;
    std::function<double(const Vector &)> m_value;
    std::function<Vector(const Vector &)> m_gradient;
};

/// z -> tr(z) + s |z| with s = +1 (convex, used by the concave-speed G2) or
/// s = -1 (concave, used by the convex-speed G2).
class TraceNormFunction : public SymmetricFunction {
public:
    TraceNormFunction(int n, double norm_sign) : m_n(n), m_sign(norm_sign) {}
    int dim() const override { return m_n; }
    double value(const Vector &z) const override;
    Vector gradient(const Vector &z) const override;
    Matrix hessian(const Vector &z) const override;
    bool analytic_hessian() const override { return true; }
    std::string name() const override { return m_sign > 0 ? "tr+|.|" : "tr-|.|"; }

private:
    int m_n;
    double m_sign;
};

/// a * g + b * h (affine combination of two symmetric functions).
class LinearCombination : public SymmetricFunction {
public:
    LinearCombination(double a, SymmetricFunctionPtr g, double b, SymmetricFunctionPtr h)
        : m_a(a), m_b(b), m_g(std::move(g)), m_h(std::move(h))
    {}
    int dim() const override { return m_g->dim(); }
    double value(const Vector &z) const override { return m_a * m_g->value(z) + m_b * m_h->value(z); }
    Vector gradient(const Vector &z) const override
    {
        return m_a * m_g->gradient(z) + m_b * m_h->gradient(z);
    }
    Matrix hessian(const Vector &z) const override
    {
        return m_a * m_g->hessian(z) + m_b * m_h->hessian(z);
    }
    bool analytic_hessian() const override { return m_g->analytic_hessian() && m_h->analytic_hessian(); }
    std::string name() const override;

private:
    double m_a, m_b;
    SymmetricFunctionPtr m_g, m_h;
};

}  // namespace cflow

#endif
