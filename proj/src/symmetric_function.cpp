#include "cflow/symmetric_function.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace cflow {

Vector fd_gradient(const std::function<double(const Vector &)> &f, const Vector &z, double rel_step)
{
    const double h = rel_step * std::max(z.norm(), 1e-300);
    Vector g(z.size());
    Vector zp = z, zm = z;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        zp[i] = z[i] + h;
        zm[i] = z[i] - h;
        g[i] = (f(zp) - f(zm)) / (2 * h);
        zp[i] = zm[i] = z[i];
    }
    return g;
}

Matrix SymmetricFunction::hessian(const Vector &z) const
{
    const int n = dim();
    const double h = 1e-5 * std::max(z.norm(), 1e-300);
    Matrix H(n, n);
    Vector zp = z, zm = z;
    for (int j = 0; j < n; ++j) {
        zp[j] = z[j] + h;
        zm[j] = z[j] - h;
        H.col(j) = (gradient(zp) - gradient(zm)) / (2 * h);
        zp[j] = zm[j] = z[j];
    }
    return 0.5 * (H + H.transpose());
}

DerivativeBundle derivative_bundle(const SymmetricFunction &g, const Vector &z)
{
    const int n = static_cast<int>(z.size());
    if (n != g.dim())
        throw DimensionMismatch(g.name() + " expects dimension " + std::to_string(g.dim()));
    DerivativeBundle d;
    d.value = g.value(z);
    d.gradient = g.gradient(z);
    d.eigen_hessian = g.hessian(z);
    d.off_diagonal_quotients = Matrix::Zero(n, n);
    const double gap = kCoincidenceGap * z.norm();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            double q;
            if (std::abs(z[i] - z[j]) >= gap && z[i] != z[j]) {
                q = (d.gradient[i] - d.gradient[j]) / (z[i] - z[j]);
            } else {
                if (!g.analytic_hessian())
                    throw DegenerateInput(g.name() + ": eigenvalues " + std::to_string(i) + "," +
                                          std::to_string(j) +
                                          " coincide and no analytic limit is available");
                const Matrix &H = d.eigen_hessian;
                q = 0.5 * (H(i, i) + H(j, j)) - H(i, j);
            }
            d.off_diagonal_quotients(i, j) = d.off_diagonal_quotients(j, i) = q;
        }
    }
    return d;
}

double matrix_second_derivative(const DerivativeBundle &d, const Matrix &V)
{
    const Eigen::Index n = V.rows();
    Vector diag = V.diagonal();
    double out = diag.dot(d.eigen_hessian * diag);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            out += 2.0 * d.off_diagonal_quotients(i, j) * V(i, j) * V(i, j);
    return out;
}

double matrix_second_derivative(const SymmetricFunction &g, const Vector &z, const Matrix &V)
{
    if (V.rows() != z.size() || V.cols() != z.size())
        throw DimensionMismatch("V must be n x n");
    return matrix_second_derivative(derivative_bundle(g, z), 0.5 * (V + V.transpose()));
}

double matrix_value(const SymmetricFunction &g, const Matrix &Z)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Z + Z.transpose()), Eigen::EigenvaluesOnly);
    return g.value(es.eigenvalues());
}

////////////////////////////////////////////////////////////////////////////////
double TraceNormFunction::value(const Vector &z) const { return z.sum() + m_sign * z.norm(); }

Vector TraceNormFunction::gradient(const Vector &z) const
{
    return Vector::Ones(z.size()) + m_sign * z / z.norm();
}

Matrix TraceNormFunction::hessian(const Vector &z) const
{
    const double len = z.norm();
    Vector u = z / len;
    return m_sign * (Matrix::Identity(z.size(), z.size()) - u * u.transpose()) / len;
}

std::string LinearCombination::name() const
{
    std::ostringstream os;
    os << m_a << "*" << m_g->name() << " + " << m_b << "*" << m_h->name();
    return os.str();
}

}  // namespace cflow
