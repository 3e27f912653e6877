#pragma once

#include <Eigen/Core>

#include <memory>
#include <string>

namespace bregopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Kernel generating distance h and its Bregman distance
///   D_h(x, y) = h(x) - h(y) - <grad h(y), x - y>.
///
/// Implementations are immutable; every member is a pure function of its
/// arguments. Points outside int dom h raise DomainError.
class Kernel {
public:
    virtual ~Kernel() = default;

    virtual std::string name() const = 0;

    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;

    /// D_h(x, y) for x in dom h and y in int dom h. Floating noise down to
    /// -1e-12 is clamped to zero; anything more negative throws std::logic_error.
    double bregman(const Vector& x, const Vector& y) const;

    virtual bool in_interior_domain(const Vector& x) const = 0;

    /// (grad h)^{-1}(z); throws DomainError when z is outside the range of grad h.
    virtual Vector inverse_gradient(const Vector& z) const = 0;

    /// True when grad h(x) = phi(|x|) x with phi > 0, so the inverse gradient
    /// preserves signs and zeros componentwise.
    virtual bool is_radial() const { return false; }

protected:
    /// Unclamped distance; the default evaluates the defining formula.
    virtual double bregman_raw(const Vector& x, const Vector& y) const;

    void require_interior(const Vector& x, const char* what) const;
};

/// h(x) = 1/2 |x|^2 on R^d.
class EuclideanKernel final : public Kernel {
public:
    std::string name() const override { return "euclidean"; }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    bool in_interior_domain(const Vector& x) const override;
    Vector inverse_gradient(const Vector& z) const override;
    bool is_radial() const override { return true; }

protected:
    double bregman_raw(const Vector& x, const Vector& y) const override;
};

/// Burg entropy h(x) = -sum log x_j on the open positive orthant.
class BurgKernel final : public Kernel {
public:
    std::string name() const override { return "burg"; }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    bool in_interior_domain(const Vector& x) const override;
    Vector inverse_gradient(const Vector& z) const override;

protected:
    double bregman_raw(const Vector& x, const Vector& y) const override;
};

/// h(x) = 1/4 |x|^4 + 1/2 |x|^2 on R^d, grad h(x) = (|x|^2 + 1) x.
class QuarticKernel final : public Kernel {
public:
    std::string name() const override { return "quartic"; }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    bool in_interior_domain(const Vector& x) const override;
    Vector inverse_gradient(const Vector& z) const override;
    bool is_radial() const override { return true; }

protected:
    double bregman_raw(const Vector& x, const Vector& y) const override;
};

/// D_h(x,z) - D_h(x,y) - D_h(y,z) - <grad h(y) - grad h(z), x - y>.
/// Zero up to rounding for every kernel; exposed for test suites.
double three_point_identity_residual(const Kernel& kernel, const Vector& x, const Vector& y,
                                     const Vector& z);

/// Unique real root r >= 0 of r^3 + r = norm_v, to |r^3 + r - norm_v| <= 1e-12
/// (relative to max(1, norm_v) once the root is large).
double cubic_root_scale(double norm_v);

} // namespace bregopt
