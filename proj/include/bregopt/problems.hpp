#pragma once

#include "bregopt/kernels.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace bregopt {

/// Smooth part f of the composite objective together with its constants
/// relative to the kernel: L (smooth adaptable) and mu (relative weak convexity).
class SmoothTerm {
public:
    virtual ~SmoothTerm() = default;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    virtual double smad_constant() const = 0;
    virtual double weak_convexity_constant() const = 0;
};

/// Nonsmooth part g and its Bregman proximal map
///   T_lambda(y) = argmin_u g(u) + <grad_f_y, u - y> + D_h(u, y) / lambda.
class NonsmoothTerm {
public:
    virtual ~NonsmoothTerm() = default;
    virtual double value(const Vector& x) const = 0;
    virtual Vector prox(const Kernel& kernel, const Vector& y, const Vector& grad_f_y,
                        double lambda) const = 0;
};

/// g == 0; the proximal map is the mirror step (grad h)^{-1}(grad h(y) - lambda grad).
class ZeroRegularizer final : public NonsmoothTerm {
public:
    double value(const Vector&) const override { return 0.0; }
    Vector prox(const Kernel& kernel, const Vector& y, const Vector& grad_f_y,
                double lambda) const override;
};

/// g = theta |x|_1. The proximal map is closed form for radial kernels:
/// soft-threshold grad h(y) - lambda grad at lambda theta, then invert grad h.
class L1Regularizer final : public NonsmoothTerm {
public:
    explicit L1Regularizer(double theta);
    double theta() const { return theta_; }
    double value(const Vector& x) const override;
    Vector prox(const Kernel& kernel, const Vector& y, const Vector& grad_f_y,
                double lambda) const override;

private:
    double theta_;
};

/// Componentwise sign(z_j) max(|z_j| - tau, 0).
Vector soft_threshold(const Vector& z, double tau);

/// Psi = f + g under the geometry of a kernel h.
class CompositeObjective {
public:
    CompositeObjective(std::shared_ptr<const SmoothTerm> smooth,
                       std::shared_ptr<const NonsmoothTerm> nonsmooth,
                       std::shared_ptr<const Kernel> kernel, Eigen::Index dimension);

    const SmoothTerm& smooth() const { return *smooth_; }
    const NonsmoothTerm& nonsmooth() const { return *nonsmooth_; }
    const Kernel& kernel() const { return *kernel_; }
    std::shared_ptr<const Kernel> kernel_ptr() const { return kernel_; }
    Eigen::Index dimension() const { return dimension_; }

    /// f(x) + g(x); throws DomainError outside int dom h.
    double value(const Vector& x) const;

private:
    std::shared_ptr<const SmoothTerm> smooth_;
    std::shared_ptr<const NonsmoothTerm> nonsmooth_;
    std::shared_ptr<const Kernel> kernel_;
    Eigen::Index dimension_;
};

inline double objective_value(const CompositeObjective& obj, const Vector& x) {
    return obj.value(x);
}

/// Outcome of sampling the two Bregman envelopes
///   -mu D_h(x,y) <= f(x) - f(y) - <grad f(y), x - y> <= L D_h(x,y).
/// Violations are reported as max over samples of excess / (1 + |f(x)|).
struct SmadReport {
    int samples = 0;
    double max_upper_violation = 0.0;
    double max_lower_violation = 0.0;
    int upper_failures = 0;
    int lower_failures = 0;
    bool passed() const { return upper_failures == 0 && lower_failures == 0; }
};

/// Samples pairs uniformly from the box [box_low, box_high]^d (points outside
/// int dom h are redrawn) and checks both envelopes at relative slack 1e-8.
SmadReport check_smad(const CompositeObjective& obj, int samples, std::uint64_t rng_seed,
                      double box_low = -2.0, double box_high = 2.0);

/// Variant with explicit L and mu overriding the objective's constants.
SmadReport check_smad(const CompositeObjective& obj, double smad_constant,
                      double weak_convexity_constant, int samples, std::uint64_t rng_seed,
                      double box_low = -2.0, double box_high = 2.0);

} // namespace bregopt
