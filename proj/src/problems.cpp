#include "bregopt/problems.hpp"

#include "bregopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bregopt {

Vector ZeroRegularizer::prox(const Kernel& kernel, const Vector& y, const Vector& grad_f_y,
                             double lambda) const {
    return kernel.inverse_gradient(kernel.gradient(y) - lambda * grad_f_y);
}

L1Regularizer::L1Regularizer(double theta) : theta_(theta) {
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
        throw ValidationError("L1Regularizer: theta must be finite and nonnegative");
    }
}

double L1Regularizer::value(const Vector& x) const { return theta_ * x.lpNorm<1>(); }

Vector L1Regularizer::prox(const Kernel& kernel, const Vector& y, const Vector& grad_f_y,
                           double lambda) const {
    if (!kernel.is_radial()) {
        throw ValidationError("L1Regularizer: closed-form prox needs a radial kernel, got " +
                              kernel.name());
    }
    return kernel.inverse_gradient(
        soft_threshold(kernel.gradient(y) - lambda * grad_f_y, lambda * theta_));
}

Vector soft_threshold(const Vector& z, double tau) {
    if (!(tau >= 0.0)) {
        throw DomainError("soft_threshold: tau must be nonnegative");
    }
    Vector out(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        const double mag = std::max(std::abs(z[j]) - tau, 0.0);
        out[j] = z[j] < 0.0 ? -mag : mag;
    }
    return out;
}

CompositeObjective::CompositeObjective(std::shared_ptr<const SmoothTerm> smooth,
                                       std::shared_ptr<const NonsmoothTerm> nonsmooth,
                                       std::shared_ptr<const Kernel> kernel,
                                       Eigen::Index dimension)
    : smooth_(std::move(smooth)),
      nonsmooth_(std::move(nonsmooth)),
      kernel_(std::move(kernel)),
      dimension_(dimension) {
    if (!smooth_ || !nonsmooth_ || !kernel_) {
        throw ValidationError("CompositeObjective: null component");
    }
    if (dimension_ < 1) {
        throw ValidationError("CompositeObjective: dimension must be positive");
    }
    const double L = smooth_->smad_constant();
    const double mu = smooth_->weak_convexity_constant();
    if (!(L > 0.0) || !(mu >= 0.0) || mu > L) {
        throw ValidationError("CompositeObjective: constants must satisfy 0 <= mu <= L, L > 0");
    }
}

double CompositeObjective::value(const Vector& x) const {
    if (x.size() != dimension_) {
        throw DomainError("objective: dimension mismatch");
    }
    if (!kernel_->in_interior_domain(x)) {
        throw DomainError("objective: x outside int dom h");
    }
    return smooth_->value(x) + nonsmooth_->value(x);
}

SmadReport check_smad(const CompositeObjective& obj, int samples, std::uint64_t rng_seed,
                      double box_low, double box_high) {
    return check_smad(obj, obj.smooth().smad_constant(), obj.smooth().weak_convexity_constant(),
                      samples, rng_seed, box_low, box_high);
}

SmadReport check_smad(const CompositeObjective& obj, double smad_constant,
                      double weak_convexity_constant, int samples, std::uint64_t rng_seed,
                      double box_low, double box_high) {
    if (samples < 1 || !(box_low < box_high)) {
        throw ValidationError("check_smad: need samples >= 1 and a nonempty box");
    }
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unif(box_low, box_high);
    const Kernel& h = obj.kernel();
    const SmoothTerm& f = obj.smooth();
    const auto draw = [&]() {
        Vector p(obj.dimension());
        for (int attempt = 0; attempt < 1000; ++attempt) {
            for (auto& v : p) {
                v = unif(rng);
            }
            if (h.in_interior_domain(p)) {
                return p;
            }
        }
        throw DomainError("check_smad: sampling box does not meet int dom h");
    };

    SmadReport report;
    report.samples = samples;
    for (int s = 0; s < samples; ++s) {
        const Vector x = draw();
        const Vector y = draw();
        const double fx = f.value(x);
        const double gap = fx - f.value(y) - f.gradient(y).dot(x - y);
        const double dh = h.bregman(x, y);
        const double scale = 1.0 + std::abs(fx);
        const double upper = (std::abs(gap) - smad_constant * dh) / scale;
        const double lower = (-weak_convexity_constant * dh - gap) / scale;
        report.max_upper_violation = std::max(report.max_upper_violation, upper);
        report.max_lower_violation = std::max(report.max_lower_violation, lower);
        if (upper > 1e-8) {
            ++report.upper_failures;
        }
        if (lower > 1e-8) {
            ++report.lower_failures;
        }
    }
    return report;
}

} // namespace bregopt
