#pragma once

#include "bregopt/problems.hpp"

#include <cstdint>
#include <memory>

namespace bregopt::qip {

/// Sparse quadratic inverse problem with rank-1 measurements A_i = a_i a_i^T:
///   Psi(x) = 1/4 sum_i (<a_i, x>^2 - b_i)^2 + theta |x|_1
/// under the quartic kernel h(x) = 1/4 |x|^4 + 1/2 |x|^2.
struct QipInstance {
    Matrix a;      ///< m x d; row i is a_i
    Vector b;      ///< length m
    double theta = 1.0;
    Vector x_true; ///< sparse generating point
    Vector x0;     ///< starting point used by the harness
    std::uint64_t seed = 0;

    Eigen::Index m() const { return a.rows(); }
    Eigen::Index d() const { return a.cols(); }

    /// L = sum_i 3 |a_i|^4 + |a_i|^2 |b_i|
    double smad_constant() const;
    /// mu = sum_i |a_i|^2 |b_i|
    double weak_convexity_constant() const;

    void validate() const;
};

/// Number of nonzeros in x_true: ceil(5% of d).
Eigen::Index support_size(Eigen::Index d);

/// Smooth part 1/4 sum (<a_i,x>^2 - b_i)^2.
double data_fit_value(const QipInstance& inst, const Vector& x);
/// Full objective including theta |x|_1.
double qip_value(const QipInstance& inst, const Vector& x);
/// sum_i (<a_i,x>^2 - b_i) <a_i,x> a_i
Vector qip_gradient(const QipInstance& inst, const Vector& x);

using bregopt::cubic_root_scale;
using bregopt::soft_threshold;

/// c = grad h(y) - lambda grad, v = soft_threshold(c, lambda theta),
/// x = v / (r^2 + 1) with r^3 + r = |v|.
Vector qip_prox(const Vector& y, const Vector& grad, double lambda, double theta);

class QuarticDataFit final : public SmoothTerm {
public:
    explicit QuarticDataFit(std::shared_ptr<const QipInstance> inst);
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    double smad_constant() const override { return L_; }
    double weak_convexity_constant() const override { return mu_; }

private:
    std::shared_ptr<const QipInstance> inst_;
    double L_;
    double mu_;
};

/// theta |x|_1 with the quartic-kernel closed form; the kernel must be QuarticKernel.
class QuarticL1Step final : public NonsmoothTerm {
public:
    explicit QuarticL1Step(double theta) : theta_(theta) {}
    double value(const Vector& x) const override { return theta_ * x.lpNorm<1>(); }
    Vector prox(const Kernel& kernel, const Vector& y, const Vector& grad_f_y,
                double lambda) const override;

private:
    double theta_;
};

CompositeObjective make_objective(std::shared_ptr<const QipInstance> inst);

struct GenerateOptions {
    double theta = 1.0;
    /// Adds N(0, noise_sigma^2) to every b_i when positive.
    double noise_sigma = 0.0;
};

/// a_i ~ N(0, I_d); x_true has support_size(d) N(0,1) entries at uniformly
/// chosen positions; b_i = <a_i, x_true>^2; x0 is a unit-norm Gaussian direction.
QipInstance generate(Eigen::Index m, Eigen::Index d, std::uint64_t seed,
                     const GenerateOptions& options = {});

} // namespace bregopt::qip
