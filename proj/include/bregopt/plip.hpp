#pragma once

#include "bregopt/problems.hpp"

#include <cstdint>
#include <memory>

namespace bregopt::plip {

/// Poisson linear inverse problem: minimise the Kullback-Leibler fidelity
///   f(x) = sum_i b_i log(b_i / (Ax)_i) + (Ax)_i - b_i
/// over x > 0 under Burg-entropy geometry, with g == 0.
struct PlipInstance {
    Matrix A;      ///< m x d, entries in (0, 1]
    Vector b;      ///< length m, strictly positive
    Vector x_true; ///< generating point (b = A x_true when noiseless)
    Vector x0;     ///< starting point used by the harness
    std::uint64_t seed = 0;
    /// Regularisation weight; kept for completeness, the g == 0 case is the only one solved.
    double theta = 0.0;

    Eigen::Index m() const { return A.rows(); }
    Eigen::Index d() const { return A.cols(); }

    /// L = |b|_1
    double smad_constant() const { return b.lpNorm<1>(); }

    /// Throws ValidationError when A or b break the positivity requirements.
    void validate() const;
};

double kl_value(const PlipInstance& inst, const Vector& x);
Vector kl_gradient(const PlipInstance& inst, const Vector& x);

/// Closed-form Burg mirror step x_j = y_j / (1 + lambda y_j grad_j). Throws
/// NumericalFailure when a denominator is not positive.
Vector plip_prox(const Vector& y, const Vector& grad, double lambda);

class KlFidelity final : public SmoothTerm {
public:
    explicit KlFidelity(std::shared_ptr<const PlipInstance> inst);
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    double smad_constant() const override { return L_; }
    double weak_convexity_constant() const override { return 0.0; }

private:
    std::shared_ptr<const PlipInstance> inst_;
    double L_;
};

/// g == 0 with the Burg closed form; the kernel argument must be a BurgKernel.
class BurgMirrorStep final : public NonsmoothTerm {
public:
    double value(const Vector&) const override { return 0.0; }
    Vector prox(const Kernel& kernel, const Vector& y, const Vector& grad_f_y,
                double lambda) const override;
};

CompositeObjective make_objective(std::shared_ptr<const PlipInstance> inst);

struct GenerateOptions {
    /// Replace b by Poisson counts at this photon scale: b = Poisson(s A x_true) / s.
    bool poisson_noise = false;
    double photon_scale = 100.0;
};

/// x_true ~ U(0,1)^d, A_ij ~ U(0,1], b = A x_true, x0 ~ U(0.5, 1.5)^d.
PlipInstance generate(Eigen::Index m, Eigen::Index d, std::uint64_t seed,
                      const GenerateOptions& options = {});

} // namespace bregopt::plip
