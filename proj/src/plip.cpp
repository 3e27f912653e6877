#include "bregopt/plip.hpp"

#include "bregopt/errors.hpp"

#include <cmath>
#include <random>
#include <string>

namespace bregopt::plip {

void PlipInstance::validate() const {
    if (A.rows() < 1 || A.cols() < 1 || b.size() != A.rows()) {
        throw ValidationError("plip: inconsistent dimensions");
    }
    if (!A.allFinite() || (A.array() <= 0.0).any()) {
        throw ValidationError("plip: A must have strictly positive entries");
    }
    if (!b.allFinite() || (b.array() <= 0.0).any()) {
        throw ValidationError("plip: b must be strictly positive");
    }
}

namespace {

Vector forward(const PlipInstance& inst, const Vector& x) {
    if (x.size() != inst.d()) {
        throw DomainError("plip: x has wrong dimension");
    }
    if (!x.allFinite() || (x.array() <= 0.0).any()) {
        throw DomainError("plip: x must be strictly positive");
    }
    return inst.A * x;
}

} // namespace

double kl_value(const PlipInstance& inst, const Vector& x) {
    const Vector ax = forward(inst, x);
    // b log(b/a) + a - b = b (r - log1p(r)), r = (a - b)/b.
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ax.size(); ++i) {
        const double r = (ax[i] - inst.b[i]) / inst.b[i];
        sum += inst.b[i] * (r - std::log1p(r));
    }
    return sum;
}

Vector kl_gradient(const PlipInstance& inst, const Vector& x) {
    const Vector ax = forward(inst, x);
    const Vector w = (1.0 - inst.b.array() / ax.array()).matrix();
    return inst.A.transpose() * w;
}

Vector plip_prox(const Vector& y, const Vector& grad, double lambda) {
    if (y.size() != grad.size()) {
        throw DomainError("plip_prox: dimension mismatch");
    }
    if (!y.allFinite() || (y.array() <= 0.0).any()) {
        throw DomainError("plip_prox: y must be strictly positive");
    }
    Vector x(y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const double denom = 1.0 + lambda * y[j] * grad[j];
        if (!(denom > 0.0) || !std::isfinite(denom)) {
            throw NumericalFailure("plip_prox: nonpositive denominator at component " +
                                   std::to_string(j));
        }
        x[j] = y[j] / denom;
    }
    return x;
}

KlFidelity::KlFidelity(std::shared_ptr<const PlipInstance> inst) : inst_(std::move(inst)) {
    if (!inst_) {
        throw ValidationError("KlFidelity: null instance");
    }
    inst_->validate();
    L_ = inst_->smad_constant();
}

double KlFidelity::value(const Vector& x) const { return kl_value(*inst_, x); }

Vector KlFidelity::gradient(const Vector& x) const { return kl_gradient(*inst_, x); }

Vector BurgMirrorStep::prox(const Kernel& kernel, const Vector& y, const Vector& grad_f_y,
                            double lambda) const {
    if (dynamic_cast<const BurgKernel*>(&kernel) == nullptr) {
        throw ValidationError("plip: mirror step requires the Burg kernel");
    }
    return plip_prox(y, grad_f_y, lambda);
}

CompositeObjective make_objective(std::shared_ptr<const PlipInstance> inst) {
    const Eigen::Index d = inst->d();
    return CompositeObjective(std::make_shared<KlFidelity>(std::move(inst)),
                              std::make_shared<BurgMirrorStep>(),
                              std::make_shared<BurgKernel>(), d);
}

PlipInstance generate(Eigen::Index m, Eigen::Index d, std::uint64_t seed,
                      const GenerateOptions& options) {
    if (m < 1 || d < 1) {
        throw ValidationError("plip: m and d must be positive");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PlipInstance inst;
    inst.seed = seed;
    inst.A.resize(m, d);
    for (;;) {
        // 1 - U[0,1) lies in (0, 1].
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                inst.A(i, j) = 1.0 - unit(rng);
            }
        }
        if ((inst.A.colwise().maxCoeff().array() >= 1e-12).all()) {
            break;
        }
    }
    inst.x_true.resize(d);
    for (auto& v : inst.x_true) {
        v = unit(rng);
    }
    inst.b = inst.A * inst.x_true;
    if (options.poisson_noise) {
        const double s = options.photon_scale;
        for (auto& v : inst.b) {
            std::poisson_distribution<long long> counts(s * v);
            const auto c = counts(rng);
            // A zero count would leave the KL fidelity without a positive datum.
            v = c > 0 ? static_cast<double>(c) / s : 0.5 / s;
        }
    }
    std::uniform_real_distribution<double> start(0.5, 1.5);
    inst.x0.resize(d);
    for (auto& v : inst.x0) {
        v = start(rng);
    }
    inst.validate();
    return inst;
}

} // namespace bregopt::plip
