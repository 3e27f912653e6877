#include "bregopt/qip.hpp"

#include "bregopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace bregopt::qip {

double QipInstance::smad_constant() const {
    const Vector sq = a.rowwise().squaredNorm();
    return (3.0 * sq.array().square() + sq.array() * b.array().abs()).sum();
}

double QipInstance::weak_convexity_constant() const {
    const Vector sq = a.rowwise().squaredNorm();
    return (sq.array() * b.array().abs()).sum();
}

void QipInstance::validate() const {
    if (a.rows() < 1 || a.cols() < 1 || b.size() != a.rows()) {
        throw ValidationError("qip: inconsistent dimensions");
    }
    if (!a.allFinite() || !b.allFinite()) {
        throw ValidationError("qip: non-finite data");
    }
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
        throw ValidationError("qip: theta must be finite and nonnegative");
    }
    if (!(smad_constant() > 0.0)) {
        throw ValidationError("qip: degenerate measurements (L = 0)");
    }
}

Eigen::Index support_size(Eigen::Index d) { return (5 * d + 99) / 100; }

namespace {

void check_dim(const QipInstance& inst, const Vector& x) {
    if (x.size() != inst.d()) {
        throw DomainError("qip: x has wrong dimension");
    }
}

} // namespace

double data_fit_value(const QipInstance& inst, const Vector& x) {
    check_dim(inst, x);
    const Vector ax = inst.a * x;
    return 0.25 * (ax.array().square() - inst.b.array()).square().sum();
}

double qip_value(const QipInstance& inst, const Vector& x) {
    return data_fit_value(inst, x) + inst.theta * x.lpNorm<1>();
}

Vector qip_gradient(const QipInstance& inst, const Vector& x) {
    check_dim(inst, x);
    const Vector ax = inst.a * x;
    const Vector w = ((ax.array().square() - inst.b.array()) * ax.array()).matrix();
    return inst.a.transpose() * w;
}

Vector qip_prox(const Vector& y, const Vector& grad, double lambda, double theta) {
    if (y.size() != grad.size()) {
        throw DomainError("qip_prox: dimension mismatch");
    }
    const Vector c = (y.squaredNorm() + 1.0) * y - lambda * grad;
    const Vector v = soft_threshold(c, lambda * theta);
    const double r = cubic_root_scale(v.norm());
    return v / (r * r + 1.0);
}

QuarticDataFit::QuarticDataFit(std::shared_ptr<const QipInstance> inst) : inst_(std::move(inst)) {
    if (!inst_) {
        throw ValidationError("QuarticDataFit: null instance");
    }
    inst_->validate();
    L_ = inst_->smad_constant();
    mu_ = inst_->weak_convexity_constant();
}

double QuarticDataFit::value(const Vector& x) const { return data_fit_value(*inst_, x); }

Vector QuarticDataFit::gradient(const Vector& x) const { return qip_gradient(*inst_, x); }

Vector QuarticL1Step::prox(const Kernel& kernel, const Vector& y, const Vector& grad_f_y,
                           double lambda) const {
    if (dynamic_cast<const QuarticKernel*>(&kernel) == nullptr) {
        throw ValidationError("qip: closed-form prox requires the quartic kernel");
    }
    return qip_prox(y, grad_f_y, lambda, theta_);
}

CompositeObjective make_objective(std::shared_ptr<const QipInstance> inst) {
    const Eigen::Index d = inst->d();
    const double theta = inst->theta;
    return CompositeObjective(std::make_shared<QuarticDataFit>(std::move(inst)),
                              std::make_shared<QuarticL1Step>(theta),
                              std::make_shared<QuarticKernel>(), d);
}

QipInstance generate(Eigen::Index m, Eigen::Index d, std::uint64_t seed,
                     const GenerateOptions& options) {
    if (m < 1 || d < 1) {
        throw ValidationError("qip: m and d must be positive");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    QipInstance inst;
    inst.seed = seed;
    inst.theta = options.theta;
    inst.a.resize(m, d);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            inst.a(i, j) = gauss(rng);
        }
    }

    std::vector<Eigen::Index> positions(static_cast<std::size_t>(d));
    std::iota(positions.begin(), positions.end(), Eigen::Index{0});
    std::shuffle(positions.begin(), positions.end(), rng);
    inst.x_true = Vector::Zero(d);
    const Eigen::Index k = support_size(d);
    for (Eigen::Index s = 0; s < k; ++s) {
        double value = 0.0;
        while (value == 0.0) {
            value = gauss(rng);
        }
        inst.x_true[positions[static_cast<std::size_t>(s)]] = value;
    }

    inst.b = (inst.a * inst.x_true).array().square().matrix();
    if (options.noise_sigma > 0.0) {
        for (auto& v : inst.b) {
            v += options.noise_sigma * gauss(rng);
        }
    }

    inst.x0.resize(d);
    do {
        for (auto& v : inst.x0) {
            v = gauss(rng);
        }
    } while (inst.x0.norm() == 0.0);
    inst.x0.normalize();

    inst.validate();
    return inst;
}

} // namespace bregopt::qip
