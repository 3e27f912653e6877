#include "bregopt/kernels.hpp"

#include "bregopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bregopt {

namespace {

constexpr double kClampSlack = 1e-12;

void require_same_size(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) {
        throw DomainError("bregman: dimension mismatch");
    }
}

} // namespace

double Kernel::bregman(const Vector& x, const Vector& y) const {
    require_same_size(x, y);
    require_interior(y, "bregman: y");
    if (!in_interior_domain(x)) {
        throw DomainError("bregman: x outside dom h");
    }
    const double d = bregman_raw(x, y);
    if (std::isnan(d)) {
        throw DomainError("bregman: non-finite distance");
    }
    if (d < 0.0) {
        if (d < -kClampSlack) {
            throw std::logic_error("bregman: negative distance " + std::to_string(d));
        }
        return 0.0;
    }
    return d;
}

double Kernel::bregman_raw(const Vector& x, const Vector& y) const {
    return value(x) - value(y) - gradient(y).dot(x - y);
}

void Kernel::require_interior(const Vector& x, const char* what) const {
    if (!in_interior_domain(x)) {
        throw DomainError(std::string(what) + " outside int dom h (" + name() + ")");
    }
}

// Euclidean ----------------------------------------------------------------

double EuclideanKernel::value(const Vector& x) const { return 0.5 * x.squaredNorm(); }

Vector EuclideanKernel::gradient(const Vector& x) const { return x; }

bool EuclideanKernel::in_interior_domain(const Vector& x) const { return x.allFinite(); }

Vector EuclideanKernel::inverse_gradient(const Vector& z) const {
    require_interior(z, "inverse_gradient: z");
    return z;
}

double EuclideanKernel::bregman_raw(const Vector& x, const Vector& y) const {
    return 0.5 * (x - y).squaredNorm();
}

// Burg ---------------------------------------------------------------------

double BurgKernel::value(const Vector& x) const {
    require_interior(x, "value: x");
    return -x.array().log().sum();
}

Vector BurgKernel::gradient(const Vector& x) const {
    require_interior(x, "gradient: x");
    return -x.array().inverse();
}

bool BurgKernel::in_interior_domain(const Vector& x) const {
    return x.allFinite() && (x.array() > 0.0).all();
}

Vector BurgKernel::inverse_gradient(const Vector& z) const {
    if (!z.allFinite() || !(z.array() < 0.0).all()) {
        throw DomainError("inverse_gradient: burg requires every z_j < 0");
    }
    return -z.array().inverse();
}

double BurgKernel::bregman_raw(const Vector& x, const Vector& y) const {
    // x/y - log(x/y) - 1 = t - log1p(t) with t = (x - y)/y.
    double sum = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double t = (x[j] - y[j]) / y[j];
        sum += t - std::log1p(t);
    }
    return sum;
}

// Quartic ------------------------------------------------------------------

double QuarticKernel::value(const Vector& x) const {
    const double s = x.squaredNorm();
    return 0.25 * s * s + 0.5 * s;
}

Vector QuarticKernel::gradient(const Vector& x) const { return (x.squaredNorm() + 1.0) * x; }

bool QuarticKernel::in_interior_domain(const Vector& x) const { return x.allFinite(); }

Vector QuarticKernel::inverse_gradient(const Vector& z) const {
    require_interior(z, "inverse_gradient: z");
    const double nz = z.norm();
    if (nz == 0.0) {
        return Vector::Zero(z.size());
    }
    const double r = cubic_root_scale(nz);
    return z / (r * r + 1.0);
}

double QuarticKernel::bregman_raw(const Vector& x, const Vector& y) const {
    // With a = |x|^2, c = |y|^2, s = |x - y|^2:
    //   D = 1/4 (a - c)^2 + 1/2 c s + 1/2 s,   a - c = <x - y, x + y>.
    const Vector diff = x - y;
    const double s = diff.squaredNorm();
    const double a_minus_c = diff.dot(x + y);
    const double c = y.squaredNorm();
    return 0.25 * a_minus_c * a_minus_c + 0.5 * c * s + 0.5 * s;
}

// --------------------------------------------------------------------------

double three_point_identity_residual(const Kernel& kernel, const Vector& x, const Vector& y,
                                     const Vector& z) {
    const double lhs = kernel.bregman(x, z);
    const double rhs = kernel.bregman(x, y) + kernel.bregman(y, z) +
                       (kernel.gradient(y) - kernel.gradient(z)).dot(x - y);
    return lhs - rhs;
}

double cubic_root_scale(double norm_v) {
    if (!(norm_v >= 0.0) || !std::isfinite(norm_v)) {
        throw DomainError("cubic_root_scale: norm must be finite and nonnegative");
    }
    if (norm_v == 0.0) {
        return 0.0;
    }
    // Root lies in [0, min(v, cbrt(v))]; r^3 + r - v is convex increasing on r >= 0,
    // so Newton from the upper end decreases monotonically onto the root.
    double lo = 0.0;
    double hi = std::min(norm_v, std::cbrt(norm_v));
    double r = hi;
    for (int it = 0; it < 200; ++it) {
        const double f = r * r * r + r - norm_v;
        if (f == 0.0) {
            return r;
        }
        if (f > 0.0) {
            hi = r;
        } else {
            lo = r;
        }
        double next = r - f / (3.0 * r * r + 1.0);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == r || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
            break;
        }
        r = next;
    }
    // Pick whichever bracket end has the smaller residual.
    const auto residual = [norm_v](double t) { return std::abs(t * t * t + t - norm_v); };
    double best = r;
    for (double cand : {lo, hi}) {
        if (residual(cand) < residual(best)) {
            best = cand;
        }
    }
    return best;
}

} // namespace bregopt
