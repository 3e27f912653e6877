#include "bregopt/oracles.hpp"

#include "bregopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace bregopt::oracles {

Vector central_difference_gradient(const std::function<double(const Vector&)>& fn,
                                   const Vector& x, double step_rel) {
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = step_rel * std::max(1.0, std::abs(x[j]));
        probe[j] = x[j] + h;
        const double up = fn(probe);
        probe[j] = x[j] - h;
        const double down = fn(probe);
        probe[j] = x[j];
        g[j] = (up - down) / (2.0 * h);
    }
    return g;
}

double relative_error(const Vector& approx, const Vector& exact) {
    return (approx - exact).norm() / std::max(1.0, exact.norm());
}

double prox_subproblem_value(const CompositeObjective& obj, const Vector& u, const Vector& y,
                             const Vector& grad, double lambda) {
    if (!obj.kernel().in_interior_domain(u)) {
        return std::numeric_limits<double>::infinity();
    }
    return obj.nonsmooth().value(u) + grad.dot(u - y) + obj.kernel().bregman(u, y) / lambda;
}

namespace {

struct GridResult {
    Vector best;
    double value = std::numeric_limits<double>::infinity();
    bool on_boundary = false;
    double spacing = 0.0;
};

GridResult grid_search(const std::function<double(const Vector&)>& phi, const Vector& lo,
                       const Vector& hi, int points, bool restricted, int& evaluations) {
    const Eigen::Index d = lo.size();
    GridResult out;
    out.best = lo;
    std::vector<int> index(static_cast<std::size_t>(d), 0);
    std::vector<int> best_index(index);
    Vector u(d);
    const Vector step = (hi - lo) / static_cast<double>(points - 1);
    out.spacing = step.maxCoeff();
    for (;;) {
        for (Eigen::Index j = 0; j < d; ++j) {
            u[j] = lo[j] + step[j] * index[static_cast<std::size_t>(j)];
        }
        const double v = phi(u);
        ++evaluations;
        if (v < out.value) {
            out.value = v;
            out.best = u;
            best_index = index;
        }
        Eigen::Index j = 0;
        for (; j < d; ++j) {
            auto& ij = index[static_cast<std::size_t>(j)];
            if (++ij < points) {
                break;
            }
            ij = 0;
        }
        if (j == d) {
            break;
        }
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        const int ij = best_index[static_cast<std::size_t>(j)];
        // The lower edge of a restricted domain is the domain boundary itself, not the box.
        if (ij == points - 1 || (ij == 0 && !restricted)) {
            out.on_boundary = true;
        }
    }
    return out;
}

} // namespace

SubproblemMinimum brute_force_prox(const CompositeObjective& obj, const Vector& y,
                                   const Vector& grad, double lambda) {
    const Eigen::Index d = y.size();
    if (d < 1 || d > 3) {
        throw ValidationError("brute_force_prox: only 1 <= d <= 3 is supported");
    }
    const Kernel& h = obj.kernel();
    const bool restricted = !h.in_interior_domain(-Vector::Ones(d));
    const auto phi = [&](const Vector& u) {
        return prox_subproblem_value(obj, u, y, grad, lambda);
    };
    const int points = d == 3 ? 61 : 201;

    SubproblemMinimum result;
    double radius = 1.0 + y.lpNorm<Eigen::Infinity>();
    GridResult grid;
    for (int expansion = 0; expansion < 12; ++expansion) {
        Vector lo = y.array() - radius;
        const Vector hi = y.array() + radius;
        if (restricted) {
            for (Eigen::Index j = 0; j < d; ++j) {
                lo[j] = std::max(lo[j], 1e-9 * y[j]);
            }
        }
        grid = grid_search(phi, lo, hi, points, restricted, result.evaluations);
        if (!grid.on_boundary) {
            break;
        }
        radius *= 4.0;
    }

    // Compass search on axis and diagonal directions.
    std::vector<Vector> dirs;
    for (Eigen::Index i = 0; i < d; ++i) {
        Vector e = Vector::Zero(d);
        e[i] = 1.0;
        dirs.push_back(e);
        dirs.push_back(-e);
        for (Eigen::Index j = i + 1; j < d; ++j) {
            for (double s : {1.0, -1.0}) {
                Vector v = Vector::Zero(d);
                v[i] = 1.0 / std::sqrt(2.0);
                v[j] = s / std::sqrt(2.0);
                dirs.push_back(v);
                dirs.push_back(-v);
            }
        }
    }
    Vector u = grid.best;
    double best = grid.value;
    double step = grid.spacing;
    for (int it = 0; it < 1000000 && step > 1e-14 * (1.0 + u.norm()); ++it) {
        Vector candidate = u;
        double cand_value = best;
        for (const Vector& dir : dirs) {
            const Vector trial = u + step * dir;
            const double v = phi(trial);
            ++result.evaluations;
            if (v < cand_value) {
                cand_value = v;
                candidate = trial;
            }
        }
        if (cand_value < best) {
            u = candidate;
            best = cand_value;
        } else {
            step *= 0.5;
        }
    }
    result.argmin = u;
    result.value = best;
    return result;
}

} // namespace bregopt::oracles
