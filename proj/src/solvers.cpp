#include "bregopt/solvers.hpp"

#include "bregopt/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace bregopt {

void LineSearchConfig::validate() const {
    if (!(beta0 >= 0.0 && beta0 < 1.0)) {
        throw ValidationError("line search: beta0 must lie in [0, 1)");
    }
    if (!(eta > 0.0 && eta < 1.0)) {
        throw ValidationError("line search: eta must lie in (0, 1)");
    }
    if (!(rho > 0.0 && rho < 1.0)) {
        throw ValidationError("line search: rho must lie in (0, 1)");
    }
    if (max_shrinks < 1) {
        throw ValidationError("line search: max_shrinks must be positive");
    }
}

void SolverConfig::validate(double smad_constant) const {
    line_search.validate();
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("solver: lambda must be positive");
    }
    if (lambda * smad_constant > 1.0 + 1e-12) {
        throw ValidationError("solver: lambda exceeds 1/L");
    }
    if (!(tol > 0.0)) {
        throw ValidationError("solver: tol must be positive");
    }
    if (k_max < 1) {
        throw ValidationError("solver: k_max must be positive");
    }
    const double inv = 1.0 / lambda;
    const double M = lyapunov_weight();
    if (!(M >= line_search.rho * inv * (1.0 - 1e-12) && M <= inv * (1.0 + 1e-12))) {
        throw ValidationError("solver: lyapunov_M must lie in [rho/lambda, 1/lambda]");
    }
}

std::string to_string(ExitReason reason) {
    switch (reason) {
    case ExitReason::tolerance:
        return "tolerance";
    case ExitReason::max_iterations:
        return "max_iterations";
    case ExitReason::numerical_failure:
        return "numerical_failure";
    }
    return "unknown";
}

std::string to_string(ExitMode mode) {
    return mode == ExitMode::iterate_relative ? "iterate" : "objective";
}

ExitMode parse_exit_mode(const std::string& text) {
    if (text == "iterate" || text == "iterate_relative") {
        return ExitMode::iterate_relative;
    }
    if (text == "objective" || text == "objective_relative") {
        return ExitMode::objective_relative;
    }
    throw ValidationError("unknown exit mode '" + text + "' (expected iterate|objective)");
}

std::string to_string(SolverKind kind) {
    switch (kind) {
    case SolverKind::bpg:
        return "bpg";
    case SolverKind::bpge:
        return "bpge";
    case SolverKind::pg:
        return "pg";
    case SolverKind::pge:
        return "pge";
    }
    return "unknown";
}

SolverKind parse_solver(const std::string& text) {
    if (text == "bpg") return SolverKind::bpg;
    if (text == "bpge") return SolverKind::bpge;
    if (text == "pg") return SolverKind::pg;
    if (text == "pge") return SolverKind::pge;
    throw ValidationError("unknown solver '" + text + "' (expected bpg|bpge|pg|pge)");
}

double line_search_constant(double lambda, double mu) {
    const double inv = 1.0 / lambda;
    return inv / (inv + mu);
}

LineSearchResult line_search_beta(const Kernel& kernel, const Vector& x_prev,
                                  const Vector& x_curr, const LineSearchConfig& cfg,
                                  double c_k) {
    const double threshold = cfg.rho * c_k * kernel.bregman(x_prev, x_curr);
    const Vector direction = x_curr - x_prev;
    LineSearchResult out;
    double beta = cfg.beta0;
    for (int shrinks = 0; shrinks <= cfg.max_shrinks; ++shrinks) {
        const Vector trial = x_curr + beta * direction;
        if (kernel.in_interior_domain(trial)) {
            const double lhs = kernel.bregman(x_curr, trial);
            if (lhs <= threshold) {
                out.beta = beta;
                out.shrinks = shrinks;
                out.dh_trial = lhs;
                return out;
            }
        }
        beta *= cfg.eta;
    }
    out.beta = 0.0;
    out.shrinks = cfg.max_shrinks;
    out.fallback = true;
    out.dh_trial = 0.0;
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

bool tolerance_reached(ExitMode mode, double tol, const Vector& x_new, const Vector& x_old,
                       double psi_new, double psi_old) {
    if (mode == ExitMode::iterate_relative) {
        return (x_new - x_old).norm() / std::max(1.0, x_new.norm()) <= tol;
    }
    return std::abs(psi_new - psi_old) / std::max(1.0, std::abs(psi_new)) <= tol;
}

SolveResult run(const CompositeObjective& obj, const Vector& x0, const SolverConfig& cfg,
                bool extrapolate) {
    const SmoothTerm& f = obj.smooth();
    const Kernel& h = obj.kernel();
    cfg.validate(f.smad_constant());
    if (x0.size() != obj.dimension()) {
        throw ValidationError("solver: x0 has wrong dimension");
    }
    if (!h.in_interior_domain(x0)) {
        throw DomainError("solver: x0 outside int dom h");
    }

    const double lambda = cfg.lambda;
    const double inv_lambda = 1.0 / lambda;
    const double M = cfg.lyapunov_weight();
    const double c_k = line_search_constant(lambda, f.weak_convexity_constant());

    SolveResult result;
    result.trace.reserve(static_cast<std::size_t>(std::min(cfg.k_max, 100000)));
    Vector x_prev = x0;
    Vector x = x0;
    double psi = obj.value(x0);
    result.psi_initial = psi;
    if (cfg.record_iterates) {
        result.iterates.push_back(x0);
    }

    const auto fail = [&](const std::string& why) {
        result.exit_reason = ExitReason::numerical_failure;
        result.failure_message = why;
        spdlog::debug("solver stopped at iteration {}: {}", result.iterations, why);
    };

    bool converged = false;
    for (int k = 0; k < cfg.k_max; ++k) {
        const auto t_start = Clock::now();
        IterationRecord rec;
        rec.k = k + 1;

        Vector y;
        if (extrapolate) {
            const LineSearchResult ls = line_search_beta(h, x_prev, x, cfg.line_search, c_k);
            rec.beta_accepted = ls.beta;
            rec.shrink_count = ls.shrinks;
            rec.beta_fallback = ls.fallback;
            rec.dh_extrapolation = ls.dh_trial;
            if (ls.fallback) {
                spdlog::info("line search fell back to beta = 0 at iteration {}", k);
            }
            y = x + ls.beta * (x - x_prev);
        } else {
            y = x;
        }

        Vector x_next;
        Vector grad_y;
        try {
            grad_y = f.gradient(y);
            x_next = obj.nonsmooth().prox(h, y, grad_y, lambda);
        } catch (const NumericalFailure& e) {
            fail(e.what());
            break;
        } catch (const DomainError& e) {
            fail(e.what());
            break;
        }
        if (!x_next.allFinite() || !h.in_interior_domain(x_next)) {
            fail("proximal step left int dom h");
            break;
        }

        const double psi_next = obj.value(x_next);
        if (!std::isfinite(psi_next)) {
            fail("objective became non-finite");
            break;
        }
        rec.psi = psi_next;
        rec.dh_step = h.bregman(x, x_next);
        rec.lyapunov = psi_next + M * rec.dh_step;
        rec.residual =
            (f.gradient(x_next) - grad_y - inv_lambda * (h.gradient(x_next) - h.gradient(y)))
                .norm();
        rec.wall_time = std::chrono::duration<double>(Clock::now() - t_start).count();
        result.trace.push_back(rec);
        result.iterations = k + 1;
        if (cfg.record_iterates) {
            result.iterates.push_back(x_next);
        }

        const bool done = tolerance_reached(cfg.exit_mode, cfg.tol, x_next, x, psi_next, psi);
        x_prev = std::move(x);
        x = std::move(x_next);
        psi = psi_next;
        if (done) {
            converged = true;
            break;
        }
    }

    result.x_final = x;
    result.psi_final = psi;
    if (result.exit_reason != ExitReason::numerical_failure) {
        result.exit_reason = converged ? ExitReason::tolerance : ExitReason::max_iterations;
    }
    return result;
}

void require_euclidean(const CompositeObjective& obj) {
    if (dynamic_cast<const EuclideanKernel*>(&obj.kernel()) == nullptr) {
        throw ValidationError(
            "PG/PGe need a Euclidean kernel: f lacks a global Lipschitz gradient under " +
            obj.kernel().name() + " geometry");
    }
}

} // namespace

SolveResult bpge_solve(const CompositeObjective& obj, const Vector& x0, const SolverConfig& cfg) {
    return run(obj, x0, cfg, true);
}

SolveResult bpg_solve(const CompositeObjective& obj, const Vector& x0, const SolverConfig& cfg) {
    return run(obj, x0, cfg, false);
}

SolveResult pge_solve(const CompositeObjective& obj, const Vector& x0, const SolverConfig& cfg) {
    require_euclidean(obj);
    return run(obj, x0, cfg, true);
}

SolveResult pg_solve(const CompositeObjective& obj, const Vector& x0, const SolverConfig& cfg) {
    require_euclidean(obj);
    return run(obj, x0, cfg, false);
}

SolveResult solve(SolverKind kind, const CompositeObjective& obj, const Vector& x0,
                  const SolverConfig& cfg) {
    switch (kind) {
    case SolverKind::bpg:
        return bpg_solve(obj, x0, cfg);
    case SolverKind::bpge:
        return bpge_solve(obj, x0, cfg);
    case SolverKind::pg:
        return pg_solve(obj, x0, cfg);
    case SolverKind::pge:
        return pge_solve(obj, x0, cfg);
    }
    throw ValidationError("unknown solver kind");
}

RateReport sublinear_rate_check(const std::vector<IterationRecord>& trace, double lambda,
                                double rho) {
    RateReport report;
    report.max_excess = -std::numeric_limits<double>::infinity();
    const double denom_unit = (1.0 - rho) / lambda;
    double running_min = std::numeric_limits<double>::infinity();
    // trace[j] holds k = j + 1, so H_1 = trace[0] and H_{K+1} = trace[K].
    for (std::size_t K = 1; K < trace.size(); ++K) {
        running_min = std::min(running_min, trace[K - 1].dh_step);
        const double bound =
            (trace[0].lyapunov - trace[K].lyapunov) / (static_cast<double>(K) * denom_unit);
        const double excess = running_min - bound;
        if (excess > report.max_excess) {
            report.max_excess = excess;
            report.worst_K = static_cast<int>(K);
        }
        if (excess > 1e-10) {
            report.passed = false;
        }
        ++report.checked;
    }
    if (report.checked == 0) {
        report.max_excess = 0.0;
    }
    return report;
}

MonotonicityReport lyapunov_monotonicity_check(const SolveResult& result, double rel_tol) {
    MonotonicityReport report;
    report.max_increase = -std::numeric_limits<double>::infinity();
    double previous = result.psi_initial;
    for (std::size_t j = 0; j < result.trace.size(); ++j) {
        const double current = result.trace[j].lyapunov;
        const double scale = std::max(1.0, std::abs(previous));
        const double increase = (current - previous) / scale;
        report.max_increase = std::max(report.max_increase, increase);
        if (increase > rel_tol && report.first_violation < 0) {
            report.first_violation = static_cast<int>(j);
        }
        previous = current;
    }
    if (result.trace.empty()) {
        report.max_increase = 0.0;
    }
    return report;
}

LineSearchAudit audit_line_search(const CompositeObjective& obj, const SolveResult& result,
                                  const SolverConfig& cfg) {
    if (result.iterates.size() != result.trace.size() + 1) {
        throw ValidationError("audit_line_search: run was not recorded with record_iterates");
    }
    const Kernel& h = obj.kernel();
    const double c_k = line_search_constant(cfg.lambda, obj.smooth().weak_convexity_constant());
    LineSearchAudit audit;
    for (std::size_t j = 0; j < result.trace.size(); ++j) {
        const IterationRecord& rec = result.trace[j];
        // Record j was produced from y^{j} = x^{j} + beta (x^{j} - x^{j-1}), x^{-1} = x^0.
        const Vector& x_curr = result.iterates[j];
        const Vector& x_prev = j == 0 ? result.iterates[0] : result.iterates[j - 1];
        const Vector y = x_curr + rec.beta_accepted * (x_curr - x_prev);
        audit.max_shrinks_used = std::max(audit.max_shrinks_used, rec.shrink_count);
        if (rec.beta_fallback) {
            ++audit.fallbacks;
        }
        if (!h.in_interior_domain(y)) {
            ++audit.violations;
            continue;
        }
        const double lhs = h.bregman(x_curr, y);
        const double rhs = cfg.line_search.rho * c_k * h.bregman(x_prev, x_curr);
        audit.max_excess = std::max(audit.max_excess, lhs - rhs);
        if (lhs > rhs || rec.shrink_count > cfg.line_search.max_shrinks) {
            ++audit.violations;
        }
    }
    return audit;
}

} // namespace bregopt
