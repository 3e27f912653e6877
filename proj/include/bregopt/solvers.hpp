#pragma once

#include "bregopt/problems.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bregopt {

struct LineSearchConfig {
    double beta0 = 0.99;
    double eta = 0.5;
    double rho = 0.99;
    int max_shrinks = 60;

    void validate() const;
};

enum class ExitMode { iterate_relative, objective_relative };

struct SolverConfig {
    /// Fixed step size; must satisfy 0 < lambda <= 1/L.
    double lambda = 0.0;
    LineSearchConfig line_search{};
    double tol = 1e-6;
    int k_max = 5000;
    ExitMode exit_mode = ExitMode::iterate_relative;
    /// Lyapunov weight M in [rho / lambda, 1 / lambda]; defaults to 1 / lambda.
    std::optional<double> lyapunov_M;
    /// Keep every iterate x^k in SolveResult::iterates (for post-hoc audits).
    bool record_iterates = false;

    double lyapunov_weight() const { return lyapunov_M.value_or(1.0 / lambda); }
    void validate(double smad_constant) const;
};

/// One accepted step x^{k-1} -> x^k.
struct IterationRecord {
    int k = 0;
    double psi = 0.0;
    /// D_h(x^{k-1}, x^k)
    double dh_step = 0.0;
    /// H_{k,M} = psi + M dh_step
    double lyapunov = 0.0;
    /// beta_{k-1}, the extrapolation used to build y^{k-1}
    double beta_accepted = 0.0;
    int shrink_count = 0;
    /// True when the line search gave up and fell back to beta = 0.
    bool beta_fallback = false;
    /// D_h(x^{k-1}, y^{k-1}) as evaluated by the line search
    double dh_extrapolation = 0.0;
    /// |grad f(x^k) - grad f(y^{k-1}) - (grad h(x^k) - grad h(y^{k-1})) / lambda|,
    /// the norm of an element of the limiting subdifferential of Psi at x^k.
    double residual = 0.0;
    /// Seconds spent in this iteration.
    double wall_time = 0.0;
};

enum class ExitReason { tolerance, max_iterations, numerical_failure };

std::string to_string(ExitReason reason);
std::string to_string(ExitMode mode);
ExitMode parse_exit_mode(const std::string& text);

struct SolveResult {
    Vector x_final;
    double psi_final = 0.0;
    /// Psi(x^0) = H_{0,M}
    double psi_initial = 0.0;
    int iterations = 0;
    ExitReason exit_reason = ExitReason::max_iterations;
    std::string failure_message;
    std::vector<IterationRecord> trace;
    /// x^0, x^1, ..., populated when SolverConfig::record_iterates is set.
    std::vector<Vector> iterates;
};

struct LineSearchResult {
    double beta = 0.0;
    int shrinks = 0;
    bool fallback = false;
    /// D_h(x_curr, x_curr + beta (x_curr - x_prev))
    double dh_trial = 0.0;
};

/// C_k = lambda^{-1} / (lambda^{-1} + mu).
double line_search_constant(double lambda, double mu);

/// Largest beta in {beta0, eta beta0, eta^2 beta0, ...} with the trial point in
/// int dom h and D_h(x_curr, trial) <= rho C_k D_h(x_prev, x_curr). A trial point
/// outside the domain counts as a failed test. Falls back to beta = 0 once
/// max_shrinks is exhausted.
LineSearchResult line_search_beta(const Kernel& kernel, const Vector& x_prev,
                                  const Vector& x_curr, const LineSearchConfig& cfg,
                                  double c_k);

/// Bregman proximal gradient with extrapolation.
SolveResult bpge_solve(const CompositeObjective& obj, const Vector& x0, const SolverConfig& cfg);

/// Bregman proximal gradient (beta_k == 0, no line search).
SolveResult bpg_solve(const CompositeObjective& obj, const Vector& x0, const SolverConfig& cfg);

/// Euclidean specialisations; the objective's kernel must be EuclideanKernel.
SolveResult pge_solve(const CompositeObjective& obj, const Vector& x0, const SolverConfig& cfg);
SolveResult pg_solve(const CompositeObjective& obj, const Vector& x0, const SolverConfig& cfg);

enum class SolverKind { bpg, bpge, pg, pge };

std::string to_string(SolverKind kind);
SolverKind parse_solver(const std::string& text);

SolveResult solve(SolverKind kind, const CompositeObjective& obj, const Vector& x0,
                  const SolverConfig& cfg);

struct RateReport {
    /// max over K of min_{k<=K} dh_step - bound_K (negative means slack)
    double max_excess = 0.0;
    /// K at which max_excess is attained
    int worst_K = 0;
    int checked = 0;
    bool passed = true;
};

/// For every K with H_{K+1} in the trace, checks
///   min_{1<=k<=K} D_h(x^{k-1}, x^k) <= (H_1 - H_{K+1}) / (K (1 - rho) / lambda) + 1e-10.
RateReport sublinear_rate_check(const std::vector<IterationRecord>& trace, double lambda,
                                double rho);

struct MonotonicityReport {
    double max_increase = 0.0; ///< largest (H_{k+1} - H_k) / max(1, |H_k|)
    int first_violation = -1;  ///< index into the trace, -1 if none
    bool passed() const { return first_violation < 0; }
};

/// H_{k+1} <= H_k + rel_tol max(1, |H_k|) along the trace, starting from
/// H_0 = psi_initial.
MonotonicityReport lyapunov_monotonicity_check(const SolveResult& result,
                                               double rel_tol = 1e-10);

struct LineSearchAudit {
    int violations = 0;
    int fallbacks = 0;
    int max_shrinks_used = 0;
    double max_excess = 0.0;
    bool passed() const { return violations == 0; }
};

/// Re-evaluates the acceptance inequality of every line search from the stored
/// iterates (requires record_iterates).
LineSearchAudit audit_line_search(const CompositeObjective& obj, const SolveResult& result,
                                  const SolverConfig& cfg);

} // namespace bregopt
