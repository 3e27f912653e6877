#pragma once

#include "bregopt/plip.hpp"
#include "bregopt/qip.hpp"
#include "bregopt/solvers.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bregopt::harness {

enum class ProblemKind { plip, qip };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem(const std::string& text);

/// Generation knobs shared by the CLI and experiment specs.
struct GenerationOptions {
    double theta = 1.0;
    bool plip_poisson_noise = false;
    double plip_photon_scale = 100.0;
    double qip_noise_sigma = 0.0;
};

/// A seeded PLIP or QIP instance together with its starting point.
class ProblemInstance {
public:
    static ProblemInstance from_plip(plip::PlipInstance inst);
    static ProblemInstance from_qip(qip::QipInstance inst);

    ProblemKind kind() const { return kind_; }
    const plip::PlipInstance& plip() const;
    const qip::QipInstance& qip() const;

    Eigen::Index m() const;
    Eigen::Index d() const;
    std::uint64_t seed() const;
    const Vector& x0() const;
    double smad_constant() const;

    CompositeObjective objective() const;

    nlohmann::ordered_json to_json() const;
    static ProblemInstance from_json(const nlohmann::json& doc);

private:
    ProblemKind kind_ = ProblemKind::plip;
    std::shared_ptr<const plip::PlipInstance> plip_;
    std::shared_ptr<const qip::QipInstance> qip_;
};

/// Deterministic in (problem, m, d, seed, options).
ProblemInstance generate_instance(ProblemKind problem, Eigen::Index m, Eigen::Index d,
                                  std::uint64_t seed, const GenerationOptions& options = {});

/// Step-size rule lambda = 1 / (divisor L).
struct LambdaRule {
    int divisor = 1;
    std::string label() const;
    double step(double smad_constant) const { return 1.0 / (divisor * smad_constant); }
};

LambdaRule parse_lambda_rule(const std::string& text);

struct ExperimentSpec {
    ProblemKind problem = ProblemKind::plip;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> sizes;
    std::vector<LambdaRule> lambdas{LambdaRule{1}};
    std::vector<double> rhos{0.99};
    std::vector<SolverKind> solvers{SolverKind::bpg, SolverKind::bpge};
    std::uint64_t seed = 1;
    int repetitions = 1;
    double tol = 1e-6;
    int k_max = 5000;
    ExitMode exit_mode = ExitMode::iterate_relative;
    double beta0 = 0.99;
    double eta = 0.5;
    int max_shrinks = 60;
    GenerationOptions generation{};

    /// Throws ValidationError; rejects pg/pge for plip and qip.
    void validate() const;

    nlohmann::ordered_json to_json() const;
    /// Throws ValidationError naming the offending field.
    static ExperimentSpec from_json(const nlohmann::json& doc);
    /// Parses JSON text; syntax errors are reported with their byte position.
    static ExperimentSpec parse(const std::string& text);
};

/// Throws ValidationError when the solver cannot be applied to the problem.
void require_admissible(ProblemKind problem, SolverKind solver);

/// splitmix64-based mix of the master seed with the cell coordinates.
std::uint64_t cell_seed(std::uint64_t master, Eigen::Index m, Eigen::Index d,
                        std::size_t lambda_index, std::size_t rho_index, int repetition);

struct RunRecord {
    Eigen::Index m = 0;
    Eigen::Index d = 0;
    int repetition = 0;
    std::string lambda_rule;
    double rho = 0.0;
    SolverKind solver = SolverKind::bpge;
    std::uint64_t instance_seed = 0;
    double seconds = 0.0;
    SolveResult result;
    std::string trace_file;
};

struct ComparisonRow {
    Eigen::Index m = 0;
    Eigen::Index d = 0;
    int repetition = 0;
    std::string lambda_rule;
    double rho = 0.0;
    std::optional<double> T_bpge;
    std::optional<double> T_ratio;
    std::optional<int> N_bpge;
    std::optional<double> N_ratio;
    std::optional<ExitReason> exit_bpge;
    std::optional<ExitReason> exit_bpg;
};

struct SweepOutput {
    std::vector<ComparisonRow> rows;
    std::vector<RunRecord> runs;
};

struct SweepOptions {
    /// When set, trace CSVs and aggregate tables are written below this directory.
    std::optional<std::filesystem::path> out_dir;
    int jobs = 1;
    /// Keep x^k of every run (for line-search audits).
    bool record_iterates = false;
};

SweepOutput run_comparison(const ExperimentSpec& spec, const SweepOptions& options = {});

/// Trace CSV: iter, psi, psi_gap, dh_step, lyapunov, beta, shrinks, residual, cum_time_s.
/// psi_gap is measured against the run's own terminal Psi.
std::string convergence_curve_csv(const SolveResult& result);
void emit_convergence_curves(const SolveResult& result, const std::filesystem::path& path);

/// Aggregate table mirroring the published comparison columns plus exit reasons.
std::string comparison_csv(const std::vector<ComparisonRow>& rows);
/// One line per run (solver, iterations, seconds, final Psi, exit reason).
std::string runs_csv(const std::vector<RunRecord>& runs);

nlohmann::ordered_json result_to_json(const SolveResult& result, SolverKind solver,
                                      const SolverConfig& cfg);

struct CheckOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Gradient finite differences, kernel identities, smad sampling, closed-form
/// prox vs brute force (d <= 3 only), and descent certificates on a BPGe run.
std::vector<CheckOutcome> run_invariant_checks(ProblemKind problem, Eigen::Index m,
                                               Eigen::Index d, std::uint64_t seed,
                                               const GenerationOptions& options = {});

} // namespace bregopt::harness
