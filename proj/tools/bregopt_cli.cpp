// bregopt: generate instances, run single solves, parameter sweeps and
// invariant checks for the Bregman proximal gradient solvers.

#include "bregopt/errors.hpp"
#include "bregopt/harness.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace bregopt;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kNumerical = 2;

void configure_logging() {
    spdlog::set_level(spdlog::level::info);
    const char* env = std::getenv("BREGOPT_LOG");
    if (env == nullptr) {
        return;
    }
    const std::string level(env);
    if (level == "error") {
        spdlog::set_level(spdlog::level::err);
    } else if (level == "info") {
        spdlog::set_level(spdlog::level::info);
    } else if (level == "debug") {
        spdlog::set_level(spdlog::level::debug);
    } else {
        spdlog::warn("ignoring BREGOPT_LOG={} (expected error|info|debug)", level);
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct InstanceFlags {
    std::string problem = "plip";
    long m = 100;
    long d = 10;
    std::uint64_t seed = 1;
    double theta = 1.0;
    std::string instance_file;

    harness::ProblemInstance load() const {
        if (!instance_file.empty()) {
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(read_text(instance_file));
            } catch (const nlohmann::json::parse_error& e) {
                throw ValidationError(instance_file + ": malformed JSON: " + e.what());
            }
            return harness::ProblemInstance::from_json(doc);
        }
        harness::GenerationOptions opts;
        opts.theta = theta;
        return harness::generate_instance(harness::parse_problem(problem), m, d, seed, opts);
    }
};

void add_instance_flags(CLI::App* cmd, InstanceFlags& flags, bool allow_file) {
    cmd->add_option("--problem", flags.problem, "plip or qip")
        ->check(CLI::IsMember({"plip", "qip"}));
    cmd->add_option("--m", flags.m, "number of measurements")->check(CLI::PositiveNumber);
    cmd->add_option("--d", flags.d, "dimension")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", flags.seed, "instance seed");
    cmd->add_option("--theta", flags.theta, "l1 weight (qip)")->check(CLI::NonNegativeNumber);
    if (allow_file) {
        cmd->add_option("--instance", flags.instance_file, "instance JSON written by generate")
            ->check(CLI::ExistingFile);
    }
}

} // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Bregman proximal gradient solvers with extrapolation"};
    app.require_subcommand(1);

    InstanceFlags gen_flags;
    std::string gen_out = ".";
    auto* gen = app.add_subcommand("generate", "write a seeded instance as JSON");
    add_instance_flags(gen, gen_flags, false);
    gen->add_option("--out", gen_out, "output directory");

    InstanceFlags solve_flags;
    std::string solver = "bpge";
    std::string lambda_rule = "1/L";
    LineSearchConfig ls;
    double tol = 1e-6;
    int kmax = 5000;
    std::string exit_mode = "iterate";
    std::string solve_out = ".";
    auto* solve_cmd = app.add_subcommand("solve", "run one solver on one instance");
    add_instance_flags(solve_cmd, solve_flags, true);
    solve_cmd->add_option("--solver", solver, "bpg, bpge, pg or pge")
        ->check(CLI::IsMember({"bpg", "bpge", "pg", "pge"}));
    solve_cmd->add_option("--lambda-rule", lambda_rule, "1/L, 1/2L or 1/3L")
        ->check(CLI::IsMember({"1/L", "1/2L", "1/3L"}));
    solve_cmd->add_option("--rho", ls.rho, "line-search ratio in (0,1)");
    solve_cmd->add_option("--beta0", ls.beta0, "initial extrapolation in [0,1)");
    solve_cmd->add_option("--eta", ls.eta, "shrink factor in (0,1)");
    solve_cmd->add_option("--tol", tol, "exit tolerance");
    solve_cmd->add_option("--kmax", kmax, "iteration cap");
    solve_cmd->add_option("--exit-mode", exit_mode, "iterate or objective")
        ->check(CLI::IsMember({"iterate", "objective"}));
    solve_cmd->add_option("--out", solve_out, "output directory");

    std::string spec_file;
    std::string sweep_out = "sweep_out";
    int jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "run an experiment spec");
    sweep->add_option("--spec", spec_file, "experiment spec JSON")->required();
    sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_option("--jobs", jobs, "parallel cells")->check(CLI::PositiveNumber);

    InstanceFlags check_flags;
    auto* check = app.add_subcommand("check", "run the invariant suite on a seeded instance");
    add_instance_flags(check, check_flags, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*gen) {
            const auto inst = gen_flags.load();
            const fs::path path = fs::path(gen_out) /
                                  (gen_flags.problem + "_m" + std::to_string(gen_flags.m) + "_d" +
                                   std::to_string(gen_flags.d) + "_s" +
                                   std::to_string(gen_flags.seed) + ".json");
            write_text(path, inst.to_json().dump() + "\n");
            std::cout << path.string() << "\n";
            return kOk;
        }

        if (*solve_cmd) {
            const auto inst = solve_flags.load();
            const SolverKind kind = parse_solver(solver);
            harness::require_admissible(inst.kind(), kind);
            const CompositeObjective obj = inst.objective();
            SolverConfig cfg;
            cfg.lambda = harness::parse_lambda_rule(lambda_rule).step(inst.smad_constant());
            cfg.line_search = ls;
            cfg.tol = tol;
            cfg.k_max = kmax;
            cfg.exit_mode = parse_exit_mode(exit_mode);
            const SolveResult result = bregopt::solve(kind, obj, inst.x0(), cfg);
            const fs::path out(solve_out);
            harness::emit_convergence_curves(result, out / ("trace_" + solver + ".csv"));
            write_text(out / ("result_" + solver + ".json"),
                       harness::result_to_json(result, kind, cfg).dump(2) + "\n");
            spdlog::info("{}: {} iterations, exit {}, psi {}", solver, result.iterations,
                         to_string(result.exit_reason), result.psi_final);
            if (result.exit_reason == ExitReason::numerical_failure) {
                spdlog::error("numerical failure: {}", result.failure_message);
                return kNumerical;
            }
            return kOk;
        }

        if (*sweep) {
            const auto spec = harness::ExperimentSpec::parse(read_text(spec_file));
            harness::SweepOptions opts;
            opts.out_dir = fs::path(sweep_out);
            opts.jobs = jobs;
            const auto output = harness::run_comparison(spec, opts);
            std::cout << harness::comparison_csv(output.rows);
            for (const auto& run : output.runs) {
                if (run.result.exit_reason == ExitReason::numerical_failure) {
                    return kNumerical;
                }
            }
            return kOk;
        }

        if (*check) {
            const auto outcomes = harness::run_invariant_checks(
                harness::parse_problem(check_flags.problem), check_flags.m, check_flags.d,
                check_flags.seed, harness::GenerationOptions{check_flags.theta});
            bool all = true;
            for (const auto& o : outcomes) {
                std::cout << (o.passed ? "PASS " : "FAIL ") << o.name << ": " << o.detail << "\n";
                all = all && o.passed;
            }
            return all ? kOk : kNumerical;
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}
