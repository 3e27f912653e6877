#include "bregopt/errors.hpp"
#include "bregopt/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bregopt;
using namespace bregopt::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentSpec small_spec() {
    ExperimentSpec spec;
    spec.problem = ProblemKind::plip;
    spec.sizes = {{60, 5}};
    spec.lambdas = {LambdaRule{1}, LambdaRule{3}};
    spec.rhos = {0.9, 0.99};
    spec.k_max = 300;
    spec.seed = 17;
    return spec;
}

} // namespace

TEST_CASE("instance generation is deterministic and serialises byte-identically") {
    const auto a = generate_instance(ProblemKind::plip, 100, 10, 42);
    const auto b = generate_instance(ProblemKind::plip, 100, 10, 42);
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK(generate_instance(ProblemKind::plip, 100, 10, 43).to_json().dump() != a.to_json().dump());

    const auto q = generate_instance(ProblemKind::qip, 100, 20, 7);
    CHECK((q.qip().x_true.array() != 0.0).count() == 1);

    const auto small = generate_instance(ProblemKind::plip, 50, 5, 3);
    CHECK((small.plip().A.array() > 0.0).all());
    CHECK((small.plip().A.array() <= 1.0).all());
    CHECK((small.plip().b.array() > 0.0).all());
}

TEST_CASE("instance JSON round trip") {
    for (auto kind : {ProblemKind::plip, ProblemKind::qip}) {
        const auto inst = generate_instance(kind, 12, 3, 5);
        const auto doc = inst.to_json();
        const auto back = ProblemInstance::from_json(nlohmann::json::parse(doc.dump()));
        CHECK(back.to_json().dump() == doc.dump());
        CHECK(back.x0() == inst.x0());
        CHECK(back.smad_constant() == inst.smad_constant());
    }
    auto doc = nlohmann::json::parse(generate_instance(ProblemKind::qip, 4, 2, 1).to_json().dump());
    doc.erase("theta");
    CHECK_THROWS_WITH_AS(ProblemInstance::from_json(doc), doctest::Contains("theta"),
                         ValidationError);
    doc = nlohmann::json::parse(generate_instance(ProblemKind::plip, 4, 2, 1).to_json().dump());
    doc["b"] = {1.0, 2.0};
    CHECK_THROWS_WITH_AS(ProblemInstance::from_json(doc), doctest::Contains("'b'"), ValidationError);
}

TEST_CASE("lambda rules") {
    CHECK(parse_lambda_rule("1/L").divisor == 1);
    CHECK(parse_lambda_rule("1/2L").divisor == 2);
    CHECK(parse_lambda_rule("1/(3L)").divisor == 3);
    CHECK(parse_lambda_rule("1/3L").step(2.0) == doctest::Approx(1.0 / 6.0));
    CHECK_THROWS_AS(parse_lambda_rule("2/L"), ValidationError);
}

TEST_CASE("spec validation rejects Euclidean solvers on plip and qip") {
    ExperimentSpec spec = small_spec();
    spec.solvers = {SolverKind::pg};
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("Lipschitz"), ValidationError);
    spec.problem = ProblemKind::qip;
    spec.solvers = {SolverKind::bpge, SolverKind::pge};
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("spec JSON parsing and diagnostics") {
    const auto spec = ExperimentSpec::parse(R"({
        "problem": "qip", "sizes": [[50, 5], [80, 10]], "lambdas": ["1/L", "1/3L"],
        "rhos": [0.95], "solvers": ["bpge"], "seed": 3, "repetitions": 2,
        "tol": 1e-7, "k_max": 100, "exit_mode": "objective", "theta": 0.5})");
    CHECK(spec.problem == ProblemKind::qip);
    CHECK(spec.sizes.size() == 2);
    CHECK(spec.lambdas[1].divisor == 3);
    CHECK(spec.exit_mode == ExitMode::objective_relative);
    CHECK(spec.generation.theta == 0.5);
    CHECK(ExperimentSpec::from_json(nlohmann::json::parse(spec.to_json().dump())).to_json() ==
          spec.to_json());

    CHECK_THROWS_WITH_AS(ExperimentSpec::parse("{\"problem\": \"plip\",\n \"sizes\": [[1,2]"),
                         doctest::Contains("malformed JSON"), ValidationError);
    CHECK_THROWS_WITH_AS(ExperimentSpec::parse(R"({"problem": "plip", "sizes": [[1]]})"),
                         doctest::Contains("sizes[0]"), ValidationError);
    CHECK_THROWS_WITH_AS(ExperimentSpec::parse(R"({"problem": "plip", "sizes": [[5,2]], "rho": 1})"),
                         doctest::Contains("unknown field 'rho'"), ValidationError);
    CHECK_THROWS_WITH_AS(ExperimentSpec::parse(R"({"problem": "plip"})"),
                         doctest::Contains("sizes"), ValidationError);
    CHECK_THROWS_AS(ExperimentSpec::parse(R"({"problem": "plip", "sizes": [[5,2]], "rhos": [1.5]})"),
                    ValidationError);
}

TEST_CASE("cell seeds differ across coordinates") {
    const auto base = cell_seed(1, 100, 10, 0, 0, 0);
    CHECK(base == cell_seed(1, 100, 10, 0, 0, 0));
    CHECK(base != cell_seed(2, 100, 10, 0, 0, 0));
    CHECK(base != cell_seed(1, 101, 10, 0, 0, 0));
    CHECK(base != cell_seed(1, 100, 10, 1, 0, 0));
    CHECK(base != cell_seed(1, 100, 10, 0, 1, 0));
    CHECK(base != cell_seed(1, 100, 10, 0, 0, 1));
}

TEST_CASE("comparison rows agree with their traces") {
    const auto out = run_comparison(small_spec());
    REQUIRE(out.rows.size() == 4);
    REQUIRE(out.runs.size() == 8);
    for (const auto& run : out.runs) {
        CHECK(static_cast<int>(run.result.trace.size()) == run.result.iterations);
        CHECK(run.result.iterations <= 300);
    }
    for (std::size_t c = 0; c < out.rows.size(); ++c) {
        const auto& row = out.rows[c];
        const auto& bpg = out.runs[2 * c];
        const auto& bpge = out.runs[2 * c + 1];
        REQUIRE(bpge.solver == SolverKind::bpge);
        CHECK(*row.N_bpge == bpge.result.iterations);
        CHECK(*row.N_ratio == doctest::Approx(double(bpge.result.iterations) / bpg.result.iterations));
        CHECK(*row.T_ratio > 0.0);
        // Both solvers see the same instance.
        CHECK(bpg.instance_seed == bpge.instance_seed);
    }
}

TEST_CASE("bpge with beta0 = 0 and bpg give identical sweeps") {
    ExperimentSpec spec = small_spec();
    spec.beta0 = 0.0;
    spec.solvers = {SolverKind::bpge};
    const auto a = run_comparison(spec);
    spec.solvers = {SolverKind::bpg};
    const auto b = run_comparison(spec);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].result.iterations == b.runs[i].result.iterations);
        REQUIRE(a.runs[i].result.trace.size() == b.runs[i].result.trace.size());
        for (std::size_t k = 0; k < a.runs[i].result.trace.size(); ++k) {
            CHECK(a.runs[i].result.trace[k].psi == b.runs[i].result.trace[k].psi);
        }
    }
    CHECK_FALSE(a.rows[0].N_ratio.has_value());
}

TEST_CASE("sweep output files are deterministic and parallel runs match serial") {
    ExperimentSpec spec = small_spec();
    spec.repetitions = 3;
    const fs::path root = fs::temp_directory_path() / "bregopt_harness_test";
    fs::remove_all(root);
    SweepOptions serial;
    serial.out_dir = root / "serial";
    SweepOptions parallel;
    parallel.out_dir = root / "parallel";
    parallel.jobs = 3;
    const auto a = run_comparison(spec, serial);
    const auto b = run_comparison(spec, parallel);
    CHECK(fs::exists(root / "serial" / "comparison.csv"));
    CHECK(fs::exists(root / "serial" / "runs.csv"));
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(convergence_curve_csv(a.runs[i].result).size() > 0);
        CHECK(a.runs[i].trace_file == b.runs[i].trace_file);
        CHECK(a.runs[i].result.x_final == b.runs[i].result.x_final);
        CHECK(a.runs[i].result.iterations == b.runs[i].result.iterations);
    }
    const std::string csv = slurp(root / "serial" / a.runs[0].trace_file);
    CHECK(csv.rfind("iter,psi,psi_gap,dh_step,lyapunov,beta,shrinks,residual,cum_time_s\n", 0) == 0);
    fs::remove_all(root);
}

TEST_CASE("convergence curve CSV") {
    auto inst = generate_instance(ProblemKind::plip, 80, 6, 9);
    SolverConfig cfg;
    cfg.lambda = 1.0 / inst.smad_constant();
    const SolveResult res = bpge_solve(inst.objective(), inst.x0(), cfg);
    const std::string csv = convergence_curve_csv(res);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::string last;
    double prev_h = INFINITY;
    int rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 9);
        const double h = std::stod(cells[4]);
        CHECK(h <= prev_h + 1e-10 * std::max(1.0, std::abs(prev_h)));
        prev_h = h;
        last = cells[2];
        ++rows;
    }
    CHECK(rows == res.iterations);
    CHECK(std::stod(last) == 0.0);
}

TEST_CASE("invariant checks pass on seeded instances") {
    for (auto kind : {ProblemKind::plip, ProblemKind::qip}) {
        for (const auto& o : run_invariant_checks(kind, 20, 3, 5)) {
            CAPTURE(o.name);
            CAPTURE(o.detail);
            CHECK(o.passed);
        }
    }
}

TEST_CASE("result JSON") {
    auto inst = generate_instance(ProblemKind::qip, 30, 4, 2);
    SolverConfig cfg;
    cfg.lambda = 1.0 / inst.smad_constant();
    cfg.k_max = 50;
    const auto res = bpg_solve(inst.objective(), inst.x0(), cfg);
    const auto doc = result_to_json(res, SolverKind::bpg, cfg);
    CHECK(doc["solver"] == "bpg");
    CHECK(doc["iterations"] == res.iterations);
    CHECK(doc["x_final"].size() == 4);
}
