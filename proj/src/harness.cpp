#include "bregopt/harness.hpp"

#include "bregopt/errors.hpp"
#include "bregopt/oracles.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <locale>
#include <random>
#include <sstream>
#include <thread>

namespace bregopt::harness {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(ProblemKind kind) { return kind == ProblemKind::plip ? "plip" : "qip"; }

ProblemKind parse_problem(const std::string& text) {
    if (text == "plip") return ProblemKind::plip;
    if (text == "qip") return ProblemKind::qip;
    throw ValidationError("unknown problem '" + text + "' (expected plip|qip)");
}

// ProblemInstance ------------------------------------------------------------

ProblemInstance ProblemInstance::from_plip(plip::PlipInstance inst) {
    inst.validate();
    ProblemInstance out;
    out.kind_ = ProblemKind::plip;
    out.plip_ = std::make_shared<const plip::PlipInstance>(std::move(inst));
    return out;
}

ProblemInstance ProblemInstance::from_qip(qip::QipInstance inst) {
    inst.validate();
    ProblemInstance out;
    out.kind_ = ProblemKind::qip;
    out.qip_ = std::make_shared<const qip::QipInstance>(std::move(inst));
    return out;
}

const plip::PlipInstance& ProblemInstance::plip() const {
    if (!plip_) throw ValidationError("instance is not a plip instance");
    return *plip_;
}

const qip::QipInstance& ProblemInstance::qip() const {
    if (!qip_) throw ValidationError("instance is not a qip instance");
    return *qip_;
}

Eigen::Index ProblemInstance::m() const { return plip_ ? plip_->m() : qip_->m(); }
Eigen::Index ProblemInstance::d() const { return plip_ ? plip_->d() : qip_->d(); }
std::uint64_t ProblemInstance::seed() const { return plip_ ? plip_->seed : qip_->seed; }
const Vector& ProblemInstance::x0() const { return plip_ ? plip_->x0 : qip_->x0; }

double ProblemInstance::smad_constant() const {
    return plip_ ? plip_->smad_constant() : qip_->smad_constant();
}

CompositeObjective ProblemInstance::objective() const {
    return plip_ ? plip::make_objective(plip_) : qip::make_objective(qip_);
}

namespace {

json vector_json(const Vector& v) { return json(std::vector<double>(v.begin(), v.end())); }

json rows_json(const Matrix& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        rows.push_back(vector_json(a.row(i).transpose()));
    }
    return rows;
}

template <class Doc>
const json& field(const Doc& doc, const char* key) {
    if (!doc.contains(key)) {
        throw ValidationError(std::string("missing field '") + key + "'");
    }
    return doc.at(key);
}

Vector vector_from(const json& node, const char* key, Eigen::Index expected) {
    try {
        const auto values = node.get<std::vector<double>>();
        if (static_cast<Eigen::Index>(values.size()) != expected) {
            throw ValidationError(std::string("field '") + key + "' has length " +
                                  std::to_string(values.size()) + ", expected " +
                                  std::to_string(expected));
        }
        return Eigen::Map<const Vector>(values.data(), expected);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

Matrix rows_from(const json& node, const char* key, Eigen::Index rows, Eigen::Index cols) {
    if (!node.is_array() || static_cast<Eigen::Index>(node.size()) != rows) {
        throw ValidationError(std::string("field '") + key + "' must hold " +
                              std::to_string(rows) + " rows");
    }
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        out.row(i) = vector_from(node[static_cast<std::size_t>(i)], key, cols).transpose();
    }
    return out;
}

template <class T>
T scalar_from(const json& doc, const char* key) {
    try {
        return field(doc, key).template get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

} // namespace

ordered_json ProblemInstance::to_json() const {
    ordered_json doc;
    doc["problem"] = to_string(kind_);
    doc["m"] = m();
    doc["d"] = d();
    doc["seed"] = seed();
    if (plip_) {
        doc["A"] = rows_json(plip_->A);
        doc["b"] = vector_json(plip_->b);
        doc["x_true"] = vector_json(plip_->x_true);
        doc["x0"] = vector_json(plip_->x0);
    } else {
        doc["theta"] = qip_->theta;
        doc["a"] = rows_json(qip_->a);
        doc["b"] = vector_json(qip_->b);
        doc["x_true"] = vector_json(qip_->x_true);
        doc["x0"] = vector_json(qip_->x0);
    }
    return doc;
}

ProblemInstance ProblemInstance::from_json(const json& doc) {
    if (!doc.is_object()) {
        throw ValidationError("instance document must be a JSON object");
    }
    const ProblemKind kind = parse_problem(scalar_from<std::string>(doc, "problem"));
    const auto m = scalar_from<Eigen::Index>(doc, "m");
    const auto d = scalar_from<Eigen::Index>(doc, "d");
    if (m < 1 || d < 1) {
        throw ValidationError("fields 'm' and 'd' must be positive");
    }
    const auto seed = scalar_from<std::uint64_t>(doc, "seed");
    if (kind == ProblemKind::plip) {
        plip::PlipInstance inst;
        inst.seed = seed;
        inst.A = rows_from(field(doc, "A"), "A", m, d);
        inst.b = vector_from(field(doc, "b"), "b", m);
        inst.x_true = vector_from(field(doc, "x_true"), "x_true", d);
        inst.x0 = doc.contains("x0") ? vector_from(doc["x0"], "x0", d) : Vector::Ones(d);
        return from_plip(std::move(inst));
    }
    qip::QipInstance inst;
    inst.seed = seed;
    inst.theta = scalar_from<double>(doc, "theta");
    inst.a = rows_from(field(doc, "a"), "a", m, d);
    inst.b = vector_from(field(doc, "b"), "b", m);
    inst.x_true = vector_from(field(doc, "x_true"), "x_true", d);
    inst.x0 = doc.contains("x0") ? vector_from(doc["x0"], "x0", d) : Vector::Zero(d);
    return from_qip(std::move(inst));
}

ProblemInstance generate_instance(ProblemKind problem, Eigen::Index m, Eigen::Index d,
                                  std::uint64_t seed, const GenerationOptions& options) {
    if (problem == ProblemKind::plip) {
        plip::GenerateOptions opts;
        opts.poisson_noise = options.plip_poisson_noise;
        opts.photon_scale = options.plip_photon_scale;
        return ProblemInstance::from_plip(plip::generate(m, d, seed, opts));
    }
    qip::GenerateOptions opts;
    opts.theta = options.theta;
    opts.noise_sigma = options.qip_noise_sigma;
    return ProblemInstance::from_qip(qip::generate(m, d, seed, opts));
}

// Experiment spec ------------------------------------------------------------

std::string LambdaRule::label() const {
    return divisor == 1 ? "1/L" : "1/" + std::to_string(divisor) + "L";
}

LambdaRule parse_lambda_rule(const std::string& text) {
    if (text == "1/L") return LambdaRule{1};
    if (text == "1/2L" || text == "1/(2L)") return LambdaRule{2};
    if (text == "1/3L" || text == "1/(3L)") return LambdaRule{3};
    throw ValidationError("unknown lambda rule '" + text + "' (expected 1/L|1/2L|1/3L)");
}

void require_admissible(ProblemKind problem, SolverKind solver) {
    if (solver == SolverKind::pg || solver == SolverKind::pge) {
        throw ValidationError(to_string(solver) + " cannot be applied to " + to_string(problem) +
                              ": f lacks a global Lipschitz gradient, use bpg or bpge");
    }
}

void ExperimentSpec::validate() const {
    if (sizes.empty()) throw ValidationError("spec: 'sizes' must not be empty");
    for (const auto& [m, d] : sizes) {
        if (m < 1 || d < 1) throw ValidationError("spec: sizes must be positive");
    }
    if (lambdas.empty()) throw ValidationError("spec: 'lambdas' must not be empty");
    if (rhos.empty()) throw ValidationError("spec: 'rhos' must not be empty");
    if (solvers.empty()) throw ValidationError("spec: 'solvers' must not be empty");
    for (SolverKind s : solvers) {
        require_admissible(problem, s);
    }
    if (repetitions < 1) throw ValidationError("spec: 'repetitions' must be positive");
    LineSearchConfig ls{beta0, eta, 0.5, max_shrinks};
    for (double rho : rhos) {
        ls.rho = rho;
        ls.validate();
    }
    if (!(tol > 0.0)) throw ValidationError("spec: 'tol' must be positive");
    if (k_max < 1) throw ValidationError("spec: 'k_max' must be positive");
    if (!(generation.theta >= 0.0)) throw ValidationError("spec: 'theta' must be >= 0");
}

ordered_json ExperimentSpec::to_json() const {
    ordered_json doc;
    doc["problem"] = to_string(problem);
    json sz = json::array();
    for (const auto& [m, d] : sizes) sz.push_back({m, d});
    doc["sizes"] = sz;
    json lam = json::array();
    for (const auto& rule : lambdas) lam.push_back(rule.label());
    doc["lambdas"] = lam;
    doc["rhos"] = rhos;
    json sol = json::array();
    for (SolverKind s : solvers) sol.push_back(to_string(s));
    doc["solvers"] = sol;
    doc["seed"] = seed;
    doc["repetitions"] = repetitions;
    doc["tol"] = tol;
    doc["k_max"] = k_max;
    doc["exit_mode"] = to_string(exit_mode);
    doc["beta0"] = beta0;
    doc["eta"] = eta;
    doc["max_shrinks"] = max_shrinks;
    doc["theta"] = generation.theta;
    return doc;
}

ExperimentSpec ExperimentSpec::from_json(const json& doc) {
    if (!doc.is_object()) {
        throw ValidationError("spec: document must be a JSON object");
    }
    static const std::vector<std::string> known = {
        "problem", "sizes", "lambdas", "rhos", "solvers", "seed", "repetitions", "tol",
        "k_max", "exit_mode", "beta0", "eta", "max_shrinks", "theta"};
    for (const auto& item : doc.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            throw ValidationError("spec: unknown field '" + item.key() + "'");
        }
    }
    ExperimentSpec spec;
    spec.problem = parse_problem(scalar_from<std::string>(doc, "problem"));
    const json& sizes = field(doc, "sizes");
    if (!sizes.is_array()) throw ValidationError("spec: 'sizes' must be an array of [m, d]");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const json& pair = sizes[i];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
            !pair[1].is_number_integer()) {
            throw ValidationError("spec: 'sizes[" + std::to_string(i) +
                                  "]' must be an integer pair [m, d]");
        }
        spec.sizes.emplace_back(pair[0].get<Eigen::Index>(), pair[1].get<Eigen::Index>());
    }
    if (doc.contains("lambdas")) {
        spec.lambdas.clear();
        for (const auto& s : scalar_from<std::vector<std::string>>(doc, "lambdas")) {
            spec.lambdas.push_back(parse_lambda_rule(s));
        }
    }
    if (doc.contains("rhos")) spec.rhos = scalar_from<std::vector<double>>(doc, "rhos");
    if (doc.contains("solvers")) {
        spec.solvers.clear();
        for (const auto& s : scalar_from<std::vector<std::string>>(doc, "solvers")) {
            spec.solvers.push_back(parse_solver(s));
        }
    }
    if (doc.contains("seed")) spec.seed = scalar_from<std::uint64_t>(doc, "seed");
    if (doc.contains("repetitions")) spec.repetitions = scalar_from<int>(doc, "repetitions");
    if (doc.contains("tol")) spec.tol = scalar_from<double>(doc, "tol");
    if (doc.contains("k_max")) spec.k_max = scalar_from<int>(doc, "k_max");
    if (doc.contains("exit_mode")) {
        spec.exit_mode = parse_exit_mode(scalar_from<std::string>(doc, "exit_mode"));
    }
    if (doc.contains("beta0")) spec.beta0 = scalar_from<double>(doc, "beta0");
    if (doc.contains("eta")) spec.eta = scalar_from<double>(doc, "eta");
    if (doc.contains("max_shrinks")) spec.max_shrinks = scalar_from<int>(doc, "max_shrinks");
    if (doc.contains("theta")) spec.generation.theta = scalar_from<double>(doc, "theta");
    spec.validate();
    return spec;
}

ExperimentSpec ExperimentSpec::parse(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("spec: malformed JSON: ") + e.what());
    }
    return from_json(doc);
}

// Sweep --------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string num(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

struct Cell {
    Eigen::Index m;
    Eigen::Index d;
    int repetition;
    std::size_t lambda_index;
    std::size_t rho_index;
};

} // namespace

std::uint64_t cell_seed(std::uint64_t master, Eigen::Index m, Eigen::Index d,
                        std::size_t lambda_index, std::size_t rho_index, int repetition) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t part :
         {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(d),
          static_cast<std::uint64_t>(lambda_index), static_cast<std::uint64_t>(rho_index),
          static_cast<std::uint64_t>(repetition)}) {
        h = splitmix64(h ^ part);
    }
    return h;
}

SweepOutput run_comparison(const ExperimentSpec& spec, const SweepOptions& options) {
    spec.validate();
    std::vector<Cell> cells;
    for (const auto& [m, d] : spec.sizes) {
        for (int rep = 0; rep < spec.repetitions; ++rep) {
            for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
                for (std::size_t ri = 0; ri < spec.rhos.size(); ++ri) {
                    cells.push_back(Cell{m, d, rep, li, ri});
                }
            }
        }
    }

    const std::size_t per_cell = spec.solvers.size();
    std::vector<RunRecord> runs(cells.size() * per_cell);

    const auto run_cell = [&](std::size_t c) {
        const Cell& cell = cells[c];
        const std::uint64_t seed =
            cell_seed(spec.seed, cell.m, cell.d, cell.lambda_index, cell.rho_index,
                      cell.repetition);
        const ProblemInstance inst =
            generate_instance(spec.problem, cell.m, cell.d, seed, spec.generation);
        const CompositeObjective obj = inst.objective();
        SolverConfig cfg;
        cfg.lambda = spec.lambdas[cell.lambda_index].step(inst.smad_constant());
        cfg.line_search = LineSearchConfig{spec.beta0, spec.eta, spec.rhos[cell.rho_index],
                                           spec.max_shrinks};
        cfg.tol = spec.tol;
        cfg.k_max = spec.k_max;
        cfg.exit_mode = spec.exit_mode;
        cfg.record_iterates = options.record_iterates;
        for (std::size_t s = 0; s < per_cell; ++s) {
            RunRecord& rec = runs[c * per_cell + s];
            rec.m = cell.m;
            rec.d = cell.d;
            rec.repetition = cell.repetition;
            rec.lambda_rule = spec.lambdas[cell.lambda_index].label();
            rec.rho = spec.rhos[cell.rho_index];
            rec.solver = spec.solvers[s];
            rec.instance_seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            rec.result = solve(rec.solver, obj, inst.x0(), cfg);
            rec.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (rec.result.exit_reason == ExitReason::numerical_failure) {
                spdlog::warn("{} m={} d={} rep={}: numerical failure: {}", to_string(rec.solver),
                             rec.m, rec.d, rec.repetition, rec.result.failure_message);
            }
            if (options.out_dir) {
                std::ostringstream name;
                name << to_string(spec.problem) << "_m" << cell.m << "_d" << cell.d << "_rep"
                     << cell.repetition << "_lam" << spec.lambdas[cell.lambda_index].divisor
                     << "_rho" << cell.rho_index << "_" << to_string(rec.solver) << ".csv";
                rec.trace_file = (std::filesystem::path("traces") / name.str()).string();
                emit_convergence_curves(rec.result, *options.out_dir / rec.trace_file);
            }
        }
    };

    const int jobs = std::max(1, options.jobs);
    if (jobs == 1 || cells.size() < 2) {
        for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t c = next++; c < cells.size(); c = next++) run_cell(c);
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    SweepOutput out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        ComparisonRow row;
        row.m = cells[c].m;
        row.d = cells[c].d;
        row.repetition = cells[c].repetition;
        row.lambda_rule = spec.lambdas[cells[c].lambda_index].label();
        row.rho = spec.rhos[cells[c].rho_index];
        const RunRecord* bpge = nullptr;
        const RunRecord* bpg = nullptr;
        for (std::size_t s = 0; s < per_cell; ++s) {
            const RunRecord& r = runs[c * per_cell + s];
            if (r.solver == SolverKind::bpge) bpge = &r;
            if (r.solver == SolverKind::bpg) bpg = &r;
        }
        if (bpge) {
            row.T_bpge = bpge->seconds;
            row.N_bpge = bpge->result.iterations;
            row.exit_bpge = bpge->result.exit_reason;
        }
        if (bpg) {
            row.exit_bpg = bpg->result.exit_reason;
        }
        if (bpge && bpg && bpg->seconds > 0.0 && bpg->result.iterations > 0) {
            row.T_ratio = bpge->seconds / bpg->seconds;
            row.N_ratio = static_cast<double>(bpge->result.iterations) / bpg->result.iterations;
        }
        out.rows.push_back(std::move(row));
    }
    out.runs = std::move(runs);

    if (options.out_dir) {
        write_file(*options.out_dir / "comparison.csv", comparison_csv(out.rows));
        write_file(*options.out_dir / "runs.csv", runs_csv(out.runs));
        write_file(*options.out_dir / "spec.json", spec.to_json().dump(2) + "\n");
    }
    return out;
}

std::string convergence_curve_csv(const SolveResult& result) {
    std::ostringstream os;
    os << "iter,psi,psi_gap,dh_step,lyapunov,beta,shrinks,residual,cum_time_s\n";
    double cum = 0.0;
    for (const IterationRecord& r : result.trace) {
        cum += r.wall_time;
        os << r.k << ',' << num(r.psi) << ',' << num(std::abs(r.psi - result.psi_final)) << ','
           << num(r.dh_step) << ',' << num(r.lyapunov) << ',' << num(r.beta_accepted) << ','
           << r.shrink_count << ',' << num(r.residual) << ',' << num(cum) << '\n';
    }
    return os.str();
}

void emit_convergence_curves(const SolveResult& result, const std::filesystem::path& path) {
    write_file(path, convergence_curve_csv(result));
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::ostringstream os;
    os << "m,d,rep,lambda_rule,rho,T_bpge,T_ratio,N_bpge,N_ratio,exit_bpge,exit_bpg\n";
    const auto opt = [](const auto& v) { return v ? num(static_cast<double>(*v)) : std::string(); };
    for (const ComparisonRow& r : rows) {
        os << r.m << ',' << r.d << ',' << r.repetition << ',' << r.lambda_rule << ','
           << num(r.rho) << ',' << opt(r.T_bpge) << ',' << opt(r.T_ratio) << ','
           << (r.N_bpge ? std::to_string(*r.N_bpge) : std::string()) << ',' << opt(r.N_ratio)
           << ',' << (r.exit_bpge ? to_string(*r.exit_bpge) : std::string()) << ','
           << (r.exit_bpg ? to_string(*r.exit_bpg) : std::string()) << '\n';
    }
    return os.str();
}

std::string runs_csv(const std::vector<RunRecord>& runs) {
    std::ostringstream os;
    os << "m,d,rep,lambda_rule,rho,solver,instance_seed,iterations,psi_final,exit_reason,"
          "seconds,trace_file\n";
    for (const RunRecord& r : runs) {
        os << r.m << ',' << r.d << ',' << r.repetition << ',' << r.lambda_rule << ','
           << num(r.rho) << ',' << to_string(r.solver) << ',' << r.instance_seed << ','
           << r.result.iterations << ',' << num(r.result.psi_final) << ','
           << to_string(r.result.exit_reason) << ',' << num(r.seconds) << ',' << r.trace_file
           << '\n';
    }
    return os.str();
}

ordered_json result_to_json(const SolveResult& result, SolverKind solver,
                            const SolverConfig& cfg) {
    ordered_json doc;
    doc["solver"] = to_string(solver);
    doc["lambda"] = cfg.lambda;
    doc["rho"] = cfg.line_search.rho;
    doc["beta0"] = cfg.line_search.beta0;
    doc["eta"] = cfg.line_search.eta;
    doc["tol"] = cfg.tol;
    doc["k_max"] = cfg.k_max;
    doc["exit_mode"] = to_string(cfg.exit_mode);
    doc["iterations"] = result.iterations;
    doc["exit_reason"] = to_string(result.exit_reason);
    if (!result.failure_message.empty()) doc["failure"] = result.failure_message;
    doc["psi_initial"] = result.psi_initial;
    doc["psi_final"] = result.psi_final;
    doc["residual_final"] = result.trace.empty() ? 0.0 : result.trace.back().residual;
    doc["x_final"] = std::vector<double>(result.x_final.begin(), result.x_final.end());
    return doc;
}

// Invariant checks -------------------------------------------------------------

std::vector<CheckOutcome> run_invariant_checks(ProblemKind problem, Eigen::Index m,
                                               Eigen::Index d, std::uint64_t seed,
                                               const GenerationOptions& options) {
    std::vector<CheckOutcome> out;
    const ProblemInstance inst = generate_instance(problem, m, d, seed, options);
    const CompositeObjective obj = inst.objective();
    const Kernel& h = obj.kernel();
    std::mt19937_64 rng(seed ^ 0xC0FFEEULL);
    std::uniform_real_distribution<double> pos(0.5, 1.5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto point = [&]() {
        Vector x(d);
        for (auto& v : x) v = problem == ProblemKind::plip ? pos(rng) : gauss(rng);
        return x;
    };
    const auto fmt = [](double v) { return num(v); };

    {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const Vector x = point();
            const Vector fd = oracles::central_difference_gradient(
                [&](const Vector& u) { return obj.smooth().value(u); }, x);
            worst = std::max(worst, oracles::relative_error(fd, obj.smooth().gradient(x)));
        }
        out.push_back({"gradient_finite_differences", worst < 1e-5, "max rel err " + fmt(worst)});
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            const Vector x = point();
            const Vector y = point();
            const Vector z = point();
            const double scale = 1.0 + h.bregman(x, z) + h.bregman(x, y) + h.bregman(y, z);
            worst = std::max(worst, std::abs(three_point_identity_residual(h, x, y, z)) / scale);
        }
        out.push_back({"three_point_identity", worst < 1e-10, "max rel residual " + fmt(worst)});
    }
    {
        const SmadReport rep = problem == ProblemKind::plip
                                   ? check_smad(obj, 1000, seed, 0.0, 2.0)
                                   : check_smad(obj, 1000, seed, -2.0, 2.0);
        out.push_back({"smad_envelopes", rep.passed(),
                       "upper " + fmt(rep.max_upper_violation) + ", lower " +
                           fmt(rep.max_lower_violation)});
    }
    if (d <= 3) {
        const double lambda = 1.0 / inst.smad_constant();
        double worst_arg = 0.0;
        double worst_val = 0.0;
        for (int i = 0; i < 10; ++i) {
            const Vector y = point();
            const Vector grad = obj.smooth().gradient(y);
            const Vector closed = obj.nonsmooth().prox(h, y, grad, lambda);
            const auto brute = oracles::brute_force_prox(obj, y, grad, lambda);
            worst_arg = std::max(worst_arg, (closed - brute.argmin).norm());
            worst_val = std::max(
                worst_val,
                oracles::prox_subproblem_value(obj, closed, y, grad, lambda) - brute.value);
        }
        out.push_back({"prox_vs_brute_force", worst_arg < 1e-5 && worst_val < 1e-8,
                       "max arg gap " + fmt(worst_arg) + ", value gap " + fmt(worst_val)});
    }
    {
        SolverConfig cfg;
        cfg.lambda = 1.0 / inst.smad_constant();
        cfg.k_max = 2000;
        cfg.record_iterates = true;
        const SolveResult res = bpge_solve(obj, inst.x0(), cfg);
        const auto mono = lyapunov_monotonicity_check(res);
        out.push_back({"lyapunov_nonincreasing", mono.passed(),
                       "max rel increase " + fmt(mono.max_increase) + " over " +
                           std::to_string(res.iterations) + " iterations"});
        const auto rate = sublinear_rate_check(res.trace, cfg.lambda, cfg.line_search.rho);
        out.push_back({"sublinear_rate_bound", rate.passed, "max excess " + fmt(rate.max_excess)});
        const auto audit = audit_line_search(obj, res, cfg);
        out.push_back({"line_search_contract", audit.passed() && audit.fallbacks == 0,
                       std::to_string(audit.violations) + " violations, " +
                           std::to_string(audit.fallbacks) + " fallbacks"});
        out.push_back({"finite_run", res.exit_reason != ExitReason::numerical_failure,
                       "exit " + to_string(res.exit_reason)});
    }
    return out;
}

} // namespace bregopt::harness
