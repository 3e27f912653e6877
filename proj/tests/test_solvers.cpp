#include "bregopt/errors.hpp"
#include "bregopt/plip.hpp"
#include "bregopt/qip.hpp"
#include "bregopt/solvers.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>

using namespace bregopt;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

/// f(x) = 1/2 |Bx - c|^2.
class LeastSquares final : public SmoothTerm {
public:
    LeastSquares(Matrix B, Vector c) : B_(std::move(B)), c_(std::move(c)) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(B_.transpose() * B_);
        L_ = eig.eigenvalues().maxCoeff();
    }
    double value(const Vector& x) const override { return 0.5 * (B_ * x - c_).squaredNorm(); }
    Vector gradient(const Vector& x) const override { return B_.transpose() * (B_ * x - c_); }
    double smad_constant() const override { return L_; }
    double weak_convexity_constant() const override { return 0.0; }

private:
    Matrix B_;
    Vector c_;
    double L_;
};

class Explodes final : public NonsmoothTerm {
public:
    double value(const Vector&) const override { return 0.0; }
    Vector prox(const Kernel&, const Vector& y, const Vector&, double) const override {
        return Vector::Constant(y.size(), std::numeric_limits<double>::quiet_NaN());
    }
};

struct RandomLs {
    std::shared_ptr<LeastSquares> f;
    Vector x0;
};

RandomLs random_least_squares(std::uint64_t seed, Eigen::Index rows, Eigen::Index d) {
    std::mt19937_64 rng(seed);
    Matrix B(rows, d);
    for (Eigen::Index i = 0; i < rows; ++i) B.row(i) = testutil::gaussian(rng, d).transpose();
    return {std::make_shared<LeastSquares>(B, testutil::gaussian(rng, rows)),
            testutil::gaussian(rng, d)};
}

void require_same_trace(const SolveResult& a, const SolveResult& b) {
    REQUIRE(a.trace.size() == b.trace.size());
    CHECK(a.exit_reason == b.exit_reason);
    CHECK(a.psi_final == b.psi_final);
    CHECK(a.x_final == b.x_final);
    for (std::size_t j = 0; j < a.trace.size(); ++j) {
        const auto& ra = a.trace[j];
        const auto& rb = b.trace[j];
        CHECK(ra.psi == rb.psi);
        CHECK(ra.dh_step == rb.dh_step);
        CHECK(ra.lyapunov == rb.lyapunov);
        CHECK(ra.beta_accepted == rb.beta_accepted);
        CHECK(ra.shrink_count == rb.shrink_count);
        CHECK(ra.residual == rb.residual);
    }
}

} // namespace

TEST_CASE("line search returns beta0 when the iterates coincide") {
    const BurgKernel burg;
    const Vector x = Vector::Constant(3, 0.7);
    const auto ls = line_search_beta(burg, x, x, LineSearchConfig{}, 1.0);
    CHECK(ls.beta == 0.99);
    CHECK(ls.shrinks == 0);
    CHECK_FALSE(ls.fallback);
}

TEST_CASE("euclidean line search accepts beta0 <= sqrt(rho C)") {
    std::mt19937_64 rng(3);
    const EuclideanKernel euc;
    LineSearchConfig cfg;
    cfg.rho = 0.81;
    cfg.beta0 = 0.85; // sqrt(0.81) = 0.9
    for (int i = 0; i < 50; ++i) {
        const auto ls = line_search_beta(euc, testutil::gaussian(rng, 5), testutil::gaussian(rng, 5),
                                         cfg, 1.0);
        CHECK(ls.beta == 0.85);
        CHECK(ls.shrinks == 0);
    }
    cfg.beta0 = 0.95;
    const auto ls = line_search_beta(euc, Vector::Zero(2), Vector::Ones(2), cfg, 1.0);
    CHECK(ls.beta == doctest::Approx(0.475));
    CHECK(ls.shrinks == 1);
}

TEST_CASE("burg line search example") {
    // trial at beta0 = 0.99 is 0.01 (in domain) but D_h(1, 0.01) = 94.4 > 0.99 D_h(2, 1);
    // one halving gives 0.505 with D_h = 0.2970 <= 0.3038.
    const auto ls = line_search_beta(BurgKernel{}, scalar(2.0), scalar(1.0), LineSearchConfig{}, 1.0);
    CHECK(ls.beta == doctest::Approx(0.495).epsilon(1e-15));
    CHECK(ls.shrinks == 1);
    CHECK(ls.dh_trial == doctest::Approx(0.2970011700952031).epsilon(1e-12));
}

TEST_CASE("line search shrinks past trial points outside the domain and can fall back") {
    LineSearchConfig cfg;
    const auto ls = line_search_beta(BurgKernel{}, scalar(2.0), scalar(0.5), cfg, 1.0);
    CHECK(ls.shrinks >= 2);
    CHECK(0.5 + ls.beta * (0.5 - 2.0) > 0.0);

    cfg.max_shrinks = 1;
    const auto fb = line_search_beta(BurgKernel{}, scalar(2.0), scalar(0.5), cfg, 1.0);
    CHECK(fb.fallback);
    CHECK(fb.beta == 0.0);
}

TEST_CASE("line search constant") {
    CHECK(line_search_constant(0.5, 0.0) == 1.0);
    CHECK(line_search_constant(0.5, 2.0) == doctest::Approx(0.5));
}

TEST_CASE("config validation") {
    auto p = std::make_shared<plip::PlipInstance>(plip::generate(10, 2, 1));
    const CompositeObjective obj = plip::make_objective(p);
    const double L = p->smad_constant();
    SolverConfig cfg;
    cfg.lambda = 2.0 / L;
    CHECK_THROWS_AS(bpge_solve(obj, p->x0, cfg), ValidationError);
    cfg.lambda = 1.0 / L;
    cfg.lyapunov_M = 0.5 * L;
    CHECK_THROWS_AS(bpge_solve(obj, p->x0, cfg), ValidationError);
    cfg.lyapunov_M.reset();
    cfg.line_search.beta0 = 1.0;
    CHECK_THROWS_AS(bpge_solve(obj, p->x0, cfg), ValidationError);
    cfg.line_search.beta0 = 0.5;
    CHECK_THROWS_AS(bpge_solve(obj, -p->x0, cfg), DomainError);
    CHECK_THROWS_AS(pge_solve(obj, p->x0, cfg), ValidationError);
    CHECK_THROWS_AS(pg_solve(obj, p->x0, cfg), ValidationError);
}

TEST_CASE("beta0 = 0 reproduces BPG bit for bit") {
    auto p = std::make_shared<plip::PlipInstance>(plip::generate(60, 6, 9));
    const CompositeObjective pobj = plip::make_objective(p);
    SolverConfig cfg;
    cfg.lambda = 1.0 / p->smad_constant();
    cfg.k_max = 400;
    cfg.line_search.beta0 = 0.0;
    require_same_trace(bpge_solve(pobj, p->x0, cfg), bpg_solve(pobj, p->x0, cfg));

    auto q = std::make_shared<qip::QipInstance>(qip::generate(60, 10, 9));
    const CompositeObjective qobj = qip::make_objective(q);
    cfg.lambda = 1.0 / q->smad_constant();
    require_same_trace(bpge_solve(qobj, q->x0, cfg), bpg_solve(qobj, q->x0, cfg));
}

TEST_CASE("euclidean BPGe matches an independently coded PGe loop") {
    const RandomLs ls = random_least_squares(12, 15, 6);
    const double theta = 0.3;
    const CompositeObjective obj(ls.f, std::make_shared<L1Regularizer>(theta),
                                 std::make_shared<EuclideanKernel>(), 6);
    SolverConfig cfg;
    cfg.lambda = 1.0 / ls.f->smad_constant();
    cfg.line_search.beta0 = 0.9;
    cfg.line_search.rho = 0.5; // sqrt(rho) = 0.707: 0.9 fails, 0.45 passes
    cfg.k_max = 100;
    cfg.tol = 1e-300;
    cfg.record_iterates = true;
    const SolveResult res = pge_solve(obj, ls.x0, cfg);
    REQUIRE(res.iterations == 100);

    // Plain PGe: beta = first of 0.9 * 0.5^j with beta^2 <= rho (C = 1 for convex f).
    Vector x_prev = ls.x0;
    Vector x = ls.x0;
    for (int k = 0; k < 100; ++k) {
        double beta = 0.9;
        if ((x - x_prev).squaredNorm() > 0.0) {
            while (beta * beta > 0.5) beta *= 0.5;
        }
        const Vector y = x + beta * (x - x_prev);
        const Vector z = y - cfg.lambda * ls.f->gradient(y);
        Vector next(z.size());
        for (Eigen::Index j = 0; j < z.size(); ++j) {
            next[j] = std::copysign(std::max(std::abs(z[j]) - cfg.lambda * theta, 0.0), z[j]);
        }
        x_prev = x;
        x = next;
        CHECK((res.iterates[static_cast<std::size_t>(k + 1)] - x).lpNorm<Eigen::Infinity>() <
              1e-12);
    }
}

TEST_CASE("PG on a quadratic is gradient descent") {
    const RandomLs ls = random_least_squares(4, 8, 3);
    const CompositeObjective obj(ls.f, std::make_shared<ZeroRegularizer>(),
                                 std::make_shared<EuclideanKernel>(), 3);
    SolverConfig cfg;
    cfg.lambda = 1.0 / ls.f->smad_constant();
    cfg.k_max = 50;
    cfg.tol = 1e-300;
    cfg.record_iterates = true;
    const SolveResult res = pg_solve(obj, ls.x0, cfg);
    Vector x = ls.x0;
    for (int k = 0; k < 50; ++k) {
        x = x - cfg.lambda * ls.f->gradient(x);
        CHECK((res.iterates[static_cast<std::size_t>(k + 1)] - x).norm() < 1e-12);
    }
}

TEST_CASE("BPG on a tiny PLIP instance descends and reaches stationarity") {
    auto p = std::make_shared<plip::PlipInstance>(plip::generate(5, 2, 21));
    const CompositeObjective obj = plip::make_objective(p);
    SolverConfig cfg;
    cfg.lambda = 1.0 / p->smad_constant();
    cfg.tol = 1e-12;
    cfg.k_max = 200000;
    const SolveResult res = bpg_solve(obj, p->x0, cfg);
    CHECK(res.exit_reason == ExitReason::tolerance);
    double prev = res.psi_initial;
    for (const auto& r : res.trace) {
        CHECK(r.psi <= prev + 1e-15 * std::max(1.0, std::abs(prev)));
        prev = r.psi;
    }
    CHECK(res.trace.back().residual < 1e-6);
}

TEST_CASE("descent certificates on PLIP and QIP runs") {
    auto p = std::make_shared<plip::PlipInstance>(plip::generate(100, 10, 5));
    auto q = std::make_shared<qip::QipInstance>(qip::generate(100, 10, 5));
    const CompositeObjective objs[] = {plip::make_objective(p), qip::make_objective(q)};
    const Vector starts[] = {p->x0, q->x0};
    const double Ls[] = {p->smad_constant(), q->smad_constant()};
    for (int which = 0; which < 2; ++which) {
        for (int divisor : {1, 3}) {
            for (double rho : {0.9, 0.99}) {
                CAPTURE(which);
                CAPTURE(divisor);
                CAPTURE(rho);
                SolverConfig cfg;
                cfg.lambda = 1.0 / (divisor * Ls[which]);
                cfg.line_search.rho = rho;
                cfg.k_max = 3000;
                cfg.record_iterates = true;
                const SolveResult res = bpge_solve(objs[which], starts[which], cfg);
                CHECK(res.exit_reason != ExitReason::numerical_failure);
                CHECK(lyapunov_monotonicity_check(res).passed());
                CHECK(sublinear_rate_check(res.trace, cfg.lambda, rho).passed);
                const auto audit = audit_line_search(objs[which], res, cfg);
                CHECK(audit.passed());
                CHECK(audit.fallbacks == 0);
                for (const auto& r : res.trace) CHECK(r.dh_step >= 0.0);
                if (res.exit_reason == ExitReason::tolerance) {
                    CHECK(res.trace.back().dh_step < 1e-8);
                }
            }
        }
    }
}

TEST_CASE("sublinear rate check on hand-made traces") {
    // K = 1: dh_1 <= (H_1 - H_2) / (1/lambda - rho/lambda).
    std::vector<IterationRecord> trace(2);
    trace[0].dh_step = 0.01;
    trace[0].lyapunov = 1.0;
    trace[1].dh_step = 0.005;
    trace[1].lyapunov = 0.9;
    // lambda = 1, rho = 0.5: bound = 0.1 / 0.5 = 0.2
    auto rep = sublinear_rate_check(trace, 1.0, 0.5);
    CHECK(rep.passed);
    CHECK(rep.checked == 1);
    CHECK(rep.max_excess == doctest::Approx(0.01 - 0.2));

    trace[0].dh_step = 0.5;
    rep = sublinear_rate_check(trace, 1.0, 0.5);
    CHECK_FALSE(rep.passed);
    CHECK(rep.worst_K == 1);
}

TEST_CASE("objective-relative exit and determinism") {
    auto q = std::make_shared<qip::QipInstance>(qip::generate(80, 10, 2));
    const CompositeObjective obj = qip::make_objective(q);
    SolverConfig cfg;
    cfg.lambda = 1.0 / q->smad_constant();
    cfg.exit_mode = ExitMode::objective_relative;
    cfg.tol = 1e-8;
    const SolveResult a = bpge_solve(obj, q->x0, cfg);
    const SolveResult b = bpge_solve(obj, q->x0, cfg);
    CHECK(a.exit_reason == ExitReason::tolerance);
    const auto n = a.trace.size();
    REQUIRE(n >= 2);
    CHECK(std::abs(a.trace[n - 1].psi - a.trace[n - 2].psi) /
              std::max(1.0, std::abs(a.trace[n - 1].psi)) <=
          1e-8);
    require_same_trace(a, b);
}

TEST_CASE("non-finite prox output is reported as a numerical failure") {
    const RandomLs ls = random_least_squares(2, 4, 2);
    const CompositeObjective obj(ls.f, std::make_shared<Explodes>(),
                                 std::make_shared<EuclideanKernel>(), 2);
    SolverConfig cfg;
    cfg.lambda = 1.0 / ls.f->smad_constant();
    const SolveResult res = bpge_solve(obj, ls.x0, cfg);
    CHECK(res.exit_reason == ExitReason::numerical_failure);
    CHECK(res.iterations == 0);
    CHECK_FALSE(res.failure_message.empty());
}

TEST_CASE("solver and exit-mode names round trip") {
    for (auto k : {SolverKind::bpg, SolverKind::bpge, SolverKind::pg, SolverKind::pge}) {
        CHECK(parse_solver(to_string(k)) == k);
    }
    CHECK(parse_exit_mode("iterate") == ExitMode::iterate_relative);
    CHECK(parse_exit_mode("objective") == ExitMode::objective_relative);
    CHECK_THROWS_AS(parse_solver("fista"), ValidationError);
}
