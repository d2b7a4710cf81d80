#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scd/ssnewton.hpp"
#include "toys.hpp"

using namespace scd;

namespace {

/// Membership check d* in dq(d) via the prox characterization
/// P_1 q(d + d*) = d.
double membership_residual(const ProblemInstance& p, const Vector& d, const Vector& dstar) {
    auto proj = p.prox_q(add(d, dstar), 1.0);
    REQUIRE(proj.ok());
    return norm2(sub(proj->point, d));
}

}  // namespace

TEST_CASE("residual formula") {
    CHECK(residual({0.0, 0.0}, 3.0) == 0.0);
    const double r = residual({2.0, 0.0}, 1.0);
    CHECK(r == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
    for (double gamma : {0.2, 1.0, 7.5}) {
        Vector u{0.3, -1.2, 0.5};
        CHECK(residual(u, gamma) == std::sqrt(1.0 + gamma * gamma) * norm2(u));
    }
}

TEST_CASE("approximation step on the 1-D problems") {
    auto p1 = toys::t1();
    auto a1 = approximation_step(p1, {2.0}, 1.0);
    REQUIRE(a1.ok());
    CHECK(a1->dhat[0] == doctest::Approx(0.0));
    CHECK(a1->dstar[0] == doctest::Approx(1.0));
    CHECK(a1->yhat1[0] == doctest::Approx(2.0));
    CHECK(a1->yhat2[0] == doctest::Approx(2.0));
    CHECK(membership_residual(p1, a1->dhat, a1->dstar) <= 1e-9);

    auto p2 = toys::t2();
    auto a2 = approximation_step(p2, {4.0}, 1.0);
    REQUIRE(a2.ok());
    CHECK(a2->dhat[0] == doctest::Approx(2.0));
    CHECK(a2->dstar[0] == doctest::Approx(1.0));
    CHECK(membership_residual(p2, a2->dhat, a2->dstar) <= 1e-9);

    // At the solution: dhat = x, dstar = -f(x), yhat = 0.
    auto a3 = approximation_step(p2, {2.0}, 2.5);
    REQUIRE(a3.ok());
    CHECK(a3->dhat[0] == doctest::Approx(2.0));
    CHECK(a3->dstar[0] == doctest::Approx(1.0));  // -f(2) = 1
    CHECK(norm2(a3->yhat1) <= 1e-12);
}

TEST_CASE("yhat1 = gamma * yhat2") {
    auto p = toys::t1();
    for (double gamma : {0.5, 2.0, 9.0}) {
        auto a = approximation_step(p, {3.7}, gamma);
        REQUIRE(a.ok());
        for (std::size_t i = 0; i < a->yhat1.size(); ++i)
            CHECK(a->yhat1[i] == doctest::Approx(gamma * a->yhat2[i]).epsilon(1e-14));
    }
}

TEST_CASE("newton direction solves the 1-D systems by hand") {
    // f = x - 1, q = |.|: at (dhat, dstar) = (0, 1), Y* = 0, X* = 1:
    // 1 * dx = 1 * u = -2, so x+ = 0.
    auto p1 = toys::t1();
    auto a1 = approximation_step(p1, {2.0}, 1.0);
    REQUIRE(a1.ok());
    auto d1 = newton_direction(p1, {2.0}, *a1, 1.0);
    REQUIRE(d1.ok());
    CHECK((*d1)[0] == doctest::Approx(-2.0).epsilon(1e-14));

    // f = x - 3: at (2, 1), Y* = 1, X* = 0: f' dx = gamma u, dx = -2, x+ = 2.
    auto p2 = toys::t2();
    auto a2 = approximation_step(p2, {4.0}, 1.0);
    REQUIRE(a2.ok());
    auto d2 = newton_direction(p2, {4.0}, *a2, 1.0);
    REQUIRE(d2.ok());
    CHECK((*d2)[0] == doctest::Approx(-2.0).epsilon(1e-14));

    // u = 0 at the solution gives dx = 0.
    auto a3 = approximation_step(p2, {2.0}, 1.0);
    REQUIRE(a3.ok());
    auto d3 = newton_direction(p2, {2.0}, *a3, 1.0);
    REQUIRE(d3.ok());
    CHECK(std::abs((*d3)[0]) <= 1e-14);
}

TEST_CASE("newton direction reports singular systems") {
    // A stub oracle whose subspace cancels the Jacobian row exactly.
    auto p = toys::t1();
    p.subspace_oracle = [](const Vector&, const Vector&, std::span<const ProxResult>) -> Result<SubspacePair> {
        SubspacePair pair{DenseMatrix(1, 1), DenseMatrix(1, 1)};
        pair.ystar(0, 0) = 1.0;
        pair.xstar(0, 0) = -1.0;  // M = Y^T f' + X^T = 1 - 1 = 0
        return pair;
    };
    auto a = approximation_step(p, {2.0}, 1.0);
    REQUIRE(a.ok());
    auto d = newton_direction(p, {2.0}, *a, 1.0);
    CHECK(!d.ok());
    CHECK(d.error() == Fail::SingularMatrix);
}

TEST_CASE("plain solve on the analytic problems") {
    SolveOptions opts;
    auto r1 = solve_plain(toys::t1(), {2.0}, opts);
    CHECK(r1.status == SolveStatus::Converged);
    CHECK(r1.iterations <= 2);
    CHECK(r1.solution[0] == doctest::Approx(0.0));

    auto r2 = solve_plain(toys::t2(), {4.0}, opts);
    CHECK(r2.status == SolveStatus::Converged);
    CHECK(r2.iterations <= 2);
    CHECK(r2.solution[0] == doctest::Approx(2.0));

    // Starting at the solution converges in zero iterations.
    auto r3 = solve_plain(toys::t2(), {2.0}, opts);
    CHECK(r3.status == SolveStatus::Converged);
    CHECK(r3.iterations == 0);
    CHECK(r3.residual_history.empty());
    CHECK(r3.final_residual == r3.initial_residual);
}

TEST_CASE("plain solve report bookkeeping") {
    auto r = solve_plain(toys::t2(), {40.0}, {});
    CHECK(r.status == SolveStatus::Converged);
    REQUIRE(!r.residual_history.empty());
    CHECK(r.final_residual == r.residual_history.back().residual);
    CHECK(r.iterations == r.residual_history.back().iter);
    for (std::size_t i = 0; i + 1 < r.residual_history.size(); ++i)
        CHECK(r.residual_history[i].residual > 0.0);
    CHECK(r.gamma_history.size() == static_cast<std::size_t>(r.iterations) + 1);
}

TEST_CASE("fixed gamma rule is honored") {
    SolveOptions opts;
    opts.gamma_rule = {GammaRule::Kind::Fixed, 3.5};
    auto r = solve_plain(toys::t1(), {2.0}, opts);
    CHECK(r.status == SolveStatus::Converged);
    for (double g : r.gamma_history) CHECK(g == 3.5);
}
