#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scd/globalize.hpp"
#include "toys.hpp"

using namespace scd;

namespace {

IterateState state_at(const ProblemInstance& p, const Vector& x, double gamma, int iter = 0) {
    auto d = displacement(p, x, gamma);
    REQUIRE(d.ok());
    IterateState s;
    s.x = x;
    s.u = d->u;
    s.gamma = gamma;
    s.residual = residual(d->u, gamma);
    s.iter = iter;
    return s;
}

}  // namespace

TEST_CASE("heuristic step takes the full step when it zeroes the residual") {
    auto p = toys::t2();
    auto s = state_at(p, {4.0}, 1.0);
    auto step = heuristic_step(p, s, {-2.0}, {});
    REQUIRE(step.ok());
    CHECK(step->alpha == 1.0);
    CHECK(step->state.x[0] == doctest::Approx(2.0));
    CHECK(step->state.residual <= 1e-14);
    CHECK(step->state.iter == 1);
}

TEST_CASE("heuristic step stalls on an adversarial discontinuous stub") {
    // Residual grows without bound along the direction and the growth beats
    // the non-monotone slack at every step size above the floor.
    ProblemInstance p;
    p.dim = 1;
    p.eval_f = [](const Vector&) { return Vector{0.0}; };
    p.jac_f = [](const Vector&) { return DenseMatrix(1, 1); };
    p.prox_q = [](const Vector& y, double) -> Result<ProxEval> {
        ProxEval e;
        e.point = {y[0] + 100.0 * (1.0 + std::abs(y[0] - 2.0))};
        return e;
    };
    p.subspace_oracle = [](const Vector&, const Vector&, std::span<const ProxResult>) -> Result<SubspacePair> {
        return SubspacePair{DenseMatrix::identity(1), DenseMatrix(1, 1)};
    };
    auto s = state_at(p, {2.0}, 1.0);
    auto step = heuristic_step(p, s, {1e9}, {});
    CHECK(!step.ok());
    CHECK(step.error() == Fail::LineSearchStall);
}

TEST_CASE("forward-backward operator") {
    auto p1 = toys::t1();
    auto fixed = op_fb(p1, {0.0}, 1.0);
    REQUIRE(fixed.ok());
    CHECK((*fixed)[0] == doctest::Approx(0.0));

    auto step = op_fb(p1, {2.0}, 1.0);
    REQUIRE(step.ok());
    CHECK((*step)[0] == doctest::Approx(0.0));

    // q = 0, f(x) = x, lambda = 0.5: explicit gradient step 4 -> 2.
    auto pid = toys::scalar_problem(1.0, 0.0, 0.0);
    auto grad = op_fb(pid, {4.0}, 0.5);
    REQUIRE(grad.ok());
    CHECK((*grad)[0] == doctest::Approx(2.0));
}

TEST_CASE("fb fixed points are exactly the solutions") {
    auto p = toys::t2();
    for (double x : {-1.0, 0.5, 2.0, 3.7}) {
        auto t = op_fb(p, {x}, 1.0);
        REQUIRE(t.ok());
        auto d = displacement(p, {x}, 1.0);
        REQUIRE(d.ok());
        const bool fb_fixed = std::abs((*t)[0] - x) <= 1e-9;
        const bool solves = norm2(d->u) <= 1e-9;
        CHECK(fb_fixed == solves);
    }
}

TEST_CASE("douglas-rachford matches the linear-solve closed form") {
    DenseMatrix a(2, 2);
    a(0, 0) = 3.0;
    a(0, 1) = 0.4;
    a(1, 0) = 0.4;
    a(1, 1) = 1.5;
    Vector b{0.7, -1.1};
    SeparableQ q;
    q.beta = {1.0, 0.5};
    q.anchor = {0.0, 0.0};
    auto p = toys::affine_problem(a, b, q);

    const double lambda = 0.6;
    Vector x{1.3, -0.8};
    auto z = op_dr(p, x, lambda);
    REQUIRE(z.ok());

    // Closed form: z = (I + lambda A)^-1 (T_fb(x) + lambda f(x) - lambda b),
    // inverted with the 2x2 adjugate.
    auto fb = op_fb(p, x, lambda);
    REQUIRE(fb.ok());
    Vector fx = add(matvec(a, x), b);
    Vector rhs = add(*fb, scaled(fx, lambda));
    rhs[0] -= lambda * b[0];
    rhs[1] -= lambda * b[1];
    const double m00 = 1.0 + lambda * a(0, 0), m01 = lambda * a(0, 1);
    const double m10 = lambda * a(1, 0), m11 = 1.0 + lambda * a(1, 1);
    const double det = m00 * m11 - m01 * m10;
    Vector zc{(m11 * rhs[0] - m01 * rhs[1]) / det, (-m10 * rhs[0] + m00 * rhs[1]) / det};
    CHECK(std::abs((*z)[0] - zc[0]) <= 1e-10);
    CHECK(std::abs((*z)[1] - zc[1]) <= 1e-10);

    // At the solution the resolvent returns the solution itself.
    auto rep = solve_hybrid(p, {0.0, 0.0}, {FallbackKind::PM, {}}, {});
    REQUIRE(rep.converged());
    auto zsol = op_dr(p, rep.solution, lambda);
    REQUIRE(zsol.ok());
    CHECK(norm2(sub(*zsol, rep.solution)) <= 1e-9);

    // Tiny lambda: DR degenerates to FB.
    auto ztiny = op_dr(p, x, 1e-8);
    auto ftiny = op_fb(p, x, 1e-8);
    REQUIRE(ztiny.ok());
    REQUIRE(ftiny.ok());
    CHECK(norm2(sub(*ztiny, *ftiny)) <= 1e-6);
}

TEST_CASE("projection-proximal operator") {
    // At x = 4 on f = x - 3, q = |.|: v = 0, so the operator returns xhat = 2.
    auto p2 = toys::t2();
    auto t = op_pm(p2, {4.0}, 1.0);
    REQUIRE(t.ok());
    CHECK((*t)[0] == 2.0);

    // At the solution it is a fixed point.
    auto fix = op_pm(p2, {2.0}, 1.0);
    REQUIRE(fix.ok());
    CHECK((*fix)[0] == doctest::Approx(2.0));

    // f = 2x, q = 0: the projection lands on the hyperplane through xhat and
    // strictly reduces the distance to the solution 0 for gamma > 1.
    auto pl = toys::scalar_problem(2.0, 0.0, 0.0);
    auto proj = op_pm(pl, {1.0}, 3.0);
    REQUIRE(proj.ok());
    CHECK(std::abs((*proj)[0]) < 1.0);
    // Hyperplane property <v, T(x) - xhat> = 0; in 1-D T(x) = xhat.
    auto d = displacement(pl, {1.0}, 3.0);
    REQUIRE(d.ok());
    CHECK((*proj)[0] == doctest::Approx(1.0 + d->u[0]).epsilon(1e-12));
}

TEST_CASE("pm projection stays on the separating hyperplane in 2-D") {
    DenseMatrix a(2, 2);
    a(0, 0) = 2.0;
    a(0, 1) = -0.3;
    a(1, 0) = 0.5;
    a(1, 1) = 1.0;
    SeparableQ q;
    q.beta = {1.0, 1.0};
    q.anchor = {0.0, 0.0};
    auto p = toys::affine_problem(a, {1.0, -2.0}, q);
    Vector x{3.0, -1.5};
    const double gamma = 2.0;
    auto t = op_pm(p, x, gamma);
    REQUIRE(t.ok());
    auto d = displacement(p, x, gamma);
    REQUIRE(d.ok());
    Vector xhat = add(x, d->u);
    Vector v = scaled(d->u, -gamma);
    Vector fhat = p.eval_f(xhat);
    for (int i = 0; i < 2; ++i) v[i] += fhat[i] - d->f_x[i];
    CHECK(std::abs(dot(v, sub(*t, xhat))) <= 1e-10 * (1.0 + norm2(v)));
}

TEST_CASE("agraal baseline") {
    // Fixed point at the solution.
    auto p2 = toys::t2();
    auto s0 = agraal_init(p2, {2.0});
    REQUIRE(s0.ok());
    auto s1 = op_agraal(p2, *s0);
    REQUIRE(s1.ok());
    CHECK(norm2(sub(s1->x, Vector{2.0})) <= 1e-12);

    // Strongly monotone 1-D affine problem converges within 10000 iterations.
    auto pm = toys::scalar_problem(2.0, -4.0, 1.0);
    auto st = agraal_init(pm, {10.0});
    REQUIRE(st.ok());
    AgraalState s = *st;
    double lam_min = s.lambda, lam_max_seen = s.lambda;
    for (int k = 0; k < 10000; ++k) {
        auto next = op_agraal(pm, s);
        REQUIRE(next.ok());
        s = *next;
        lam_min = std::min(lam_min, s.lambda);
        lam_max_seen = std::max(lam_max_seen, s.lambda);
        auto d = displacement(pm, s.x, 1.0);
        if (d.ok() && residual(d->u, 1.0) <= 1e-6) break;
    }
    auto d = displacement(pm, s.x, 1.0);
    REQUIRE(d.ok());
    CHECK(residual(d->u, 1.0) <= 1e-6);
    CHECK(s.x[0] == doctest::Approx(1.5).epsilon(1e-4));
    CHECK(lam_min > 0.0);
    CHECK(lam_max_seen <= s.lambda_max);
}

TEST_CASE("hybrid accepts the newton step on the analytic problem") {
    auto rep = solve_hybrid(toys::t2(), {4.0}, {FallbackKind::PM, {}}, {});
    CHECK(rep.converged());
    CHECK(rep.iterations <= 2);
    for (const auto& h : rep.residual_history) CHECK(h.method == MethodTag::Newton);
    REQUIRE(rep.newton_rn.size() >= 2);
    for (std::size_t l = 0; l + 1 < rep.newton_rn.size(); ++l) {
        const double bound = (1.0 - 0.4 * LineSearchParams::delta(static_cast<int>(l))) * rep.newton_rn[l];
        CHECK(rep.newton_rn[l + 1] <= bound + 1e-15);
    }
}

TEST_CASE("hybrid falls back when the newton system is singular") {
    // Oracle stub that always produces a singular system; FB fallback still
    // converges on the strongly monotone problem.
    auto p = toys::scalar_problem(2.0, 1.0, 1.0);
    p.subspace_oracle = [](const Vector&, const Vector&, std::span<const ProxResult>) -> Result<SubspacePair> {
        SubspacePair pair{DenseMatrix(1, 1), DenseMatrix(1, 1)};
        pair.ystar(0, 0) = 1.0;
        pair.xstar(0, 0) = -2.0;  // M = f' + X = 2 - 2 = 0
        return pair;
    };
    auto rep = solve_hybrid(p, {5.0}, {FallbackKind::FB, {}}, {});
    CHECK(rep.converged());
    for (const auto& h : rep.residual_history) CHECK(h.method == MethodTag::Fallback);

    auto rep_dr = solve_hybrid(p, {5.0}, {FallbackKind::DR, {}}, {});
    CHECK(rep_dr.converged());

    auto rep_pm = solve_hybrid(p, {5.0}, {FallbackKind::PM, {}}, {});
    CHECK(rep_pm.converged());
}

TEST_CASE("hybrid at the solution stops immediately") {
    auto rep = solve_hybrid(toys::t1(), {0.0}, {FallbackKind::PM, {}}, {});
    CHECK(rep.converged());
    CHECK(rep.iterations == 0);
}

TEST_CASE("heuristic driver on the analytic problems") {
    auto r1 = solve_heuristic(toys::t1(), {2.0}, {}, {});
    CHECK(r1.converged());
    CHECK(r1.iterations <= 3);
    auto r2 = solve_heuristic(toys::t2(), {-7.5}, {}, {});
    CHECK(r2.converged());
    CHECK(r2.iterations <= 3);
    for (const auto& h : r2.residual_history) CHECK(h.method == MethodTag::Heuristic);
}

TEST_CASE("fallback operators honor an explicit parameter") {
    auto p = toys::t1();
    auto rep = solve_hybrid(p, {9.0}, {FallbackKind::FB, 0.25}, {});
    CHECK(rep.converged());
    auto rep2 = solve_hybrid(p, {9.0}, {FallbackKind::PM, 2.0}, {});
    CHECK(rep2.converged());
}
