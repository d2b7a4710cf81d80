#include "scd/cournot.hpp"

#include <cmath>
#include <memory>
#include <random>

namespace scd::cournot {

Fail CournotInstance::validate() const {
    if (n < 1 || m < 1 || static_cast<int>(players.size()) != n) return Fail::InvalidInput;
    if (static_cast<int>(elasticity.size()) != m || !(eps1 > 0.0) || !(eps2 > 0.0)) return Fail::InvalidInput;
    for (double g : elasticity)
        if (!(g > 0.0)) return Fail::InvalidInput;
    for (const auto& p : players) {
        if (static_cast<int>(p.b.size()) != m || static_cast<int>(p.delta.size()) != m ||
            static_cast<int>(p.bigK.size()) != m || static_cast<int>(p.beta.size()) != m ||
            static_cast<int>(p.anchor.size()) != m)
            return Fail::InvalidInput;
        for (int j = 0; j < m; ++j)
            if (!(p.delta[j] > 0.0) || !(p.bigK[j] > 0.0) || p.beta[j] < 0.0) return Fail::InvalidInput;
        if (Fail f = player_q(p).validate(); f != Fail::None) return f;
    }
    return Fail::None;
}

PriceCurve price_smoothed(double t, int j, const CournotInstance& inst) {
    const double e = 1.0 / inst.elasticity[j];
    const double c0 = std::pow(1000.0 * inst.n, e);
    auto raw = [&](double s) {
        PriceCurve p;
        p.value = c0 * std::pow(s, -e);
        p.d1 = -e * c0 * std::pow(s, -e - 1.0);
        p.d2 = e * (e + 1.0) * c0 * std::pow(s, -e - 2.0);
        return p;
    };
    if (t > inst.eps1) return raw(t);
    const PriceCurve at = raw(inst.eps1);
    const double dt = t - inst.eps1;
    PriceCurve p;
    p.value = at.value + at.d1 * dt + 0.5 * at.d2 * dt * dt;
    p.d1 = at.d1 + at.d2 * dt;
    p.d2 = at.d2;
    return p;
}

double cost_gradient_term(double x, double b, double delta, double bigK, double eps2) {
    const double kpow = std::pow(bigK, -1.0 / delta);
    if (delta < 1.0) {
        const double s = std::sqrt(x * x + eps2 * eps2);
        return b + kpow * std::pow(s, 1.0 / delta) * (x / s);
    }
    if (x == 0.0) return b;
    const double sign = x > 0.0 ? 1.0 : -1.0;
    return b + kpow * std::pow(std::abs(x), 1.0 / delta) * sign;
}

double cost_hessian_term(double x, double delta, double bigK, double eps2) {
    const double kpow = std::pow(bigK, -1.0 / delta);
    if (delta < 1.0) {
        const double s2 = x * x + eps2 * eps2;
        const double s = std::sqrt(s2);
        return kpow * std::pow(s, 1.0 / delta - 1.0) * (1.0 + (1.0 / delta - 1.0) * x * x / s2);
    }
    if (x == 0.0) return delta == 1.0 ? kpow : 0.0;
    return kpow * (1.0 / delta) * std::pow(std::abs(x), 1.0 / delta - 1.0);
}

namespace {

Vector commodity_totals(const CournotInstance& inst, const Vector& x) {
    Vector t(inst.m, 0.0);
    for (int i = 0; i < inst.n; ++i)
        for (int j = 0; j < inst.m; ++j) t[j] += x[i * inst.m + j];
    return t;
}

}  // namespace

Vector eval_f(const CournotInstance& inst, const Vector& x) {
    const Vector t = commodity_totals(inst, x);
    std::vector<PriceCurve> price(inst.m);
    for (int j = 0; j < inst.m; ++j) price[j] = price_smoothed(t[j], j, inst);
    Vector f(inst.dim());
    for (int i = 0; i < inst.n; ++i) {
        const auto& p = inst.players[i];
        for (int j = 0; j < inst.m; ++j) {
            const double xj = x[i * inst.m + j];
            f[i * inst.m + j] =
                cost_gradient_term(xj, p.b[j], p.delta[j], p.bigK[j], inst.eps2) - price[j].value - xj * price[j].d1;
        }
    }
    return f;
}

DenseMatrix assemble_jacobian(const CournotInstance& inst, const Vector& x,
                              const std::function<PriceCurve(double, int)>& price) {
    const Vector t = commodity_totals(inst, x);
    DenseMatrix jac(inst.dim(), inst.dim());
    for (int j = 0; j < inst.m; ++j) {
        const PriceCurve pc = price(t[j], j);
        for (int i = 0; i < inst.n; ++i) {
            const int row = i * inst.m + j;
            const double common = -pc.d1 - x[row] * pc.d2;
            for (int h = 0; h < inst.n; ++h) jac(row, h * inst.m + j) = common;
            const auto& p = inst.players[i];
            jac(row, row) += cost_hessian_term(x[row], p.delta[j], p.bigK[j], inst.eps2) - pc.d1;
        }
    }
    return jac;
}

DenseMatrix eval_jacobian(const CournotInstance& inst, const Vector& x) {
    return assemble_jacobian(inst, x, [&](double t, int j) { return price_smoothed(t, j, inst); });
}

SeparableQ player_q(const PlayerData& p) {
    SeparableQ q;
    q.beta = p.beta;
    q.anchor = p.anchor;
    q.xi = p.xi;
    q.zeta = p.zeta;
    return q;
}

Result<SubspacePair> build_subspace(const PlayerData& player, const ProxResult& active) {
    return subspace_from_active(player_q(player), active.active_equalities, active.active_constraints);
}

CournotInstance build_fixed_instance() {
    CournotInstance inst;
    inst.n = 5;
    inst.m = 3;
    inst.elasticity = {1.0, 0.9, 0.8};
    const double b[5] = {9.0, 7.0, 3.0, 4.0, 2.0};
    const double delta[5] = {1.2, 1.1, 1.0, 0.9, 0.8};
    const double beta[5][3] = {{0.5, 0.5, 20.0}, {1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    const double anchor[5] = {47.8, 51.1, 51.3, 48.5, 43.5};
    const double zeta[5] = {200.0, 250.0, 100.0, 200.0, 200.0};
    inst.players.resize(5);
    for (int i = 0; i < 5; ++i) {
        auto& p = inst.players[i];
        p.b.assign(3, b[i]);
        p.delta.assign(3, delta[i]);
        p.bigK.assign(3, 5.0);
        p.beta.assign(beta[i], beta[i] + 3);
        p.anchor.assign(3, anchor[i]);
        p.xi = DenseMatrix(1, 3);
        for (int j = 0; j < 3; ++j) p.xi(0, j) = 1.0;
        p.zeta = {zeta[i]};
    }
    return inst;
}

namespace {

class UniformDraw {
public:
    explicit UniformDraw(std::uint64_t seed) : rng_(seed) {}
    double operator()(double lo, double hi) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace

CournotInstance generate_random_instance(int n, int m, std::uint64_t seed) {
    UniformDraw draw(seed);
    CournotInstance inst;
    inst.n = n;
    inst.m = m;
    inst.elasticity.resize(m);
    for (int j = 0; j < m; ++j) inst.elasticity[j] = draw(1.0, 2.0);
    inst.players.resize(n);
    for (int i = 0; i < n; ++i) {
        auto& p = inst.players[i];
        p.b.resize(m);
        p.delta.resize(m);
        p.bigK.resize(m);
        p.beta.resize(m);
        p.anchor.resize(m);
        for (int j = 0; j < m; ++j) p.b[j] = draw(2.0, 20.0);
        for (int j = 0; j < m; ++j) p.delta[j] = draw(0.5, 2.0);
        for (int j = 0; j < m; ++j) p.bigK[j] = draw(0.1, 10.0);
        for (int j = 0; j < m; ++j) p.beta[j] = draw(1.0, 10.0);
        for (int j = 0; j < m; ++j) p.anchor[j] = draw(20.0, 50.0);
        const int rows = static_cast<int>(std::lround(draw(1.0, 1.5 * m + 1.0)));
        p.xi = DenseMatrix(rows, m);
        for (int l = 0; l < rows; ++l)
            for (int j = 0; j < m; ++j) p.xi(l, j) = draw(0.0, 1.0);
        Vector z(m);
        for (int j = 0; j < m; ++j) z[j] = draw(1.0, 15.0);
        p.zeta = matvec(p.xi, z);

        // The drawn anchor is generically infeasible for zeta = xi z with small
        // z; replace it by its projection onto the feasible set so that the
        // change-cost model q stays proper.
        bool feasible = true;
        Vector xia = matvec(p.xi, p.anchor);
        for (int l = 0; l < rows; ++l)
            if (xia[l] > p.zeta[l] + 1e-9) feasible = false;
        if (!feasible) {
            SeparableQ proj;
            proj.beta.assign(m, 0.0);
            proj.anchor.assign(m, 0.0);  // origin is feasible: xi >= 0, zeta > 0
            proj.xi = p.xi;
            proj.zeta = p.zeta;
            auto res = solve_prox_qp(p.anchor, 1.0, proj);
            if (res) {
                p.anchor = res->point;
                inst.anchors_projected.push_back(i);
            }
        }
    }
    return inst;
}

ProblemInstance make_problem(const CournotInstance& inst, SeparableOptions opts) {
    auto shared = std::make_shared<const CournotInstance>(inst);
    std::vector<SeparableQ> blocks;
    blocks.reserve(inst.players.size());
    for (const auto& p : inst.players) blocks.push_back(player_q(p));
    return from_separable(
        std::move(blocks), [shared](const Vector& x) { return eval_f(*shared, x); },
        [shared](const Vector& x) { return eval_jacobian(*shared, x); }, opts);
}

}  // namespace scd::cournot
