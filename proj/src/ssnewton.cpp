#include "scd/ssnewton.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace scd {

namespace {

SolveStatus status_from(Fail f) {
    switch (f) {
        case Fail::SingularMatrix: return SolveStatus::NewtonBreakdown;
        case Fail::ResolventFailure: return SolveStatus::ResolventFailure;
        case Fail::LineSearchStall: return SolveStatus::LineSearchStall;
        default: return SolveStatus::QPFailure;
    }
}

}  // namespace

double GammaRule::select(const DenseMatrix& jac) const {
    const double g = kind == Kind::Adaptive ? one_norm(jac) : value;
    return std::clamp(g, kGammaFloor, kGammaCap);
}

double residual(const Vector& u, double gamma) { return std::sqrt(1.0 + gamma * gamma) * norm2(u); }

ApproxPoint approx_from_displacement(const Vector& x, double gamma, Displacement d) {
    (void)x;  // the approximation step keeps xhat = x
    ApproxPoint a;
    a.dhat = std::move(d.prox.point);
    a.yhat1 = scaled(d.u, -gamma);
    a.yhat2 = scaled(d.u, -1.0);
    a.dstar = a.yhat1;
    for (std::size_t i = 0; i < a.dstar.size(); ++i) a.dstar[i] -= d.f_x[i];
    a.prox.blocks = std::move(d.prox.blocks);
    a.f_x = std::move(d.f_x);
    return a;
}

Result<ApproxPoint> approximation_step(const ProblemInstance& problem, const Vector& x, double gamma) {
    auto d = displacement(problem, x, gamma);
    if (!d) return d.error();
    return approx_from_displacement(x, gamma, std::move(*d));
}

Result<Vector> newton_direction(const ProblemInstance& problem, const Vector& x, const ApproxPoint& approx,
                                double gamma, const DenseMatrix* jac) {
    auto pair = problem.subspace_oracle(approx.dhat, approx.dstar, approx.prox.blocks);
    if (!pair) return pair.error();
    DenseMatrix jac_local;
    if (!jac) {
        jac_local = problem.jac_f(x);
        jac = &jac_local;
    }
    const int n = problem.dim;
    const DenseMatrix yt = pair->ystar.transposed();
    const DenseMatrix xt = pair->xstar.transposed();

    // u is recovered from yhat2 = -u.
    Vector u = scaled(approx.yhat2, -1.0);

    // M = Y*^T grad f + X*^T, assembled row-wise while skipping zero entries of
    // Y*^T (block-diagonal for separable q, so this avoids the dense triple
    // product).
    DenseMatrix m(n, n);
    Vector rhs(n, 0.0);
    for (int r = 0; r < n; ++r) {
        auto yr = yt.row(r);
        auto xr = xt.row(r);
        auto mr = m.row(r);
        double rhs_r = 0.0;
        for (int c = 0; c < n; ++c) {
            const double w = yr[c];
            if (w != 0.0) {
                auto jc = jac->row(c);
                for (int k = 0; k < n; ++k) mr[k] += w * jc[k];
                rhs_r += gamma * w * u[c];
            }
            const double xv = xr[c];
            if (xv != 0.0) {
                mr[c] += xv;
                rhs_r += xv * u[c];
            }
        }
        rhs[r] = rhs_r;
    }
    return solve_dense(m, rhs);
}

SolveReport solve_plain(const ProblemInstance& problem, const Vector& x0, const SolveOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport report;
    Vector x = x0;
    const double f0 = norm2(problem.eval_f(x0));
    const double abs_floor = 1e-14 * (1.0 + f0);
    double r_init = 0.0;
    double r = 0.0;

    for (int k = 0;; ++k) {
        DenseMatrix jac = problem.jac_f(x);
        const double gamma = opts.gamma_rule.select(jac);
        auto disp = displacement(problem, x, gamma);
        if (!disp) {
            report.status = status_from(disp.error());
            report.iterations = k;
            break;
        }
        r = residual(disp->u, gamma);
        report.gamma_history.push_back(gamma);
        if (opts.record_iterates) report.iterates.push_back(x);
        if (k == 0) {
            r_init = r;
            report.initial_residual = r;
        } else {
            report.residual_history.push_back({k, r, MethodTag::Newton, 1.0});
        }
        if (r <= abs_floor || r <= opts.tol_rel * r_init) {
            report.status = SolveStatus::Converged;
            report.iterations = k;
            break;
        }
        if (k >= opts.max_iter) {
            report.status = SolveStatus::MaxIter;
            report.iterations = k;
            break;
        }
        ApproxPoint approx = approx_from_displacement(x, gamma, std::move(*disp));
        auto dir = newton_direction(problem, x, approx, gamma, &jac);
        if (!dir) {
            report.status = status_from(dir.error());
            report.iterations = k;
            break;
        }
        axpy(x, 1.0, *dir);
    }

    report.solution = std::move(x);
    report.final_residual = report.residual_history.empty() ? report.initial_residual : report.residual_history.back().residual;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace scd
