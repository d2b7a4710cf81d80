#include "scd/globalize.hpp"

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

Result<Vector> pm_from_displacement(const Vector& x, double gamma, const Displacement& disp,
                                    const ProblemInstance& problem) {
    Vector xhat = add(x, disp.u);
    Vector f_hat = problem.eval_f(xhat);
    Vector v = scaled(disp.u, -gamma);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += f_hat[i] - disp.f_x[i];
    const double vn2 = dot(v, v);
    if (std::sqrt(vn2) <= 1e-14 * (1.0 + norm2(disp.f_x))) return xhat;  // v = 0 certifies 0 in H(xhat)
    const double t = dot(v, disp.u) / vn2;  // <v, x - xhat> = -<v, u>
    Vector z = x;
    axpy(z, t, v);
    return z;
}

}  // namespace

const char* to_string(FallbackKind k) {
    switch (k) {
        case FallbackKind::FB: return "fb";
        case FallbackKind::DR: return "dr";
        case FallbackKind::PM: return "pm";
        case FallbackKind::Agraal: return "agraal";
    }
    return "unknown";
}

Result<HeuristicStep> heuristic_step(const ProblemInstance& problem, const IterateState& state,
                                     const Vector& direction, const LineSearchParams& params) {
    const double delta = LineSearchParams::delta(state.iter);
    for (int j = 0;; ++j) {
        const double alpha = LineSearchParams::beta(j);
        if (alpha < params.alpha_floor) break;
        Vector xt = state.x;
        axpy(xt, alpha, direction);
        auto disp = displacement(problem, xt, state.gamma);
        if (!disp) return disp.error();
        const double rt = residual(disp->u, state.gamma);
        if (rt <= (1.0 + delta - params.mu * alpha) * state.residual) {
            HeuristicStep step;
            step.alpha = alpha;
            step.state = IterateState{std::move(xt), std::move(disp->u), state.gamma, rt, state.iter + 1};
            return step;
        }
    }
    return Fail::LineSearchStall;
}

Result<Vector> op_fb(const ProblemInstance& problem, const Vector& x, double lambda) {
    if (!(lambda > 0.0)) return Fail::InvalidInput;
    auto disp = displacement(problem, x, 1.0 / lambda);
    if (!disp) return disp.error();
    return add(x, disp->u);
}

Result<Vector> op_dr(const ProblemInstance& problem, const Vector& x, double lambda) {
    if (!(lambda > 0.0)) return Fail::InvalidInput;
    auto disp = displacement(problem, x, 1.0 / lambda);
    if (!disp) return disp.error();
    Vector rhs = add(add(x, disp->u), scaled(disp->f_x, lambda));

    // Resolvent (I + lambda f)^-1(rhs) by damped Newton on g(z) = z + lambda f(z) - rhs.
    Vector z = add(x, disp->u);
    const double tol = 1e-12 * (1.0 + norm2(rhs));
    Vector g = add(z, scaled(problem.eval_f(z), lambda));
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= rhs[i];
    double gn = norm2(g);
    for (int it = 0; it < 50; ++it) {
        if (gn <= tol) return z;
        DenseMatrix j = problem.jac_f(z);
        for (int i = 0; i < j.rows(); ++i) {
            auto row = j.row(i);
            for (int c = 0; c < j.cols(); ++c) row[c] *= lambda;
            row[i] += 1.0;
        }
        auto dir = solve_dense(j, scaled(g, -1.0));
        if (!dir) return Fail::ResolventFailure;
        double t = 1.0;
        while (t >= std::ldexp(1.0, -30)) {
            Vector zt = z;
            axpy(zt, t, *dir);
            Vector gt = add(zt, scaled(problem.eval_f(zt), lambda));
            for (std::size_t i = 0; i < gt.size(); ++i) gt[i] -= rhs[i];
            const double gtn = norm2(gt);
            if (gtn <= (1.0 - 1e-4 * t) * gn) {
                z = std::move(zt);
                g = std::move(gt);
                gn = gtn;
                break;
            }
            t *= 0.5;
        }
        if (t < std::ldexp(1.0, -30)) return Fail::ResolventFailure;
    }
    return gn <= tol ? Result<Vector>(z) : Fail::ResolventFailure;
}

Result<Vector> op_pm(const ProblemInstance& problem, const Vector& x, double gamma) {
    if (!(gamma > 0.0)) return Fail::InvalidInput;
    auto disp = displacement(problem, x, gamma);
    if (!disp) return disp.error();
    return pm_from_displacement(x, gamma, *disp, problem);
}

Result<AgraalState> agraal_init(const ProblemInstance& problem, const Vector& x0) {
    DenseMatrix jac = problem.jac_f(x0);
    const double gamma0 = GammaRule{}.select(jac);
    auto disp = displacement(problem, x0, gamma0);
    if (!disp) return disp.error();
    AgraalState s;
    s.x_prev = x0;
    s.f_prev = disp->f_x;
    s.x = add(x0, disp->u);
    s.xbar = s.x;
    s.lambda = 1.0 / gamma0;
    s.lambda_max = 1e6 * s.lambda;
    s.theta = 1.0;
    s.iter = 1;
    return s;
}

Result<AgraalState> op_agraal(const ProblemInstance& problem, const AgraalState& state) {
    const double phi = state.phi;
    const double rho = 1.0 / phi + 1.0 / (phi * phi);
    Vector fx = problem.eval_f(state.x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fx.size(); ++i) {
        const double dx = state.x[i] - state.x_prev[i];
        const double df = fx[i] - state.f_prev[i];
        num += dx * dx;
        den += df * df;
    }
    double lambda = rho * state.lambda;
    if (num > 0.0 && den > 0.0)
        lambda = std::min(lambda, phi * state.theta * num / (4.0 * state.lambda * den));
    lambda = std::min(lambda, state.lambda_max);

    AgraalState next;
    next.phi = phi;
    next.lambda_max = state.lambda_max;
    next.xbar.resize(state.x.size());
    for (std::size_t i = 0; i < state.x.size(); ++i)
        next.xbar[i] = ((phi - 1.0) * state.x[i] + state.xbar[i]) / phi;
    Vector y = next.xbar;
    axpy(y, -lambda, fx);
    auto prox = problem.prox_q(y, lambda);
    if (!prox) return prox.error();
    next.x = std::move(prox->point);
    next.x_prev = state.x;
    next.f_prev = std::move(fx);
    next.theta = phi * lambda / state.lambda;
    next.lambda = lambda;
    next.iter = state.iter + 1;
    return next;
}

SolveReport solve_heuristic(const ProblemInstance& problem, const Vector& x0, const SolveOptions& opts,
                            const LineSearchParams& params) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport report;
    Vector x = x0;
    const double abs_floor = 1e-14 * (1.0 + norm2(problem.eval_f(x0)));
    double r_init = 0.0;
    MethodTag pending_tag = MethodTag::Heuristic;
    double pending_alpha = 1.0;

    for (int k = 0;; ++k) {
        DenseMatrix jac = problem.jac_f(x);
        const double gamma = opts.gamma_rule.select(jac);
        auto disp = displacement(problem, x, gamma);
        if (!disp) {
            report.status = status_from(disp.error());
            report.iterations = k;
            break;
        }
        const double r = residual(disp->u, gamma);
        report.gamma_history.push_back(gamma);
        if (opts.record_iterates) report.iterates.push_back(x);
        if (k == 0) {
            r_init = r;
            report.initial_residual = r;
        } else {
            report.residual_history.push_back({k, r, pending_tag, pending_alpha});
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
        IterateState state{x, disp->u, gamma, r, k};
        ApproxPoint approx = approx_from_displacement(x, gamma, std::move(*disp));
        auto dir = newton_direction(problem, x, approx, gamma, &jac);
        if (!dir) {
            report.status = status_from(dir.error());
            report.iterations = k;
            break;
        }
        auto step = heuristic_step(problem, state, *dir, params);
        if (!step) {
            report.status = status_from(step.error());
            report.iterations = k;
            break;
        }
        x = step->state.x;
        pending_tag = MethodTag::Heuristic;
        pending_alpha = step->alpha;
    }

    report.solution = std::move(x);
    report.final_residual = report.residual_history.empty() ? report.initial_residual : report.residual_history.back().residual;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

SolveReport solve_hybrid(const ProblemInstance& problem, const Vector& x0, const FallbackOp& fallback,
                         const SolveOptions& opts, const LineSearchParams& params) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport report;
    Vector x = x0;
    const double abs_floor = 1e-14 * (1.0 + norm2(problem.eval_f(x0)));
    double r_init = 0.0;
    double r_newton = 0.0;  // r_N^(l)
    int l = 0;
    MethodTag pending_tag = MethodTag::Newton;
    double pending_alpha = 1.0;

    for (int k = 0;; ++k) {
        DenseMatrix jac = problem.jac_f(x);
        const double gamma = opts.gamma_rule.select(jac);
        auto disp = displacement(problem, x, gamma);
        if (!disp) {
            report.status = status_from(disp.error());
            report.iterations = k;
            break;
        }
        const double r = residual(disp->u, gamma);
        report.gamma_history.push_back(gamma);
        if (opts.record_iterates) report.iterates.push_back(x);
        if (k == 0) {
            r_init = r;
            r_newton = r;
            report.initial_residual = r;
            report.newton_rn.push_back(r);
        } else {
            report.residual_history.push_back({k, r, pending_tag, pending_alpha});
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

        ApproxPoint approx = approx_from_displacement(x, gamma, Displacement{disp->u, disp->f_x, disp->prox});

        bool accepted = false;
        Fail trial_fail = Fail::None;
        auto dir = newton_direction(problem, x, approx, gamma, &jac);
        if (dir) {
            const double delta_l = LineSearchParams::delta(l);
            for (int j = 0;; ++j) {
                const double beta = LineSearchParams::beta(j);
                if (!(beta > delta_l)) break;
                Vector xt = x;
                axpy(xt, beta, *dir);
                auto trial = displacement(problem, xt, gamma);
                if (!trial) {
                    trial_fail = trial.error();
                    break;
                }
                const double rt = residual(trial->u, gamma);
                if (rt <= (1.0 - params.nu * beta) * r_newton) {
                    x = std::move(xt);
                    r_newton = rt;
                    ++l;
                    report.newton_rn.push_back(rt);
                    pending_tag = MethodTag::Newton;
                    pending_alpha = beta;
                    accepted = true;
                    break;
                }
            }
        } else if (dir.error() != Fail::SingularMatrix) {
            report.status = status_from(dir.error());
            report.iterations = k;
            break;
        }
        if (trial_fail != Fail::None) {
            report.status = status_from(trial_fail);
            report.iterations = k;
            break;
        }
        if (accepted) continue;

        // Step 5: the Newton direction or step size does not exist; apply T.
        Result<Vector> next = Fail::InvalidInput;
        switch (fallback.kind) {
            case FallbackKind::FB: {
                if (fallback.lambda_or_gamma) {
                    next = op_fb(problem, x, *fallback.lambda_or_gamma);
                } else {
                    next = add(x, disp->u);  // lambda = 1/gamma(k), reuses u(k)
                }
                break;
            }
            case FallbackKind::DR:
                next = op_dr(problem, x, fallback.lambda_or_gamma.value_or(1.0 / gamma));
                break;
            case FallbackKind::PM: {
                if (fallback.lambda_or_gamma) {
                    next = op_pm(problem, x, *fallback.lambda_or_gamma);
                } else {
                    next = pm_from_displacement(x, gamma, *disp, problem);
                }
                break;
            }
            case FallbackKind::Agraal:
                next = Fail::InvalidInput;  // baseline only, never a hybrid fallback
                break;
        }
        if (!next) {
            report.status = status_from(next.error());
            report.iterations = k;
            break;
        }
        x = std::move(*next);
        pending_tag = MethodTag::Fallback;
        pending_alpha = 1.0;
    }

    report.solution = std::move(x);
    report.final_residual = report.residual_history.empty() ? report.initial_residual : report.residual_history.back().residual;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace scd
