#pragma once

#include <cmath>
#include <optional>

#include "scd/ssnewton.hpp"

namespace scd {

/// Shared line-search record for the heuristic and hybrid drivers.
/// Backtracking multipliers are beta(j) = 2^-j starting at 1; the hybrid's
/// forcing sequence is delta(l) = 0.5/(l+1), which lies in (0,1) and has a
/// divergent sum.
struct LineSearchParams {
    double mu = 0.4;
    double nu = 0.4;
    double alpha_floor = 1e-8;

    static double beta(int j) { return std::ldexp(1.0, -j); }
    static double delta(int l) { return 0.5 / (l + 1); }
};

enum class FallbackKind : std::uint8_t { FB, DR, PM, Agraal };

/// Fallback operator of the hybrid driver. When lambda_or_gamma is absent the
/// operator tracks the driver's current scaling (lambda = 1/gamma(k) for FB
/// and DR, gamma = gamma(k) for PM), which lets it reuse the displacement of
/// the current approximation step.
struct FallbackOp {
    FallbackKind kind = FallbackKind::PM;
    std::optional<double> lambda_or_gamma;
};

const char* to_string(FallbackKind k);

struct HeuristicStep {
    IterateState state;
    double alpha = 1.0;
};

/// Damped Newton step accepted by the non-monotone condition
/// r(x + alpha*s) <= (1 + delta(k) - mu*alpha) r(x). Stalls below alpha_floor.
Result<HeuristicStep> heuristic_step(const ProblemInstance& problem, const IterateState& state,
                                     const Vector& direction, const LineSearchParams& params);

/// Forward-backward map T(x) = (I + lambda dq)^-1 (I - lambda f)(x) = x + u_{1/lambda}(x).
Result<Vector> op_fb(const ProblemInstance& problem, const Vector& x, double lambda);

/// Douglas-Rachford map: z solving z + lambda f(z) = T_fb(x) + lambda f(x).
Result<Vector> op_dr(const ProblemInstance& problem, const Vector& x, double lambda);

/// Hybrid projection-proximal map: with xhat = x + u_gamma(x) and
/// v = -gamma*u + f(xhat) - f(x), projects x onto {z : <v, z - xhat> = 0};
/// returns xhat directly when v vanishes.
Result<Vector> op_pm(const ProblemInstance& problem, const Vector& x, double gamma);

/// Golden-ratio first-order baseline (compare harness only).
struct AgraalState {
    Vector x;
    Vector x_prev;
    Vector xbar;
    Vector f_prev;
    double lambda = 0.0;
    double lambda_max = 0.0;
    double theta = 1.0;
    double phi = 1.5;
    int iter = 0;
};

Result<AgraalState> agraal_init(const ProblemInstance& problem, const Vector& x0);
Result<AgraalState> op_agraal(const ProblemInstance& problem, const AgraalState& state);

/// Algorithm 5.2 with damped steps per the non-monotone heuristic.
SolveReport solve_heuristic(const ProblemInstance& problem, const Vector& x0, const SolveOptions& opts = {},
                            const LineSearchParams& params = {});

/// Globally convergent hybrid: Newton trial with acceptance
/// r(x + beta_j dx) <= (1 - nu beta_j) r_N^(l) over beta_j > delta(l), and a
/// fallback step T(x) whenever the direction or step size does not exist.
SolveReport solve_hybrid(const ProblemInstance& problem, const Vector& x0, const FallbackOp& fallback,
                         const SolveOptions& opts = {}, const LineSearchParams& params = {});

}  // namespace scd
