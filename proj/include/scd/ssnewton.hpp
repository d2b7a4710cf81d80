#pragma once

#include "scd/problem.hpp"
#include "scd/report.hpp"

namespace scd {

inline constexpr double kGammaFloor = 1e-8;
inline constexpr double kGammaCap = 1e12;

/// Scaling parameter selection. The adaptive rule follows gamma(k) =
/// |grad f(x(k))|_1 (maximum absolute column sum), clamped to
/// [kGammaFloor, kGammaCap].
struct GammaRule {
    enum class Kind : std::uint8_t { Adaptive, Fixed };
    Kind kind = Kind::Adaptive;
    double value = 1.0;

    double select(const DenseMatrix& jac) const;
};

struct SolveOptions {
    double tol_rel = 1e-12;
    int max_iter = 500;
    GammaRule gamma_rule;
    bool record_iterates = true;
};

/// State of the outer iteration at one iterate.
struct IterateState {
    Vector x;
    Vector u;
    double gamma = 1.0;
    double residual = 0.0;
    int iter = 0;
};

/// Graph point produced by the approximation step:
/// dhat = x + u, dstar = -gamma*u - f(x), yhat = -(gamma*u, u).
struct ApproxPoint {
    Vector dhat;
    Vector dstar;
    Vector yhat1;
    Vector yhat2;
    ProxEval prox;
    Vector f_x;
};

/// Residual r_gamma = sqrt(1 + gamma^2) * |u|_2; zero exactly at solutions.
double residual(const Vector& u, double gamma);

Result<ApproxPoint> approximation_step(const ProblemInstance& problem, const Vector& x, double gamma);
ApproxPoint approx_from_displacement(const Vector& x, double gamma, Displacement d);

/// Newton direction from (Y*^T grad f(x) + X*^T) dx = (gamma Y*^T + X*^T) u,
/// with the subspace pair queried at (dhat, dstar). `jac` may pass a cached
/// Jacobian at x. Fails with SingularMatrix when no direction exists.
Result<Vector> newton_direction(const ProblemInstance& problem, const Vector& x, const ApproxPoint& approx,
                                double gamma, const DenseMatrix* jac = nullptr);

/// Full-step method: approximation step plus undamped Newton step until the
/// residual falls below tol_rel times the initial residual.
SolveReport solve_plain(const ProblemInstance& problem, const Vector& x0, const SolveOptions& opts = {});

}  // namespace scd
