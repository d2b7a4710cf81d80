#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "scd/problem.hpp"

namespace scd::cournot {

/// Per-player data: production-cost parameters (b, delta, K), feasible-set
/// rows (xi x <= zeta), change-cost weights beta and the previous production
/// anchor a.
struct PlayerData {
    Vector b;
    Vector delta;
    Vector bigK;
    DenseMatrix xi;
    Vector zeta;
    Vector beta;
    Vector anchor;
};

struct CournotInstance {
    int n = 0;  // players
    int m = 0;  // commodities
    std::vector<PlayerData> players;
    Vector elasticity;  // gamma_j > 0
    double eps1 = 0.1;    // price smoothing threshold
    double eps2 = 1e-10;  // |x| smoothing radius in the cost term when delta < 1
    std::vector<int> anchors_projected;  // players whose random anchor was moved into the feasible set

    int dim() const { return n * m; }
    Fail validate() const;
};

struct PriceCurve {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Smoothed inverse demand pi_hat_j: the power law (1000 n)^(1/gamma_j) t^(-1/gamma_j)
/// above eps1, its quadratic Taylor extension at eps1 below. C^2 by construction.
PriceCurve price_smoothed(double t, int j, const CournotInstance& inst);

/// Marginal production cost and its derivative for one commodity of one player.
double cost_gradient_term(double x, double b, double delta, double bigK, double eps2);
double cost_hessian_term(double x, double delta, double bigK, double eps2);

/// f stacks f^i(x) = grad c^i(x^i) - pi(t) - (x^i_j pi_j'(t_j))_j with
/// t_j = sum_i x^i_j. Layout is player-major with commodities contiguous.
Vector eval_f(const CournotInstance& inst, const Vector& x);

/// Analytic Jacobian of eval_f. Within a commodity the entries couple all
/// players through pi' and pi''; there is no cross-commodity coupling.
DenseMatrix eval_jacobian(const CournotInstance& inst, const Vector& x);

/// Jacobian assembly against an arbitrary price curve (used to check the
/// block structure with the price terms switched off).
DenseMatrix assemble_jacobian(const CournotInstance& inst, const Vector& x,
                              const std::function<PriceCurve(double, int)>& price);

SeparableQ player_q(const PlayerData& p);

/// Subspace pair of the per-player q from the exact active sets of a prox
/// solve at dhat: projectors onto W and W^perp, W = {w : w_j = 0 (j in J0),
/// <xi_l, w> = 0 (l in L)}.
Result<SubspacePair> build_subspace(const PlayerData& player, const ProxResult& active);

/// The 5-player, 3-commodity instance of the tabulated academic example.
CournotInstance build_fixed_instance();

/// Seeded random instance; draws follow the documented uniform supports.
/// Anchors that violate their feasible set are replaced by their Euclidean
/// projection onto it and noted in anchors_projected.
CournotInstance generate_random_instance(int n, int m, std::uint64_t seed);

ProblemInstance make_problem(const CournotInstance& inst, SeparableOptions opts = {});

std::string instance_to_json(const CournotInstance& inst);
Result<CournotInstance> instance_from_json(const std::string& text);

}  // namespace scd::cournot
