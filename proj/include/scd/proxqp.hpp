#pragma once

#include <cstdint>
#include <vector>

#include "scd/linalg.hpp"

namespace scd {

/// Separable nonsmooth term q(x) = sum_j beta_j |x_j - anchor_j| + indicator of
/// {x : xi x <= zeta}. The polyhedral part may be absent (zero rows).
struct SeparableQ {
    Vector beta;
    Vector anchor;
    DenseMatrix xi;  // p-by-m, p may be 0
    Vector zeta;

    int dim() const { return static_cast<int>(anchor.size()); }
    int num_rows() const { return static_cast<int>(zeta.size()); }

    /// Size, sign and finiteness checks.
    Fail validate() const;
    /// Whether xi*anchor <= zeta + 1e-9 holds (not required by the solver).
    bool anchor_feasible() const;
};

/// Exact proximal point together with the combinatorial information of the
/// terminal active-set basis: J0 (components held at the anchor, beta_j > 0)
/// and L (rows of xi at equality), plus the QP multipliers.
struct ProxResult {
    Vector point;
    std::vector<int> active_equalities;   // J0, ascending
    std::vector<int> active_constraints;  // L, ascending
    Vector row_multipliers;               // mu >= 0, size p
    Vector kink_multipliers;              // tau in [-1,1], size m; subgradient is beta_j*tau_j
};

/// Working-set snapshot for warm starts across consecutive prox calls with the
/// same q. Correctness never depends on it; the solver falls back to a cold
/// start when the snapshot is inconsistent with the data.
struct QpWarmStart {
    bool valid = false;
    std::vector<std::uint8_t> pinned;
    std::vector<std::int8_t> sigma;
    std::vector<int> working_rows;
    Vector point;
};

/// Closed-form prox for the unconstrained case (p = 0).
Result<ProxResult> soft_threshold(const Vector& y, double lambda, const SeparableQ& q);

/// Exact prox of q at y with parameter lambda via a primal active-set QP.
/// Active sets are read off the terminal basis, never from tolerances on the
/// returned point. Iteration cap 100*(m+p) guards against cycling.
Result<ProxResult> solve_prox_qp(const Vector& y, double lambda, const SeparableQ& q,
                                 const QpWarmStart* warm = nullptr, QpWarmStart* warm_out = nullptr);

}  // namespace scd
