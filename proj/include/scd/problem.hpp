#pragma once

#include <functional>
#include <span>
#include <vector>

#include "scd/linalg.hpp"
#include "scd/proxqp.hpp"

namespace scd {

/// One element of the SCD subspace set of the subdifferential at a graph
/// point: range(ystar, xstar) spans the selected n-dimensional subspace. For
/// separable polyhedral q both matrices are complementary orthogonal
/// projectors.
struct SubspacePair {
    DenseMatrix ystar;
    DenseMatrix xstar;
};

struct BlockStructure {
    std::vector<int> sizes;
    int total() const;
};

/// Prox value together with the per-block basis information of the QP that
/// produced it. blocks may be empty for problems without block detail.
struct ProxEval {
    Vector point;
    std::vector<ProxResult> blocks;
};

/// The generalized equation 0 in f(x) + dq(x), presented through the four
/// capabilities the solvers consume. All callbacks must be reentrant; the
/// subspace oracle receives the prox basis of the current approximation step
/// so active sets never have to be re-derived from point tolerances.
struct ProblemInstance {
    int dim = 0;
    std::function<Vector(const Vector&)> eval_f;
    std::function<DenseMatrix(const Vector&)> jac_f;
    std::function<Result<ProxEval>(const Vector& y, double lambda)> prox_q;
    std::function<Result<SubspacePair>(const Vector& d, const Vector& dstar, std::span<const ProxResult> blocks)>
        subspace_oracle;
};

/// Prox displacement u_gamma(x) = P_{1/gamma}q(x - f(x)/gamma) - x, the unique
/// solution of 0 in gamma*u + f(x) + dq(x+u). f(x) is returned as well since
/// every caller needs it next.
struct Displacement {
    Vector u;
    Vector f_x;
    ProxEval prox;
};

Result<Displacement> displacement(const ProblemInstance& problem, const Vector& x, double gamma);

/// Block-diagonal assembly of per-block subspace pairs (separable q).
Result<SubspacePair> assemble_block_diagonal(std::span<const SubspacePair> blocks, const BlockStructure& structure);

/// Projector pair onto W x W^perp where W = {w : w_j = 0 for j in j0,
/// <xi_l, w> = 0 for l in rows}. Built by an orthonormal split of the spanning
/// columns {xi_l/|xi_l|, e_j}; empty active sets give ystar = I, xstar = 0.
Result<SubspacePair> subspace_from_active(const SeparableQ& q, std::span<const int> j0, std::span<const int> rows);

struct SeparableOptions {
    bool warm_start = true;
    bool parallel = true;
};

/// Assembles a ProblemInstance for f plus a block-separable q. Per-block prox
/// solves fan out across workers; warm starts are kept per block.
ProblemInstance from_separable(std::vector<SeparableQ> blocks, std::function<Vector(const Vector&)> eval_f,
                               std::function<DenseMatrix(const Vector&)> jac_f, SeparableOptions opts = {});

}  // namespace scd
