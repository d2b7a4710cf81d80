#include "scd/problem.hpp"

#include <atomic>
#include <cmath>
#include <memory>

#include "scd/parallel.hpp"

namespace scd {

int BlockStructure::total() const {
    int t = 0;
    for (int s : sizes) t += s;
    return t;
}

Result<Displacement> displacement(const ProblemInstance& problem, const Vector& x, double gamma) {
    if (!(gamma > 0.0) || static_cast<int>(x.size()) != problem.dim || !finite(x)) return Fail::InvalidInput;
    Displacement d;
    d.f_x = problem.eval_f(x);
    if (!finite(d.f_x)) return Fail::InvalidInput;
    Vector y = x;
    axpy(y, -1.0 / gamma, d.f_x);
    auto prox = problem.prox_q(y, 1.0 / gamma);
    if (!prox) return prox.error();
    d.prox = std::move(*prox);
    d.u = sub(d.prox.point, x);
    return d;
}

Result<SubspacePair> assemble_block_diagonal(std::span<const SubspacePair> blocks, const BlockStructure& structure) {
    if (blocks.size() != structure.sizes.size()) return Fail::InvalidInput;
    const int n = structure.total();
    SubspacePair out{DenseMatrix(n, n), DenseMatrix(n, n)};
    int off = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const int s = structure.sizes[b];
        if (s < 1 || blocks[b].ystar.rows() != s || blocks[b].ystar.cols() != s || blocks[b].xstar.rows() != s ||
            blocks[b].xstar.cols() != s)
            return Fail::InvalidInput;
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                out.ystar(off + i, off + j) = blocks[b].ystar(i, j);
                out.xstar(off + i, off + j) = blocks[b].xstar(i, j);
            }
        off += s;
    }
    return out;
}

Result<SubspacePair> subspace_from_active(const SeparableQ& q, std::span<const int> j0, std::span<const int> rows) {
    const int m = q.dim();
    DenseMatrix cols(m, static_cast<int>(rows.size() + j0.size()));
    int c = 0;
    for (int l : rows) {
        auto row = q.xi.row(l);
        double nrm = 0.0;
        for (int j = 0; j < m; ++j) nrm += row[j] * row[j];
        nrm = std::sqrt(nrm);
        const double inv = nrm > 0.0 ? 1.0 / nrm : 0.0;
        for (int j = 0; j < m; ++j) cols(j, c) = row[j] * inv;
        ++c;
    }
    for (int j : j0) {
        cols(j, c) = 1.0;
        ++c;
    }
    auto split = qr_orthonormal_split(cols);
    if (!split) return split.error();
    SubspacePair pair;
    pair.ystar = matmul(split->q2, split->q2.transposed());
    pair.xstar = matmul(split->q1, split->q1.transposed());
    return pair;
}

namespace {

struct SeparableAdapter {
    std::vector<SeparableQ> blocks;
    BlockStructure structure;
    std::vector<QpWarmStart> warm;
    SeparableOptions opts;
};

}  // namespace

ProblemInstance from_separable(std::vector<SeparableQ> blocks, std::function<Vector(const Vector&)> eval_f,
                               std::function<DenseMatrix(const Vector&)> jac_f, SeparableOptions opts) {
    auto ad = std::make_shared<SeparableAdapter>();
    ad->structure.sizes.reserve(blocks.size());
    for (const auto& b : blocks) ad->structure.sizes.push_back(b.dim());
    ad->blocks = std::move(blocks);
    ad->warm.resize(ad->blocks.size());
    ad->opts = opts;

    ProblemInstance p;
    p.dim = ad->structure.total();
    p.eval_f = std::move(eval_f);
    p.jac_f = std::move(jac_f);

    p.prox_q = [ad](const Vector& y, double lambda) -> Result<ProxEval> {
        const std::size_t nb = ad->blocks.size();
        ProxEval eval;
        eval.point.resize(y.size());
        eval.blocks.resize(nb);
        std::vector<int> offsets(nb);
        int off = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            offsets[b] = off;
            off += ad->structure.sizes[b];
        }
        std::atomic<int> failed{static_cast<int>(Fail::None)};
        auto solve_block = [&](std::size_t b) {
            const int mb = ad->structure.sizes[b];
            Vector yb(y.begin() + offsets[b], y.begin() + offsets[b] + mb);
            QpWarmStart* slot = ad->opts.warm_start ? &ad->warm[b] : nullptr;
            auto r = solve_prox_qp(yb, lambda, ad->blocks[b], slot, slot);
            if (!r) {
                failed.store(static_cast<int>(r.error()));
                return;
            }
            for (int j = 0; j < mb; ++j) eval.point[offsets[b] + j] = r->point[j];
            eval.blocks[b] = std::move(*r);
        };
        if (ad->opts.parallel && nb > 1) {
            parallel_for(nb, solve_block);
        } else {
            for (std::size_t b = 0; b < nb; ++b) solve_block(b);
        }
        if (failed.load() != static_cast<int>(Fail::None)) return static_cast<Fail>(failed.load());
        return eval;
    };

    p.subspace_oracle = [ad](const Vector& d, const Vector& dstar, std::span<const ProxResult> blocks) -> Result<SubspacePair> {
        (void)dstar;
        const std::size_t nb = ad->blocks.size();
        const bool have_basis = blocks.size() == nb;
        std::vector<SubspacePair> pairs(nb);
        std::atomic<int> failed{static_cast<int>(Fail::None)};
        auto build_block = [&](std::size_t b) {
            const auto& q = ad->blocks[b];
            int off = 0;
            for (std::size_t i = 0; i < b; ++i) off += ad->structure.sizes[i];
            std::vector<int> j0, rows;
            if (have_basis) {
                j0 = blocks[b].active_equalities;
                rows = blocks[b].active_constraints;
            } else {
                // Point-based fallback: pins are exact by construction, row
                // activity is detected at roundoff scale.
                for (int j = 0; j < q.dim(); ++j)
                    if (q.beta[j] > 0.0 && std::abs(d[off + j] - q.anchor[j]) <= 1e-9 * (1.0 + std::abs(q.anchor[j])))
                        j0.push_back(j);
                for (int l = 0; l < q.num_rows(); ++l) {
                    double s = 0.0;
                    auto row = q.xi.row(l);
                    for (int j = 0; j < q.dim(); ++j) s += row[j] * d[off + j];
                    if (std::abs(s - q.zeta[l]) <= 1e-9 * (1.0 + std::abs(q.zeta[l]))) rows.push_back(l);
                }
            }
            auto pair = subspace_from_active(q, j0, rows);
            if (!pair) {
                failed.store(static_cast<int>(pair.error()));
                return;
            }
            pairs[b] = std::move(*pair);
        };
        if (ad->opts.parallel && nb > 1) {
            parallel_for(nb, build_block);
        } else {
            for (std::size_t b = 0; b < nb; ++b) build_block(b);
        }
        if (failed.load() != static_cast<int>(Fail::None)) return static_cast<Fail>(failed.load());
        return assemble_block_diagonal(pairs, ad->structure);
    };

    return p;
}

}  // namespace scd
