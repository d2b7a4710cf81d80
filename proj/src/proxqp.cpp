#include "scd/proxqp.hpp"
#include <cstdio>

#include <algorithm>
#include <cmath>

namespace scd {

namespace {

constexpr double kFeasTol = 1e-9;

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double row_dot(const DenseMatrix& xi, int l, const Vector& v) {
    auto row = xi.row(l);
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += row[j] * v[j];
    return s;
}

/// Primal active-set solver for
///   min (1/(2 lambda)) |x - y|^2 + sum_j beta_j |x_j - a_j|   s.t.  xi x <= zeta.
/// The working set consists of rows of xi held at equality and kink components
/// pinned at their anchor; unpinned kink components carry a sign branch. Each
/// subproblem is an equality-constrained QP solved exactly through the dual
/// Gram system, so the terminal basis is combinatorially exact.
class ActiveSetQp {
public:
    ActiveSetQp(const Vector& y, double lambda, const SeparableQ& q) : y_(y), lambda_(lambda), q_(q) {
        m_ = q.dim();
        p_ = q.num_rows();
        pinned_.assign(m_, 0);
        sigma_.assign(m_, 0);
        in_working_.assign(p_, 0);
    }

    Fail run(const QpWarmStart* warm, ProxResult& out, QpWarmStart* warm_out) {
        if (!init_state(warm)) {
            if (Fail f = cold_start(); f != Fail::None) return f;
        }

        const int max_pivots = 100 * (m_ + p_);
        const int bland_after = 3 * (m_ + p_);
        int pivots = 0;
        bool stale = true;  // EQP must be (re)solved

        Vector xhat, mu;
        while (pivots <= max_pivots) {
            if (stale) {
                Fail f = solve_eqp(xhat, mu);
                if (f != Fail::None) return f;
                stale = false;
            }
            const bool bland = pivots >= bland_after;
#ifdef SCD_QP_TRACE
            std::fprintf(stderr, "pivot=%d working=[", pivots);
            for (int l : working_) std::fprintf(stderr, "%d ", l);
            std::fprintf(stderr, "] pin=[");
            for (int j = 0; j < m_; ++j) std::fprintf(stderr, "%d", (int)pinned_[j]);
            std::fprintf(stderr, "] sig=[");
            for (int j = 0; j < m_; ++j) std::fprintf(stderr, "%+d", (int)sigma_[j]);
            std::fprintf(stderr, "] x=(");
            for (int j = 0; j < m_; ++j) std::fprintf(stderr, "%.12g,", x_[j]);
            std::fprintf(stderr, ") xhat=(");
            for (int j = 0; j < m_; ++j) std::fprintf(stderr, "%.12g,", xhat[j]);
            std::fprintf(stderr, ")\n");
#endif

            double step = 0.0;
            for (int j = 0; j < m_; ++j) step = std::max(step, std::abs(xhat[j] - x_[j]));
            const double step_tol = 1e-13 * (1.0 + norm_inf(x_) + norm_inf(xhat));

            if (step <= step_tol) {
                int leave = select_leaving(mu, bland);
                if (leave < 0) {
                    finalize(mu, out, warm_out);
                    return Fail::None;
                }
                if (leave < p_) {
                    drop_row(leave);
                } else {
                    const int j = leave - p_;
                    const double gj = kkt_force(j, mu);
                    pinned_[j] = 0;
                    sigma_[j] = gj > 0.0 ? -1 : +1;
                }
                ++pivots;
                stale = true;
                continue;
            }

            // Ratio test along x -> xhat against rows outside the working set
            // and anchor crossings of unpinned kink components.
            // Constraints blocking at or before the full step enter the
            // working set; ties resolve to the lowest index (Bland-compatible).
            Vector dx(m_);
            for (int j = 0; j < m_; ++j) dx[j] = xhat[j] - x_[j];
            double alpha = 1.0;
            int block = -1;  // row l in [0,p), kink encoded as p + j
            for (int l = 0; l < p_; ++l) {
                if (in_working_[l]) continue;
                const double d = row_dot(q_.xi, l, dx);
                const double scale = 1e-13 * (1.0 + std::abs(q_.zeta[l]) + std::abs(row_dot(q_.xi, l, x_)));
                if (d <= scale) continue;
                const double slack = std::max(q_.zeta[l] - row_dot(q_.xi, l, x_), 0.0);
                const double a = slack / d;
                if (a < alpha || (a == alpha && block < 0)) {
                    alpha = a;
                    block = l;
                }
            }
            for (int j = 0; j < m_; ++j) {
                if (q_.beta[j] <= 0.0 || pinned_[j]) continue;
                if (static_cast<double>(sigma_[j]) * dx[j] >= 0.0) continue;
                const double a = std::max((q_.anchor[j] - x_[j]) / dx[j], 0.0);
                const int code = p_ + j;
                if (a < alpha || (a == alpha && block < 0)) {
                    alpha = a;
                    block = code;
                }
            }

#ifdef SCD_QP_TRACE
            std::fprintf(stderr, "  ratio: alpha=%.17g block=%d\n", alpha, block);
            for (int l = 0; l < p_; ++l)
                std::fprintf(stderr, "  row %d inW=%d d=%.17g slack=%.17g\n", l, (int)in_working_[l],
                             row_dot(q_.xi, l, dx), q_.zeta[l] - row_dot(q_.xi, l, x_));
#endif
            if (block < 0) {
                x_ = xhat;  // full step, exact assignment
                continue;   // re-check optimality against the same basis
            }
            if (alpha == 1.0) {
                x_ = xhat;
            } else {
                for (int j = 0; j < m_; ++j) x_[j] += alpha * dx[j];
            }
            if (block < p_) {
                add_row(block);
            } else {
                const int j = block - p_;
                pinned_[j] = 1;
                sigma_[j] = 0;
                x_[j] = q_.anchor[j];
            }
            ++pivots;
            stale = true;
        }
        return Fail::QPFailure;
    }

private:
    bool init_state(const QpWarmStart* warm) {
        if (!warm || !warm->valid) return false;
        if (static_cast<int>(warm->pinned.size()) != m_ || static_cast<int>(warm->sigma.size()) != m_ ||
            static_cast<int>(warm->point.size()) != m_)
            return false;
        x_ = warm->point;
        pinned_ = warm->pinned;
        sigma_ = warm->sigma;
        for (int j = 0; j < m_; ++j) {
            if (q_.beta[j] <= 0.0) {
                if (pinned_[j]) return false;
                sigma_[j] = 0;
                continue;
            }
            if (pinned_[j]) {
                x_[j] = q_.anchor[j];
                sigma_[j] = 0;
            } else if (sigma_[j] == 0) {
                sigma_[j] = x_[j] >= q_.anchor[j] ? +1 : -1;
            } else if (static_cast<double>(sigma_[j]) * (x_[j] - q_.anchor[j]) < 0.0) {
                return false;
            }
        }
        for (int l = 0; l < p_; ++l) {
            if (row_dot(q_.xi, l, x_) > q_.zeta[l] + kFeasTol) return false;
        }
        working_.clear();
        std::fill(in_working_.begin(), in_working_.end(), 0);
        for (int l : warm->working_rows) {
            if (l < 0 || l >= p_ || in_working_[l]) return false;
            working_.push_back(l);
            in_working_[l] = 1;
        }
        return true;
    }

    Fail cold_start() {
        working_.clear();
        std::fill(in_working_.begin(), in_working_.end(), 0);
        const bool anchored = q_.anchor_feasible();
        if (anchored) {
            x_ = q_.anchor;
        } else {
            // Stranded anchor: clamp the ray 0 -> anchor into the feasible
            // set. This needs zeta >= 0, which holds for capacity-style rows.
            double t = 1.0;
            for (int l = 0; l < p_; ++l) {
                if (q_.zeta[l] < 0.0) return Fail::InvalidInput;
                const double xa = row_dot(q_.xi, l, q_.anchor);
                if (xa > q_.zeta[l]) t = std::min(t, q_.zeta[l] / xa);
            }
            x_ = scaled(q_.anchor, t);
        }
        for (int l = 0; l < p_; ++l) {
            if (row_dot(q_.xi, l, x_) >= q_.zeta[l] - 1e-12 * (1.0 + std::abs(q_.zeta[l]))) {
                working_.push_back(l);
                in_working_[l] = 1;
            }
        }
        for (int j = 0; j < m_; ++j) {
            if (q_.beta[j] <= 0.0) {
                pinned_[j] = 0;
                sigma_[j] = 0;
                continue;
            }
            // Soft-threshold guess: components expected to leave the anchor get
            // their branch sign, the rest start pinned where consistent.
            if (anchored && std::abs(y_[j] - q_.anchor[j]) <= lambda_ * q_.beta[j]) {
                pinned_[j] = 1;
                sigma_[j] = 0;
            } else if (x_[j] != q_.anchor[j]) {
                pinned_[j] = 0;
                sigma_[j] = x_[j] > q_.anchor[j] ? +1 : -1;
            } else {
                pinned_[j] = 0;
                sigma_[j] = y_[j] >= q_.anchor[j] ? +1 : -1;
            }
        }
        return Fail::None;
    }

    void add_row(int l) {
        working_.push_back(l);
        in_working_[l] = 1;
    }

    void drop_row(int l) {
        working_.erase(std::remove(working_.begin(), working_.end(), l), working_.end());
        in_working_[l] = 0;
    }

    /// Solve the equality-constrained QP of the current working set. xhat gets
    /// the minimizer, mu the row multipliers (indexed like working_).
    Fail solve_eqp(Vector& xhat, Vector& mu) {
        for (int attempt = 0; attempt < 2; ++attempt) {
            free_.clear();
            for (int j = 0; j < m_; ++j)
                if (!pinned_[j]) free_.push_back(j);

            Vector ytilde(free_.size());
            for (std::size_t r = 0; r < free_.size(); ++r) {
                const int j = free_[r];
                const double c = (q_.beta[j] > 0.0 && sigma_[j] != 0) ? q_.beta[j] * static_cast<double>(sigma_[j]) : 0.0;
                ytilde[r] = y_[j] - lambda_ * c;
            }

            xhat.assign(m_, 0.0);
            for (int j = 0; j < m_; ++j)
                if (pinned_[j]) xhat[j] = q_.anchor[j];

            const int nf = static_cast<int>(working_.size());
            if (nf == 0) {
                mu.clear();
                for (std::size_t r = 0; r < free_.size(); ++r) xhat[free_[r]] = ytilde[r];
                return Fail::None;
            }

            DenseMatrix gram(nf, nf);
            Vector rhs(nf);
            for (int a = 0; a < nf; ++a) {
                const int la = working_[a];
                auto rowa = q_.xi.row(la);
                double h = q_.zeta[la];
                for (int j = 0; j < m_; ++j)
                    if (pinned_[j]) h -= rowa[j] * q_.anchor[j];
                double ay = 0.0;
                for (std::size_t r = 0; r < free_.size(); ++r) ay += rowa[free_[r]] * ytilde[r];
                rhs[a] = (ay - h) / lambda_;
                for (int b = a; b < nf; ++b) {
                    auto rowb = q_.xi.row(working_[b]);
                    double s = 0.0;
                    for (int j : free_) s += rowa[j] * rowb[j];
                    gram(a, b) = s;
                    gram(b, a) = s;
                }
            }

            auto lu = lu_factor(gram);
            if (!lu) {
                if (attempt == 1 || !prune_dependent_rows()) return Fail::QPFailure;
                continue;
            }
            mu = lu_solve(*lu, rhs);
#ifdef SCD_QP_TRACE
            std::fprintf(stderr, "  eqp: nf=%d free=%zu\n", nf, free_.size());
            for (int a = 0; a < nf; ++a) {
                std::fprintf(stderr, "    G[%d]=", a);
                for (int b = 0; b < nf; ++b) std::fprintf(stderr, "%.12g ", gram(a, b));
                std::fprintf(stderr, " rhs=%.12g mu=%.12g\n", rhs[a], mu[a]);
            }
#endif
            for (std::size_t r = 0; r < free_.size(); ++r) {
                const int j = free_[r];
                double corr = 0.0;
                for (int a = 0; a < nf; ++a) corr += q_.xi(working_[a], j) * mu[a];
                xhat[j] = ytilde[r] - lambda_ * corr;
            }
            return Fail::None;
        }
        return Fail::QPFailure;
    }

    /// Drop working rows that became linearly dependent on the free coordinates
    /// (can happen right after pinning a component). Keeps the pivot columns of
    /// a rank-revealing QR of the restricted row set.
    bool prune_dependent_rows() {
        const int nf = static_cast<int>(working_.size());
        DenseMatrix cols(static_cast<int>(free_.size()), nf);
        for (int a = 0; a < nf; ++a)
            for (std::size_t r = 0; r < free_.size(); ++r) cols(static_cast<int>(r), a) = q_.xi(working_[a], free_[r]);
        auto qr = qr_col_pivot(cols);
        if (!qr || qr->rank == nf) return false;
        std::vector<int> keep;
        for (int t = 0; t < qr->rank; ++t) keep.push_back(working_[qr->piv[t]]);
        std::sort(keep.begin(), keep.end());
        std::fill(in_working_.begin(), in_working_.end(), 0);
        working_ = keep;
        for (int l : working_) in_working_[l] = 1;
        return true;
    }

    /// Stationarity force on component j excluding its own kink term:
    /// g_j = (x_j - y_j)/lambda + (xi_F^T mu)_j.
    double kkt_force(int j, const Vector& mu) const {
        double g = (x_[j] - y_[j]) / lambda_;
        for (std::size_t a = 0; a < working_.size(); ++a) g += q_.xi(working_[a], j) * mu[a];
        return g;
    }

    /// Returns the working-set member to drop (row index, or p + j for a pinned
    /// component), or -1 when the current basis is optimal.
    int select_leaving(const Vector& mu, bool bland) const {
        const double mu_tol = 1e-10 * (1.0 + (mu.empty() ? 0.0 : norm_inf(mu)));
        int choice = -1;
        double worst = 0.0;
        for (std::size_t a = 0; a < working_.size(); ++a) {
            if (mu[a] < -mu_tol) {
                if (bland) {
                    if (choice < 0 || working_[a] < choice) choice = working_[a];
                } else if (-mu[a] > worst) {
                    worst = -mu[a];
                    choice = working_[a];
                }
            }
        }
        for (int j = 0; j < m_; ++j) {
            if (!pinned_[j]) continue;
            const double g = kkt_force(j, mu);
            const double viol = std::abs(g) - q_.beta[j];
            const double g_tol = 1e-10 * (1.0 + std::abs(g) + q_.beta[j]);
            if (viol > g_tol) {
                const int code = p_ + j;
                if (bland) {
                    if (choice < 0 || code < choice) choice = code;
                } else if (viol > worst) {
                    worst = viol;
                    choice = code;
                }
            }
        }
        return choice;
    }

    void finalize(const Vector& mu, ProxResult& out, QpWarmStart* warm_out) const {
        out.point = x_;
        out.active_equalities.clear();
        out.active_constraints.clear();
        out.row_multipliers.assign(p_, 0.0);
        out.kink_multipliers.assign(m_, 0.0);
        for (std::size_t a = 0; a < working_.size(); ++a) out.row_multipliers[working_[a]] = std::max(mu[a], 0.0);
        for (int j = 0; j < m_; ++j) {
            if (pinned_[j]) {
                out.active_equalities.push_back(j);
                out.kink_multipliers[j] = clamp(-kkt_force(j, mu) / q_.beta[j], -1.0, 1.0);
            } else if (q_.beta[j] > 0.0) {
                out.kink_multipliers[j] = static_cast<double>(sigma_[j]);
            }
        }
        out.active_constraints.assign(working_.begin(), working_.end());
        std::sort(out.active_constraints.begin(), out.active_constraints.end());
        if (warm_out) {
            warm_out->valid = true;
            warm_out->pinned = pinned_;
            warm_out->sigma = sigma_;
            warm_out->working_rows = out.active_constraints;
            warm_out->point = x_;
        }
    }

    const Vector& y_;
    double lambda_;
    const SeparableQ& q_;
    int m_ = 0;
    int p_ = 0;

    Vector x_;
    std::vector<std::uint8_t> pinned_;
    std::vector<std::int8_t> sigma_;
    std::vector<int> working_;
    std::vector<std::uint8_t> in_working_;
    std::vector<int> free_;
};

}  // namespace

Fail SeparableQ::validate() const {
    const int m = dim();
    if (m < 1) return Fail::InvalidInput;
    if (static_cast<int>(beta.size()) != m) return Fail::InvalidInput;
    if (xi.rows() != num_rows() || (xi.rows() > 0 && xi.cols() != m)) return Fail::InvalidInput;
    if (!finite(beta) || !finite(anchor) || !finite(zeta) || !xi.finite()) return Fail::InvalidInput;
    for (double b : beta)
        if (b < 0.0) return Fail::InvalidInput;
    // Note: the anchor may lie outside the feasible set (a shrinking capacity
    // can strand the previous production); the QP then charges the full
    // change cost but stays well posed.
    return Fail::None;
}

bool SeparableQ::anchor_feasible() const {
    for (int l = 0; l < num_rows(); ++l)
        if (row_dot(xi, l, anchor) > zeta[l] + kFeasTol) return false;
    return true;
}

Result<ProxResult> soft_threshold(const Vector& y, double lambda, const SeparableQ& q) {
    const int m = q.dim();
    if (q.num_rows() != 0 || static_cast<int>(y.size()) != m || !(lambda > 0.0) || !finite(y)) return Fail::InvalidInput;
    if (Fail f = q.validate(); f != Fail::None) return f;

    ProxResult r;
    r.point.resize(m);
    r.row_multipliers.clear();
    r.kink_multipliers.assign(m, 0.0);
    for (int j = 0; j < m; ++j) {
        const double d = y[j] - q.anchor[j];
        if (q.beta[j] > 0.0 && std::abs(d) <= lambda * q.beta[j]) {
            r.point[j] = q.anchor[j];
            r.active_equalities.push_back(j);
            r.kink_multipliers[j] = d / (lambda * q.beta[j]);
        } else {
            const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            r.point[j] = q.anchor[j] + s * std::max(std::abs(d) - lambda * q.beta[j], 0.0);
            r.kink_multipliers[j] = q.beta[j] > 0.0 ? s : 0.0;
        }
    }
    return r;
}

Result<ProxResult> solve_prox_qp(const Vector& y, double lambda, const SeparableQ& q, const QpWarmStart* warm,
                                 QpWarmStart* warm_out) {
    const int m = q.dim();
    if (static_cast<int>(y.size()) != m || !(lambda > 0.0) || !finite(y)) return Fail::InvalidInput;
    if (Fail f = q.validate(); f != Fail::None) return f;
    if (q.num_rows() == 0) {
        auto r = soft_threshold(y, lambda, q);
        if (r && warm_out) {
            warm_out->valid = true;
            warm_out->pinned.assign(m, 0);
            warm_out->sigma.assign(m, 0);
            for (int j : r->active_equalities) warm_out->pinned[j] = 1;
            for (int j = 0; j < m; ++j)
                if (!warm_out->pinned[j] && q.beta[j] > 0.0)
                    warm_out->sigma[j] = r->point[j] >= q.anchor[j] ? +1 : -1;
            warm_out->working_rows.clear();
            warm_out->point = r->point;
        }
        return r;
    }

    ActiveSetQp solver(y, lambda, q);
    ProxResult out;
    Fail f = solver.run(warm, out, warm_out);
    if (f != Fail::None) return f;
    return out;
}

}  // namespace scd
