#include "scd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace scd {

const char* to_string(Fail f) {
    switch (f) {
        case Fail::None: return "None";
        case Fail::InvalidInput: return "InvalidInput";
        case Fail::SingularMatrix: return "SingularMatrix";
        case Fail::QPFailure: return "QPFailure";
        case Fail::ResolventFailure: return "ResolventFailure";
        case Fail::LineSearchStall: return "LineSearchStall";
    }
    return "Unknown";
}

DenseMatrix DenseMatrix::identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

bool DenseMatrix::finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

double norm_inf(const Vector& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

Vector add(const Vector& a, const Vector& b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vector sub(const Vector& a, const Vector& b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vector scaled(const Vector& v, double s) {
    Vector r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i] * s;
    return r;
}

void axpy(Vector& y, double s, const Vector& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

bool finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

Vector matvec(const DenseMatrix& m, const Vector& v) {
    Vector r(m.rows(), 0.0);
    for (int i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        double s = 0.0;
        for (int j = 0; j < m.cols(); ++j) s += row[j] * v[j];
        r[i] = s;
    }
    return r;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        auto ai = a.row(i);
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            auto bk = b.row(k);
            for (int j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

double one_norm(const DenseMatrix& m) {
    Vector colsum(m.cols(), 0.0);
    for (int i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        for (int j = 0; j < m.cols(); ++j) colsum[j] += std::abs(row[j]);
    }
    return norm_inf(colsum);
}

double frobenius_norm(const DenseMatrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

Result<PivotedQr> qr_col_pivot(const DenseMatrix& cols) {
    if (!cols.finite()) return Fail::InvalidInput;
    const int m = cols.rows();
    const int k = cols.cols();
    if (m < 1) return Fail::InvalidInput;

    DenseMatrix r = cols;
    PivotedQr out;
    out.q = DenseMatrix::identity(m);
    out.piv.resize(k);
    for (int j = 0; j < k; ++j) out.piv[j] = j;
    out.rdiag.assign(k, 0.0);

    const int steps = std::min(m, k);
    for (int t = 0; t < steps; ++t) {
        // Pivot: bring the column with the largest remaining tail in front.
        int best = t;
        double best_norm = -1.0;
        for (int c = t; c < k; ++c) {
            double s = 0.0;
            for (int i = t; i < m; ++i) s += r(i, c) * r(i, c);
            if (s > best_norm) {
                best_norm = s;
                best = c;
            }
        }
        if (best != t) {
            for (int i = 0; i < m; ++i) std::swap(r(i, t), r(i, best));
            std::swap(out.piv[t], out.piv[best]);
        }
        const double alpha = std::sqrt(std::max(best_norm, 0.0));
        out.rdiag[t] = alpha;
        if (alpha == 0.0) break;  // remaining columns are all zero

        // Householder vector for column t, stored locally.
        Vector v(m - t);
        for (int i = t; i < m; ++i) v[i - t] = r(i, t);
        const double sign = v[0] >= 0.0 ? 1.0 : -1.0;
        v[0] += sign * alpha;
        const double vnorm2 = dot(v, v);
        if (vnorm2 == 0.0) continue;

        // Apply H = I - 2 v v^T / (v^T v) to the trailing columns of r.
        for (int c = t; c < k; ++c) {
            double s = 0.0;
            for (int i = t; i < m; ++i) s += v[i - t] * r(i, c);
            const double f = 2.0 * s / vnorm2;
            for (int i = t; i < m; ++i) r(i, c) -= f * v[i - t];
        }
        out.rdiag[t] = std::abs(r(t, t));
        // Accumulate Q <- Q H (applied to columns t..m).
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int c = t; c < m; ++c) s += out.q(i, c) * v[c - t];
            const double f = 2.0 * s / vnorm2;
            for (int c = t; c < m; ++c) out.q(i, c) -= f * v[c - t];
        }
    }

    double dmax = 0.0;
    for (double d : out.rdiag) dmax = std::max(dmax, std::abs(d));
    int rank = 0;
    while (rank < steps && std::abs(out.rdiag[rank]) > kQrRankTol * dmax) ++rank;
    out.rank = rank;
    return out;
}

Result<OrthoSplit> qr_orthonormal_split(const DenseMatrix& cols) {
    auto qr = qr_col_pivot(cols);
    if (!qr) return qr.error();
    const int m = cols.rows();
    const int r = qr->rank;
    OrthoSplit split;
    split.rank = r;
    split.q1 = DenseMatrix(m, r);
    split.q2 = DenseMatrix(m, m - r);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < r; ++j) split.q1(i, j) = qr->q(i, j);
        for (int j = r; j < m; ++j) split.q2(i, j - r) = qr->q(i, j);
    }
    return split;
}

Result<LuFactors> lu_factor(DenseMatrix a) {
    const int n = a.rows();
    if (n != a.cols() || !a.finite()) return Fail::InvalidInput;
    LuFactors f;
    f.perm.resize(n);
    double max_pivot = 0.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        max_pivot = std::max(max_pivot, best);
        if (best <= kLuPivotTol * max_pivot) return Fail::SingularMatrix;
        f.perm[k] = piv;
        if (piv != k) {
            auto rk = a.row(k);
            auto rp = a.row(piv);
            std::swap_ranges(rk.begin(), rk.end(), rp.begin());
        }
        const double inv = 1.0 / a(k, k);
        auto pivot_row = a.row(k);
        for (int i = k + 1; i < n; ++i) {
            auto ri = a.row(i);
            const double l = ri[k] * inv;
            ri[k] = l;
            if (l == 0.0) continue;
            for (int j = k + 1; j < n; ++j) ri[j] -= l * pivot_row[j];
        }
    }
    f.lu = std::move(a);
    return f;
}

Vector lu_solve(const LuFactors& f, Vector b) {
    const int n = f.lu.rows();
    // Row swaps were applied to whole rows during factorization, so all of
    // them must hit b before the forward substitution.
    for (int k = 0; k < n; ++k)
        if (f.perm[k] != k) std::swap(b[k], b[f.perm[k]]);
    for (int k = 0; k < n; ++k) {
        for (int i = k + 1; i < n; ++i) b[i] -= f.lu(i, k) * b[k];
    }
    for (int i = n - 1; i >= 0; --i) {
        auto row = f.lu.row(i);
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= row[j] * b[j];
        b[i] = s / row[i];
    }
    return b;
}

Result<Vector> solve_dense(const DenseMatrix& a, const Vector& b) {
    if (a.rows() != static_cast<int>(b.size()) || !finite(b)) return Fail::InvalidInput;
    auto f = lu_factor(a);
    if (!f) return f.error();
    return lu_solve(*f, b);
}

Result<DenseMatrix> finite_diff_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& x, double h) {
    const int n = static_cast<int>(x.size());
    Vector xp = x;
    DenseMatrix jac;
    for (int j = 0; j < n; ++j) {
        xp[j] = x[j] + h;
        Vector fp = fn(xp);
        xp[j] = x[j] - h;
        Vector fm = fn(xp);
        xp[j] = x[j];
        if (!finite(fp) || !finite(fm)) return Fail::InvalidInput;
        if (j == 0) jac = DenseMatrix(static_cast<int>(fp.size()), n);
        for (std::size_t i = 0; i < fp.size(); ++i) jac(static_cast<int>(i), j) = (fp[i] - fm[i]) / (2.0 * h);
    }
    return jac;
}

}  // namespace scd
