#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "scd/errors.hpp"

namespace scd {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static DenseMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    std::span<double> row(int i) { return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)}; }
    std::span<const double> row(int i) const {
        return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    DenseMatrix transposed() const;
    bool finite() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Vector helpers.
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
double norm_inf(const Vector& v);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scaled(const Vector& v, double s);
/// y += s * x
void axpy(Vector& y, double s, const Vector& x);
bool finite(const Vector& v);

Vector matvec(const DenseMatrix& m, const Vector& v);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// Maximum absolute column sum norm, |A|_1.
double one_norm(const DenseMatrix& m);
double frobenius_norm(const DenseMatrix& m);

/// Diagonal entries below kQrRankTol relative to the largest one count as zero.
inline constexpr double kQrRankTol = 1e-10;
/// An LU pivot below kLuPivotTol relative to the largest pivot seen flags singularity.
inline constexpr double kLuPivotTol = 1e-12;

/// Householder QR with column pivoting of an m-by-k matrix.
/// q is m-by-m orthogonal, rdiag holds the |R| diagonal in pivot order and
/// piv the chosen column order; rank is the numerical rank.
struct PivotedQr {
    DenseMatrix q;
    std::vector<double> rdiag;
    std::vector<int> piv;
    int rank = 0;
};

Result<PivotedQr> qr_col_pivot(const DenseMatrix& cols);

/// Orthonormal split of R^m into the column space of the input (q1) and its
/// orthogonal complement (q2): q1 is m-by-rank, q2 is m-by-(m-rank).
struct OrthoSplit {
    DenseMatrix q1;
    DenseMatrix q2;
    int rank = 0;
};

Result<OrthoSplit> qr_orthonormal_split(const DenseMatrix& cols);

struct LuFactors {
    DenseMatrix lu;
    std::vector<int> perm;
};

Result<LuFactors> lu_factor(DenseMatrix a);
Vector lu_solve(const LuFactors& f, Vector b);

/// Solve a*x = b by LU with partial pivoting. Fails with SingularMatrix when a
/// pivot degenerates, which the hybrid driver treats as "no Newton direction".
Result<Vector> solve_dense(const DenseMatrix& a, const Vector& b);

/// Central-difference Jacobian, column j = (fn(x+h e_j) - fn(x-h e_j)) / (2h).
Result<DenseMatrix> finite_diff_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& x, double h);

}  // namespace scd
