#pragma once
// Dense exact linear algebra over the rationals (GMP) plus integer Smith
// normal form. Matrices here are small (piece-level blocks), so plain
// Gauss-Jordan with exact arithmetic is the right tool.

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dgn {

using Q = mpq_class;
using Z = mpz_class;

using QVec = std::vector<Q>;

class QMat {
public:
    QMat() : rows_(0), cols_(0) {}
    QMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    static QMat identity(std::size_t n);
    static QMat from_rows(const std::vector<QVec>& rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Q& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const Q& at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    QVec row(std::size_t i) const;
    QVec col(std::size_t j) const;
    void append_row(const QVec& r);

    bool is_zero() const;
    bool operator==(const QMat& other) const;
    bool operator!=(const QMat& other) const { return !(*this == other); }

    QMat operator*(const QMat& other) const;
    QVec operator*(const QVec& v) const;
    QMat operator+(const QMat& other) const;
    QMat operator-(const QMat& other) const;
    QMat scaled(const Q& c) const;
    QMat transposed() const;

    // [this | other] side by side; row counts must match.
    QMat augmented(const QMat& other) const;
    // this on top of other; column counts must match.
    QMat stacked(const QMat& other) const;

    std::string str() const;

private:
    std::size_t rows_, cols_;
    std::vector<Q> a_;
};

struct Rref {
    QMat mat;                       // reduced row echelon form, zero rows dropped
    std::vector<std::size_t> pivots;  // pivot column per kept row
    std::size_t rank = 0;
};

Rref rref(QMat m);
std::size_t rank(const QMat& m);

// Columns form a basis of {x : Mx = 0}.
QMat kernel_basis(const QMat& m);

// One solution of Ax = b, if any.
std::optional<QVec> solve(const QMat& a, const QVec& b);

// Solutions of A X = B columnwise; nullopt if any column is unsolvable.
std::optional<QMat> solve_many(const QMat& a, const QMat& b);

QMat inverse(const QMat& m);  // throws std::runtime_error if singular

QVec vec_add(const QVec& a, const QVec& b);
QVec vec_sub(const QVec& a, const QVec& b);
QVec vec_scaled(const QVec& a, const Q& c);
bool vec_is_zero(const QVec& a);

// ---- integers ----

using ZMat = std::vector<std::vector<Z>>;

struct SmithForm {
    std::vector<Z> diag;  // nonzero invariant factors d_1 | d_2 | ...
    std::size_t rank = 0;
};

SmithForm smith_normal_form(ZMat m);

}  // namespace dgn
