#include "dgnerve/linalg.hpp"

#include <sstream>
#include <stdexcept>

namespace dgn {

QMat QMat::identity(std::size_t n) {
    QMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

QMat QMat::from_rows(const std::vector<QVec>& rows, std::size_t cols) {
    QMat m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw std::invalid_argument("QMat::from_rows: ragged row");
        for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
}

QVec QMat::row(std::size_t i) const {
    QVec r(cols_);
    for (std::size_t j = 0; j < cols_; ++j) r[j] = at(i, j);
    return r;
}

QVec QMat::col(std::size_t j) const {
    QVec c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = at(i, j);
    return c;
}

void QMat::append_row(const QVec& r) {
    if (cols_ == 0 && rows_ == 0) cols_ = r.size();
    if (r.size() != cols_) throw std::invalid_argument("QMat::append_row: size mismatch");
    a_.insert(a_.end(), r.begin(), r.end());
    ++rows_;
}

bool QMat::is_zero() const {
    for (const Q& x : a_)
        if (x != 0) return false;
    return true;
}

bool QMat::operator==(const QMat& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && a_ == other.a_;
}

QMat QMat::operator*(const QMat& other) const {
    if (cols_ != other.rows_) throw std::invalid_argument("QMat::operator*: shape mismatch");
    QMat r(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const Q& x = at(i, k);
            if (x == 0) continue;
            for (std::size_t j = 0; j < other.cols_; ++j) {
                const Q& y = other.at(k, j);
                if (y != 0) r.at(i, j) += x * y;
            }
        }
    return r;
}

QVec QMat::operator*(const QVec& v) const {
    if (cols_ != v.size()) throw std::invalid_argument("QMat::operator*: vector size mismatch");
    QVec r(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) {
            const Q& x = at(i, j);
            if (x != 0 && v[j] != 0) r[i] += x * v[j];
        }
    return r;
}

QMat QMat::operator+(const QMat& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("QMat::operator+: shape mismatch");
    QMat r(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] + other.a_[i];
    return r;
}

QMat QMat::operator-(const QMat& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("QMat::operator-: shape mismatch");
    QMat r(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - other.a_[i];
    return r;
}

QMat QMat::scaled(const Q& c) const {
    QMat r(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] * c;
    return r;
}

QMat QMat::transposed() const {
    QMat r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
}

QMat QMat::augmented(const QMat& other) const {
    if (rows_ != other.rows_) throw std::invalid_argument("QMat::augmented: row mismatch");
    QMat r(rows_, cols_ + other.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
        for (std::size_t j = 0; j < other.cols_; ++j) r.at(i, cols_ + j) = other.at(i, j);
    }
    return r;
}

QMat QMat::stacked(const QMat& other) const {
    if (cols_ != other.cols_ && rows_ != 0 && other.rows_ != 0)
        throw std::invalid_argument("QMat::stacked: column mismatch");
    std::size_t c = rows_ == 0 ? other.cols_ : cols_;
    QMat r(rows_ + other.rows_, c);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
    for (std::size_t i = 0; i < other.rows_; ++i)
        for (std::size_t j = 0; j < other.cols_; ++j) r.at(rows_ + i, j) = other.at(i, j);
    return r;
}

std::string QMat::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < rows_; ++i) {
        os << "[ ";
        for (std::size_t j = 0; j < cols_; ++j) os << at(i, j).get_str() << " ";
        os << "]\n";
    }
    return os.str();
}

Rref rref(QMat m) {
    Rref out;
    std::size_t r = 0;
    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<std::size_t> pivots;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && m.at(p, c) == 0) ++p;
        if (p == rows) continue;
        if (p != r)
            for (std::size_t j = c; j < cols; ++j) swap(m.at(p, j), m.at(r, j));
        Q inv = 1 / m.at(r, c);
        for (std::size_t j = c; j < cols; ++j) m.at(r, j) *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            const Q f = m.at(i, c);
            if (f == 0) continue;
            for (std::size_t j = c; j < cols; ++j) m.at(i, j) -= f * m.at(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    out.rank = r;
    out.pivots = pivots;
    out.mat = QMat(r, cols);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < cols; ++j) out.mat.at(i, j) = m.at(i, j);
    return out;
}

std::size_t rank(const QMat& m) { return rref(m).rank; }

QMat kernel_basis(const QMat& m) {
    Rref r = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (std::size_t p : r.pivots) is_pivot[p] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t j = 0; j < m.cols(); ++j)
        if (!is_pivot[j]) free_cols.push_back(j);
    QMat k(m.cols(), free_cols.size());
    for (std::size_t t = 0; t < free_cols.size(); ++t) {
        std::size_t f = free_cols[t];
        k.at(f, t) = 1;
        for (std::size_t i = 0; i < r.rank; ++i) k.at(r.pivots[i], t) = -r.mat.at(i, f);
    }
    return k;
}

std::optional<QVec> solve(const QMat& a, const QVec& b) {
    QMat bm(b.size(), 1);
    for (std::size_t i = 0; i < b.size(); ++i) bm.at(i, 0) = b[i];
    auto x = solve_many(a, bm);
    if (!x) return std::nullopt;
    return x->col(0);
}

std::optional<QMat> solve_many(const QMat& a, const QMat& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("solve_many: row mismatch");
    Rref r = rref(a.augmented(b));
    QMat x(a.cols(), b.cols());
    for (std::size_t i = 0; i < r.rank; ++i) {
        std::size_t p = r.pivots[i];
        if (p >= a.cols()) return std::nullopt;  // inconsistent row 0 = 1
        for (std::size_t j = 0; j < b.cols(); ++j) x.at(p, j) = r.mat.at(i, a.cols() + j);
    }
    return x;
}

QMat inverse(const QMat& m) {
    if (m.rows() != m.cols()) throw std::runtime_error("inverse: not square");
    Rref r = rref(m.augmented(QMat::identity(m.rows())));
    if (r.rank != m.rows()) throw std::runtime_error("inverse: singular matrix");
    QMat inv(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) inv.at(i, j) = r.mat.at(i, m.cols() + j);
    return inv;
}

QVec vec_add(const QVec& a, const QVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec_add: size mismatch");
    QVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

QVec vec_sub(const QVec& a, const QVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec_sub: size mismatch");
    QVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

QVec vec_scaled(const QVec& a, const Q& c) {
    QVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * c;
    return r;
}

bool vec_is_zero(const QVec& a) {
    for (const Q& x : a)
        if (x != 0) return false;
    return true;
}

namespace {

bool snf_find_nonzero(const ZMat& m, std::size_t s, std::size_t& oi, std::size_t& oj) {
    bool found = false;
    Z best;
    for (std::size_t i = s; i < m.size(); ++i)
        for (std::size_t j = s; j < m[i].size(); ++j) {
            if (m[i][j] == 0) continue;
            Z a = abs(m[i][j]);
            if (!found || a < best) {
                best = a;
                oi = i;
                oj = j;
                found = true;
            }
        }
    return found;
}

}  // namespace

SmithForm smith_normal_form(ZMat m) {
    SmithForm out;
    if (m.empty() || m[0].empty()) return out;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t s = 0;
    while (s < rows && s < cols) {
        std::size_t pi = s, pj = s;
        if (!snf_find_nonzero(m, s, pi, pj)) break;
        std::swap(m[pi], m[s]);
        for (std::size_t i = 0; i < rows; ++i) std::swap(m[i][pj], m[i][s]);
        bool clean = false;
        while (!clean) {
            clean = true;
            for (std::size_t i = s + 1; i < rows; ++i) {
                if (m[i][s] == 0) continue;
                Z q = m[i][s] / m[s][s];
                for (std::size_t j = s; j < cols; ++j) m[i][j] -= q * m[s][j];
                if (m[i][s] != 0) {  // remainder smaller than pivot: swap up and restart
                    std::swap(m[i], m[s]);
                    clean = false;
                }
            }
            for (std::size_t j = s + 1; j < cols; ++j) {
                if (m[s][j] == 0) continue;
                Z q = m[s][j] / m[s][s];
                for (std::size_t i = s; i < rows; ++i) m[i][j] -= q * m[i][s];
                if (m[s][j] != 0) {
                    for (std::size_t i = 0; i < rows; ++i) std::swap(m[i][j], m[i][s]);
                    clean = false;
                }
            }
        }
        ++s;
    }
    // enforce divisibility chain
    for (std::size_t i = 0; i < s; ++i)
        if (m[i][i] < 0) m[i][i] = -m[i][i];
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i + 1 < s; ++i) {
            if (m[i + 1][i + 1] % m[i][i] != 0) {
                Z g = gcd(m[i][i], m[i + 1][i + 1]);
                Z l = m[i][i] / g * m[i + 1][i + 1];
                m[i][i] = g;
                m[i + 1][i + 1] = l;
                changed = true;
            }
        }
    }
    out.rank = s;
    for (std::size_t i = 0; i < s; ++i) out.diag.push_back(m[i][i]);
    return out;
}

}  // namespace dgn
