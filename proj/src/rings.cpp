#include "dgnerve/rings.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dgn {

Multideg deg_add(const Multideg& a, const Multideg& b) {
    if (a.size() != b.size()) throw std::invalid_argument("deg_add: rank mismatch");
    Multideg r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Multideg deg_sub(const Multideg& a, const Multideg& b) {
    if (a.size() != b.size()) throw std::invalid_argument("deg_sub: rank mismatch");
    Multideg r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Multideg deg_neg(const Multideg& a) {
    Multideg r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
    return r;
}

Multideg deg_zero(int rank) { return Multideg(static_cast<std::size_t>(rank), 0); }

std::string deg_str(const Multideg& a) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
    os << ")";
    return os.str();
}

namespace {

long sup_norm(const Multideg& m) {
    long n = 0;
    for (int x : m) n = std::max(n, static_cast<long>(std::abs(x)));
    return n;
}

}  // namespace

MonomialRing::MonomialRing(int lattice_rank, std::vector<Multideg> gens, std::string name)
    : rank_(lattice_rank), gens_(std::move(gens)), name_(std::move(name)) {
    if (rank_ < 0) throw std::invalid_argument("MonomialRing: negative lattice rank");
    max_gen_norm_ = 1;
    for (const Multideg& g : gens_) {
        if (static_cast<int>(g.size()) != rank_)
            throw std::invalid_argument("MonomialRing: generator rank mismatch");
        max_gen_norm_ = std::max(max_gen_norm_, sup_norm(g));
    }
}

bool MonomialRing::contains(const Multideg& m) const {
    if (static_cast<int>(m.size()) != rank_)
        throw std::invalid_argument("MonomialRing::contains: rank mismatch");
    if (sup_norm(m) == 0) return true;
    std::lock_guard<std::mutex> lock(mu_);
    // Steinitz bound: partial sums of a reordered representation stay within
    // radius |m| + rank * max|gen|.
    long radius = sup_norm(m) + static_cast<long>(rank_) * max_gen_norm_ + 1;
    if (radius <= memo_radius_) {
        auto it = memo_.find(m);
        if (it != memo_.end()) return it->second;
        return false;  // BFS closure at larger radius already failed to reach m
    }
    // (Re)run BFS at the larger radius, caching everything reachable.
    memo_.clear();
    memo_radius_ = radius;
    std::deque<Multideg> queue;
    Multideg origin = deg_zero(rank_);
    memo_[origin] = true;
    queue.push_back(origin);
    while (!queue.empty()) {
        Multideg cur = queue.front();
        queue.pop_front();
        for (const Multideg& g : gens_) {
            Multideg nxt = deg_add(cur, g);
            if (sup_norm(nxt) > radius) continue;
            if (memo_.emplace(nxt, true).second) queue.push_back(nxt);
        }
    }
    auto it = memo_.find(m);
    return it != memo_.end();
}

bool MonomialRing::submonoid_of(const MonomialRing& other) const {
    if (rank_ != other.rank_) return false;
    for (const Multideg& g : gens_)
        if (!other.contains(g)) return false;
    return true;
}

bool MonomialRing::same_as(const MonomialRing& other) const {
    if (this == &other) return true;
    if (rank_ != other.rank_) return false;
    std::vector<Multideg> a = gens_, b = other.gens_;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

RingPtr make_ring(int lattice_rank, std::vector<Multideg> gens, std::string name) {
    return std::make_shared<MonomialRing>(lattice_rank, std::move(gens), std::move(name));
}

RingMap ring_map(RingPtr source, RingPtr target) {
    if (!source || !target) throw std::invalid_argument("ring_map: null ring");
    if (!source->submonoid_of(*target))
        throw std::invalid_argument("ring_map: source monoid is not contained in target monoid");
    return RingMap{std::move(source), std::move(target)};
}

// ---- Artin local rings ----

ArtinLocalRing ArtinLocalRing::dual_numbers() { return truncated_poly(2); }

ArtinLocalRing ArtinLocalRing::truncated_poly(int k) {
    if (k < 2) throw std::invalid_argument("truncated_poly: need k >= 2");
    ArtinLocalRing a;
    a.names_.push_back("1");
    const char* var = (k == 2) ? "eps" : "t";
    for (int i = 1; i < k; ++i) {
        std::ostringstream os;
        os << var;
        if (i > 1) os << "^" << i;
        a.names_.push_back(os.str());
    }
    int r = k - 1;
    a.table_.assign(r, std::vector<QVec>(r, QVec(static_cast<std::size_t>(k), 0)));
    for (int i = 1; i <= r; ++i)
        for (int j = 1; j <= r; ++j)
            if (i + j < k) a.table_[i - 1][j - 1][static_cast<std::size_t>(i + j)] = 1;
    a.validate_and_finish();
    return a;
}

ArtinLocalRing ArtinLocalRing::from_table(std::vector<std::string> names,
                                          std::vector<std::vector<QVec>> table) {
    ArtinLocalRing a;
    a.names_ = std::move(names);
    a.table_ = std::move(table);
    a.validate_and_finish();
    return a;
}

QVec ArtinLocalRing::product(int i, int j) const {
    const std::size_t n = names_.size();
    QVec r(n, 0);
    if (i == 0) {
        r[static_cast<std::size_t>(j)] = 1;
        return r;
    }
    if (j == 0) {
        r[static_cast<std::size_t>(i)] = 1;
        return r;
    }
    return table_[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
}

QVec ArtinLocalRing::mul(const QVec& a, const QVec& b) const {
    const std::size_t n = names_.size();
    if (a.size() != n || b.size() != n) throw std::invalid_argument("ArtinLocalRing::mul: size mismatch");
    QVec r(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (b[j] == 0) continue;
            QVec p = product(static_cast<int>(i), static_cast<int>(j));
            Q c = a[i] * b[j];
            for (std::size_t k = 0; k < n; ++k)
                if (p[k] != 0) r[k] += c * p[k];
        }
    }
    return r;
}

void ArtinLocalRing::validate_and_finish() {
    const std::size_t n = names_.size();
    if (n < 1) throw std::invalid_argument("ArtinLocalRing: empty basis");
    const std::size_t r = n - 1;
    if (table_.size() != r) throw std::invalid_argument("ArtinLocalRing: table size mismatch");
    for (const auto& row : table_) {
        if (row.size() != r) throw std::invalid_argument("ArtinLocalRing: table size mismatch");
        for (const QVec& v : row)
            if (v.size() != n) throw std::invalid_argument("ArtinLocalRing: product vector size mismatch");
    }
    // products of maximal-ideal elements stay in the maximal ideal
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            if (table_[i][j][0] != 0)
                throw std::invalid_argument("ArtinLocalRing: m_A is not an ideal (unit component in product)");
    // commutativity
    for (int i = 1; i <= static_cast<int>(r); ++i)
        for (int j = 1; j <= static_cast<int>(r); ++j)
            if (product(i, j) != product(j, i))
                throw std::invalid_argument("ArtinLocalRing: product table not commutative");
    // associativity on basis triples
    for (int i = 0; i < static_cast<int>(n); ++i)
        for (int j = 0; j < static_cast<int>(n); ++j)
            for (int k = 0; k < static_cast<int>(n); ++k) {
                QVec left = mul(product(i, j), [&] {
                    QVec ek(n, 0);
                    ek[static_cast<std::size_t>(k)] = 1;
                    return ek;
                }());
                QVec right = mul(
                    [&] {
                        QVec ei(n, 0);
                        ei[static_cast<std::size_t>(i)] = 1;
                        return ei;
                    }(),
                    product(j, k));
                if (left != right) throw std::invalid_argument("ArtinLocalRing: product table not associative");
            }
    // nilpotency: iterate m^k as subspaces of the maximal ideal
    orders_.assign(n, 0);
    if (r == 0) {
        nu_ = 1;
        return;
    }
    // span of m^k over coordinates e_1..e_r, starting with m itself
    QMat span(r, r);
    for (std::size_t i = 0; i < r; ++i) span.at(i, i) = 1;
    int k = 1;
    while (true) {
        Rref red = rref(span);
        if (red.rank == 0) break;
        // record the filtration order of each basis element of m_A
        for (std::size_t i = 0; i < r; ++i) {
            QVec ei(r, 0);
            ei[i] = 1;
            if (solve(red.mat.transposed(), ei).has_value()) orders_[i + 1] = k;
        }
        if (k > static_cast<int>(n) + 1)
            throw std::invalid_argument("ArtinLocalRing: maximal ideal is not nilpotent");
        // span of m^{k+1} = span{ e_i * v : v in basis of m^k, i = 1..r }
        QMat next(0, r);
        for (std::size_t row = 0; row < red.rank; ++row) {
            QVec v(n, 0);
            for (std::size_t j = 0; j < r; ++j) v[j + 1] = red.mat.at(row, j);
            for (int i = 1; i <= static_cast<int>(r); ++i) {
                QVec ei(n, 0);
                ei[static_cast<std::size_t>(i)] = 1;
                QVec p = mul(ei, v);
                QVec coords(r);
                for (std::size_t j = 0; j < r; ++j) coords[j] = p[j + 1];
                next.append_row(coords);
            }
        }
        span = next;
        ++k;
    }
    nu_ = k;
}

ArtinElem ArtinElem::zero(const ArtinLocalRing& a) {
    return ArtinElem{&a, QVec(static_cast<std::size_t>(a.dim()), 0)};
}

ArtinElem ArtinElem::one(const ArtinLocalRing& a) {
    ArtinElem e = zero(a);
    e.c[0] = 1;
    return e;
}

ArtinElem ArtinElem::basis(const ArtinLocalRing& a, int i) {
    ArtinElem e = zero(a);
    e.c[static_cast<std::size_t>(i)] = 1;
    return e;
}

ArtinElem ArtinElem::operator+(const ArtinElem& o) const { return ArtinElem{ring, vec_add(c, o.c)}; }
ArtinElem ArtinElem::operator-(const ArtinElem& o) const { return ArtinElem{ring, vec_sub(c, o.c)}; }
ArtinElem ArtinElem::operator*(const ArtinElem& o) const { return ArtinElem{ring, ring->mul(c, o.c)}; }
ArtinElem ArtinElem::scaled(const Q& q) const { return ArtinElem{ring, vec_scaled(c, q)}; }

}  // namespace dgn
