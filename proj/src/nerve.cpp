#include "dgnerve/nerve.hpp"

#include <algorithm>
#include <stdexcept>

namespace dgn {

namespace {

bool subset_of(const Simplex& a, const Simplex& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

void all_nonempty_subsets(const Simplex& s, std::vector<Simplex>& out) {
    const std::size_t n = s.size();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        Simplex sub;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) sub.push_back(s[i]);
        out.push_back(sub);
    }
}

}  // namespace

Nerve Nerve::build(const CoverDescription& cover) {
    if (cover.open_names.empty()) throw std::invalid_argument("nerve: cover needs at least one open");
    Nerve n;
    n.num_opens_ = static_cast<int>(cover.open_names.size());
    n.names_ = cover.open_names;

    std::set<Simplex> simps;
    if (cover.all_nonempty) {
        Simplex full(n.num_opens_);
        for (int i = 0; i < n.num_opens_; ++i) full[i] = i;
        std::vector<Simplex> subs;
        all_nonempty_subsets(full, subs);
        simps.insert(subs.begin(), subs.end());
    } else {
        for (const Simplex& s : cover.nonempty) {
            if (s.empty()) throw std::invalid_argument("nerve: empty intersection listed");
            if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end())
                throw std::invalid_argument("nerve: intersections must be sorted duplicate-free index sets");
            for (int i : s)
                if (i < 0 || i >= n.num_opens_) throw std::invalid_argument("nerve: open index out of range");
            simps.insert(s);
        }
        for (int i = 0; i < n.num_opens_; ++i) {
            Simplex singleton{i};
            if (!simps.count(singleton))
                throw std::invalid_argument("nerve: singleton " + cover.open_names[i] + " missing");
        }
        for (const Simplex& s : simps) {
            std::vector<Simplex> subs;
            all_nonempty_subsets(s, subs);
            for (const Simplex& sub : subs)
                if (!simps.count(sub))
                    throw std::invalid_argument("nerve: intersection data not downward closed");
        }
    }

    n.simplices_.assign(simps.begin(), simps.end());
    std::sort(n.simplices_.begin(), n.simplices_.end(), [](const Simplex& a, const Simplex& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    for (int i = 0; i < static_cast<int>(n.simplices_.size()); ++i) n.index_[n.simplices_[i]] = i;
    return n;
}

int Nerve::index_of(const Simplex& s) const {
    auto it = index_.find(s);
    return it == index_.end() ? -1 : it->second;
}

int Nerve::max_deg() const {
    int d = 0;
    for (int i = 0; i < size(); ++i) d = std::max(d, deg(i));
    return d;
}

bool Nerve::leq(int a, int b) const { return subset_of(simplices_[a], simplices_[b]); }

std::vector<int> Nerve::strict_subfaces(int idx) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (i != idx && leq(i, idx)) out.push_back(i);
    return out;
}

std::vector<int> Nerve::opens_above(int idx) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (leq(idx, i)) out.push_back(i);
    return out;
}

std::vector<int> Nerve::all_indices() const {
    std::vector<int> out(size());
    for (int i = 0; i < size(); ++i) out[i] = i;
    return out;
}

std::vector<std::pair<int, int>> Nerve::hasse_pairs(const std::vector<int>& subset) const {
    std::vector<std::pair<int, int>> out;
    for (int a : subset)
        for (int b : subset)
            if (a != b && leq(a, b) && deg(b) == deg(a) + 1) out.emplace_back(a, b);
    return out;
}

std::vector<std::pair<int, int>> Nerve::comparable_pairs(const std::vector<int>& subset) const {
    std::vector<std::pair<int, int>> out;
    for (int a : subset)
        for (int b : subset)
            if (a != b && leq(a, b)) out.emplace_back(a, b);
    return out;
}

namespace {

void tuples_rec(const Nerve& n, int level, Tuple& cur, std::vector<Tuple>& out) {
    if (static_cast<int>(cur.size()) == level + 1) {
        if (n.contains(underlying_simplex(cur))) out.push_back(cur);
        return;
    }
    for (int j = 0; j < n.num_opens(); ++j) {
        cur.push_back(j);
        // prune: partial underlying set must already be a simplex
        if (n.contains(underlying_simplex(cur))) tuples_rec(n, level, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<Tuple> ordered_nerve(const Nerve& n, int level) {
    if (level < 0) throw std::invalid_argument("ordered_nerve: level must be >= 0");
    std::vector<Tuple> out;
    Tuple cur;
    tuples_rec(n, level, cur, out);
    return out;
}

std::vector<Tuple> increasing_tuples(const Nerve& n, int level) {
    std::vector<Tuple> out;
    for (const Simplex& s : n.simplices())
        if (static_cast<int>(s.size()) == level + 1) out.push_back(s);
    std::sort(out.begin(), out.end());
    return out;
}

Simplex underlying_simplex(const Tuple& t) {
    Simplex s(t);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

std::vector<int> delta_map(int k, int n) {
    if (k < 0 || k > n + 1) throw std::invalid_argument("delta_map: k out of range");
    std::vector<int> f(n + 1);
    for (int p = 0; p <= n; ++p) f[p] = p < k ? p : p + 1;
    return f;
}

Tuple coface_reindex(const std::vector<int>& f, const Tuple& t) {
    for (std::size_t i = 0; i + 1 < f.size(); ++i)
        if (f[i] > f[i + 1]) throw std::invalid_argument("coface_reindex: map not monotone");
    Tuple out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] < 0 || f[i] >= static_cast<int>(t.size()))
            throw std::invalid_argument("coface_reindex: map value out of range");
        out[i] = t[f[i]];
    }
    return out;
}

SimplicialChainComplex chain_complex(const Simplex& s, const Nerve& n) {
    if (!n.contains(s)) throw std::invalid_argument("chain_complex: simplex not in nerve");
    SimplicialChainComplex c;
    c.simplex = s;
    const int top = static_cast<int>(s.size()) - 1;
    c.faces.resize(top + 1);
    std::vector<Simplex> subs;
    all_nonempty_subsets(s, subs);
    for (const Simplex& f : subs) c.faces[f.size() - 1].push_back(f);
    for (auto& level : c.faces) std::sort(level.begin(), level.end());

    c.boundary.resize(top + 1);
    for (int r = 1; r <= top; ++r) {
        const auto& src = c.faces[r];
        const auto& dst = c.faces[r - 1];
        std::map<Simplex, int> dst_idx;
        for (int i = 0; i < static_cast<int>(dst.size()); ++i) dst_idx[dst[i]] = i;
        ZMat b(dst.size(), std::vector<Z>(src.size(), 0));
        for (int j = 0; j < static_cast<int>(src.size()); ++j) {
            const Simplex& f = src[j];
            for (std::size_t v = 0; v < f.size(); ++v) {
                Simplex g = f;
                g.erase(g.begin() + static_cast<long>(v));
                b[dst_idx.at(g)][j] = (v % 2 == 0) ? 1 : -1;
            }
        }
        c.boundary[r] = std::move(b);
    }
    return c;
}

int SimplicialChainComplex::rank(int r) const {
    if (r < 0 || r > top_degree()) return 0;
    return static_cast<int>(faces[r].size());
}

bool chain_homology_is_point(const SimplicialChainComplex& c) {
    const int top = c.top_degree();
    std::vector<std::size_t> bd_rank(top + 2, 0);
    std::vector<bool> torsion_free(top + 2, true);
    for (int r = 1; r <= top; ++r) {
        SmithForm sf = smith_normal_form(c.boundary[r]);
        bd_rank[r] = sf.rank;
        for (const Z& d : sf.diag)
            if (d != 1) torsion_free[r] = false;
    }
    for (int r = 0; r <= top; ++r) {
        std::size_t ker = static_cast<std::size_t>(c.rank(r)) - bd_rank[r == 0 ? 0 : r];
        if (r == 0) ker = static_cast<std::size_t>(c.rank(0));  // no boundary out of degree 0
        std::size_t im = r + 1 <= top ? bd_rank[r + 1] : 0;
        std::size_t h = ker - im;
        std::size_t expected = (r == 0) ? 1 : 0;
        if (h != expected) return false;
        if (r + 1 <= top && !torsion_free[r + 1]) return false;
    }
    return true;
}

}  // namespace dgn
