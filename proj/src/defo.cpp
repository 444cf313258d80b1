#include "dgnerve/defo.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dgn {

// ---- DGLAElem ----

DGLAElem DGLAElem::zero(const ArtinLocalRing& a, int degree) { return DGLAElem{&a, degree, {}}; }

DGLAElem DGLAElem::single(const ArtinLocalRing& a, int artin_idx, HomElement x) {
    if (artin_idx < 1 || artin_idx >= a.dim()) throw std::invalid_argument("DGLAElem: index outside m_A");
    DGLAElem e{&a, x.p, {}};
    e.terms.emplace_back(artin_idx, std::move(x));
    return e;
}

DGLAElem DGLAElem::operator+(const DGLAElem& o) const {
    DGLAElem e = *this;
    e.terms.insert(e.terms.end(), o.terms.begin(), o.terms.end());
    return e.normalized();
}

DGLAElem DGLAElem::operator-(const DGLAElem& o) const { return *this + o.scaled(-1); }

DGLAElem DGLAElem::scaled(const Q& c) const {
    DGLAElem e = *this;
    for (auto& [i, x] : e.terms) x = x.scaled(c);
    return e;
}

DGLAElem DGLAElem::normalized() const {
    DGLAElem e{A, degree, {}};
    std::map<std::tuple<int, int, Multideg>, HomElement> acc;
    for (const auto& [i, x] : terms) {
        auto key = std::make_tuple(i, x.p, x.w);
        auto it = acc.find(key);
        if (it == acc.end())
            acc.emplace(key, x);
        else
            it->second = it->second + x;
    }
    for (auto& [key, x] : acc)
        if (!x.is_zero()) e.terms.emplace_back(std::get<0>(key), std::move(x));
    return e;
}

bool DGLAElem::is_zero() const {
    for (const auto& [i, x] : terms)
        if (!x.is_zero()) return false;
    return true;
}

bool DGLAElem::equals(const DGLAElem& o) const { return (*this - o).is_zero(); }

DGLAElem d_elem(const DGLAElem& x) {
    DGLAElem e{x.A, x.degree + 1, {}};
    for (const auto& [i, t] : x.terms) e.terms.emplace_back(i, t.differential());
    return e.normalized();
}

DGLAElem bracket_elem(const DGLAElem& x, const DGLAElem& y) {
    DGLAElem e{x.A, x.degree + y.degree, {}};
    for (const auto& [i, a] : x.terms)
        for (const auto& [j, b] : y.terms) {
            QVec prod = x.A->product(i, j);
            HomElement br = HomElement::bracket(a, b);
            if (br.is_zero()) continue;
            for (std::size_t k = 1; k < prod.size(); ++k)
                if (prod[k] != 0) e.terms.emplace_back(static_cast<int>(k), br.scaled(prod[k]));
        }
    return e.normalized();
}

DGLAElem bch(const DGLAElem& x, const DGLAElem& y) {
    const int nu = x.A->nilpotency_index();
    if (nu > 5) throw std::invalid_argument("bch: nilpotency index > 5 not supported");
    DGLAElem z = x + y;
    if (nu >= 3) z = z + bracket_elem(x, y).scaled(Q(1, 2));
    if (nu >= 4) {
        DGLAElem xy = bracket_elem(x, y);
        z = z + bracket_elem(x, xy).scaled(Q(1, 12));
        z = z - bracket_elem(y, xy).scaled(Q(1, 12));
    }
    if (nu >= 5) {
        DGLAElem xxy = bracket_elem(x, bracket_elem(x, y));
        z = z - bracket_elem(y, xxy).scaled(Q(1, 24));
    }
    return z.normalized();
}

DGLAElem gauge_act(const DGLAElem& a, const DGLAElem& l) {
    if (a.degree != 0) throw std::invalid_argument("gauge_act: gauge element must have degree 0");
    DGLAElem z = bracket_elem(a, l) - d_elem(a);  // [a,l] - ∂a
    DGLAElem out = l;
    Q fact = 1;
    int k = 0;
    while (!z.is_zero()) {
        fact *= (k + 1);
        out = out + z.scaled(1 / fact);
        z = bracket_elem(a, z);
        ++k;
        if (k > a.A->dim() + 2) throw std::logic_error("gauge_act: series did not terminate");
    }
    return out.normalized();
}

bool mc_check(const DGLAElem& eta) {
    if (eta.degree != 1) throw std::invalid_argument("mc_check: element must have degree 1");
    return (d_elem(eta) + bracket_elem(eta, eta).scaled(Q(1, 2))).is_zero();
}

// ---- operator model ----

namespace {

// A-valued element of Q_γ ⊗ A spread over graded pieces
struct AState {
    const ArtinLocalRing* A = nullptr;
    std::map<std::pair<int, Multideg>, std::vector<ArtinElem>> parts;

    void accum(int i, const Multideg& m, std::size_t idx, const ArtinElem& v) {
        auto key = std::make_pair(i, m);
        auto it = parts.find(key);
        if (it == parts.end()) return;  // caller sizes parts first
        it->second[idx] = it->second[idx] + v;
    }
};

AState astate_zero(const ArtinLocalRing& a) { return AState{&a, {}}; }

void astate_ensure(AState& s, const GradedDGModule& mod, int i, const Multideg& m) {
    auto key = std::make_pair(i, m);
    if (!s.parts.count(key))
        s.parts[key] = std::vector<ArtinElem>(static_cast<std::size_t>(mod.piece_dim(i, m)), ArtinElem::zero(*s.A));
}

AState astate_add(const AState& a, const AState& b) {
    AState out = a;
    for (const auto& [key, vec] : b.parts) {
        auto it = out.parts.find(key);
        if (it == out.parts.end()) {
            out.parts[key] = vec;
        } else {
            for (std::size_t t = 0; t < vec.size(); ++t) it->second[t] = it->second[t] + vec[t];
        }
    }
    return out;
}

AState astate_scale_q(const AState& a, const Q& c) {
    AState out = a;
    for (auto& [key, vec] : out.parts)
        for (ArtinElem& x : vec) x = x.scaled(c);
    return out;
}

bool astate_is_zero(const AState& a) {
    for (const auto& [key, vec] : a.parts)
        for (const ArtinElem& x : vec)
            if (!x.is_zero()) return false;
    return true;
}

bool astate_equal(const AState& a, const AState& b) { return astate_is_zero(astate_add(a, astate_scale_q(b, -1))); }

// rational matrix acting on an ArtinElem vector
std::vector<ArtinElem> mat_apply_artin(const QMat& m, const std::vector<ArtinElem>& v, const ArtinLocalRing& a) {
    std::vector<ArtinElem> out(m.rows(), ArtinElem::zero(a));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const Q& x = m.at(r, c);
            if (x != 0 && !v[c].is_zero()) out[r] = out[r] + v[c].scaled(x);
        }
    return out;
}

// differential of Q_γ applied A-linearly
AState apply_diff(const GradedDGModule& mod, const AState& s) {
    AState out = astate_zero(*s.A);
    for (const auto& [key, vec] : s.parts) {
        auto [i, m] = key;
        QMat d = mod.diff_matrix(i, m);
        if (d.rows() == 0) continue;
        auto img = mat_apply_artin(d, vec, *s.A);
        bool nz = false;
        for (const ArtinElem& x : img)
            if (!x.is_zero()) nz = true;
        if (!nz) continue;
        astate_ensure(out, mod, i + 1, m);
        auto& dst = out.parts[{i + 1, m}];
        for (std::size_t t = 0; t < img.size(); ++t) dst[t] = dst[t] + img[t];
    }
    return out;
}

// one End-family Hom element applied A-linearly at component k of its S
AState apply_hom(const HomElement& x, std::size_t k, const AState& s, const ArtinElem& coeff) {
    AState out = astate_zero(*s.A);
    const GradedDGModule& mod = *x.F->module(x.S[k]);
    for (const auto& [key, vec] : s.parts) {
        auto [i, m] = key;
        int sd = mod.piece_dim(i, m);
        if (sd == 0) continue;
        // columns of the piece matrix of x
        QMat pm(static_cast<std::size_t>(x.G->module(x.S[k])->piece_dim(i + x.p, deg_add(m, x.w))),
                static_cast<std::size_t>(sd));
        for (int c = 0; c < sd; ++c) {
            QVec unit(static_cast<std::size_t>(sd), 0);
            unit[static_cast<std::size_t>(c)] = 1;
            QVec col = x.apply(k, i, m, unit);
            for (std::size_t r = 0; r < col.size(); ++r) pm.at(r, static_cast<std::size_t>(c)) = col[r];
        }
        auto img = mat_apply_artin(pm, vec, *s.A);
        bool nz = false;
        for (ArtinElem& e : img) {
            e = e * coeff;
            if (!e.is_zero()) nz = true;
        }
        if (!nz) continue;
        astate_ensure(out, *x.G->module(x.S[k]), i + x.p, deg_add(m, x.w));
        auto& dst = out.parts[{i + x.p, deg_add(m, x.w)}];
        for (std::size_t t = 0; t < img.size(); ++t) dst[t] = dst[t] + img[t];
    }
    return out;
}

AState apply_dgla(const DGLAElem& l, std::size_t k, const AState& s) {
    AState out = astate_zero(*s.A);
    for (const auto& [i, x] : l.terms) out = astate_add(out, apply_hom(x, k, s, ArtinElem::basis(*l.A, i)));
    return out;
}

AState apply_exp(const DGLAElem& a, std::size_t k, const AState& s) {
    AState acc = s;
    AState z = s;
    Q fact = 1;
    for (int t = 1; t <= a.A->dim() + 2; ++t) {
        z = apply_dgla(a, k, z);
        if (astate_is_zero(z)) break;
        fact *= t;
        acc = astate_add(acc, astate_scale_q(z, 1 / fact));
    }
    return acc;
}

}  // namespace

bool gauge_conjugation_matches(const DGLAElem& a, const DGLAElem& l) {
    DGLAElem lprime = gauge_act(a, l);
    const HomElement* probe = nullptr;
    if (!a.terms.empty()) probe = &a.terms.front().second;
    else if (!l.terms.empty()) probe = &l.terms.front().second;
    if (!probe) return true;
    const auto& S = probe->S;
    const AModulePtr& q = probe->F;
    for (std::size_t k = 0; k < S.size(); ++k) {
        const GradedDGModule& mod = *q->module(S[k]);
        for (auto [i, j] : gen_index(mod)) {
            AState s0 = astate_zero(*a.A);
            astate_ensure(s0, mod, i, mod.gens(i)[j]);
            const Piece& pc = mod.piece(i, mod.gens(i)[j]);
            for (std::size_t t = 0; t < pc.free_cols.size(); ++t) {
                QVec amb(pc.amb.size(), 0);
                for (std::size_t r = 0; r < pc.amb.size(); ++r)
                    if (pc.amb[r] == static_cast<int>(j)) amb[r] = 1;
                QVec coords = pc.coords(pc.canon(amb));
                for (std::size_t r = 0; r < coords.size(); ++r)
                    if (coords[r] != 0)
                        s0.parts[{i, mod.gens(i)[j]}][r] = ArtinElem::one(*a.A).scaled(coords[r]);
                break;
            }
            // e^a (d + l) e^{-a} s0 - d s0
            AState inner = apply_exp(a.scaled(-1), k, s0);
            AState mid = astate_add(apply_diff(mod, inner), apply_dgla(l, k, inner));
            AState lhs = astate_add(apply_exp(a, k, mid), astate_scale_q(apply_diff(mod, s0), -1));
            AState rhs = apply_dgla(lprime, k, s0);
            if (!astate_equal(lhs, rhs)) return false;
        }
    }
    return true;
}

DeformResult deform(const AModulePtr& q, const DGLAElem& eta) {
    if (!mc_check(eta)) throw std::invalid_argument("deform: element fails the Maurer-Cartan equation");
    DeformResult res;
    res.square_zero = true;
    res.structure_maps_compatible = true;
    res.flat = true;  // Q_α ⊗ A is free over A by construction
    const std::vector<int>& S = eta.terms.empty() ? q->nerve().all_indices() : eta.terms.front().second.S;
    auto dplus = [&](std::size_t k, const GradedDGModule& mod, const AState& s) {
        return astate_add(apply_diff(mod, s), apply_dgla(eta, k, s));
    };
    for (std::size_t k = 0; k < S.size(); ++k) {
        const GradedDGModule& mod = *q->module(S[k]);
        for (auto [i, j] : gen_index(mod)) {
            AState s0 = astate_zero(*eta.A);
            astate_ensure(s0, mod, i, mod.gens(i)[j]);
            const Piece& pc = mod.piece(i, mod.gens(i)[j]);
            QVec amb(pc.amb.size(), 0);
            for (std::size_t r = 0; r < pc.amb.size(); ++r)
                if (pc.amb[r] == static_cast<int>(j)) amb[r] = 1;
            QVec coords = pc.coords(pc.canon(amb));
            for (std::size_t r = 0; r < coords.size(); ++r)
                if (coords[r] != 0) s0.parts[{i, mod.gens(i)[j]}][r] = ArtinElem::one(*eta.A).scaled(coords[r]);
            if (!astate_is_zero(dplus(k, mod, dplus(k, mod, s0)))) res.square_zero = false;
        }
    }
    // structure maps stay chain maps for the deformed differentials
    const Nerve& n = q->nerve();
    for (auto [ga, gb] : n.hasse_pairs(S)) {
        std::size_t ka = static_cast<std::size_t>(std::lower_bound(S.begin(), S.end(), ga) - S.begin());
        std::size_t kb = static_cast<std::size_t>(std::lower_bound(S.begin(), S.end(), gb) - S.begin());
        const GradedDGModule& ma = *q->module(ga);
        const GradedDGModule& mb = *q->module(gb);
        const ModMap& qm = q->map(ga, gb);
        auto push = [&](const AState& s) {
            AState out = astate_zero(*eta.A);
            for (const auto& [key, vec] : s.parts) {
                auto [i, m] = key;
                QMat pm = qm.piece_matrix(i, m);
                auto img = mat_apply_artin(pm, vec, *eta.A);
                astate_ensure(out, mb, i, m);
                auto& dst = out.parts[{i, m}];
                for (std::size_t t = 0; t < img.size(); ++t) dst[t] = dst[t] + img[t];
            }
            return out;
        };
        for (auto [i, j] : gen_index(ma)) {
            AState s0 = astate_zero(*eta.A);
            astate_ensure(s0, ma, i, ma.gens(i)[j]);
            const Piece& pc = ma.piece(i, ma.gens(i)[j]);
            QVec amb(pc.amb.size(), 0);
            for (std::size_t r = 0; r < pc.amb.size(); ++r)
                if (pc.amb[r] == static_cast<int>(j)) amb[r] = 1;
            QVec coords = pc.coords(pc.canon(amb));
            for (std::size_t r = 0; r < coords.size(); ++r)
                if (coords[r] != 0) s0.parts[{i, ma.gens(i)[j]}][r] = ArtinElem::one(*eta.A).scaled(coords[r]);
            AState lhs = push(astate_add(apply_diff(ma, s0), apply_dgla(eta, ka, s0)));
            AState s1 = push(s0);
            AState rhs = astate_add(apply_diff(mb, s1), apply_dgla(eta, kb, s1));
            if (!astate_equal(lhs, rhs)) res.structure_maps_compatible = false;
        }
    }
    return res;
}

// ---- semicosimplicial elements ----

bool ScElem::is_zero() const {
    for (const auto& [t, e] : comps)
        if (!e.is_zero()) return false;
    return true;
}

ScElem sc_zero(const SemicosimplicialDGLA& v, const ArtinLocalRing& a, int level, int degree) {
    return ScElem{&v, &a, level, degree, {}};
}

ScElem sc_add(const ScElem& x, const ScElem& y) {
    if (x.level != y.level) throw std::invalid_argument("sc_add: level mismatch");
    ScElem out = x;
    for (const auto& [t, e] : y.comps) {
        auto it = out.comps.find(t);
        if (it == out.comps.end())
            out.comps[t] = e;
        else
            it->second = it->second + e;
    }
    return out;
}

ScElem sc_scale(const ScElem& x, const Q& c) {
    ScElem out = x;
    for (auto& [t, e] : out.comps) e = e.scaled(c);
    return out;
}

ScElem sc_diff(const ScElem& x) {
    ScElem out = sc_zero(*x.v, *x.A, x.level, x.degree + 1);
    for (const auto& [t, e] : x.comps) out.comps[t] = d_elem(e);
    return out;
}

ScElem sc_coface(int k, const ScElem& x) {
    const SemicosimplicialDGLA& v = *x.v;
    int n = x.level;
    auto src = v.tuples(n);
    auto dst = v.tuples(n + 1);
    std::map<Tuple, std::size_t> src_idx;
    for (std::size_t i = 0; i < src.size(); ++i) src_idx[src[i]] = i;
    auto f = delta_map(k, n);
    ScElem out = sc_zero(v, *x.A, n + 1, x.degree);
    for (std::size_t ti = 0; ti < dst.size(); ++ti) {
        Tuple h = coface_reindex(f, dst[ti]);
        auto it = x.comps.find(src_idx.at(h));
        if (it == x.comps.end() || it->second.is_zero()) continue;
        int sa = v.nerve().index_of(underlying_simplex(h));
        int sb = v.nerve().index_of(underlying_simplex(dst[ti]));
        const HomSystem& from = *v.component(sa);
        const HomSystem& to = *v.component(sb);
        DGLAElem moved = DGLAElem::zero(*x.A, x.degree);
        for (const auto& [ai, he] : it->second.normalized().terms) {
            QVec coords = v.transport(sa, sb, he.p, he.w) * from.coordinates(he);
            if (vec_is_zero(coords)) continue;
            moved.terms.emplace_back(ai, to.from_coordinates(he.p, he.w, coords));
        }
        if (!moved.is_zero()) out.comps[ti] = moved.normalized();
    }
    return out;
}

ScElem sc_bracket(const ScElem& x, const ScElem& y) {
    if (x.level != y.level) throw std::invalid_argument("sc_bracket: level mismatch");
    ScElem out = sc_zero(*x.v, *x.A, x.level, x.degree + y.degree);
    for (const auto& [t, e] : x.comps) {
        auto it = y.comps.find(t);
        if (it == y.comps.end()) continue;
        DGLAElem b = bracket_elem(e, it->second);
        if (!b.is_zero()) out.comps[t] = b;
    }
    return out;
}

namespace {

ScElem sc_apply2(const ScElem& x, const ScElem& y,
                 DGLAElem (*op)(const DGLAElem&, const DGLAElem&), int degree) {
    ScElem out = sc_zero(*x.v, *x.A, x.level, degree);
    std::set<std::size_t> keys;
    for (const auto& [t, e] : x.comps) keys.insert(t);
    for (const auto& [t, e] : y.comps) keys.insert(t);
    for (std::size_t t : keys) {
        DGLAElem a = x.comps.count(t) ? x.comps.at(t) : DGLAElem::zero(*x.A, x.degree);
        DGLAElem b = y.comps.count(t) ? y.comps.at(t) : DGLAElem::zero(*x.A, y.degree);
        DGLAElem r = op(a, b);
        if (!r.is_zero()) out.comps[t] = r;
    }
    return out;
}

}  // namespace

ScElem sc_bch(const ScElem& x, const ScElem& y) { return sc_apply2(x, y, &bch, x.degree); }

ScElem sc_gauge(const ScElem& a, const ScElem& l) { return sc_apply2(a, l, &gauge_act, l.degree); }

bool sc_equal(const ScElem& x, const ScElem& y) { return sc_add(x, sc_scale(y, -1)).is_zero(); }

// ---- the twisted linear solver d(x) + [L, x] = c ----

namespace {

std::vector<Multideg> solve_window(const DegreeBox& box, const ScElem& c, const ScElem& l) {
    std::set<Multideg> w;
    for (const Multideg& m : box.points()) w.insert(m);
    std::set<Multideg> lw;
    for (const auto& [t, e] : l.comps)
        for (const auto& [ai, he] : e.terms) lw.insert(he.w);
    for (const auto& [t, e] : c.comps)
        for (const auto& [ai, he] : e.terms) {
            w.insert(he.w);
            for (const Multideg& s : lw) w.insert(deg_sub(he.w, s));
        }
    return std::vector<Multideg>(w.begin(), w.end());
}

// solve d(x) + [L, x] = c componentwise per tuple; x has the given degree
std::optional<ScElem> solve_twisted(const ScElem& l_twist, const ScElem& c, int unknown_degree,
                                    const DegreeBox& box) {
    const SemicosimplicialDGLA& v = *c.v;
    const ArtinLocalRing& A = *c.A;
    auto ts = v.tuples(c.level);
    std::vector<Multideg> window = solve_window(box, c, l_twist);
    ScElem out = sc_zero(v, A, c.level, unknown_degree);
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        int simplex = v.nerve().index_of(underlying_simplex(ts[ti]));
        const HomSystem& comp = *v.component(simplex);
        DGLAElem ltw = l_twist.comps.count(ti) ? l_twist.comps.at(ti) : DGLAElem::zero(A, l_twist.degree);
        DGLAElem target = c.comps.count(ti) ? c.comps.at(ti) : DGLAElem::zero(A, c.degree);

        // unknowns
        struct Unknown {
            int artin;
            Multideg w;
            std::size_t idx;
        };
        std::vector<Unknown> unknowns;
        for (int ai = 1; ai < A.dim(); ++ai)
            for (const Multideg& w : window)
                for (int b = 0; b < comp.dim(unknown_degree, w); ++b)
                    unknowns.push_back({ai, w, static_cast<std::size_t>(b)});

        // row keys: (artin, w) blocks of the image degree
        std::map<std::pair<int, Multideg>, std::size_t> row_off;
        std::size_t nrows = 0;
        auto ensure_rows = [&](const DGLAElem& e) {
            for (const auto& [ai, he] : e.normalized().terms) {
                auto key = std::make_pair(ai, he.w);
                if (!row_off.count(key)) {
                    row_off[key] = nrows;
                    nrows += static_cast<std::size_t>(comp.dim(he.p, he.w));
                }
            }
        };
        std::vector<DGLAElem> images;
        for (const Unknown& u : unknowns) {
            DGLAElem x = DGLAElem::single(A, u.artin, comp.basis(unknown_degree, u.w)[u.idx]);
            DGLAElem img = (d_elem(x) + bracket_elem(ltw, x)).normalized();
            ensure_rows(img);
            images.push_back(std::move(img));
        }
        ensure_rows(target);

        QMat mat(nrows, unknowns.size());
        QVec rhs(nrows, 0);
        auto fill = [&](const DGLAElem& e, std::size_t col, bool into_rhs) {
            for (const auto& [ai, he] : e.normalized().terms) {
                auto key = std::make_pair(ai, he.w);
                auto it = row_off.find(key);
                if (it == row_off.end()) throw std::logic_error("solve_twisted: missing row block");
                QVec coords = v.component(simplex)->coordinates(he);
                for (std::size_t r = 0; r < coords.size(); ++r) {
                    if (into_rhs)
                        rhs[it->second + r] += coords[r];
                    else
                        mat.at(it->second + r, col) += coords[r];
                }
            }
        };
        for (std::size_t u = 0; u < unknowns.size(); ++u) fill(images[u], u, false);
        fill(target, 0, true);

        auto sol = solve(mat, rhs);
        if (!sol) return std::nullopt;
        DGLAElem xt = DGLAElem::zero(A, unknown_degree);
        for (std::size_t u = 0; u < unknowns.size(); ++u)
            if ((*sol)[u] != 0)
                xt.terms.emplace_back(unknowns[u].artin,
                                      comp.basis(unknown_degree, unknowns[u].w)[unknowns[u].idx].scaled((*sol)[u]));
        xt = xt.normalized();
        if (!xt.is_zero()) out.comps[ti] = xt;
    }
    return out;
}

}  // namespace

Z1Report z1_check(const H1Datum& datum, const DegreeBox& box) {
    Z1Report rep;
    const ScElem& l = datum.l;
    const ScElem& m = datum.m;
    // (1) Maurer-Cartan on level 0
    rep.mc_ok = sc_add(sc_diff(l), sc_scale(sc_bracket(l, l), Q(1, 2))).is_zero();
    // (2) ∂_{1,1} l = e^m * ∂_{0,1} l
    rep.transition_ok = sc_equal(sc_coface(1, l), sc_gauge(m, sc_coface(0, l)));
    // (3) ∂_{0,2}m • (-∂_{1,2}m) • ∂_{2,2}m = dn + [∂_{2,2}∂_{0,1} l, n]
    ScElem c = sc_bch(sc_bch(sc_coface(0, m), sc_scale(sc_coface(1, m), -1)), sc_coface(2, m));
    ScElem ltw = sc_coface(2, sc_coface(0, l));
    auto n = solve_twisted(ltw, c, -1, box);
    rep.cocycle_ok = n.has_value();
    if (n) rep.witness_n = *n;
    return rep;
}

namespace {

// coordinates of the (artin_idx, p, w) part of a level element, over the
// ordered-tuple level layout
QVec level_coords(const ScElem& x, int artin_idx, int p, const Multideg& w) {
    const SemicosimplicialDGLA& v = *x.v;
    auto ts = v.tuples(x.level);
    QVec out;
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        const HomSystem& comp = *v.component(v.nerve().index_of(underlying_simplex(ts[ti])));
        QVec part(static_cast<std::size_t>(comp.dim(p, w)), 0);
        auto it = x.comps.find(ti);
        if (it != x.comps.end())
            for (const auto& [ai, he] : it->second.normalized().terms)
                if (ai == artin_idx && he.p == p && he.w == w) part = vec_add(part, comp.coordinates(he));
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

ScElem sc_from_level_coords(const SemicosimplicialDGLA& v, const ArtinLocalRing& a, int level, int degree,
                            int artin_idx, const Multideg& w, const QVec& coords) {
    ScElem out = sc_zero(v, a, level, degree);
    std::size_t off = 0;
    auto ts = v.tuples(level);
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        const HomSystem& comp = *v.component(v.nerve().index_of(underlying_simplex(ts[ti])));
        std::size_t d = static_cast<std::size_t>(comp.dim(degree, w));
        QVec local(coords.begin() + static_cast<long>(off), coords.begin() + static_cast<long>(off + d));
        off += d;
        if (vec_is_zero(local)) continue;
        out.comps[ti] = DGLAElem::single(a, artin_idx, comp.from_coordinates(degree, w, local));
    }
    return out;
}

}  // namespace

EquivReport h1_equiv(const H1Datum& d0, const H1Datum& d1, const DegreeBox& box) {
    // Simultaneous filtered solve for (a, b): at each m_A-adic order the
    // linearizations ∂(δa) = R and (Δ1 - Δ0)(δa) - ∂(δb) = S are one linear
    // system per (artin slice, Z^n degree).
    EquivReport rep;
    const SemicosimplicialDGLA& v = *d0.l.v;
    const ArtinLocalRing& A = *d0.l.A;
    const int nu = A.nilpotency_index();
    (void)box;
    ScElem a = sc_zero(v, A, 0, 0);
    ScElem b = sc_zero(v, A, 1, -1);
    auto loop_of = [&](const ScElem& aa) {
        return sc_bch(sc_bch(sc_bch(sc_scale(sc_coface(0, aa), -1), sc_scale(d1.m, -1)), sc_coface(1, aa)),
                      d0.m);
    };
    auto b_rhs = [&](const ScElem& bb) { return sc_add(sc_diff(bb), sc_bracket(sc_coface(0, d0.l), bb)); };

    for (int round = 0; round <= nu + 2; ++round) {
        ScElem r = sc_add(d1.l, sc_scale(sc_gauge(a, d0.l), -1));
        ScElem s = sc_add(loop_of(a), sc_scale(b_rhs(b), -1));
        if (r.is_zero() && s.is_zero()) {
            rep.equivalent = true;
            rep.witness_a = a;
            rep.witness_b = b;
            return rep;
        }
        if (round == nu + 2) break;
        // lowest filtration order and the Z^n degrees present there
        int k = nu + 1;
        std::set<std::pair<int, Multideg>> keys;  // (artin idx, w) at the lowest order
        auto scan = [&](const ScElem& x) {
            for (const auto& [t, e] : x.comps)
                for (const auto& [ai, he] : e.normalized().terms) {
                    if (he.is_zero()) continue;
                    int o = A.order(ai);
                    if (o < k) {
                        k = o;
                        keys.clear();
                    }
                    if (o == k) keys.insert({ai, he.w});
                }
        };
        scan(r);
        scan(s);
        if (keys.empty()) break;
        bool progress = false;
        for (const auto& [ai, w] : keys) {
            std::size_t da_dim = static_cast<std::size_t>(level_dim(v, 0, 0, w));
            std::size_t db_dim = static_cast<std::size_t>(level_dim(v, 1, -1, w));
            QMat d0a = level_diff_matrix(v, 0, 0, w);
            QMat c00 = level_coface_matrix(v, 0, 0, 0, w);
            QMat c01 = level_coface_matrix(v, 0, 1, 0, w);
            QMat d1b = level_diff_matrix(v, 1, -1, w);
            // R_new = R + ∂δa and S_new = S + (Δ1-Δ0)δa - ∂δb at this
            // order, so both targets are the negated residuals
            QVec rw = vec_scaled(level_coords(r, ai, 1, w), -1);
            QVec sw = vec_scaled(level_coords(s, ai, 0, w), -1);
            QMat sys(rw.size() + sw.size(), da_dim + db_dim);
            QVec rhs;
            for (std::size_t rr = 0; rr < d0a.rows(); ++rr)
                for (std::size_t c = 0; c < da_dim; ++c) sys.at(rr, c) = d0a.at(rr, c);
            for (std::size_t rr = 0; rr < c00.rows(); ++rr) {
                for (std::size_t c = 0; c < da_dim; ++c)
                    sys.at(d0a.rows() + rr, c) = c01.at(rr, c) - c00.at(rr, c);
                for (std::size_t c = 0; c < db_dim; ++c) sys.at(d0a.rows() + rr, da_dim + c) = -d1b.at(rr, c);
            }
            rhs.insert(rhs.end(), rw.begin(), rw.end());
            rhs.insert(rhs.end(), sw.begin(), sw.end());
            auto sol = solve(sys, rhs);
            if (!sol) {
                rep.failure = "order-" + std::to_string(k) + " joint step unsolvable";
                return rep;
            }
            QVec xa(sol->begin(), sol->begin() + static_cast<long>(da_dim));
            QVec xb(sol->begin() + static_cast<long>(da_dim), sol->end());
            if (!vec_is_zero(xa)) {
                a = sc_bch(sc_from_level_coords(v, A, 0, 0, ai, w, xa), a);
                progress = true;
            }
            if (!vec_is_zero(xb)) {
                b = sc_add(b, sc_from_level_coords(v, A, 1, -1, ai, w, xb));
                progress = true;
            }
        }
        if (!progress) {
            rep.failure = "no progress at order " + std::to_string(k);
            return rep;
        }
    }
    rep.failure = rep.failure.empty() ? "filtration did not terminate" : rep.failure;
    return rep;
}

// ---- tangent dimensions over the dual numbers ----

int tangent_dim_end(const HomSystem& end, const DegreeBox& box) {
    static const ArtinLocalRing eps = ArtinLocalRing::dual_numbers();
    int total = 0;
    DegreeBox b = box.policy == DegreeBox::Policy::AutoStabilize ? box.expanded(1) : box;
    for (const Multideg& w : b.points()) {
        // MC(K[eps]) is the kernel of the linearized MC defect
        int d1 = end.dim(1, w);
        QMat mc(static_cast<std::size_t>(end.dim(2, w)), static_cast<std::size_t>(d1));
        for (int c = 0; c < d1; ++c) {
            DGLAElem eta = DGLAElem::single(eps, 1, end.basis(1, w)[static_cast<std::size_t>(c)]);
            DGLAElem defect = (d_elem(eta) + bracket_elem(eta, eta).scaled(Q(1, 2))).normalized();
            for (const auto& [ai, he] : defect.terms) {
                QVec coords = end.coordinates(he);
                for (std::size_t r = 0; r < coords.size(); ++r) mc.at(r, static_cast<std::size_t>(c)) += coords[r];
            }
        }
        std::size_t kdim = static_cast<std::size_t>(d1) - rank(mc);
        // gauge directions through any point: a ↦ e^a * l - l = ∂a over K[eps]
        int d0 = end.dim(0, w);
        QMat gm(static_cast<std::size_t>(d1), static_cast<std::size_t>(d0));
        for (int c = 0; c < d0; ++c) {
            DGLAElem a = DGLAElem::single(eps, 1, end.basis(0, w)[static_cast<std::size_t>(c)]);
            DGLAElem moved = gauge_act(a, DGLAElem::zero(eps, 1)).normalized();
            for (const auto& [ai, he] : moved.terms) {
                QVec coords = end.coordinates(he);
                for (std::size_t r = 0; r < coords.size(); ++r) gm.at(r, static_cast<std::size_t>(c)) += coords[r];
            }
        }
        total += static_cast<int>(kdim - rank(gm));
    }
    return total;
}

int h1_dim_eps(const SemicosimplicialDGLA& v, const DegreeBox& box) {
    int total = 0;
    DegreeBox b = box.policy == DegreeBox::Policy::AutoStabilize ? box.expanded(1) : box;
    for (const Multideg& w : b.points()) {
        std::size_t dl = static_cast<std::size_t>(level_dim(v, 0, 1, w));
        std::size_t dm = static_cast<std::size_t>(level_dim(v, 1, 0, w));
        std::size_t dn = static_cast<std::size_t>(level_dim(v, 2, -1, w));
        QMat d0l = level_diff_matrix(v, 0, 1, w);
        QMat c00 = level_coface_matrix(v, 0, 0, 1, w);
        QMat c01 = level_coface_matrix(v, 0, 1, 1, w);
        QMat d1m = level_diff_matrix(v, 1, 0, w);
        QMat c10 = level_coface_matrix(v, 1, 0, 0, w);
        QMat c11 = level_coface_matrix(v, 1, 1, 0, w);
        QMat c12 = level_coface_matrix(v, 1, 2, 0, w);
        QMat d2n = level_diff_matrix(v, 2, -1, w);

        // Z: unknowns (l, m, n); rows: dl = 0; (Δ1-Δ0)l + Dm = 0; σm - Dn = 0
        // (e^m * x = x + [m,x] - ∂m linearizes to x - ∂m over the dual numbers)
        std::size_t rows = d0l.rows() + c00.rows() + c10.rows();
        QMat z(rows, dl + dm + dn);
        std::size_t r0 = 0;
        for (std::size_t r = 0; r < d0l.rows(); ++r)
            for (std::size_t c = 0; c < dl; ++c) z.at(r0 + r, c) = d0l.at(r, c);
        r0 += d0l.rows();
        for (std::size_t r = 0; r < c00.rows(); ++r) {
            for (std::size_t c = 0; c < dl; ++c) z.at(r0 + r, c) = c01.at(r, c) - c00.at(r, c);
            for (std::size_t c = 0; c < dm; ++c) z.at(r0 + r, dl + c) = d1m.at(r, c);
        }
        r0 += c00.rows();
        for (std::size_t r = 0; r < c10.rows(); ++r) {
            for (std::size_t c = 0; c < dm; ++c)
                z.at(r0 + r, dl + c) = c10.at(r, c) - c11.at(r, c) + c12.at(r, c);
            for (std::size_t c = 0; c < dn; ++c) z.at(r0 + r, dl + dm + c) = -d2n.at(r, c);
        }
        QMat zker = kernel_basis(z);
        // project the kernel onto the (l, m) coordinates
        QMat proj(dl + dm, zker.cols());
        for (std::size_t c = 0; c < zker.cols(); ++c)
            for (std::size_t r = 0; r < dl + dm; ++r) proj.at(r, c) = zker.at(r, c);
        std::size_t zdim = rank(proj);

        // orbit: (a,b) ↦ (Da, (Δ1-Δ0)a - Db)
        QMat d0a = level_diff_matrix(v, 0, 0, w);
        QMat a00 = level_coface_matrix(v, 0, 0, 0, w);
        QMat a01 = level_coface_matrix(v, 0, 1, 0, w);
        QMat d1b = level_diff_matrix(v, 1, -1, w);
        std::size_t da = d0a.cols(), db = d1b.cols();
        QMat orb(dl + dm, da + db);
        for (std::size_t r = 0; r < dl; ++r)
            for (std::size_t c = 0; c < da; ++c) orb.at(r, c) = d0a.at(r, c);
        for (std::size_t r = 0; r < dm; ++r) {
            for (std::size_t c = 0; c < da; ++c) orb.at(dl + r, c) = a01.at(r, c) - a00.at(r, c);
            for (std::size_t c = 0; c < db; ++c) orb.at(dl + r, da + c) = -d1b.at(r, c);
        }
        total += static_cast<int>(zdim - rank(orb));
    }
    return total;
}

}  // namespace dgn
