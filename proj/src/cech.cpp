#include "dgnerve/cech.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace dgn {

// ---- SemicosimplicialDGLA ----

std::shared_ptr<SemicosimplicialDGLA> SemicosimplicialDGLA::build_L(AModulePtr q) {
    auto v = std::shared_ptr<SemicosimplicialDGLA>(new SemicosimplicialDGLA());
    v->base_ = std::move(q);
    v->conjugated_ = false;
    for (int a = 0; a < v->base_->nerve().size(); ++a) v->comps_.push_back(HomSystem::local(v->base_, v->base_, a));
    return v;
}

std::shared_ptr<SemicosimplicialDGLA> SemicosimplicialDGLA::build_h(AModulePtr e) {
    auto v = std::shared_ptr<SemicosimplicialDGLA>(new SemicosimplicialDGLA());
    v->base_ = std::move(e);
    v->conjugated_ = true;
    for (int a = 0; a < v->base_->nerve().size(); ++a) {
        for (int i = v->base_->module(a)->imin(); i <= v->base_->module(a)->imax(); ++i)
            if (!v->base_->module(a)->relations(i).empty())
                throw std::invalid_argument("build_h: input complex is not pointwise free");
        v->comps_.push_back(std::make_shared<HomSystem>(v->base_, v->base_, std::vector<int>{a}));
    }
    return v;
}

const QMat& SemicosimplicialDGLA::transport(int a, int b, int p, const Multideg& w) const {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = transport_cache_.find({a, b, p, w});
        if (it != transport_cache_.end()) return it->second;
    }
    QMat m = compute_transport(a, b, p, w);
    std::lock_guard<std::mutex> lock(mu_);
    return transport_cache_.emplace(std::make_tuple(a, b, p, w), std::move(m)).first->second;
}

QMat SemicosimplicialDGLA::compute_transport(int a, int b, int p, const Multideg& w) const {
    const HomSystem& from = *comps_[static_cast<std::size_t>(a)];
    const HomSystem& to = *comps_[static_cast<std::size_t>(b)];
    if (a == b) return QMat::identity(static_cast<std::size_t>(from.dim(p, w)));
    if (!conjugated_) return restriction_matrix(from, to, p, w);

    // ψ = t ∘ (φ ⊗ A_b) ∘ t^{-1} with t the base-changed structure map
    const ModMap* t;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = bc_maps_.find({a, b});
        if (it == bc_maps_.end()) it = bc_maps_.emplace(std::make_pair(a, b), base_->base_changed_map(a, b)).first;
        t = &it->second;
    }
    const GradedDGModule& ea = *base_->module(a);
    const GradedDGModule& eb = *base_->module(b);
    const GradedDGModule& bca = *t->src();
    auto gens_a = gen_index(ea);
    auto gens_b = gen_index(eb);

    QMat out(static_cast<std::size_t>(to.dim(p, w)), static_cast<std::size_t>(from.dim(p, w)));
    const auto& basis = from.basis(p, w);
    for (std::size_t c = 0; c < basis.size(); ++c) {
        std::vector<QVec> imgs;
        for (auto [i, j] : gens_a)
            imgs.push_back(
                transport_coords(ea, bca, i + p, deg_add(ea.gens(i)[j], w), basis[c].images[0][imgs.size()]));
        HomElement psi = HomElement::zero(base_, base_, {b}, p, w);
        for (std::size_t tt = 0; tt < gens_b.size(); ++tt) {
            auto [i, j] = gens_b[tt];
            const Multideg& dj = eb.gens(i)[j];
            QMat tp = t->piece_matrix(i, dj);
            QMat tpinv;
            try {
                tpinv = inverse(tp);
            } catch (const std::exception&) {
                throw std::invalid_argument("build_h: transition is not invertible on an overlap (not locally free)");
            }
            // coords of the generator e_j inside its own piece
            const Piece& pj = eb.piece(i, dj);
            QVec ej(pj.amb.size(), 0);
            for (std::size_t r = 0; r < pj.amb.size(); ++r)
                if (pj.amb[r] == static_cast<int>(j)) ej[r] = 1;
            QVec ejc = pj.coords(pj.canon(ej));
            QVec v1 = tpinv * ejc;
            QVec v2 = apply_generator_images(bca, bca, imgs, p, w, i, dj, v1);
            QVec v3 = t->piece_matrix(i + p, deg_add(dj, w)) * v2;
            psi.images[0][tt] = std::move(v3);
        }
        QVec coords = to.coordinates(psi);
        for (std::size_t r = 0; r < coords.size(); ++r) out.at(r, c) = coords[r];
    }
    return out;
}

bool SemicosimplicialDGLA::LevelValue::is_zero() const {
    for (const auto& [k, v] : chunks)
        if (!vec_is_zero(v)) return false;
    return true;
}

SemicosimplicialDGLA::LevelValue SemicosimplicialDGLA::level_add(const LevelValue& a, const LevelValue& b) const {
    if (a.level != b.level) throw std::invalid_argument("level_add: level mismatch");
    LevelValue out = a;
    for (const auto& [k, v] : b.chunks) {
        auto it = out.chunks.find(k);
        if (it == out.chunks.end())
            out.chunks[k] = v;
        else
            it->second = vec_add(it->second, v);
    }
    return out;
}

SemicosimplicialDGLA::LevelValue SemicosimplicialDGLA::level_scale(const LevelValue& a, const Q& c) const {
    LevelValue out = a;
    for (auto& [k, v] : out.chunks) v = vec_scaled(v, c);
    return out;
}

SemicosimplicialDGLA::LevelValue SemicosimplicialDGLA::level_diff(const LevelValue& a) const {
    LevelValue out = zero_level(a.level);
    auto ts = tuples(a.level);
    for (const auto& [key, coords] : a.chunks) {
        auto [ti, p, w] = key;
        int simplex = nerve().index_of(underlying_simplex(ts[ti]));
        const HomSystem& comp = *comps_[static_cast<std::size_t>(simplex)];
        QVec img = comp.diff_matrix(p, w) * coords;
        if (vec_is_zero(img)) continue;
        auto k2 = std::make_tuple(ti, p + 1, w);
        auto it = out.chunks.find(k2);
        if (it == out.chunks.end())
            out.chunks[k2] = img;
        else
            it->second = vec_add(it->second, img);
    }
    return out;
}

SemicosimplicialDGLA::LevelValue SemicosimplicialDGLA::coface(int k, const LevelValue& a) const {
    int n = a.level;
    auto src_tuples = tuples(n);
    auto dst_tuples = tuples(n + 1);
    std::map<Tuple, std::size_t> src_idx;
    for (std::size_t i = 0; i < src_tuples.size(); ++i) src_idx[src_tuples[i]] = i;
    auto f = delta_map(k, n);
    LevelValue out = zero_level(n + 1);
    for (std::size_t ti = 0; ti < dst_tuples.size(); ++ti) {
        Tuple h = coface_reindex(f, dst_tuples[ti]);
        std::size_t si = src_idx.at(h);
        int sa = nerve().index_of(underlying_simplex(h));
        int sb = nerve().index_of(underlying_simplex(dst_tuples[ti]));
        for (const auto& [key, coords] : a.chunks) {
            auto [cti, p, w] = key;
            if (cti != si) continue;
            QVec img = transport(sa, sb, p, w) * coords;
            if (vec_is_zero(img)) continue;
            auto k2 = std::make_tuple(ti, p, w);
            auto it = out.chunks.find(k2);
            if (it == out.chunks.end())
                out.chunks[k2] = img;
            else
                it->second = vec_add(it->second, img);
        }
    }
    return out;
}

SemicosimplicialDGLA::LevelValue SemicosimplicialDGLA::level_bracket(const LevelValue& a,
                                                                     const LevelValue& b) const {
    if (a.level != b.level) throw std::invalid_argument("level_bracket: level mismatch");
    LevelValue out = zero_level(a.level);
    auto ts = tuples(a.level);
    for (const auto& [ka, va] : a.chunks)
        for (const auto& [kb, vb] : b.chunks) {
            auto [ta, pa, wa] = ka;
            auto [tb, pb, wb] = kb;
            if (ta != tb) continue;
            int simplex = nerve().index_of(underlying_simplex(ts[ta]));
            const HomSystem& comp = *comps_[static_cast<std::size_t>(simplex)];
            HomElement ea = comp.from_coordinates(pa, wa, va);
            HomElement eb = comp.from_coordinates(pb, wb, vb);
            HomElement br = HomElement::bracket(ea, eb);
            if (br.is_zero()) continue;
            QVec coords = comp.coordinates(br);
            auto k2 = std::make_tuple(ta, pa + pb, deg_add(wa, wb));
            auto it = out.chunks.find(k2);
            if (it == out.chunks.end())
                out.chunks[k2] = coords;
            else
                it->second = vec_add(it->second, coords);
        }
    return out;
}

bool SemicosimplicialDGLA::level_equal(const LevelValue& a, const LevelValue& b) const {
    return level_add(a, level_scale(b, -1)).is_zero();
}

SemicosimplicialDGLA::LevelValue SemicosimplicialDGLA::basis_chunk(int level, std::size_t tuple_idx, int p,
                                                                   const Multideg& w, std::size_t c) const {
    LevelValue out = zero_level(level);
    auto ts = tuples(level);
    int simplex = nerve().index_of(underlying_simplex(ts[tuple_idx]));
    const HomSystem& comp = *comps_[static_cast<std::size_t>(simplex)];
    QVec coords(static_cast<std::size_t>(comp.dim(p, w)), 0);
    coords[c] = 1;
    out.chunks[{tuple_idx, p, w}] = std::move(coords);
    return out;
}

// ---- TotalComplex ----

TotalComplex::TotalComplex(const SemicosimplicialDGLA* v, int level_cap) : v_(v), cap_(level_cap) {
    for (int n = 0; n <= cap_; ++n)
        for (const Tuple& t : v_->norm_tuples(n)) slots_.emplace_back(n, t);
}

std::vector<std::pair<int, Tuple>> TotalComplex::layout() const { return slots_; }

TotalComplex::BlockInfo& TotalComplex::info(int p, const Multideg& w) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(p, w);
    auto it = blocks_.find(key);
    if (it != blocks_.end()) return it->second;
    BlockInfo b;
    for (const auto& [n, t] : slots_) {
        b.offsets.push_back(b.total);
        int simplex = v_->nerve().index_of(underlying_simplex(t));
        b.total += static_cast<std::size_t>(v_->component(simplex)->dim(p - n, w));
    }
    return blocks_.emplace(key, std::move(b)).first->second;
}

int TotalComplex::dim(int p, const Multideg& w) const { return static_cast<int>(info(p, w).total); }

const QMat& TotalComplex::d_matrix(int p, const Multideg& w) const {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = blocks_.find({p, w});
        if (it != blocks_.end() && it->second.has_d) return it->second.d;
    }
    const BlockInfo& src = info(p, w);
    const BlockInfo& dst = info(p + 1, w);
    QMat d(dst.total, src.total);
    std::map<Tuple, std::size_t> slot_idx;
    for (std::size_t s = 0; s < slots_.size(); ++s) slot_idx[slots_[s].second] = s;
    for (std::size_t s = 0; s < slots_.size(); ++s) {
        auto [n, t] = slots_[s];
        int simplex = v_->nerve().index_of(underlying_simplex(t));
        const HomSystem& comp = *v_->component(simplex);
        // internal differential, sign (-1)^n
        QMat dm = comp.diff_matrix(p - n, w);
        for (std::size_t r = 0; r < dm.rows(); ++r)
            for (std::size_t c = 0; c < dm.cols(); ++c)
                if (dm.at(r, c) != 0)
                    d.at(dst.offsets[s] + r, src.offsets[s] + c) = (n % 2 == 0) ? dm.at(r, c) : -dm.at(r, c);
        // Čech faces: component at t receives Σ (-1)^i from the faces of t
        if (n == 0) continue;
        for (std::size_t i = 0; i < t.size(); ++i) {
            Tuple face = t;
            face.erase(face.begin() + static_cast<long>(i));
            std::size_t fs = slot_idx.at(face);
            int fsimplex = v_->nerve().index_of(underlying_simplex(face));
            // source block: level n-1 in C^p has internal degree p-(n-1)
            QMat tr = v_->transport(fsimplex, simplex, p - n + 1, w);
            Q sign = (i % 2 == 0) ? Q(1) : Q(-1);
            for (std::size_t r = 0; r < tr.rows(); ++r)
                for (std::size_t c = 0; c < tr.cols(); ++c)
                    if (tr.at(r, c) != 0) d.at(dst.offsets[s] + r, src.offsets[fs] + c) += sign * tr.at(r, c);
        }
    }
    std::lock_guard<std::mutex> lock(mu_);
    BlockInfo& b = blocks_.at({p, w});
    if (!b.has_d) {
        b.d = std::move(d);
        b.has_d = true;
    }
    return b.d;
}

int TotalComplex::cohomology_dim(int p, const Multideg& w) const {
    std::size_t dd = static_cast<std::size_t>(dim(p, w));
    std::size_t rout = rank(d_matrix(p, w));
    std::size_t rin = rank(d_matrix(p - 1, w));
    return static_cast<int>(dd - rout - rin);
}

// ---- Ext ----

namespace {

std::vector<Multideg> shell_points(const DegreeBox& box, int k) {
    if (k == 0) return box.points();
    DegreeBox outer = box.expanded(k);
    DegreeBox inner = box.expanded(k - 1);
    std::vector<Multideg> out;
    for (const Multideg& m : outer.points())
        if (!inner.contains(m)) out.push_back(m);
    return out;
}

template <class CohFn>
ExtResult ext_totals(const DegreeBox& box, int kmax, CohFn&& coh) {
    ExtResult r;
    std::map<int, int> totals;
    for (int k = 0; k <= kmax; ++k) totals[k] = 0;
    for (const Multideg& m : box.points())
        for (int k = 0; k <= kmax; ++k) totals[k] += coh(k, m);
    if (box.policy == DegreeBox::Policy::AutoStabilize) {
        // two expansion shells must contribute nothing
        for (int shell = 1; shell <= 2; ++shell)
            for (const Multideg& m : shell_points(box, shell))
                for (int k = 0; k <= kmax; ++k)
                    if (coh(k, m) != 0) r.stable = false;
    }
    r.dims = std::move(totals);
    return r;
}

}  // namespace

ExtResult ext_via_end(const HomSystem& end, const DegreeBox& box, int kmax) {
    return ext_totals(box, kmax, [&](int k, const Multideg& m) { return end.cohomology_dim(k, m); });
}

ExtResult ext_via_total(const SemicosimplicialDGLA& v, const DegreeBox& box, int kmax) {
    TotalComplex c(&v, v.max_norm_level());
    return ext_via_total_cached(c, box, kmax);
}

ExtResult ext_via_total_cached(const TotalComplex& c, const DegreeBox& box, int kmax) {
    return ext_totals(box, kmax, [&](int k, const Multideg& m) { return c.cohomology_dim(k, m); });
}

AModulePtr skyscraper_resolution(const SheafDescription& sheaf, const Scheme& scheme) {
    if (sheaf.kind != SheafDescription::Kind::Skyscraper)
        throw std::invalid_argument("skyscraper_resolution: not a skyscraper");
    if (scheme.nerve->size() != 1)
        throw std::invalid_argument("skyscraper_resolution: only single-chart schemes are supported");
    if (sheaf.sky.ideal_gens.size() != 1)
        throw std::invalid_argument("skyscraper_resolution: only principal vanishing ideals are supported");
    auto m = std::make_shared<GradedDGModule>(scheme.ring(0));
    m->set_generators(-1, {sheaf.sky.ideal_gens[0]});
    m->set_generators(0, {deg_zero(scheme.lattice_rank)});
    QMat d(1, 1);
    d.at(0, 0) = 1;
    m->set_diff(-1, d);
    auto e = std::make_shared<AModule>(scheme.nerve, scheme.rings);
    e->set_module(0, m->finalize());
    return e->finalize();
}

AModulePtr free_complex_module(const FreeComplexDescription& d, const Scheme& scheme) {
    const Nerve& n = *scheme.nerve;
    Multideg zero = deg_zero(scheme.lattice_rank);
    auto out = std::make_shared<AModule>(scheme.nerve, scheme.rings);
    for (int a = 0; a < n.size(); ++a) {
        auto m = std::make_shared<GradedDGModule>(scheme.ring(a));
        for (const auto& [i, lbs] : d.terms) {
            std::vector<Multideg> degs;
            for (const auto& lb : lbs) degs.push_back(summand_degree(lb, n, a));
            m->set_generators(i, degs);
        }
        for (const auto& [i, blk] : d.diffs) m->set_diff(i, blk);
        out->set_module(a, m->finalize());
    }
    for (auto [a, b] : n.hasse_pairs(n.all_indices())) {
        ModMap q(out->module(a), out->module(b), 0, zero);
        for (const auto& [i, lbs] : d.terms) q.set_block(i, QMat::identity(lbs.size()));
        q.finalize();
        out->set_structure_map(a, b, std::move(q));
    }
    return out->finalize();
}

ExtResult ext_dims(const SheafDescription& sheaf, const Scheme& scheme, ExtModel model, const DegreeBox& box,
                   int depth_cap) {
    int kmax = scheme.nerve->max_deg() + 1;
    if (sheaf.kind == SheafDescription::Kind::Skyscraper) kmax = scheme.nerve->max_deg() + 2;

    if (model == ExtModel::EndOfQ || model == ExtModel::COfL) {
        Replacement rep = (sheaf.kind == SheafDescription::Kind::LineBundleSum)
                              ? locally_free_replacement(sheaf, scheme)
                              : cofibrant_replace(upsilon_star(sheaf, scheme), box, depth_cap);
        if (model == ExtModel::EndOfQ) {
            auto end = HomSystem::global(rep.q, rep.q);
            return ext_via_end(*end, box, kmax);
        }
        auto l = SemicosimplicialDGLA::build_L(rep.q);
        return ext_via_total(*l, box, kmax);
    }

    // COfH: a locally free resolution
    AModulePtr e;
    if (sheaf.kind == SheafDescription::Kind::LineBundleSum)
        e = upsilon_star(sheaf, scheme);
    else
        e = skyscraper_resolution(sheaf, scheme);
    auto h = SemicosimplicialDGLA::build_h(e);
    return ext_via_total(*h, box, kmax);
}

bool nonnegative_cohomology(const SemicosimplicialDGLA& v, const DegreeBox& box, int kmin,
                            std::pair<int, Multideg>* witness) {
    TotalComplex c(&v, v.max_norm_level());
    for (const Multideg& m : box.points())
        for (int k = kmin; k < 0; ++k)
            if (c.cohomology_dim(k, m) != 0) {
                if (witness) *witness = {k, m};
                return false;
            }
    return true;
}

int level_dim(const SemicosimplicialDGLA& v, int level, int p, const Multideg& w) {
    int total = 0;
    for (const Tuple& t : v.tuples(level))
        total += v.component(v.nerve().index_of(underlying_simplex(t)))->dim(p, w);
    return total;
}

QMat level_diff_matrix(const SemicosimplicialDGLA& v, int level, int p, const Multideg& w) {
    auto ts = v.tuples(level);
    QMat d(static_cast<std::size_t>(level_dim(v, level, p + 1, w)), static_cast<std::size_t>(level_dim(v, level, p, w)));
    std::size_t roff = 0, coff = 0;
    for (const Tuple& t : ts) {
        const HomSystem& comp = *v.component(v.nerve().index_of(underlying_simplex(t)));
        QMat b = comp.diff_matrix(p, w);
        for (std::size_t r = 0; r < b.rows(); ++r)
            for (std::size_t c = 0; c < b.cols(); ++c) d.at(roff + r, coff + c) = b.at(r, c);
        roff += b.rows();
        coff += b.cols();
    }
    return d;
}

QMat level_coface_matrix(const SemicosimplicialDGLA& v, int level, int k, int p, const Multideg& w) {
    auto src = v.tuples(level);
    auto dst = v.tuples(level + 1);
    std::map<Tuple, std::size_t> src_off;
    std::size_t off = 0;
    for (const Tuple& t : src) {
        src_off[t] = off;
        off += static_cast<std::size_t>(v.component(v.nerve().index_of(underlying_simplex(t)))->dim(p, w));
    }
    QMat m(static_cast<std::size_t>(level_dim(v, level + 1, p, w)), static_cast<std::size_t>(level_dim(v, level, p, w)));
    auto f = delta_map(k, level);
    std::size_t roff = 0;
    for (const Tuple& t : dst) {
        int sb = v.nerve().index_of(underlying_simplex(t));
        Tuple h = coface_reindex(f, t);
        int sa = v.nerve().index_of(underlying_simplex(h));
        const QMat& tr = v.transport(sa, sb, p, w);
        std::size_t c0 = src_off.at(h);
        for (std::size_t r = 0; r < tr.rows(); ++r)
            for (std::size_t c = 0; c < tr.cols(); ++c) m.at(roff + r, c0 + c) = tr.at(r, c);
        roff += static_cast<std::size_t>(v.component(sb)->dim(p, w));
    }
    return m;
}

// ---- polynomial forms ----

namespace {

int mask_popcount(unsigned m) {
    int c = 0;
    while (m) {
        c += m & 1u;
        m >>= 1;
    }
    return c;
}

// sign of dt_S1 ∧ dt_S2 when merging ascending lists; 0 if they intersect
int merge_sign(unsigned s1, unsigned s2) {
    if (s1 & s2) return 0;
    int sign = 1;
    for (unsigned j = 0; j < 32; ++j) {
        if (!(s2 & (1u << j))) continue;
        int above = 0;
        for (unsigned i = j + 1; i < 32; ++i)
            if (s1 & (1u << i)) ++above;
        if (above % 2) sign = -sign;
    }
    return sign;
}

void pf_accum(PolyForm& f, const std::vector<int>& e, unsigned mask, const Q& c) {
    if (c == 0) return;
    auto key = std::make_pair(e, mask);
    auto it = f.terms.find(key);
    if (it == f.terms.end()) {
        f.terms[key] = c;
    } else {
        it->second += c;
        if (it->second == 0) f.terms.erase(it);
    }
}

}  // namespace

PolyForm pf_zero(int n) { return PolyForm{n, {}}; }

PolyForm pf_one(int n) {
    PolyForm f{n, {}};
    f.terms[{std::vector<int>(static_cast<std::size_t>(n), 0), 0u}] = 1;
    return f;
}

PolyForm pf_var(int n, int i) {
    PolyForm f{n, {}};
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(i - 1)] = 1;
    f.terms[{e, 0u}] = 1;
    return f;
}

PolyForm pf_dt(int n, int i) {
    PolyForm f{n, {}};
    f.terms[{std::vector<int>(static_cast<std::size_t>(n), 0), 1u << (i - 1)}] = 1;
    return f;
}

PolyForm pf_add(const PolyForm& a, const PolyForm& b) {
    PolyForm f = a;
    for (const auto& [k, c] : b.terms) pf_accum(f, k.first, k.second, c);
    return f;
}

PolyForm pf_scale(const PolyForm& a, const Q& c) {
    PolyForm f{a.n, {}};
    for (const auto& [k, x] : a.terms) pf_accum(f, k.first, k.second, x * c);
    return f;
}

PolyForm pf_mul(const PolyForm& a, const PolyForm& b) {
    PolyForm f{a.n, {}};
    for (const auto& [ka, ca] : a.terms)
        for (const auto& [kb, cb] : b.terms) {
            int sign = merge_sign(ka.second, kb.second);
            if (sign == 0) continue;
            std::vector<int> e(ka.first);
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += kb.first[i];
            pf_accum(f, e, ka.second | kb.second, ca * cb * sign);
        }
    return f;
}

PolyForm pf_d(const PolyForm& a) {
    PolyForm f{a.n, {}};
    for (const auto& [k, c] : a.terms)
        for (int i = 1; i <= a.n; ++i) {
            int ai = k.first[static_cast<std::size_t>(i - 1)];
            if (ai == 0) continue;
            unsigned bit = 1u << (i - 1);
            if (k.second & bit) continue;
            // dt_i ∧ dt_S: move past the dt_j with j < i
            int below = 0;
            for (int j = 1; j < i; ++j)
                if (k.second & (1u << (j - 1))) ++below;
            std::vector<int> e = k.first;
            --e[static_cast<std::size_t>(i - 1)];
            pf_accum(f, e, k.second | bit, c * ai * (below % 2 ? -1 : 1));
        }
    return f;
}

namespace {

PolyForm pf_pow(const PolyForm& a, int k) {
    PolyForm r = pf_one(a.n);
    for (int i = 0; i < k; ++i) r = pf_mul(r, a);
    return r;
}

}  // namespace

PolyForm pf_face(const PolyForm& a, int k) {
    const int n = a.n;
    const int m = n - 1;
    // images of t_i and dt_i under the k-th face inclusion Δ^{n-1} → Δ^n
    std::vector<PolyForm> tv(static_cast<std::size_t>(n) + 1, pf_zero(m));
    std::vector<PolyForm> dtv(static_cast<std::size_t>(n) + 1, pf_zero(m));
    for (int i = 1; i <= n; ++i) {
        if (k == 0) {
            if (i == 1) {
                // t_1 ↦ s_0 = 1 - Σ s_j,   dt_1 ↦ -Σ ds_j
                PolyForm s0 = pf_one(m);
                PolyForm ds0 = pf_zero(m);
                for (int j = 1; j <= m; ++j) {
                    s0 = pf_add(s0, pf_scale(pf_var(m, j), -1));
                    ds0 = pf_add(ds0, pf_scale(pf_dt(m, j), -1));
                }
                tv[1] = s0;
                dtv[1] = ds0;
            } else {
                tv[static_cast<std::size_t>(i)] = pf_var(m, i - 1);
                dtv[static_cast<std::size_t>(i)] = pf_dt(m, i - 1);
            }
        } else {
            if (i < k) {
                tv[static_cast<std::size_t>(i)] = pf_var(m, i);
                dtv[static_cast<std::size_t>(i)] = pf_dt(m, i);
            } else if (i == k) {
                tv[static_cast<std::size_t>(i)] = pf_zero(m);
                dtv[static_cast<std::size_t>(i)] = pf_zero(m);
            } else {
                tv[static_cast<std::size_t>(i)] = pf_var(m, i - 1);
                dtv[static_cast<std::size_t>(i)] = pf_dt(m, i - 1);
            }
        }
    }
    PolyForm out = pf_zero(m);
    for (const auto& [key, c] : a.terms) {
        PolyForm term = pf_scale(pf_one(m), c);
        for (int i = 1; i <= n; ++i) {
            int e = key.first[static_cast<std::size_t>(i - 1)];
            if (e > 0) term = pf_mul(term, pf_pow(tv[static_cast<std::size_t>(i)], e));
        }
        for (int i = 1; i <= n && !term.is_zero(); ++i)
            if (key.second & (1u << (i - 1))) term = pf_mul(term, dtv[static_cast<std::size_t>(i)]);
        out = pf_add(out, term);
    }
    return out;
}

std::map<int, PolyForm> pf_by_degree(const PolyForm& a) {
    std::map<int, PolyForm> out;
    for (const auto& [k, c] : a.terms) {
        int q = mask_popcount(k.second);
        auto it = out.find(q);
        if (it == out.end()) {
            PolyForm f{a.n, {}};
            f.terms[k] = c;
            out[q] = f;
        } else {
            it->second.terms[k] = c;
        }
    }
    return out;
}

int PolyForm::max_poly_degree() const {
    int d = 0;
    for (const auto& [k, c] : terms) {
        int s = 0;
        for (int e : k.first) s += e;
        d = std::max(d, s);
    }
    return d;
}

Q pf_integrate_top(const PolyForm& a) {
    const unsigned full = a.n == 0 ? 0u : ((1u << a.n) - 1u);
    Q total = 0;
    for (const auto& [k, c] : a.terms) {
        if (k.second != full) continue;
        // ∫_{Δ^n} ∏ t_i^{a_i} dt = ∏ a_i! / (n + Σ a_i)!
        Z num = 1;
        long s = 0;
        for (int e : k.first) {
            for (int x = 2; x <= e; ++x) num *= x;
            s += e;
        }
        Z den = 1;
        for (long x = 2; x <= static_cast<long>(a.n) + s; ++x) den *= x;
        total += c * Q(num) / Q(den);
    }
    return total;
}

// ---- Thom-Whitney ----

TWElement tw_zero(const SemicosimplicialDGLA* v, int cap) {
    TWElement x;
    x.v = v;
    x.level_cap = cap;
    x.levels.resize(static_cast<std::size_t>(cap) + 1);
    return x;
}

TWElement tw_add(const TWElement& a, const TWElement& b) {
    TWElement x = a;
    for (std::size_t n = 0; n < x.levels.size(); ++n)
        x.levels[n].insert(x.levels[n].end(), b.levels[n].begin(), b.levels[n].end());
    return x;
}

TWElement tw_scale(const TWElement& a, const Q& c) {
    TWElement x = a;
    for (auto& lvl : x.levels)
        for (auto& [w, val] : lvl) w = pf_scale(w, c);
    return x;
}

TWElement tw_diff(const TWElement& a) {
    TWElement x = tw_zero(a.v, a.level_cap);
    for (std::size_t n = 0; n < a.levels.size(); ++n)
        for (const auto& [w, val] : a.levels[n]) {
            PolyForm dw = pf_d(w);
            if (!dw.is_zero()) x.levels[n].emplace_back(dw, val);
            for (const auto& [q, wq] : pf_by_degree(w)) {
                auto dv = a.v->level_diff(val);
                if (dv.is_zero()) continue;
                x.levels[n].emplace_back(q % 2 == 0 ? wq : pf_scale(wq, -1), dv);
            }
        }
    return x;
}

namespace {

// canonical form: per level, monomial key -> combined LevelValue
using Canon = std::map<std::pair<std::vector<int>, unsigned>, SemicosimplicialDGLA::LevelValue>;

Canon canonical_level(const SemicosimplicialDGLA& v, const std::vector<std::pair<PolyForm, SemicosimplicialDGLA::LevelValue>>& lvl,
                      int n) {
    Canon out;
    for (const auto& [w, val] : lvl)
        for (const auto& [key, c] : w.terms) {
            auto it = out.find(key);
            if (it == out.end())
                out[key] = v.level_scale(val, c);
            else
                it->second = v.level_add(it->second, v.level_scale(val, c));
        }
    for (auto it = out.begin(); it != out.end();) {
        if (it->second.is_zero())
            it = out.erase(it);
        else
            ++it;
    }
    (void)n;
    return out;
}

}  // namespace

bool tw_equal(const TWElement& a, const TWElement& b) {
    if (a.level_cap != b.level_cap) return false;
    for (std::size_t n = 0; n < a.levels.size(); ++n) {
        Canon ca = canonical_level(*a.v, a.levels[n], static_cast<int>(n));
        Canon cb = canonical_level(*b.v, b.levels[n], static_cast<int>(n));
        if (ca.size() != cb.size()) return false;
        for (const auto& [k, val] : ca) {
            auto it = cb.find(k);
            if (it == cb.end() || !a.v->level_equal(val, it->second)) return false;
        }
    }
    return true;
}

bool tw_compatible(const TWElement& a) {
    for (int n = 1; n <= a.level_cap; ++n) {
        for (int k = 0; k <= n; ++k) {
            // (δ_k^* ⊗ Id) x_n vs (Id ⊗ δ_k) x_{n-1}
            std::vector<std::pair<PolyForm, SemicosimplicialDGLA::LevelValue>> lhs, rhs;
            for (const auto& [w, val] : a.levels[static_cast<std::size_t>(n)]) {
                PolyForm fw = pf_face(w, k);
                if (!fw.is_zero()) lhs.emplace_back(fw, val);
            }
            for (const auto& [w, val] : a.levels[static_cast<std::size_t>(n) - 1])
                rhs.emplace_back(w, a.v->coface(k, val));
            Canon cl = canonical_level(*a.v, lhs, n - 1);
            Canon cr = canonical_level(*a.v, rhs, n - 1);
            for (const auto& [key, val] : cl) {
                auto it = cr.find(key);
                SemicosimplicialDGLA::LevelValue other =
                    it == cr.end() ? a.v->zero_level(val.level) : it->second;
                if (!a.v->level_equal(val, other)) return false;
            }
            for (const auto& [key, val] : cr)
                if (!cl.count(key) && !val.is_zero()) return false;
        }
    }
    return true;
}

int tw_max_poly_degree(const TWElement& a) {
    int d = 0;
    for (const auto& lvl : a.levels)
        for (const auto& [w, val] : lvl) d = std::max(d, w.max_poly_degree());
    return d;
}

TWElement tw_bracket(const TWElement& a, const TWElement& b) {
    TWElement x = tw_zero(a.v, a.level_cap);
    for (std::size_t n = 0; n < a.levels.size(); ++n)
        for (const auto& [w1, v1] : a.levels[n])
            for (const auto& [w2, v2] : b.levels[n]) {
                // split by internal degree of the left value and dt-degree of
                // the right form: (ω⊗x)(η⊗y) = (-1)^{|x||η|} ωη ⊗ [x,y]
                for (const auto& [q2, w2q] : pf_by_degree(w2)) {
                    // split v1 by internal degree p
                    std::map<int, SemicosimplicialDGLA::LevelValue> v1_by_p;
                    for (const auto& [key, coords] : v1.chunks) {
                        auto [ti, p, wd] = key;
                        auto it = v1_by_p.find(p);
                        if (it == v1_by_p.end()) v1_by_p[p] = a.v->zero_level(v1.level);
                        v1_by_p[p].chunks[key] = coords;
                    }
                    for (const auto& [p1, v1p] : v1_by_p) {
                        auto br = a.v->level_bracket(v1p, v2);
                        if (br.is_zero()) continue;
                        PolyForm prod = pf_mul(w1, w2q);
                        if (prod.is_zero()) continue;
                        if ((p1 * q2) % 2) prod = pf_scale(prod, -1);
                        x.levels[n].emplace_back(prod, br);
                    }
                }
            }
    return x;
}

TWElement tw_lift(const SemicosimplicialDGLA& v, int cap, const HomElement& global_elem) {
    TWElement x = tw_zero(&v, cap);
    // level-0 value: restrictions of the global family to each V_{(h)}
    SemicosimplicialDGLA::LevelValue val0 = v.zero_level(0);
    auto t0 = v.tuples(0);
    for (std::size_t ti = 0; ti < t0.size(); ++ti) {
        int simplex = v.nerve().index_of(underlying_simplex(t0[ti]));
        const HomSystem& comp = *v.component(simplex);
        QVec coords = comp.coordinates(global_elem.restricted(comp.S()));
        if (!vec_is_zero(coords)) val0.chunks[{ti, global_elem.p, global_elem.w}] = coords;
    }
    SemicosimplicialDGLA::LevelValue cur = val0;
    for (int n = 0; n <= cap; ++n) {
        x.levels[static_cast<std::size_t>(n)].emplace_back(pf_one(n), cur);
        if (n < cap) cur = v.coface(0, cur);
    }
    return x;
}

TWElement tw_whitney(const SemicosimplicialDGLA& v, int cap, const SemicosimplicialDGLA::LevelValue& y) {
    const int m = y.level;
    TWElement x = tw_zero(&v, cap);
    for (int n = m; n <= cap; ++n) {
        // strictly increasing injections [m] → [n], given by their images
        std::vector<std::vector<int>> subsets;
        std::vector<int> cur;
        std::function<void(int)> rec = [&](int start) {
            if (static_cast<int>(cur.size()) == m + 1) {
                subsets.push_back(cur);
                return;
            }
            for (int i = start; i <= n; ++i) {
                cur.push_back(i);
                rec(i + 1);
                cur.pop_back();
            }
        };
        rec(0);
        for (const auto& img : subsets) {
            // Whitney elementary form of the face {i_0 < ... < i_m} of Δ^n,
            // in barycentric coordinates with t_0, dt_0 eliminated
            auto bary_t = [&](int i) {
                if (i == 0) {
                    PolyForm s = pf_one(n);
                    for (int j = 1; j <= n; ++j) s = pf_add(s, pf_scale(pf_var(n, j), -1));
                    return s;
                }
                return pf_var(n, i);
            };
            auto bary_dt = [&](int i) {
                if (i == 0) {
                    PolyForm s = pf_zero(n);
                    for (int j = 1; j <= n; ++j) s = pf_add(s, pf_scale(pf_dt(n, j), -1));
                    return s;
                }
                return pf_dt(n, i);
            };
            PolyForm omega = pf_zero(n);
            Q mfact = 1;
            for (int i = 2; i <= m; ++i) mfact *= i;
            for (int j = 0; j <= m; ++j) {
                PolyForm term = bary_t(img[static_cast<std::size_t>(j)]);
                for (int l = 0; l <= m; ++l) {
                    if (l == j) continue;
                    term = pf_mul(term, bary_dt(img[static_cast<std::size_t>(l)]));
                }
                omega = pf_add(omega, pf_scale(term, (j % 2 ? Q(-1) : Q(1)) * mfact));
            }
            if (omega.is_zero()) continue;
            // push y along the composite of cofaces missing the image
            SemicosimplicialDGLA::LevelValue val = y;
            for (int k = 0; k <= n; ++k)
                if (std::find(img.begin(), img.end(), k) == img.end()) val = v.coface(k, val);
            x.levels[static_cast<std::size_t>(n)].emplace_back(omega, val);
        }
    }
    return x;
}

// ---- the full-tuple Čech model ----

CechElement cech_zero(const SemicosimplicialDGLA* v, int cap) {
    CechElement x;
    x.v = v;
    x.level_cap = cap;
    for (int n = 0; n <= cap; ++n) x.levels.push_back(v->zero_level(n));
    return x;
}

CechElement cech_add(const CechElement& a, const CechElement& b) {
    CechElement x = a;
    for (std::size_t n = 0; n < x.levels.size(); ++n) x.levels[n] = a.v->level_add(a.levels[n], b.levels[n]);
    return x;
}

bool cech_equal(const CechElement& a, const CechElement& b) {
    for (std::size_t n = 0; n < a.levels.size(); ++n)
        if (!a.v->level_equal(a.levels[n], b.levels[n])) return false;
    return true;
}

CechElement cech_diff(const CechElement& a) {
    CechElement x = cech_zero(a.v, a.level_cap);
    for (int n = 0; n <= a.level_cap; ++n) {
        SemicosimplicialDGLA::LevelValue acc =
            a.v->level_scale(a.v->level_diff(a.levels[static_cast<std::size_t>(n)]), n % 2 == 0 ? 1 : -1);
        if (n >= 1)
            for (int i = 0; i <= n; ++i)
                acc = a.v->level_add(
                    acc, a.v->level_scale(a.v->coface(i, a.levels[static_cast<std::size_t>(n) - 1]),
                                          i % 2 == 0 ? 1 : -1));
        x.levels[static_cast<std::size_t>(n)] = std::move(acc);
    }
    return x;
}

CechElement whitney_integrate(const TWElement& a) {
    CechElement x = cech_zero(a.v, a.level_cap);
    for (int n = 0; n <= a.level_cap; ++n)
        for (const auto& [w, val] : a.levels[static_cast<std::size_t>(n)]) {
            Q c = pf_integrate_top(w);
            if (c != 0)
                x.levels[static_cast<std::size_t>(n)] =
                    a.v->level_add(x.levels[static_cast<std::size_t>(n)], a.v->level_scale(val, c));
        }
    return x;
}

}  // namespace dgn
