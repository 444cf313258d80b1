#include "dgnerve/amod.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dgn {

namespace {

Multideg zero_deg_of(const Scheme& s) { return deg_zero(s.lattice_rank); }

// C_α^op ⊗ A: the oriented simplicial cochain complex of one simplex in
// nonpositive cohomological degrees, scalars extended to `ring`
ModulePtr simplex_cochain_module(const SimplicialChainComplex& c, RingPtr ring) {
    auto m = std::make_shared<GradedDGModule>(ring);
    const int top = c.top_degree();
    Multideg zero = deg_zero(ring->lattice_rank());
    for (int r = 0; r <= top; ++r)
        m->set_generators(-r, std::vector<Multideg>(c.faces[static_cast<std::size_t>(r)].size(), zero));
    for (int r = 1; r <= top; ++r) {
        const ZMat& b = c.boundary[static_cast<std::size_t>(r)];
        QMat d(b.size(), b[0].size());
        for (std::size_t i = 0; i < b.size(); ++i)
            for (std::size_t j = 0; j < b[i].size(); ++j) d.at(i, j) = Q(b[i][j]);
        m->set_diff(-r, d);
    }
    return m->finalize();
}

int face_position(const std::vector<Simplex>& faces, const Simplex& f) {
    for (std::size_t i = 0; i < faces.size(); ++i)
        if (faces[i] == f) return static_cast<int>(i);
    throw std::logic_error("face_position: face not found");
}

}  // namespace

// ---- Scheme ----

Scheme Scheme::from_opens(const CoverDescription& cover, int lattice_rank,
                          const std::vector<std::vector<Multideg>>& open_gens) {
    if (open_gens.size() != cover.open_names.size())
        throw std::invalid_argument("Scheme: one generator list per open required");
    Scheme s;
    s.lattice_rank = lattice_rank;
    s.nerve = std::make_shared<Nerve>(Nerve::build(cover));
    for (int i = 0; i < s.nerve->size(); ++i) {
        const Simplex& a = s.nerve->simplex(i);
        std::vector<Multideg> gens;
        for (int h : a)
            for (const Multideg& g : open_gens[static_cast<std::size_t>(h)]) {
                if (static_cast<int>(g.size()) != lattice_rank)
                    throw std::invalid_argument("Scheme: generator rank mismatch");
                if (std::find(gens.begin(), gens.end(), g) == gens.end()) gens.push_back(g);
            }
        std::ostringstream name;
        name << "A_{";
        for (std::size_t t = 0; t < a.size(); ++t) name << (t ? "," : "") << a[t];
        name << "}";
        s.rings.push_back(make_ring(lattice_rank, gens, name.str()));
    }
    return s;
}

Scheme Scheme::builtin(const std::string& name) {
    CoverDescription c;
    if (name == "A1") {
        c.open_names = {"U0"};
        return from_opens(c, 1, {{{1}}});
    }
    if (name == "P1") {
        c.open_names = {"U0", "U1"};
        return from_opens(c, 1, {{{1}}, {{-1}}});
    }
    if (name == "P2") {
        c.open_names = {"U0", "U1", "U2"};
        return from_opens(c, 2,
                          {{{1, 0}, {0, 1}}, {{-1, 0}, {-1, 1}}, {{0, -1}, {1, -1}}});
    }
    throw std::invalid_argument("Scheme::builtin: unknown scheme " + name);
}

RingMap Scheme::chart_map(int a, int b) const {
    if (!nerve->leq(a, b)) throw std::invalid_argument("Scheme::chart_map: not comparable");
    return ring_map(ring(a), ring(b));
}

// ---- AModule ----

AModule::AModule(NervePtr nerve, std::vector<RingPtr> rings)
    : nerve_(std::move(nerve)), rings_(std::move(rings)) {
    if (static_cast<int>(rings_.size()) != nerve_->size())
        throw std::invalid_argument("AModule: one ring per simplex required");
    modules_.resize(rings_.size());
}

void AModule::set_module(int alpha, ModulePtr m) {
    if (final_) throw std::logic_error("AModule: finalized");
    modules_[static_cast<std::size_t>(alpha)] = std::move(m);
}

void AModule::set_structure_map(int a, int b, ModMap m) {
    if (final_) throw std::logic_error("AModule: finalized");
    if (!nerve_->leq(a, b) || a == b) throw std::invalid_argument("AModule: structure map needs a < b");
    maps_[{a, b}] = std::move(m);
}

AModulePtr AModule::finalize() {
    if (final_) return shared_from_this();
    for (std::size_t i = 0; i < modules_.size(); ++i)
        if (!modules_[i]) throw std::invalid_argument("AModule: missing module at some simplex");
    final_ = true;
    auto idxs = nerve_->all_indices();
    // precompute identities and composite maps, then validate path independence
    for (int a : idxs) (void)map(a, a);
    for (auto [a, b] : nerve_->comparable_pairs(idxs)) (void)map(a, b);
    for (auto [a, b] : nerve_->comparable_pairs(idxs)) {
        const ModMap& m = map(a, b);
        if (m.p() != 0 || m.w() != deg_zero(rings_[0]->lattice_rank()))
            throw std::invalid_argument("AModule: structure maps must have degree (0,0)");
        if (!m.is_chain_map()) throw std::invalid_argument("AModule: structure map is not a chain map");
    }
    // cocycle condition on all chains a <= b <= c
    for (auto [a, b] : nerve_->comparable_pairs(idxs))
        for (int c : idxs) {
            if (c == a || c == b || !nerve_->leq(b, c)) continue;
            if (!maps_equal(ModMap::compose(map(b, c), map(a, b)), map(a, c)))
                throw std::invalid_argument("AModule: cocycle condition fails");
        }
    return shared_from_this();
}

const ModMap& AModule::map(int a, int b) const {
    if (a == b) {
        auto it = maps_.find({a, a});
        if (it == maps_.end()) it = maps_.emplace(std::make_pair(a, a), ModMap::identity(modules_[static_cast<std::size_t>(a)])).first;
        return it->second;
    }
    auto it = maps_.find({a, b});
    if (it != maps_.end()) return it->second;
    if (!nerve_->leq(a, b)) throw std::invalid_argument("AModule::map: not comparable");
    // route through the first covering step a ⋖ c <= b
    const Simplex& sa = nerve_->simplex(a);
    const Simplex& sb = nerve_->simplex(b);
    Simplex diff;
    std::set_difference(sb.begin(), sb.end(), sa.begin(), sa.end(), std::back_inserter(diff));
    Simplex sc = sa;
    sc.push_back(diff.front());
    std::sort(sc.begin(), sc.end());
    int c = nerve_->index_of(sc);
    ModMap composite = ModMap::compose(map(c, b), map(a, c));
    return maps_.emplace(std::make_pair(a, b), std::move(composite)).first->second;
}

ModMap AModule::base_changed_map(int a, int b) const {
    RingMap rm = ring_map(ring(a), ring(b));
    ModulePtr src = base_change(*module(a), rm);
    const ModMap& adj = map(a, b);
    ModMap out(src, module(b), 0, deg_zero(rings_[0]->lattice_rank()));
    for (int i = module(a)->imin(); i <= module(a)->imax(); ++i) out.set_block(i, adj.block(i));
    out.finalize();
    return out;
}

void AModuleMap::validate() const {
    if (!src || !dst) throw std::invalid_argument("AModuleMap: null endpoint");
    if (src->nerve_ptr() != dst->nerve_ptr()) throw std::invalid_argument("AModuleMap: nerve mismatch");
    const Nerve& n = src->nerve();
    if (static_cast<int>(components.size()) != n.size())
        throw std::invalid_argument("AModuleMap: one component per simplex required");
    for (int i = 0; i < n.size(); ++i) {
        const ModMap& c = components[static_cast<std::size_t>(i)];
        if (c.src() != src->module(i) || c.dst() != dst->module(i))
            throw std::invalid_argument("AModuleMap: component endpoints mismatch");
        if (!c.is_chain_map()) throw std::invalid_argument("AModuleMap: component is not a chain map");
    }
    for (auto [a, b] : n.comparable_pairs(n.all_indices())) {
        ModMap lhs = ModMap::compose(components[static_cast<std::size_t>(b)], src->map(a, b));
        ModMap rhs = ModMap::compose(dst->map(a, b), components[static_cast<std::size_t>(a)]);
        if (!maps_equal(lhs, rhs)) throw std::invalid_argument("AModuleMap: does not commute with structure maps");
    }
}

// ---- sheaf descriptions ----

SheafDescription SheafDescription::structure_sheaf(const Scheme& s) {
    SheafDescription d;
    d.kind = Kind::LineBundleSum;
    LineBundleData lb;
    for (int h = 0; h < s.nerve->num_opens(); ++h) lb.open_deg[h] = zero_deg_of(s);
    d.summands.push_back(lb);
    return d;
}

SheafDescription SheafDescription::line_bundle_sum(const std::vector<std::vector<Multideg>>& open_degs) {
    SheafDescription d;
    d.kind = Kind::LineBundleSum;
    for (const auto& degs : open_degs) {
        LineBundleData lb;
        for (std::size_t h = 0; h < degs.size(); ++h) lb.open_deg[static_cast<int>(h)] = degs[h];
        d.summands.push_back(std::move(lb));
    }
    return d;
}

SheafDescription SheafDescription::standard_twists(const Scheme& s, const std::vector<int>& ds) {
    std::vector<std::vector<Multideg>> open_degs;
    for (int d : ds) {
        std::vector<Multideg> degs;
        for (int h = 0; h < s.nerve->num_opens(); ++h) {
            if (h == 0 || d == 0) {
                degs.push_back(deg_zero(s.lattice_rank));
                continue;
            }
            int a = s.nerve->index_of({h});
            if (s.ring(a)->gens().empty()) throw std::invalid_argument("standard_twists: chart has no generators");
            Multideg g = s.ring(a)->gens().front();
            Multideg dd = deg_zero(s.lattice_rank);
            for (int t = 0; t < s.lattice_rank; ++t) dd[static_cast<std::size_t>(t)] = -d * g[static_cast<std::size_t>(t)];
            degs.push_back(dd);
        }
        open_degs.push_back(degs);
    }
    return line_bundle_sum(open_degs);
}

SheafDescription SheafDescription::skyscraper(const Scheme& s, int chart_open) {
    SheafDescription d;
    d.kind = Kind::Skyscraper;
    d.sky.chart_open = chart_open;
    // vanishing ideal of the chart origin: all monoid generators of the chart
    int a = s.nerve->index_of({chart_open});
    d.sky.ideal_gens = s.ring(a)->gens();
    return d;
}

Multideg summand_degree(const LineBundleData& lb, const Nerve& nerve, int alpha) {
    return lb.open_deg.at(nerve.simplex(alpha).front());
}

namespace {

Multideg summand_degree_impl(const LineBundleData& lb, const Simplex& alpha) {
    return lb.open_deg.at(alpha.front());
}

}  // namespace

AModulePtr upsilon_star(const SheafDescription& sheaf, const Scheme& scheme) {
    const Nerve& n = *scheme.nerve;
    auto out = std::make_shared<AModule>(scheme.nerve, scheme.rings);
    Multideg zero = zero_deg_of(scheme);

    if (sheaf.kind == SheafDescription::Kind::Explicit) {
        if (!sheaf.explicit_mod) throw std::invalid_argument("upsilon_star: missing explicit module");
        return sheaf.explicit_mod;
    }

    if (sheaf.kind == SheafDescription::Kind::LineBundleSum) {
        if (sheaf.summands.empty()) throw std::invalid_argument("upsilon_star: empty sum");
        for (int a = 0; a < n.size(); ++a) {
            std::vector<Multideg> degs;
            for (const auto& lb : sheaf.summands) degs.push_back(summand_degree_impl(lb, n.simplex(a)));
            auto m = std::make_shared<GradedDGModule>(scheme.ring(a));
            m->set_generators(0, degs);
            out->set_module(a, m->finalize());
        }
        for (auto [a, b] : n.hasse_pairs(n.all_indices())) {
            ModMap q(out->module(a), out->module(b), 0, zero);
            QMat blk = QMat::identity(sheaf.summands.size());
            q.set_block(0, blk);
            try {
                q.finalize();
            } catch (const std::exception&) {
                throw std::invalid_argument("upsilon_star: transition monomial not regular on an overlap");
            }
            out->set_structure_map(a, b, std::move(q));
        }
        return out->finalize();
    }

    // skyscraper at the torus-fixed origin of one chart
    int h0 = sheaf.sky.chart_open;
    for (int a = 0; a < n.size(); ++a) {
        const Simplex& s = n.simplex(a);
        bool carries = std::find(s.begin(), s.end(), h0) != s.end();
        if (!carries) {
            out->set_module(a, zero_module(scheme.ring(a)));
            continue;
        }
        auto m = std::make_shared<GradedDGModule>(scheme.ring(a));
        m->set_generators(0, {zero});
        for (const Multideg& g : sheaf.sky.ideal_gens) m->add_relation(0, Relation{g, {Q(1)}});
        out->set_module(a, m->finalize());
    }
    for (auto [a, b] : n.hasse_pairs(n.all_indices())) {
        ModMap q(out->module(a), out->module(b), 0, zero);
        if (!out->module(a)->is_zero_module() && !out->module(b)->is_zero_module()) {
            QMat blk(1, 1);
            blk.at(0, 0) = 1;
            q.set_block(0, blk);
        }
        q.finalize();
        out->set_structure_map(a, b, std::move(q));
    }
    return out->finalize();
}

// ---- quasi-coherence ----

QcohReport check_quasi_coherent(const AModule& f, const DegreeBox& box) {
    QcohReport r;
    const Nerve& n = f.nerve();
    for (auto [a, b] : n.comparable_pairs(n.all_indices())) {
        QisVerdict v = is_quasi_iso(f.base_changed_map(a, b), box);
        if (v.verdict == Verdict::No) {
            r.verdict = Verdict::No;
            r.witness = std::make_pair(a, b);
            return r;
        }
        if (v.verdict == Verdict::Inconclusive) r.verdict = Verdict::Inconclusive;
    }
    return r;
}

// ---- latching ----

LatchingResult latching(const AModule& f, int alpha) {
    const Nerve& n = f.nerve();
    LatchingResult out;
    out.subfaces = n.strict_subfaces(alpha);
    RingPtr ra = f.ring(alpha);
    Multideg zero = deg_zero(ra->lattice_rank());

    if (out.subfaces.empty()) {
        out.module = zero_module(ra);
        ModMap cmp(out.module, f.module(alpha), 0, zero);
        cmp.finalize();
        out.comparison = std::move(cmp);
        return out;
    }

    PosetDiagram d;
    std::map<int, std::size_t> pos;
    for (std::size_t k = 0; k < out.subfaces.size(); ++k) {
        pos[out.subfaces[k]] = k;
        d.nodes.push_back(base_change(*f.module(out.subfaces[k]), ring_map(f.ring(out.subfaces[k]), ra)));
    }
    for (auto [g1, g2] : n.comparable_pairs(out.subfaces)) {
        const ModMap& adj = f.map(g1, g2);
        ModMap m(d.nodes[pos[g1]], d.nodes[pos[g2]], 0, zero);
        for (int i = f.module(g1)->imin(); i <= f.module(g1)->imax(); ++i) m.set_block(i, adj.block(i));
        m.finalize();
        d.maps[{static_cast<int>(pos[g1]), static_cast<int>(pos[g2])}] = std::move(m);
    }
    ColimitResult col = poset_colimit(d);
    out.module = col.module;
    out.injections = col.injections;

    // comparison L_α F -> F_α from the universal cocone of structure maps
    ModMap cmp(col.module, f.module(alpha), 0, zero);
    for (int i = col.module->imin(); i <= col.module->imax(); ++i) {
        QMat blk(f.module(alpha)->gens(i).size(), col.module->gens(i).size());
        std::size_t off = 0;
        for (std::size_t k = 0; k < out.subfaces.size(); ++k) {
            QMat b = f.map(out.subfaces[k], alpha).block(i);
            for (std::size_t c = 0; c < d.nodes[k]->gens(i).size(); ++c)
                for (std::size_t rrow = 0; rrow < blk.rows(); ++rrow) blk.at(rrow, off + c) = b.at(rrow, c);
            off += d.nodes[k]->gens(i).size();
        }
        cmp.set_block(i, blk);
    }
    cmp.finalize();
    out.comparison = std::move(cmp);
    return out;
}

// ---- cofibrancy ----

namespace {

// Search for a degree-0 left inverse σ: F -> L with σ∘λ = id, degreewise
// A-linear. Exact: homogeneous maps on generators parametrize all of them.
bool find_left_inverse(const GradedDGModule& l, const GradedDGModule& f, const ModMap& lambda) {
    const MonomialRing& ring = *f.ring();
    struct Key {
        int i;
        std::size_t k, j;
    };
    std::vector<Key> unknowns;
    std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> idx;
    int lo = std::min(l.imin(), f.imin()), hi = std::max(l.imax(), f.imax());
    for (int i = lo; i <= hi; ++i)
        for (std::size_t k = 0; k < l.gens(i).size(); ++k)
            for (std::size_t j = 0; j < f.gens(i).size(); ++j)
                if (ring.contains(deg_sub(f.gens(i)[j], l.gens(i)[k]))) {
                    idx[{i, k, j}] = unknowns.size();
                    unknowns.push_back({i, k, j});
                }
    QMat rows(0, unknowns.size());
    QVec rhs;
    auto entry = [&](int i, std::size_t k, std::size_t j) -> long {
        auto it = idx.find({i, k, j});
        return it == idx.end() ? -1 : static_cast<long>(it->second);
    };
    // (A) σ kills relations of F, mod relations of L
    for (int i = lo; i <= hi; ++i)
        for (const Relation& r : f.relations(i)) {
            const Piece& pc = l.piece(i, r.deg);
            // ambient coordinate at L-generator k: sum_j r_j σ_kj
            // project through canon and require zero
            std::vector<QVec> amb_rows(pc.amb.size(), QVec(unknowns.size(), 0));
            for (std::size_t t = 0; t < pc.amb.size(); ++t) {
                std::size_t k = static_cast<std::size_t>(pc.amb[t]);
                for (std::size_t j = 0; j < r.coeffs.size(); ++j) {
                    if (r.coeffs[j] == 0) continue;
                    long u = entry(i, k, j);
                    if (u >= 0) amb_rows[t][static_cast<std::size_t>(u)] += r.coeffs[j];
                }
            }
            // canon: subtract pivot rows of the relation space
            for (std::size_t rr = 0; rr < pc.pivots.size(); ++rr) {
                QVec pivot_row = amb_rows[pc.pivots[rr]];
                for (std::size_t t = 0; t < pc.amb.size(); ++t) {
                    const Q& c = pc.rel.at(rr, t);
                    if (c != 0)
                        for (std::size_t u = 0; u < unknowns.size(); ++u) amb_rows[t][u] -= c * pivot_row[u];
                }
            }
            for (std::size_t t = 0; t < pc.amb.size(); ++t) {
                bool nz = false;
                for (const Q& x : amb_rows[t])
                    if (x != 0) nz = true;
                if (nz) {
                    rows.append_row(amb_rows[t]);
                    rhs.push_back(0);
                }
            }
        }
    // (B) σ(λ(g)) = g mod relations of L
    for (int i = lo; i <= hi; ++i) {
        QMat lb = lambda.block(i);
        for (std::size_t g = 0; g < l.gens(i).size(); ++g) {
            const Multideg& dg = l.gens(i)[g];
            const Piece& pc = l.piece(i, dg);
            std::vector<QVec> amb_rows(pc.amb.size(), QVec(unknowns.size(), 0));
            QVec target(pc.amb.size(), 0);
            for (std::size_t t = 0; t < pc.amb.size(); ++t) {
                std::size_t k = static_cast<std::size_t>(pc.amb[t]);
                if (k == g) target[t] = 1;
                for (std::size_t j = 0; j < f.gens(i).size(); ++j) {
                    const Q& lam = lb.at(j, g);
                    if (lam == 0) continue;
                    long u = entry(i, k, j);
                    if (u >= 0) amb_rows[t][static_cast<std::size_t>(u)] += lam;
                }
            }
            QVec tcanon = pc.canon(target);
            for (std::size_t rr = 0; rr < pc.pivots.size(); ++rr) {
                QVec pivot_row = amb_rows[pc.pivots[rr]];
                for (std::size_t t = 0; t < pc.amb.size(); ++t) {
                    const Q& c = pc.rel.at(rr, t);
                    if (c != 0)
                        for (std::size_t u = 0; u < unknowns.size(); ++u) amb_rows[t][u] -= c * pivot_row[u];
                }
            }
            for (std::size_t t = 0; t < pc.amb.size(); ++t) {
                bool nz = !(tcanon[t] == 0);
                for (const Q& x : amb_rows[t])
                    if (x != 0) nz = true;
                if (nz) {
                    rows.append_row(amb_rows[t]);
                    rhs.push_back(tcanon[t]);
                }
            }
        }
    }
    return solve(rows, rhs).has_value();
}

// cokernel of λ as a presented module
ModulePtr coker_module(const GradedDGModule& f, const ModMap& lambda) {
    auto c = std::make_shared<GradedDGModule>(f.ring());
    for (int i = f.imin(); i <= f.imax(); ++i) {
        c->set_generators(i, f.gens(i));
        for (const Relation& r : f.relations(i)) c->add_relation(i, r);
        QMat d = f.diff_block(i);
        if (d.rows() > 0 && d.cols() > 0) c->set_diff(i, d);
    }
    const GradedDGModule& l = *lambda.src();
    for (int i = l.imin(); i <= l.imax(); ++i) {
        QMat b = lambda.block(i);
        for (std::size_t g = 0; g < l.gens(i).size(); ++g) {
            Relation r{l.gens(i)[g], b.col(g)};
            if (!vec_is_zero(r.coeffs)) c->add_relation(i, std::move(r));
        }
    }
    return c->finalize();
}

}  // namespace

CofibrancyReport check_cofibrant(const AModule& f, const DegreeBox& box) {
    CofibrancyReport rep;
    const Nerve& n = f.nerve();
    rep.per_simplex.resize(static_cast<std::size_t>(n.size()));
    for (int a = 0; a < n.size(); ++a) {
        const GradedDGModule& fa = *f.module(a);
        for (int i = fa.imin(); i <= fa.imax(); ++i)
            if (!fa.relations(i).empty()) rep.pointwise_cofibrant = false;  // free pieces certificate

        LatchingResult lat = latching(f, a);
        auto& per = rep.per_simplex[static_cast<std::size_t>(a)];
        per.split_injective = find_left_inverse(*lat.module, fa, lat.comparison);
        if (!per.split_injective) {
            rep.verdict = Verdict::No;
            if (rep.witness < 0) rep.witness = a;
            continue;
        }
        // cokernel: greedy generator reduction, then free comparison in box
        ModulePtr ck = coker_module(fa, lat.comparison);
        std::vector<std::pair<int, std::size_t>> basis;
        for (int i = ck->imin(); i <= ck->imax(); ++i) {
            for (std::size_t g = 0; g < ck->gens(i).size(); ++g) {
                const Multideg& dg = ck->gens(i)[g];
                const Piece& pc = ck->piece(i, dg);
                // e_g in span(relations + other chosen/remaining generators)?
                QMat rows = pc.rel;
                for (std::size_t t = 0; t < pc.amb.size(); ++t) {
                    if (static_cast<std::size_t>(pc.amb[t]) == g) continue;
                    QVec unit(pc.amb.size(), 0);
                    unit[t] = 1;
                    rows.append_row(unit);
                }
                QVec eg(pc.amb.size(), 0);
                for (std::size_t t = 0; t < pc.amb.size(); ++t)
                    if (static_cast<std::size_t>(pc.amb[t]) == g) eg[t] = 1;
                QMat sys = rows.transposed();
                if (!solve(sys, eg).has_value()) basis.emplace_back(i, g);
            }
        }
        per.coker_free = true;
        DegreeBox b = box.policy == DegreeBox::Policy::AutoStabilize ? box.expanded(1) : box;
        for (const Multideg& m : b.points()) {
            for (int i = ck->imin(); i <= ck->imax() && per.coker_free; ++i) {
                int expected = 0;
                std::vector<QVec> colvecs;
                for (auto [bi, bg] : basis) {
                    if (bi != i) continue;
                    const Multideg& dg = ck->gens(i)[bg];
                    Multideg u = deg_sub(m, dg);
                    if (!ck->ring()->contains(u)) continue;
                    ++expected;
                    const Piece& pc = ck->piece(i, m);
                    QVec amb(pc.amb.size(), 0);
                    for (std::size_t t = 0; t < pc.amb.size(); ++t)
                        if (static_cast<std::size_t>(pc.amb[t]) == bg) amb[t] = 1;
                    colvecs.push_back(pc.coords(pc.canon(amb)));
                }
                if (expected != ck->piece_dim(i, m)) {
                    per.coker_free = false;
                    break;
                }
                QMat mat(static_cast<std::size_t>(ck->piece_dim(i, m)), colvecs.size());
                for (std::size_t c = 0; c < colvecs.size(); ++c)
                    for (std::size_t rr = 0; rr < colvecs[c].size(); ++rr) mat.at(rr, c) = colvecs[c][rr];
                if (rank(mat) != colvecs.size()) {
                    per.coker_free = false;
                    break;
                }
            }
            if (!per.coker_free) break;
        }
        for (auto [bi, bg] : basis) per.coker_basis.emplace_back(bi, ck->gens(bi)[bg]);
        if (!per.coker_free) {
            rep.verdict = Verdict::No;
            if (rep.witness < 0) rep.witness = a;
        }
    }
    return rep;
}

// ---- replacements ----

Replacement qx_replacement(const Scheme& scheme) {
    const Nerve& n = *scheme.nerve;
    Multideg zero = zero_deg_of(scheme);
    auto q = std::make_shared<AModule>(scheme.nerve, scheme.rings);
    std::vector<SimplicialChainComplex> cxs;
    for (int a = 0; a < n.size(); ++a) {
        cxs.push_back(chain_complex(n.simplex(a), n));
        q->set_module(a, simplex_cochain_module(cxs.back(), scheme.ring(a)));
    }
    for (auto [a, b] : n.hasse_pairs(n.all_indices())) {
        ModMap inc(q->module(a), q->module(b), 0, zero);
        for (int r = 0; r <= cxs[static_cast<std::size_t>(a)].top_degree(); ++r) {
            QMat blk(cxs[static_cast<std::size_t>(b)].faces[static_cast<std::size_t>(r)].size(),
                     cxs[static_cast<std::size_t>(a)].faces[static_cast<std::size_t>(r)].size());
            for (std::size_t j = 0; j < cxs[static_cast<std::size_t>(a)].faces[static_cast<std::size_t>(r)].size(); ++j)
                blk.at(static_cast<std::size_t>(face_position(
                           cxs[static_cast<std::size_t>(b)].faces[static_cast<std::size_t>(r)],
                           cxs[static_cast<std::size_t>(a)].faces[static_cast<std::size_t>(r)][j])),
                       j) = 1;
            inc.set_block(-r, blk);
        }
        inc.finalize();
        q->set_structure_map(a, b, std::move(inc));
    }
    AModulePtr qq = q->finalize();

    Replacement rep;
    rep.q = qq;
    rep.target = upsilon_star(SheafDescription::structure_sheaf(scheme), scheme);
    rep.augmentation.src = qq;
    rep.augmentation.dst = rep.target;
    for (int a = 0; a < n.size(); ++a) {
        ModMap pi(qq->module(a), rep.target->module(a), 0, zero);
        QMat blk(1, cxs[static_cast<std::size_t>(a)].faces[0].size());
        for (std::size_t j = 0; j < blk.cols(); ++j) blk.at(0, j) = 1;
        pi.set_block(0, blk);
        pi.finalize();
        rep.augmentation.components.push_back(std::move(pi));
    }
    rep.augmentation.validate();
    return rep;
}

Replacement locally_free_replacement(const SheafDescription& sheaf, const Scheme& scheme) {
    if (sheaf.kind != SheafDescription::Kind::LineBundleSum)
        throw std::invalid_argument("locally_free_replacement: input must be pointwise free (line bundle sum)");
    const Nerve& n = *scheme.nerve;
    Multideg zero = zero_deg_of(scheme);
    const std::size_t s = sheaf.summands.size();

    auto q = std::make_shared<AModule>(scheme.nerve, scheme.rings);
    std::vector<SimplicialChainComplex> cxs;
    for (int a = 0; a < n.size(); ++a) {
        cxs.push_back(chain_complex(n.simplex(a), n));
        auto m = std::make_shared<GradedDGModule>(scheme.ring(a));
        const auto& cx = cxs.back();
        for (int r = 0; r <= cx.top_degree(); ++r) {
            std::vector<Multideg> degs;
            for (std::size_t fidx = 0; fidx < cx.faces[static_cast<std::size_t>(r)].size(); ++fidx)
                for (std::size_t t = 0; t < s; ++t)
                    degs.push_back(summand_degree_impl(sheaf.summands[t], n.simplex(a)));
            m->set_generators(-r, degs);
        }
        for (int r = 1; r <= cx.top_degree(); ++r) {
            const ZMat& b = cx.boundary[static_cast<std::size_t>(r)];
            QMat d(b.size() * s, b[0].size() * s);
            for (std::size_t i = 0; i < b.size(); ++i)
                for (std::size_t j = 0; j < b[i].size(); ++j)
                    if (b[i][j] != 0)
                        for (std::size_t t = 0; t < s; ++t) d.at(i * s + t, j * s + t) = Q(b[i][j]);
            m->set_diff(-r, d);
        }
        q->set_module(a, m->finalize());
    }
    for (auto [a, b] : n.hasse_pairs(n.all_indices())) {
        ModMap inc(q->module(a), q->module(b), 0, zero);
        const auto& ca = cxs[static_cast<std::size_t>(a)];
        const auto& cb = cxs[static_cast<std::size_t>(b)];
        for (int r = 0; r <= ca.top_degree(); ++r) {
            QMat blk(cb.faces[static_cast<std::size_t>(r)].size() * s, ca.faces[static_cast<std::size_t>(r)].size() * s);
            for (std::size_t j = 0; j < ca.faces[static_cast<std::size_t>(r)].size(); ++j) {
                std::size_t row = static_cast<std::size_t>(
                    face_position(cb.faces[static_cast<std::size_t>(r)], ca.faces[static_cast<std::size_t>(r)][j]));
                for (std::size_t t = 0; t < s; ++t) blk.at(row * s + t, j * s + t) = 1;
            }
            inc.set_block(-r, blk);
        }
        try {
            inc.finalize();
        } catch (const std::exception&) {
            throw std::invalid_argument("locally_free_replacement: transition not regular on an overlap");
        }
        q->set_structure_map(a, b, std::move(inc));
    }
    AModulePtr qq = q->finalize();

    Replacement rep;
    rep.q = qq;
    rep.target = upsilon_star(sheaf, scheme);
    rep.augmentation.src = qq;
    rep.augmentation.dst = rep.target;
    for (int a = 0; a < n.size(); ++a) {
        ModMap pi(qq->module(a), rep.target->module(a), 0, zero);
        QMat blk(s, cxs[static_cast<std::size_t>(a)].faces[0].size() * s);
        for (std::size_t j = 0; j < cxs[static_cast<std::size_t>(a)].faces[0].size(); ++j)
            for (std::size_t t = 0; t < s; ++t) blk.at(t, j * s + t) = 1;
        pi.set_block(0, blk);
        pi.finalize();
        rep.augmentation.components.push_back(std::move(pi));
    }
    rep.augmentation.validate();
    return rep;
}

// ---- general cofibrant replacement ----

namespace {

struct BuildState {
    // raw data for the Q_α being built
    std::map<int, std::vector<Multideg>> gens;
    std::map<int, std::vector<Relation>> rels;
    std::map<int, QMat> diff;
    std::map<int, QMat> eps;  // blocks of ε: Q_α -> F_α

    ModulePtr materialize(RingPtr ring) const {
        auto m = std::make_shared<GradedDGModule>(ring);
        for (const auto& [i, g] : gens)
            if (!g.empty()) m->set_generators(i, g);
        for (const auto& [i, rs] : rels)
            for (const Relation& r : rs) {
                // attached generators never occur in latching relations
                Relation padded = r;
                padded.coeffs.resize(gens.at(i).size(), Q(0));
                m->add_relation(i, padded);
            }
        for (const auto& [i, d] : diff)
            if (d.rows() > 0 && d.cols() > 0) m->set_diff(i, d);
        return m->finalize();
    }

    ModMap eps_map(ModulePtr q, ModulePtr f, const Multideg& zero) const {
        ModMap e(q, f, 0, zero);
        for (const auto& [i, b] : eps)
            if (b.rows() > 0 && b.cols() > 0) e.set_block(i, b);
        e.finalize();
        return e;
    }
};

}  // namespace

Replacement cofibrant_replace(AModulePtr f, const DegreeBox& box, int depth_cap, ReplaceDiagnostics* diag) {
    const Nerve& n = f->nerve();
    Multideg zero = deg_zero(f->ring(0)->lattice_rank());
    std::vector<RingPtr> rings;
    for (int a = 0; a < n.size(); ++a) rings.push_back(f->ring(a));

    auto q = std::make_shared<AModule>(f->nerve_ptr(), rings);
    std::vector<ModMap> eps_components(static_cast<std::size_t>(n.size()));
    std::map<std::pair<int, int>, ModMap> struct_maps;
    ReplaceDiagnostics local;
    ReplaceDiagnostics& dg = diag ? *diag : local;

    // process simplices by increasing degree (the stored order)
    std::vector<ModulePtr> built(static_cast<std::size_t>(n.size()));
    for (int a = 0; a < n.size(); ++a) {
        RingPtr ra = f->ring(a);
        ModulePtr fa = f->module(a);

        // latching of the partially built Q at α
        auto subs = n.strict_subfaces(a);
        PosetDiagram d;
        std::map<int, std::size_t> pos;
        for (std::size_t k = 0; k < subs.size(); ++k) {
            pos[subs[k]] = k;
            d.nodes.push_back(base_change(*built[static_cast<std::size_t>(subs[k])], ring_map(rings[static_cast<std::size_t>(subs[k])], ra)));
        }
        for (auto [g1, g2] : n.comparable_pairs(subs)) {
            const ModMap& adj = struct_maps.at({g1, g2});
            ModMap m(d.nodes[pos[g1]], d.nodes[pos[g2]], 0, zero);
            for (int i = built[static_cast<std::size_t>(g1)]->imin(); i <= built[static_cast<std::size_t>(g1)]->imax(); ++i)
                m.set_block(i, adj.block(i));
            m.finalize();
            d.maps[{static_cast<int>(pos[g1]), static_cast<int>(pos[g2])}] = std::move(m);
        }

        BuildState st;
        ModulePtr latch;
        std::vector<ModMap> latch_inj;
        if (!subs.empty()) {
            ColimitResult col = poset_colimit(d);
            latch = col.module;
            latch_inj = col.injections;
            for (int i = latch->imin(); i <= latch->imax(); ++i) {
                st.gens[i] = latch->gens(i);
                for (const Relation& r : latch->relations(i)) st.rels[i].push_back(r);
                QMat dd = latch->diff_block(i);
                if (dd.rows() > 0 && dd.cols() > 0) st.diff[i] = dd;
                // ε on the latching part: composite q_γα-after-π_γ per node
                QMat eb(fa->gens(i).size(), latch->gens(i).size());
                std::size_t off = 0;
                for (std::size_t k = 0; k < subs.size(); ++k) {
                    ModMap comp = ModMap::compose(f->map(subs[k], a), eps_components[static_cast<std::size_t>(subs[k])]);
                    QMat cb = comp.block(i);
                    for (std::size_t c = 0; c < d.nodes[k]->gens(i).size(); ++c)
                        for (std::size_t r = 0; r < eb.rows(); ++r) eb.at(r, off + c) = cb.at(r, c);
                    off += d.nodes[k]->gens(i).size();
                }
                st.eps[i] = eb;
            }
        } else {
            latch = zero_module(ra);
        }

        // step 1: disk attachments making ε degreewise surjective
        for (int i = fa->imin(); i <= fa->imax(); ++i) {
            for (std::size_t t = 0; t < fa->gens(i).size(); ++t) {
                const Multideg& dt = fa->gens(i)[t];
                // g' in degree i mapping to the generator, g = d(g') in i+1
                st.gens[i].push_back(dt);
                st.gens[i + 1].push_back(dt);
                std::size_t gp = st.gens[i].size() - 1;
                std::size_t gq = st.gens[i + 1].size() - 1;
                auto fix_shapes = [&](int deg) {
                    QMat old = st.diff.count(deg) ? st.diff[deg] : QMat(0, 0);
                    QMat next(st.gens[deg + 1].size(), st.gens[deg].size());
                    for (std::size_t r = 0; r < old.rows(); ++r)
                        for (std::size_t c = 0; c < old.cols(); ++c) next.at(r, c) = old.at(r, c);
                    st.diff[deg] = next;
                    QMat olde = st.eps.count(deg) ? st.eps[deg] : QMat(0, 0);
                    QMat nexte(fa->gens(deg).size(), st.gens[deg].size());
                    for (std::size_t r = 0; r < olde.rows(); ++r)
                        for (std::size_t c = 0; c < olde.cols(); ++c) nexte.at(r, c) = olde.at(r, c);
                    st.eps[deg] = nexte;
                };
                fix_shapes(i);
                fix_shapes(i + 1);
                if (st.gens.count(i - 1)) fix_shapes(i - 1);
                if (st.gens.count(i + 2)) fix_shapes(i + 2);
                st.diff[i].at(gq, gp) = 1;
                st.eps[i].at(t, gp) = 1;
                // ε(g) = d_F(t)
                QMat df = fa->diff_block(i);
                for (std::size_t r = 0; r < df.rows(); ++r) st.eps[i + 1].at(r, gq) = df.at(r, t);
            }
        }

        // step 2: kill cone cohomology within the box, sweep by sweep
        DegreeBox work = box.policy == DegreeBox::Policy::AutoStabilize ? box.expanded(1) : box;
        int rounds = 0;
        while (true) {
            ModulePtr qa = st.materialize(ra);
            ModMap eps = st.eps_map(qa, fa, zero);
            ModulePtr cn = cone(eps);
            // representatives of H(cone) at one piece
            auto piece_classes = [&](int i, const Multideg& m) {
                std::vector<QVec> picked;
                QMat dout = cn->diff_matrix(i, m);
                QMat ker = kernel_basis(dout);
                if (ker.cols() == 0) return picked;
                QMat din = cn->diff_matrix(i - 1, m);
                QMat span = rref(din.transposed()).mat;
                for (std::size_t c = 0; c < ker.cols(); ++c) {
                    QMat sys = span.transposed();
                    for (const QVec& pv : picked) {
                        QMat tmp(pv.size(), 1);
                        for (std::size_t r = 0; r < pv.size(); ++r) tmp.at(r, 0) = pv[r];
                        sys = sys.augmented(tmp);
                    }
                    if (!solve(sys, ker.col(c)).has_value()) picked.push_back(ker.col(c));
                }
                return picked;
            };
            // highest cohomological degree carrying classes inside the box
            int bad_i = cn->imax() + 1;
            std::vector<Multideg> bad_pieces;
            for (int i = cn->imax(); i >= cn->imin() && bad_pieces.empty(); --i) {
                for (const Multideg& m : work.points())
                    if (!piece_classes(i, m).empty()) bad_pieces.push_back(m);
                if (!bad_pieces.empty()) bad_i = i;
            }
            if (bad_pieces.empty()) {
                dg.stabilized = true;
                break;
            }
            if (rounds >= depth_cap) {
                std::ostringstream os;
                os << "cofibrant_replace: depth cap " << depth_cap << " exhausted at simplex " << a
                   << ", cone cohomology remains at degree " << bad_i << " piece " << deg_str(bad_pieces.front());
                dg.message = os.str();
                throw std::runtime_error(dg.message);
            }
            ++rounds;
            dg.rounds_used = std::max(dg.rounds_used, rounds);
            // attach at monoid-minimal bad pieces only: generators attached at
            // m0 act on every piece m0 + monoid, so minimal corners give the
            // module structure the best reach; incomparable corners do not
            // interact within one round
            std::vector<Multideg> minimal;
            for (const Multideg& m : bad_pieces) {
                bool has_strictly_lower = false;
                for (const Multideg& m2 : bad_pieces)
                    if (m2 != m && ra->contains(deg_sub(m, m2)) && !ra->contains(deg_sub(m2, m)))
                        has_strictly_lower = true;
                if (has_strictly_lower) continue;
                bool covered = false;  // pieces equivalent modulo monoid units need one attachment
                for (const Multideg& m2 : minimal)
                    if (ra->contains(deg_sub(m, m2)) && ra->contains(deg_sub(m2, m))) covered = true;
                if (!covered) minimal.push_back(m);
            }
            std::size_t f_gens = fa->gens(bad_i).size();
            for (const Multideg& bad_m : minimal) {
                std::vector<QVec> classes = piece_classes(bad_i, bad_m);
                const Piece& pcn = cn->piece(bad_i, bad_m);
                const Piece& fpc = fa->piece(bad_i, bad_m);
                const Piece& qpc = qa->piece(bad_i + 1, bad_m);
                std::map<int, std::size_t> fpos, qpos;
                for (std::size_t t = 0; t < fpc.amb.size(); ++t) fpos[fpc.amb[t]] = t;
                for (std::size_t t = 0; t < qpc.amb.size(); ++t) qpos[qpc.amb[t]] = t;
                for (const QVec& cls : classes) {
                    QVec cone_ambient = pcn.embed(cls);
                    // split into the F-part and the Q-part of cone^{bad_i} = F^{bad_i} ⊕ Q^{bad_i+1}
                    QVec namb(fpc.amb.size(), 0), qamb(qpc.amb.size(), 0);
                    for (std::size_t t = 0; t < pcn.amb.size(); ++t) {
                        if (cone_ambient[t] == 0) continue;
                        std::size_t gidx = static_cast<std::size_t>(pcn.amb[t]);
                        if (gidx < f_gens)
                            namb[fpos.at(static_cast<int>(gidx))] = cone_ambient[t];
                        else
                            qamb[qpos.at(static_cast<int>(gidx) - static_cast<int>(f_gens))] = cone_ambient[t];
                    }
                    // prefer a representative with exact Q-part removed: with
                    // z' = z - d_cone(0, y) for d_Q y = -q_part the attachment
                    // has d(h) = 0 and the process terminates on free targets
                    QVec qcoords = qpc.coords(qpc.canon(qamb));
                    auto y = solve(qa->diff_matrix(bad_i, bad_m), vec_scaled(qcoords, -1));
                    if (y && !vec_is_zero(qcoords)) {
                        QVec eps_y = eps.piece_matrix(bad_i, bad_m) * *y;
                        QVec adj = fpc.embed(eps_y);
                        namb = vec_sub(namb, adj);
                        std::fill(qamb.begin(), qamb.end(), Q(0));
                    }
                    // attach h in Q-degree bad_i with d(h) = -q_part, ε(h) = n_part
                    st.gens[bad_i].push_back(bad_m);
                    std::size_t h = st.gens[bad_i].size() - 1;
                    auto fix_shapes = [&](int degk) {
                        QMat old = st.diff.count(degk) ? st.diff[degk] : QMat(0, 0);
                        QMat next(st.gens.count(degk + 1) ? st.gens[degk + 1].size() : 0, st.gens[degk].size());
                        for (std::size_t r = 0; r < old.rows() && r < next.rows(); ++r)
                            for (std::size_t c = 0; c < old.cols() && c < next.cols(); ++c)
                                next.at(r, c) = old.at(r, c);
                        st.diff[degk] = next;
                        QMat olde = st.eps.count(degk) ? st.eps[degk] : QMat(0, 0);
                        QMat nexte(fa->gens(degk).size(), st.gens[degk].size());
                        for (std::size_t r = 0; r < olde.rows() && r < nexte.rows(); ++r)
                            for (std::size_t c = 0; c < olde.cols() && c < nexte.cols(); ++c)
                                nexte.at(r, c) = olde.at(r, c);
                        st.eps[degk] = nexte;
                    };
                    fix_shapes(bad_i);
                    if (st.gens.count(bad_i - 1)) fix_shapes(bad_i - 1);
                    for (std::size_t t = 0; t < fpc.amb.size(); ++t)
                        if (namb[t] != 0) st.eps[bad_i].at(static_cast<std::size_t>(fpc.amb[t]), h) = namb[t];
                    for (std::size_t t = 0; t < qpc.amb.size(); ++t)
                        if (qamb[t] != 0)
                            st.diff[bad_i].at(static_cast<std::size_t>(qpc.amb[t]), h) = -qamb[t];
                }
            }
        }

        ModulePtr qa = st.materialize(ra);
        built[static_cast<std::size_t>(a)] = qa;
        q->set_module(a, qa);
        eps_components[static_cast<std::size_t>(a)] = st.eps_map(qa, fa, zero);

        // structure maps from the subfaces into Q_α (latching prefix)
        for (std::size_t k = 0; k < subs.size(); ++k) {
            ModMap sm(built[static_cast<std::size_t>(subs[k])], qa, 0, zero);
            for (int i = built[static_cast<std::size_t>(subs[k])]->imin(); i <= built[static_cast<std::size_t>(subs[k])]->imax(); ++i) {
                QMat inj = latch_inj[k].block(i);
                QMat blk(qa->gens(i).size(), built[static_cast<std::size_t>(subs[k])]->gens(i).size());
                for (std::size_t r = 0; r < inj.rows(); ++r)
                    for (std::size_t c = 0; c < inj.cols(); ++c) blk.at(r, c) = inj.at(r, c);
                sm.set_block(i, blk);
            }
            sm.finalize();
            struct_maps[{subs[k], a}] = sm;
        }
    }

    auto hasse = n.hasse_pairs(n.all_indices());
    std::set<std::pair<int, int>> hasse_set(hasse.begin(), hasse.end());
    for (const auto& [pair, m] : struct_maps)
        if (hasse_set.count(pair)) q->set_structure_map(pair.first, pair.second, m);

    Replacement rep;
    rep.q = q->finalize();
    rep.target = f;
    rep.augmentation.src = rep.q;
    rep.augmentation.dst = f;
    for (int a = 0; a < n.size(); ++a) rep.augmentation.components.push_back(eps_components[static_cast<std::size_t>(a)]);
    rep.augmentation.validate();
    return rep;
}

}  // namespace dgn
