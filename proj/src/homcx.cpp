#include "dgnerve/homcx.hpp"

#include <algorithm>
#include <stdexcept>

namespace dgn {

std::vector<std::pair<int, std::size_t>> gen_index(const GradedDGModule& m) {
    std::vector<std::pair<int, std::size_t>> out;
    for (int i = m.imin(); i <= m.imax(); ++i)
        for (std::size_t j = 0; j < m.gens(i).size(); ++j) out.emplace_back(i, j);
    return out;
}

std::size_t flat_gen_of(const GradedDGModule& m, int i, std::size_t j) {
    std::size_t f = 0;
    for (int k = m.imin(); k < i; ++k) f += m.gens(k).size();
    return f + j;
}

// shared core of HomElement::apply and the conjugated coface application:
// images are generator-image coords in gmod pieces, indexed like gen_index(fmod)
QVec apply_generator_images(const GradedDGModule& fmod, const GradedDGModule& gmod, const std::vector<QVec>& images,
                  int p, const Multideg& w, int i, const Multideg& m, const QVec& coords) {
    const Piece& src = fmod.piece(i, m);
    const Piece& dst = gmod.piece(i + p, deg_add(m, w));
    QVec out(static_cast<std::size_t>(dst.dim()), 0);
    if (coords.empty()) return out;
    QVec amb = src.embed(coords);
    for (std::size_t t = 0; t < src.amb.size(); ++t) {
        if (amb[t] == 0) continue;
        std::size_t j = static_cast<std::size_t>(src.amb[t]);
        const Multideg& dj = fmod.gens(i)[j];
        const QVec& img = images[flat_gen_of(fmod, i, j)];
        if (img.empty() || vec_is_zero(img)) continue;
        QMat mult = gmod.mult_matrix(i + p, deg_add(dj, w), deg_sub(m, dj));
        QVec v = mult * img;
        for (std::size_t r = 0; r < v.size(); ++r) out[r] += amb[t] * v[r];
    }
    return out;
}

QVec transport_coords(const GradedDGModule& from, const GradedDGModule& to, int i, const Multideg& m,
                      const QVec& coords) {
    const Piece& pf = from.piece(i, m);
    const Piece& pt = to.piece(i, m);
    QVec ambf = pf.embed(coords);
    QVec ambt(pt.amb.size(), 0);
    std::map<int, std::size_t> pos;
    for (std::size_t t = 0; t < pt.amb.size(); ++t) pos[pt.amb[t]] = t;
    for (std::size_t t = 0; t < pf.amb.size(); ++t) {
        if (ambf[t] == 0) continue;
        auto it = pos.find(pf.amb[t]);
        if (it == pos.end()) throw std::logic_error("transport_coords: generator missing in target piece");
        ambt[it->second] += ambf[t];
    }
    return pt.coords(pt.canon(ambt));
}

// ---- HomElement ----

HomElement HomElement::zero(AModulePtr f, AModulePtr g, std::vector<int> s, int p, Multideg w) {
    HomElement e;
    e.F = std::move(f);
    e.G = std::move(g);
    e.S = std::move(s);
    e.p = p;
    e.w = std::move(w);
    e.images.resize(e.S.size());
    for (std::size_t k = 0; k < e.S.size(); ++k) {
        const GradedDGModule& fm = *e.F->module(e.S[k]);
        const GradedDGModule& gm = *e.G->module(e.S[k]);
        for (auto [i, j] : gen_index(fm)) {
            const Multideg& dj = fm.gens(i)[j];
            e.images[k].push_back(QVec(static_cast<std::size_t>(gm.piece_dim(i + e.p, deg_add(dj, e.w))), 0));
        }
    }
    return e;
}

bool HomElement::is_zero() const {
    for (const auto& per : images)
        for (const QVec& v : per)
            if (!vec_is_zero(v)) return false;
    return true;
}

bool HomElement::operator==(const HomElement& o) const {
    return p == o.p && w == o.w && S == o.S && images == o.images;
}

HomElement HomElement::operator+(const HomElement& o) const {
    HomElement e = *this;
    for (std::size_t k = 0; k < images.size(); ++k)
        for (std::size_t t = 0; t < images[k].size(); ++t) e.images[k][t] = vec_add(images[k][t], o.images[k][t]);
    return e;
}

HomElement HomElement::operator-(const HomElement& o) const { return *this + o.scaled(-1); }

HomElement HomElement::scaled(const Q& c) const {
    HomElement e = *this;
    for (auto& per : e.images)
        for (QVec& v : per) v = vec_scaled(v, c);
    return e;
}

QVec HomElement::apply(std::size_t k, int i, const Multideg& m, const QVec& coords) const {
    return apply_generator_images(*F->module(S[k]), *G->module(S[k]), images[k], p, w, i, m, coords);
}

HomElement HomElement::differential() const {
    // ∂φ = d_G∘φ - (-1)^p φ∘d_F: with the graded commutator this is [d, φ],
    // so ∂ is a derivation of the bracket (graded Leibniz holds on the nose)
    HomElement out = zero(F, G, S, p + 1, w);
    const Q sign = (p % 2 == 0) ? Q(1) : Q(-1);
    for (std::size_t k = 0; k < S.size(); ++k) {
        const GradedDGModule& fm = *F->module(S[k]);
        const GradedDGModule& gm = *G->module(S[k]);
        auto gens = gen_index(fm);
        for (std::size_t t = 0; t < gens.size(); ++t) {
            auto [i, j] = gens[t];
            const Multideg& dj = fm.gens(i)[j];
            // φ(d_F g)
            const Piece& pf = fm.piece(i + 1, dj);
            QVec damb(pf.amb.size(), 0);
            QMat db = fm.diff_block(i);
            for (std::size_t s = 0; s < pf.amb.size(); ++s)
                damb[s] = db.rows() > 0 ? db.at(static_cast<std::size_t>(pf.amb[s]), j) : Q(0);
            QVec term1 = apply(k, i + 1, dj, pf.coords(pf.canon(damb)));
            // d_G(φ g)
            QVec term2 = gm.diff_matrix(i + p, deg_add(dj, w)) * images[k][t];
            out.images[k][t] = vec_sub(term2, vec_scaled(term1, sign));
        }
    }
    return out;
}

HomElement HomElement::restricted(const std::vector<int>& s2) const {
    HomElement e;
    e.F = F;
    e.G = G;
    e.S = s2;
    e.p = p;
    e.w = w;
    for (int a : s2) {
        auto it = std::find(S.begin(), S.end(), a);
        if (it == S.end()) throw std::invalid_argument("HomElement::restricted: not a subset");
        e.images.push_back(images[static_cast<std::size_t>(it - S.begin())]);
    }
    return e;
}

HomElement HomElement::compose(const HomElement& g, const HomElement& f) {
    if (f.G != g.F || f.S != g.S) throw std::invalid_argument("HomElement::compose: mismatch");
    HomElement out = zero(f.F, g.G, f.S, f.p + g.p, deg_add(f.w, g.w));
    for (std::size_t k = 0; k < f.S.size(); ++k) {
        const GradedDGModule& fm = *f.F->module(f.S[k]);
        auto gens = gen_index(fm);
        for (std::size_t t = 0; t < gens.size(); ++t) {
            auto [i, j] = gens[t];
            const Multideg& dj = fm.gens(i)[j];
            out.images[k][t] = g.apply(k, i + f.p, deg_add(dj, f.w), f.images[k][t]);
        }
    }
    return out;
}

HomElement HomElement::bracket(const HomElement& a, const HomElement& b) {
    HomElement ab = compose(a, b);
    HomElement ba = compose(b, a);
    const Q sign = (a.p * b.p) % 2 == 0 ? Q(1) : Q(-1);
    return ab - ba.scaled(sign);
}

// ---- HomSystem ----

HomSystem::HomSystem(AModulePtr f, AModulePtr g, std::vector<int> s)
    : f_(std::move(f)), g_(std::move(g)), s_(std::move(s)) {
    if (f_->nerve_ptr() != g_->nerve_ptr()) throw std::invalid_argument("HomSystem: nerve mismatch");
    std::sort(s_.begin(), s_.end());
}

std::shared_ptr<HomSystem> HomSystem::global(AModulePtr f, AModulePtr g) {
    std::vector<int> all = f->nerve().all_indices();
    return std::make_shared<HomSystem>(std::move(f), std::move(g), all);
}

std::shared_ptr<HomSystem> HomSystem::local(AModulePtr f, AModulePtr g, int alpha) {
    std::vector<int> v = f->nerve().opens_above(alpha);
    return std::make_shared<HomSystem>(std::move(f), std::move(g), v);
}

QVec HomSystem::flatten(const HomElement& e) const {
    QVec out;
    for (const auto& per : e.images)
        for (const QVec& v : per) out.insert(out.end(), v.begin(), v.end());
    return out;
}

const HomSystem::Block& HomSystem::block(int p, const Multideg& w) const {
    auto key = std::make_pair(p, w);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = blocks_.find(key);
        if (it != blocks_.end()) return it->second;
    }
    // unknown layout: per γ in S, per generator, coords in the target piece
    struct Slot {
        std::size_t k, t;
        int i;
        std::size_t j;
        std::size_t offset, dim;
    };
    std::vector<Slot> slots;
    std::size_t total = 0;
    std::vector<std::vector<std::size_t>> offset_of(s_.size());
    for (std::size_t k = 0; k < s_.size(); ++k) {
        const GradedDGModule& fm = *f_->module(s_[k]);
        const GradedDGModule& gm = *g_->module(s_[k]);
        auto gens = gen_index(fm);
        for (std::size_t t = 0; t < gens.size(); ++t) {
            auto [i, j] = gens[t];
            std::size_t d = static_cast<std::size_t>(gm.piece_dim(i + p, deg_add(fm.gens(i)[j], w)));
            offset_of[k].push_back(total);
            slots.push_back({k, t, i, j, total, d});
            total += d;
        }
    }

    QMat rows(0, total);
    auto add_block_rows = [&](const std::vector<std::pair<std::size_t, QMat>>& terms, std::size_t height) {
        // one row-block: sum of (unknown slot offset, coefficient matrix)
        std::vector<QVec> block_rows(height, QVec(total, 0));
        for (const auto& [off, mat] : terms)
            for (std::size_t r = 0; r < mat.rows(); ++r)
                for (std::size_t c = 0; c < mat.cols(); ++c)
                    if (mat.at(r, c) != 0) block_rows[r][off + c] += mat.at(r, c);
        for (auto& br : block_rows) {
            bool nz = false;
            for (const Q& x : br)
                if (x != 0) nz = true;
            if (nz) rows.append_row(br);
        }
    };

    const Nerve& nerve = f_->nerve();
    for (std::size_t k = 0; k < s_.size(); ++k) {
        const GradedDGModule& fm = *f_->module(s_[k]);
        const GradedDGModule& gm = *g_->module(s_[k]);
        // (a) relations of F_γ map to zero
        for (int i = fm.imin(); i <= fm.imax(); ++i)
            for (const Relation& r : fm.relations(i)) {
                std::size_t height = static_cast<std::size_t>(gm.piece_dim(i + p, deg_add(r.deg, w)));
                if (height == 0) continue;
                std::vector<std::pair<std::size_t, QMat>> terms;
                for (std::size_t j = 0; j < r.coeffs.size(); ++j) {
                    if (r.coeffs[j] == 0) continue;
                    const Multideg& dj = fm.gens(i)[j];
                    QMat mult = gm.mult_matrix(i + p, deg_add(dj, w), deg_sub(r.deg, dj)).scaled(r.coeffs[j]);
                    terms.emplace_back(offset_of[k][flat_gen_of(fm, i, j)], mult);
                }
                add_block_rows(terms, height);
            }
    }
    // (b) commutation over covering pairs inside S
    for (auto [ga, gb] : nerve.hasse_pairs(s_)) {
        std::size_t ka = static_cast<std::size_t>(
            std::lower_bound(s_.begin(), s_.end(), ga) - s_.begin());
        std::size_t kb = static_cast<std::size_t>(
            std::lower_bound(s_.begin(), s_.end(), gb) - s_.begin());
        const GradedDGModule& fa = *f_->module(ga);
        const GradedDGModule& fb = *f_->module(gb);
        const GradedDGModule& gb_mod = *g_->module(gb);
        const ModMap& qf = f_->map(ga, gb);
        const ModMap& qg = g_->map(ga, gb);
        for (int i = fa.imin(); i <= fa.imax(); ++i) {
            QMat qfb = qf.block(i);
            for (std::size_t j = 0; j < fa.gens(i).size(); ++j) {
                const Multideg& dj = fa.gens(i)[j];
                std::size_t height = static_cast<std::size_t>(gb_mod.piece_dim(i + p, deg_add(dj, w)));
                if (height == 0 &&
                    g_->module(ga)->piece_dim(i + p, deg_add(dj, w)) == 0)
                    continue;
                std::vector<std::pair<std::size_t, QMat>> terms;
                // φ_{γ'}(q_F(g)): expand q_F(g) over the generators of F_{γ'}
                for (std::size_t kk = 0; kk < fb.gens(i).size(); ++kk) {
                    const Q& c = qfb.at(kk, j);
                    if (c == 0) continue;
                    const Multideg& dk = fb.gens(i)[kk];
                    QMat mult = gb_mod.mult_matrix(i + p, deg_add(dk, w), deg_sub(dj, dk)).scaled(c);
                    terms.emplace_back(offset_of[kb][flat_gen_of(fb, i, kk)], mult);
                }
                // minus q_G(φ_γ(g))
                QMat qgm = qg.piece_matrix(i + p, deg_add(dj, w)).scaled(-1);
                terms.emplace_back(offset_of[ka][flat_gen_of(fa, i, j)], qgm);
                add_block_rows(terms, height);
            }
        }
    }

    QMat ker = kernel_basis(rows);
    Block b;
    b.flat = QMat(0, total);
    for (std::size_t c = 0; c < ker.cols(); ++c) {
        HomElement e = HomElement::zero(f_, g_, s_, p, w);
        QVec col = ker.col(c);
        for (const Slot& sl : slots) {
            QVec v(sl.dim);
            for (std::size_t r = 0; r < sl.dim; ++r) v[r] = col[sl.offset + r];
            e.images[sl.k][sl.t] = std::move(v);
        }
        b.flat.append_row(col);
        b.basis.push_back(std::move(e));
    }
    std::lock_guard<std::mutex> lock(mu_);
    return blocks_.emplace(key, std::move(b)).first->second;
}

const std::vector<HomElement>& HomSystem::basis(int p, const Multideg& w) const { return block(p, w).basis; }

int HomSystem::dim(int p, const Multideg& w) const { return static_cast<int>(block(p, w).basis.size()); }

const QMat& HomSystem::diff_matrix(int p, const Multideg& w) const {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = blocks_.find({p, w});
        if (it != blocks_.end() && it->second.diff) return *it->second.diff;
    }
    const Block& src = block(p, w);
    const Block& dst = block(p + 1, w);
    QMat m(dst.basis.size(), src.basis.size());
    for (std::size_t c = 0; c < src.basis.size(); ++c) {
        QVec coords = coordinates(src.basis[c].differential());
        for (std::size_t r = 0; r < dst.basis.size(); ++r) m.at(r, c) = coords[r];
    }
    std::lock_guard<std::mutex> lock(mu_);
    Block& b = blocks_.at({p, w});
    if (!b.diff) b.diff = std::move(m);
    return *b.diff;
}

int HomSystem::cohomology_dim(int p, const Multideg& w) const {
    std::size_t d = static_cast<std::size_t>(dim(p, w));
    std::size_t rout = rank(diff_matrix(p, w));
    std::size_t rin = rank(diff_matrix(p - 1, w));
    return static_cast<int>(d - rout - rin);
}

QVec HomSystem::coordinates(const HomElement& e) const {
    const Block& b = block(e.p, e.w);
    QVec target = flatten(e);
    if (b.basis.empty()) {
        if (!vec_is_zero(target)) throw std::invalid_argument("HomSystem::coordinates: element outside block");
        return QVec{};
    }
    auto x = solve(b.flat.transposed(), target);
    if (!x) throw std::invalid_argument("HomSystem::coordinates: element outside block");
    return *x;
}

HomElement HomSystem::from_coordinates(int p, const Multideg& w, const QVec& coords) const {
    const Block& b = block(p, w);
    HomElement e = HomElement::zero(f_, g_, s_, p, w);
    for (std::size_t c = 0; c < coords.size(); ++c)
        if (coords[c] != 0) e = e + b.basis[c].scaled(coords[c]);
    return e;
}

std::pair<int, int> HomSystem::p_range() const {
    int lo = 0, hi = 0;
    bool any = false;
    for (int a : s_) {
        const GradedDGModule& fm = *f_->module(a);
        const GradedDGModule& gm = *g_->module(a);
        if (fm.is_zero_module() || gm.is_zero_module()) continue;
        int l = gm.imin() - fm.imax(), h = gm.imax() - fm.imin();
        if (!any) {
            lo = l;
            hi = h;
            any = true;
        } else {
            lo = std::min(lo, l);
            hi = std::max(hi, h);
        }
    }
    return {lo, hi};
}

QMat restriction_matrix(const HomSystem& from, const HomSystem& to, int p, const Multideg& w) {
    const auto& fb = from.basis(p, w);
    QMat m(to.basis(p, w).size(), fb.size());
    for (std::size_t c = 0; c < fb.size(); ++c) {
        QVec coords = to.coordinates(fb[c].restricted(to.S()));
        for (std::size_t r = 0; r < coords.size(); ++r) m.at(r, c) = coords[r];
    }
    return m;
}

int morphism_space_dim(AModulePtr f, AModulePtr g, const Multideg& w) {
    // Standalone solve of the morphism constraints (A-linearity on relations,
    // chain-map condition, commutation with structure maps) in one kernel
    // computation, independent of the Hom-block machinery.
    const Nerve& nerve = f->nerve();
    auto idxs = nerve.all_indices();
    std::vector<std::vector<std::size_t>> offset_of(idxs.size());
    std::size_t total = 0;
    for (std::size_t k = 0; k < idxs.size(); ++k) {
        const GradedDGModule& fm = *f->module(idxs[k]);
        const GradedDGModule& gm = *g->module(idxs[k]);
        for (auto [i, j] : gen_index(fm)) {
            offset_of[k].push_back(total);
            total += static_cast<std::size_t>(gm.piece_dim(i, deg_add(fm.gens(i)[j], w)));
        }
    }
    QMat rows(0, total);
    auto add_rows = [&](const std::vector<std::pair<std::size_t, QMat>>& terms, std::size_t height) {
        std::vector<QVec> block_rows(height, QVec(total, 0));
        for (const auto& [off, mat] : terms)
            for (std::size_t r = 0; r < mat.rows(); ++r)
                for (std::size_t c = 0; c < mat.cols(); ++c)
                    if (mat.at(r, c) != 0) block_rows[r][off + c] += mat.at(r, c);
        for (auto& br : block_rows)
            if (!vec_is_zero(br)) rows.append_row(br);
    };
    for (std::size_t k = 0; k < idxs.size(); ++k) {
        const GradedDGModule& fm = *f->module(idxs[k]);
        const GradedDGModule& gm = *g->module(idxs[k]);
        // relations
        for (int i = fm.imin(); i <= fm.imax(); ++i)
            for (const Relation& r : fm.relations(i)) {
                std::size_t height = static_cast<std::size_t>(gm.piece_dim(i, deg_add(r.deg, w)));
                if (height == 0) continue;
                std::vector<std::pair<std::size_t, QMat>> terms;
                for (std::size_t j = 0; j < r.coeffs.size(); ++j) {
                    if (r.coeffs[j] == 0) continue;
                    const Multideg& dj = fm.gens(i)[j];
                    terms.emplace_back(offset_of[k][flat_gen_of(fm, i, j)],
                                       gm.mult_matrix(i, deg_add(dj, w), deg_sub(r.deg, dj)).scaled(r.coeffs[j]));
                }
                add_rows(terms, height);
            }
        // chain-map condition: φ(d_F g) - d_G(φ g) = 0
        for (int i = fm.imin(); i <= fm.imax(); ++i) {
            QMat db = fm.diff_block(i);
            for (std::size_t j = 0; j < fm.gens(i).size(); ++j) {
                const Multideg& dj = fm.gens(i)[j];
                std::size_t height = static_cast<std::size_t>(gm.piece_dim(i + 1, deg_add(dj, w)));
                if (height == 0) continue;
                std::vector<std::pair<std::size_t, QMat>> terms;
                for (std::size_t kk = 0; db.rows() > 0 && kk < fm.gens(i + 1).size(); ++kk) {
                    const Q& c = db.at(kk, j);
                    if (c == 0) continue;
                    const Multideg& dk = fm.gens(i + 1)[kk];
                    terms.emplace_back(offset_of[k][flat_gen_of(fm, i + 1, kk)],
                                       gm.mult_matrix(i + 1, deg_add(dk, w), deg_sub(dj, dk)).scaled(c));
                }
                QMat dgm = gm.diff_matrix(i, deg_add(dj, w)).scaled(-1);
                terms.emplace_back(offset_of[k][flat_gen_of(fm, i, j)], dgm);
                add_rows(terms, height);
            }
        }
    }
    // commutation on covering pairs
    for (auto [ga, gb] : nerve.hasse_pairs(idxs)) {
        std::size_t ka = static_cast<std::size_t>(ga), kb = static_cast<std::size_t>(gb);
        const GradedDGModule& fa = *f->module(ga);
        const GradedDGModule& fb = *f->module(gb);
        const GradedDGModule& gbm = *g->module(gb);
        const ModMap& qf = f->map(ga, gb);
        const ModMap& qg = g->map(ga, gb);
        for (int i = fa.imin(); i <= fa.imax(); ++i) {
            QMat qfb = qf.block(i);
            for (std::size_t j = 0; j < fa.gens(i).size(); ++j) {
                const Multideg& dj = fa.gens(i)[j];
                std::size_t height = static_cast<std::size_t>(gbm.piece_dim(i, deg_add(dj, w)));
                if (height == 0) continue;
                std::vector<std::pair<std::size_t, QMat>> terms;
                for (std::size_t kk = 0; qfb.rows() > 0 && kk < fb.gens(i).size(); ++kk) {
                    const Q& c = qfb.at(kk, j);
                    if (c == 0) continue;
                    const Multideg& dk = fb.gens(i)[kk];
                    terms.emplace_back(offset_of[kb][flat_gen_of(fb, i, kk)],
                                       gbm.mult_matrix(i, deg_add(dk, w), deg_sub(dj, dk)).scaled(c));
                }
                terms.emplace_back(offset_of[ka][flat_gen_of(fa, i, j)],
                                   qg.piece_matrix(i, deg_add(dj, w)).scaled(-1));
                add_rows(terms, height);
            }
        }
    }
    return static_cast<int>(kernel_basis(rows).cols());
}

DGLAAxiomReport check_dgla_axioms(const HomSystem& end, const std::vector<std::pair<int, Multideg>>& blocks) {
    DGLAAxiomReport rep;
    std::vector<HomElement> elems;
    for (const auto& [p, w] : blocks)
        for (const HomElement& e : end.basis(p, w)) elems.push_back(e);
    for (const HomElement& e : elems)
        if (!e.differential().differential().is_zero()) rep.differential_squares_to_zero = false;
    for (const HomElement& x : elems)
        for (const HomElement& y : elems) {
            HomElement lhs = HomElement::bracket(x, y);
            HomElement rhs = HomElement::bracket(y, x).scaled((x.p * y.p) % 2 == 0 ? Q(1) : Q(-1));
            if (!(lhs + rhs).is_zero()) rep.antisymmetry = false;
            // Leibniz: ∂[x,y] = [∂x, y] + (-1)^{|x|} [x, ∂y]
            HomElement l = HomElement::bracket(x, y).differential();
            HomElement r1 = HomElement::bracket(x.differential(), y);
            HomElement r2 = HomElement::bracket(x, y.differential()).scaled(x.p % 2 == 0 ? Q(1) : Q(-1));
            if (!(l - r1 - r2).is_zero()) rep.leibniz = false;
        }
    for (const HomElement& x : elems)
        for (const HomElement& y : elems)
            for (const HomElement& z : elems) {
                // graded Jacobi: [x,[y,z]] = [[x,y],z] + (-1)^{|x||y|}[y,[x,z]]
                HomElement lhs = HomElement::bracket(x, HomElement::bracket(y, z));
                HomElement r1 = HomElement::bracket(HomElement::bracket(x, y), z);
                HomElement r2 =
                    HomElement::bracket(y, HomElement::bracket(x, z)).scaled((x.p * y.p) % 2 == 0 ? Q(1) : Q(-1));
                if (!(lhs - r1 - r2).is_zero()) rep.jacobi = false;
            }
    return rep;
}

namespace {

HomElement amap_to_hom(const AModuleMap& m, const std::vector<int>& s) {
    HomElement e = HomElement::zero(m.src, m.dst, s, 0, deg_zero(m.src->ring(0)->lattice_rank()));
    for (std::size_t k = 0; k < s.size(); ++k) {
        const GradedDGModule& fm = *m.src->module(s[k]);
        const GradedDGModule& gm = *m.dst->module(s[k]);
        auto gens = gen_index(fm);
        const ModMap& comp = m.at(s[k]);
        for (std::size_t t = 0; t < gens.size(); ++t) {
            auto [i, j] = gens[t];
            const Multideg& dj = fm.gens(i)[j];
            const Piece& pc = gm.piece(i, dj);
            QMat b = comp.block(i);
            QVec amb(pc.amb.size(), 0);
            for (std::size_t r = 0; r < pc.amb.size(); ++r)
                amb[r] = b.rows() > 0 ? b.at(static_cast<std::size_t>(pc.amb[r]), j) : Q(0);
            e.images[k][t] = pc.coords(pc.canon(amb));
        }
    }
    return e;
}

}  // namespace

std::optional<HomElement> lift_against_surjection(const HomSystem& hom_qp, const AModuleMap& pi,
                                                  const HomElement& f) {
    if (pi.src != hom_qp.G()) throw std::invalid_argument("lift_against_surjection: π must start at the Hom target");
    HomSystem qr(hom_qp.F(), pi.dst, hom_qp.S());
    HomElement pi_elem = amap_to_hom(pi, hom_qp.S());
    const auto& basis = hom_qp.basis(f.p, f.w);
    QMat m(qr.dim(f.p, f.w), basis.size());
    for (std::size_t c = 0; c < basis.size(); ++c) {
        QVec coords = qr.coordinates(HomElement::compose(pi_elem, basis[c]));
        for (std::size_t r = 0; r < coords.size(); ++r) m.at(r, c) = coords[r];
    }
    auto x = solve(m, qr.coordinates(f));
    if (!x) return std::nullopt;
    return hom_qp.from_coordinates(f.p, f.w, *x);
}

bool is_flasque_in_box(const AModule& f, const DegreeBox& box) {
    const Nerve& n = f.nerve();
    DegreeBox b = box.policy == DegreeBox::Policy::AutoStabilize ? box.expanded(1) : box;
    // restrictions between basic opens
    for (auto [a, bb] : n.comparable_pairs(n.all_indices())) {
        const ModMap& q = f.map(a, bb);
        for (const Multideg& m : b.points())
            for (int i = f.module(bb)->imin(); i <= f.module(bb)->imax(); ++i) {
                int dd = f.module(bb)->piece_dim(i, m);
                if (dd == 0) continue;
                if (static_cast<int>(rank(q.piece_matrix(i, m))) != dd) return false;
            }
    }
    // global sections onto every basic open
    auto idxs = n.all_indices();
    for (const Multideg& m : b.points()) {
        int lo = 0, hi = -1;
        bool any = false;
        for (int a : idxs) {
            if (f.module(a)->is_zero_module()) continue;
            if (!any) {
                lo = f.module(a)->imin();
                hi = f.module(a)->imax();
                any = true;
            } else {
                lo = std::min(lo, f.module(a)->imin());
                hi = std::max(hi, f.module(a)->imax());
            }
        }
        for (int i = lo; i <= hi && any; ++i) {
            std::vector<std::size_t> off(idxs.size() + 1, 0);
            for (std::size_t k = 0; k < idxs.size(); ++k)
                off[k + 1] = off[k] + static_cast<std::size_t>(f.module(idxs[k])->piece_dim(i, m));
            QMat rows(0, off.back());
            for (auto [a, bb] : n.hasse_pairs(idxs)) {
                std::size_t ka = static_cast<std::size_t>(a), kb = static_cast<std::size_t>(bb);
                QMat qm = f.map(a, bb).piece_matrix(i, m);
                for (std::size_t r = 0; r < qm.rows(); ++r) {
                    QVec row(off.back(), 0);
                    for (std::size_t c = 0; c < qm.cols(); ++c) row[off[ka] + c] = qm.at(r, c);
                    row[off[kb] + r] -= 1;
                    rows.append_row(row);
                }
            }
            QMat ker = kernel_basis(rows);
            for (std::size_t k = 0; k < idxs.size(); ++k) {
                std::size_t dd = off[k + 1] - off[k];
                if (dd == 0) continue;
                QMat proj(dd, ker.cols());
                for (std::size_t c = 0; c < ker.cols(); ++c)
                    for (std::size_t r = 0; r < dd; ++r) proj.at(r, c) = ker.at(off[k] + r, c);
                if (rank(proj) != dd) return false;
            }
        }
    }
    return true;
}

}  // namespace dgn
