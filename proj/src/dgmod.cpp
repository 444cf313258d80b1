#include "dgnerve/dgmod.hpp"

#include <algorithm>
#include <stdexcept>

namespace dgn {

const std::vector<Multideg> GradedDGModule::kNoGens;
const std::vector<Relation> GradedDGModule::kNoRels;

DegreeBox DegreeBox::cube(int lattice_rank, int lo, int hi) {
    DegreeBox b;
    b.lo.assign(static_cast<std::size_t>(lattice_rank), lo);
    b.hi.assign(static_cast<std::size_t>(lattice_rank), hi);
    return b;
}

bool DegreeBox::contains(const Multideg& m) const {
    if (m.size() != lo.size()) return false;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] < lo[i] || m[i] > hi[i]) return false;
    return true;
}

DegreeBox DegreeBox::expanded(int by) const {
    DegreeBox b = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        b.lo[i] -= by;
        b.hi[i] += by;
    }
    return b;
}

std::vector<Multideg> DegreeBox::points() const {
    std::vector<Multideg> out;
    if (lo.empty()) {
        out.push_back(Multideg{});
        return out;
    }
    Multideg cur = lo;
    while (true) {
        out.push_back(cur);
        std::size_t i = 0;
        while (i < cur.size()) {
            if (cur[i] < hi[i]) {
                ++cur[i];
                for (std::size_t j = 0; j < i; ++j) cur[j] = lo[j];
                break;
            }
            ++i;
        }
        if (i == cur.size()) break;
    }
    return out;
}

QVec Piece::canon(QVec ambient) const {
    if (ambient.size() != amb.size()) throw std::invalid_argument("Piece::canon: size mismatch");
    for (std::size_t r = 0; r < pivots.size(); ++r) {
        const Q f = ambient[pivots[r]];
        if (f == 0) continue;
        for (std::size_t j = 0; j < ambient.size(); ++j) {
            const Q& x = rel.at(r, j);
            if (x != 0) ambient[j] -= f * x;
        }
    }
    return ambient;
}

QVec Piece::coords(const QVec& canon_vec) const {
    QVec out(free_cols.size());
    for (std::size_t t = 0; t < free_cols.size(); ++t) out[t] = canon_vec[free_cols[t]];
    return out;
}

QVec Piece::embed(const QVec& coord_vec) const {
    QVec out(amb.size(), 0);
    for (std::size_t t = 0; t < free_cols.size(); ++t) out[free_cols[t]] = coord_vec[t];
    return out;
}

void GradedDGModule::require_open() const {
    if (final_) throw std::logic_error("GradedDGModule: already finalized");
}

void GradedDGModule::require_final() const {
    if (!final_) throw std::logic_error("GradedDGModule: not finalized");
}

void GradedDGModule::set_generators(int i, std::vector<Multideg> degs) {
    require_open();
    for (const Multideg& d : degs)
        if (static_cast<int>(d.size()) != ring_->lattice_rank())
            throw std::invalid_argument("set_generators: degree rank mismatch");
    gens_[i] = std::move(degs);
}

void GradedDGModule::add_relation(int i, Relation r) {
    require_open();
    rels_[i].push_back(std::move(r));
}

void GradedDGModule::set_diff(int i, QMat block) {
    require_open();
    diff_[i] = std::move(block);
}

const std::vector<Multideg>& GradedDGModule::gens(int i) const {
    auto it = gens_.find(i);
    return it == gens_.end() ? kNoGens : it->second;
}

const std::vector<Relation>& GradedDGModule::relations(int i) const {
    auto it = rels_.find(i);
    return it == rels_.end() ? kNoRels : it->second;
}

QMat GradedDGModule::diff_block(int i) const {
    auto it = diff_.find(i);
    if (it != diff_.end()) return it->second;
    return QMat(gens(i + 1).size(), gens(i).size());
}

ModulePtr GradedDGModule::finalize() {
    require_open();
    imin_ = 1;
    imax_ = 0;
    bool any = false;
    for (const auto& [i, g] : gens_) {
        if (g.empty()) continue;
        if (!any) {
            imin_ = imax_ = i;
            any = true;
        } else {
            imin_ = std::min(imin_, i);
            imax_ = std::max(imax_, i);
        }
    }
    // homogeneity of relations
    for (const auto& [i, rs] : rels_) {
        for (const Relation& r : rs) {
            if (r.coeffs.size() != gens(i).size())
                throw std::invalid_argument("finalize: relation width mismatch");
            for (std::size_t j = 0; j < r.coeffs.size(); ++j)
                if (r.coeffs[j] != 0 && !ring_->contains(deg_sub(r.deg, gens(i)[j])))
                    throw std::invalid_argument("finalize: relation not homogeneous over the ring");
        }
    }
    // homogeneity of the differential
    for (const auto& [i, b] : diff_) {
        if (b.rows() != gens(i + 1).size() || b.cols() != gens(i).size())
            throw std::invalid_argument("finalize: differential block shape mismatch");
        for (std::size_t k = 0; k < b.rows(); ++k)
            for (std::size_t j = 0; j < b.cols(); ++j)
                if (b.at(k, j) != 0 && !ring_->contains(deg_sub(gens(i)[j], gens(i + 1)[k])))
                    throw std::invalid_argument("finalize: differential entry not in the monoid");
    }
    final_ = true;
    // d maps relations into the relation submodule
    for (const auto& [i, rs] : rels_) {
        QMat b = diff_block(i);
        if (b.rows() == 0) continue;
        for (const Relation& r : rs) {
            QVec img = b * r.coeffs;
            const Piece& p = piece(i + 1, r.deg);
            QVec ambient(p.amb.size(), 0);
            for (std::size_t t = 0; t < p.amb.size(); ++t) ambient[t] = img[static_cast<std::size_t>(p.amb[t])];
            for (std::size_t k = 0; k < img.size(); ++k) {
                bool present = false;
                for (int a : p.amb)
                    if (a == static_cast<int>(k)) present = true;
                if (!present && img[k] != 0)
                    throw std::invalid_argument("finalize: d(relation) leaves the graded piece");
            }
            if (!vec_is_zero(p.canon(ambient)))
                throw std::invalid_argument("finalize: differential does not preserve relations");
        }
    }
    // d∘d = 0 on generators, mod relations
    for (const auto& [i, g] : gens_) {
        if (g.empty()) continue;
        QMat dd = diff_block(i + 1) * diff_block(i);
        if (dd.rows() == 0) continue;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const Multideg& dj = g[j];
            const Piece& p = piece(i + 2, dj);
            QVec ambient(p.amb.size(), 0);
            for (std::size_t t = 0; t < p.amb.size(); ++t)
                ambient[t] = dd.at(static_cast<std::size_t>(p.amb[t]), j);
            for (std::size_t k = 0; k < dd.rows(); ++k) {
                bool present = false;
                for (int a : p.amb)
                    if (a == static_cast<int>(k)) present = true;
                if (!present && dd.at(k, j) != 0)
                    throw std::invalid_argument("finalize: d∘d leaves the graded piece");
            }
            if (!vec_is_zero(p.canon(ambient))) throw std::invalid_argument("finalize: d∘d != 0");
        }
    }
    return shared_from_this();
}

const Piece& GradedDGModule::piece(int i, const Multideg& m) const {
    require_final();
    auto key = std::make_pair(i, m);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = piece_cache_.find(key);
        if (it != piece_cache_.end()) return it->second;
    }
    Piece p;
    const auto& g = gens(i);
    for (std::size_t j = 0; j < g.size(); ++j)
        if (ring_->contains(deg_sub(m, g[j]))) p.amb.push_back(static_cast<int>(j));
    QMat relrows(0, p.amb.size());
    for (const Relation& r : relations(i)) {
        if (!ring_->contains(deg_sub(m, r.deg))) continue;
        QVec row(p.amb.size());
        for (std::size_t t = 0; t < p.amb.size(); ++t) row[t] = r.coeffs[static_cast<std::size_t>(p.amb[t])];
        relrows.append_row(row);
    }
    Rref red = rref(relrows);
    p.rel = red.mat;
    p.pivots = red.pivots;
    std::vector<bool> is_pivot(p.amb.size(), false);
    for (std::size_t q : p.pivots) is_pivot[q] = true;
    for (std::size_t t = 0; t < p.amb.size(); ++t)
        if (!is_pivot[t]) p.free_cols.push_back(t);
    std::lock_guard<std::mutex> lock(mu_);
    return piece_cache_.emplace(key, std::move(p)).first->second;
}

QMat GradedDGModule::mult_matrix(int i, const Multideg& m, const Multideg& u) const {
    const Piece& src = piece(i, m);
    const Piece& dst = piece(i, deg_add(m, u));
    QMat out(dst.dim(), src.dim());
    std::map<int, std::size_t> dst_pos;
    for (std::size_t t = 0; t < dst.amb.size(); ++t) dst_pos[dst.amb[t]] = t;
    for (int col = 0; col < src.dim(); ++col) {
        QVec amb = src.embed([&] {
            QVec e(static_cast<std::size_t>(src.dim()), 0);
            e[static_cast<std::size_t>(col)] = 1;
            return e;
        }());
        QVec damb(dst.amb.size(), 0);
        for (std::size_t t = 0; t < src.amb.size(); ++t) {
            if (amb[t] == 0) continue;
            auto it = dst_pos.find(src.amb[t]);
            if (it == dst_pos.end()) throw std::logic_error("mult_matrix: monoid closure violated");
            damb[it->second] += amb[t];
        }
        QVec c = dst.coords(dst.canon(damb));
        for (int row = 0; row < dst.dim(); ++row) out.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) = c[static_cast<std::size_t>(row)];
    }
    return out;
}

QMat GradedDGModule::diff_matrix(int i, const Multideg& m) const {
    const Piece& src = piece(i, m);
    const Piece& dst = piece(i + 1, m);
    QMat b = diff_block(i);
    QMat out(dst.dim(), src.dim());
    for (int col = 0; col < src.dim(); ++col) {
        QVec amb = src.embed([&] {
            QVec e(static_cast<std::size_t>(src.dim()), 0);
            e[static_cast<std::size_t>(col)] = 1;
            return e;
        }());
        QVec damb(dst.amb.size(), 0);
        for (std::size_t s = 0; s < src.amb.size(); ++s) {
            if (amb[s] == 0) continue;
            for (std::size_t t = 0; t < dst.amb.size(); ++t) {
                const Q& coef = b.at(static_cast<std::size_t>(dst.amb[t]), static_cast<std::size_t>(src.amb[s]));
                if (coef != 0) damb[t] += coef * amb[s];
            }
        }
        QVec c = dst.coords(dst.canon(damb));
        for (int row = 0; row < dst.dim(); ++row) out.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) = c[static_cast<std::size_t>(row)];
    }
    return out;
}

int GradedDGModule::cohomology_dim(int i, const Multideg& m) const {
    QMat dout = diff_matrix(i, m);
    QMat din = diff_matrix(i - 1, m);
    std::size_t ker = static_cast<std::size_t>(piece_dim(i, m)) - rank(dout);
    return static_cast<int>(ker - rank(din));
}

bool GradedDGModule::in_relations(int i, const Multideg& m, const QVec& ambient) const {
    const Piece& p = piece(i, m);
    return vec_is_zero(p.canon(ambient));
}

ModulePtr zero_module(RingPtr ring) {
    auto m = std::make_shared<GradedDGModule>(std::move(ring));
    return m->finalize();
}

ModulePtr free_module(RingPtr ring, const std::vector<std::pair<int, Multideg>>& gens) {
    auto m = std::make_shared<GradedDGModule>(std::move(ring));
    std::map<int, std::vector<Multideg>> by_deg;
    for (const auto& [i, d] : gens) by_deg[i].push_back(d);
    for (auto& [i, degs] : by_deg) m->set_generators(i, degs);
    return m->finalize();
}

// ---- ModMap ----

ModMap::ModMap(ModulePtr src, ModulePtr dst, int p, Multideg w)
    : src_(std::move(src)), dst_(std::move(dst)), p_(p), w_(std::move(w)) {
    if (!src_ || !dst_) throw std::invalid_argument("ModMap: null module");
    if (static_cast<int>(w_.size()) != dst_->ring()->lattice_rank())
        throw std::invalid_argument("ModMap: shift rank mismatch");
}

void ModMap::set_block(int i, QMat block) {
    if (final_) throw std::logic_error("ModMap: already finalized");
    blocks_[i] = std::move(block);
}

QMat ModMap::block(int i) const {
    auto it = blocks_.find(i);
    if (it != blocks_.end()) return it->second;
    return QMat(dst_->gens(i + p_).size(), src_->gens(i).size());
}

void ModMap::finalize() {
    if (final_) return;
    const MonomialRing& ring = *dst_->ring();
    for (const auto& [i, b] : blocks_) {
        if (b.rows() != dst_->gens(i + p_).size() || b.cols() != src_->gens(i).size())
            throw std::invalid_argument("ModMap: block shape mismatch");
        for (std::size_t k = 0; k < b.rows(); ++k)
            for (std::size_t j = 0; j < b.cols(); ++j)
                if (b.at(k, j) != 0 &&
                    !ring.contains(deg_sub(deg_add(src_->gens(i)[j], w_), dst_->gens(i + p_)[k])))
                    throw std::invalid_argument("ModMap: entry not in the target monoid");
    }
    final_ = true;
    // relations of the source must land in the relation submodule
    for (int i = src_->imin(); i <= src_->imax(); ++i) {
        for (const Relation& r : src_->relations(i)) {
            QMat b = block(i);
            if (b.rows() == 0) continue;
            QVec img = b * r.coeffs;
            Multideg target_deg = deg_add(r.deg, w_);
            const Piece& pc = dst_->piece(i + p_, target_deg);
            QVec ambient(pc.amb.size(), 0);
            std::vector<bool> present(img.size(), false);
            for (std::size_t t = 0; t < pc.amb.size(); ++t) {
                ambient[t] = img[static_cast<std::size_t>(pc.amb[t])];
                present[static_cast<std::size_t>(pc.amb[t])] = true;
            }
            for (std::size_t k = 0; k < img.size(); ++k)
                if (!present[k] && img[k] != 0)
                    throw std::invalid_argument("ModMap: image of relation leaves the graded piece");
            if (!vec_is_zero(pc.canon(ambient)))
                throw std::invalid_argument("ModMap: not well defined on relations");
        }
    }
}

bool ModMap::is_chain_map() const {
    // φ d_src = (-1)^p d_dst φ, checked on generators mod relations
    const Q sign = (p_ % 2 == 0) ? Q(1) : Q(-1);
    for (int i = src_->imin() - 1; i <= src_->imax(); ++i) {
        QMat lhs = block(i + 1) * src_->diff_block(i);
        QMat rhs = (dst_->diff_block(i + p_) * block(i)).scaled(sign);
        QMat d = lhs - rhs;
        if (d.is_zero()) continue;
        for (std::size_t j = 0; j < d.cols(); ++j) {
            QVec col = d.col(j);
            if (vec_is_zero(col)) continue;
            Multideg target_deg = deg_add(src_->gens(i)[j], w_);
            const Piece& pc = dst_->piece(i + p_ + 1, target_deg);
            QVec ambient(pc.amb.size(), 0);
            std::vector<bool> present(col.size(), false);
            for (std::size_t t = 0; t < pc.amb.size(); ++t) {
                ambient[t] = col[static_cast<std::size_t>(pc.amb[t])];
                present[static_cast<std::size_t>(pc.amb[t])] = true;
            }
            for (std::size_t k = 0; k < col.size(); ++k)
                if (!present[k] && col[k] != 0) return false;
            if (!vec_is_zero(pc.canon(ambient))) return false;
        }
    }
    return true;
}

QMat ModMap::piece_matrix(int i, const Multideg& m) const {
    const Piece& src = src_->piece(i, m);
    const Piece& dst = dst_->piece(i + p_, deg_add(m, w_));
    QMat b = block(i);
    QMat out(dst.dim(), src.dim());
    for (int col = 0; col < src.dim(); ++col) {
        QVec amb = src.embed([&] {
            QVec e(static_cast<std::size_t>(src.dim()), 0);
            e[static_cast<std::size_t>(col)] = 1;
            return e;
        }());
        QVec damb(dst.amb.size(), 0);
        for (std::size_t s = 0; s < src.amb.size(); ++s) {
            if (amb[s] == 0) continue;
            for (std::size_t t = 0; t < dst.amb.size(); ++t) {
                const Q& coef = b.at(static_cast<std::size_t>(dst.amb[t]), static_cast<std::size_t>(src.amb[s]));
                if (coef != 0) damb[t] += coef * amb[s];
            }
        }
        QVec c = dst.coords(dst.canon(damb));
        for (int row = 0; row < dst.dim(); ++row) out.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) = c[static_cast<std::size_t>(row)];
    }
    return out;
}

QVec ModMap::apply_coords(int i, const Multideg& m, const QVec& coords) const {
    return piece_matrix(i, m) * coords;
}

ModMap ModMap::compose(const ModMap& g, const ModMap& f) {
    if (g.src_ != f.dst_) throw std::invalid_argument("ModMap::compose: middle mismatch");
    ModMap out(f.src_, g.dst_, f.p_ + g.p_, deg_add(f.w_, g.w_));
    for (int i = f.src_->imin(); i <= f.src_->imax(); ++i) out.set_block(i, g.block(i + f.p_) * f.block(i));
    out.finalize();
    return out;
}

ModMap ModMap::identity(ModulePtr m) {
    ModMap out(m, m, 0, deg_zero(m->ring()->lattice_rank()));
    for (int i = m->imin(); i <= m->imax(); ++i) out.set_block(i, QMat::identity(m->gens(i).size()));
    out.finalize();
    return out;
}

ModMap ModMap::operator+(const ModMap& o) const {
    if (src_ != o.src_ || dst_ != o.dst_ || p_ != o.p_ || w_ != o.w_)
        throw std::invalid_argument("ModMap::operator+: signature mismatch");
    ModMap out(src_, dst_, p_, w_);
    for (int i = src_->imin(); i <= src_->imax(); ++i) out.set_block(i, block(i) + o.block(i));
    out.finalize();
    return out;
}

ModMap ModMap::operator-(const ModMap& o) const { return *this + o.scaled(-1); }

ModMap ModMap::scaled(const Q& c) const {
    ModMap out(src_, dst_, p_, w_);
    for (const auto& [i, b] : blocks_) out.set_block(i, b.scaled(c));
    out.final_ = final_;
    return out;
}

ModMap ModMap::with_codomain(ModulePtr dst2) const {
    ModMap out(src_, dst2, p_, w_);
    for (const auto& [i, b] : blocks_) out.set_block(i, b);
    out.finalize();
    return out;
}

bool maps_equal(const ModMap& a, const ModMap& b) {
    if (a.src() != b.src() || a.dst() != b.dst() || a.p() != b.p() || a.w() != b.w()) return false;
    const GradedDGModule& src = *a.src();
    const GradedDGModule& dst = *a.dst();
    for (int i = src.imin(); i <= src.imax(); ++i) {
        QMat d = a.block(i) - b.block(i);
        if (d.is_zero()) continue;
        for (std::size_t j = 0; j < d.cols(); ++j) {
            QVec col = d.col(j);
            if (vec_is_zero(col)) continue;
            Multideg target_deg = deg_add(src.gens(i)[j], a.w());
            const Piece& pc = dst.piece(i + a.p(), target_deg);
            QVec ambient(pc.amb.size(), 0);
            std::vector<bool> present(col.size(), false);
            for (std::size_t t = 0; t < pc.amb.size(); ++t) {
                ambient[t] = col[static_cast<std::size_t>(pc.amb[t])];
                present[static_cast<std::size_t>(pc.amb[t])] = true;
            }
            for (std::size_t k = 0; k < col.size(); ++k)
                if (!present[k] && col[k] != 0) return false;
            if (!vec_is_zero(pc.canon(ambient))) return false;
        }
    }
    return true;
}

// ---- operations ----

PieceComplex piece_complex(const GradedDGModule& mod, const Multideg& m) {
    PieceComplex pc;
    pc.m = m;
    pc.imin = mod.imin();
    pc.imax = mod.imax();
    if (mod.is_zero_module()) return pc;
    for (int i = pc.imin; i <= pc.imax; ++i) pc.dims.push_back(mod.piece_dim(i, m));
    for (int i = pc.imin; i < pc.imax; ++i) pc.diffs.push_back(mod.diff_matrix(i, m));
    return pc;
}

BettiTable cohomology_dims(const GradedDGModule& mod, const DegreeBox& box) {
    BettiTable t;
    if (mod.is_zero_module()) return t;
    for (const Multideg& m : box.points())
        for (int i = mod.imin(); i <= mod.imax(); ++i) {
            int h = mod.cohomology_dim(i, m);
            if (h != 0) t[{i, m}] = h;
        }
    return t;
}

ModulePtr base_change(const GradedDGModule& mod, const RingMap& f) {
    if (!f.source->same_as(*mod.ring()) && !mod.ring()->submonoid_of(*f.source))
        throw std::invalid_argument("base_change: ring mismatch");
    if (f.source->lattice_rank() != f.target->lattice_rank())
        throw std::invalid_argument("base_change: lattice rank mismatch");
    auto out = std::make_shared<GradedDGModule>(f.target);
    for (int i = mod.imin(); i <= mod.imax(); ++i) {
        out->set_generators(i, mod.gens(i));
        for (const Relation& r : mod.relations(i)) out->add_relation(i, r);
        QMat d = mod.diff_block(i);
        if (d.rows() > 0 && d.cols() > 0) out->set_diff(i, d);
    }
    return out->finalize();
}

ModMap base_change(const ModMap& map, const RingMap& f) {
    ModulePtr src = base_change(*map.src(), f);
    ModulePtr dst = base_change(*map.dst(), f);
    ModMap out(src, dst, map.p(), map.w());
    for (int i = map.src()->imin(); i <= map.src()->imax(); ++i) out.set_block(i, map.block(i));
    out.finalize();
    return out;
}

ModulePtr shift(ModulePtr mod, int k) {
    auto out = std::make_shared<GradedDGModule>(mod->ring());
    for (int i = mod->imin(); i <= mod->imax(); ++i) {
        out->set_generators(i - k, mod->gens(i));
        for (const Relation& r : mod->relations(i)) out->add_relation(i - k, r);
        QMat d = mod->diff_block(i);
        if (d.rows() > 0 && d.cols() > 0) out->set_diff(i - k, (k % 2 == 0) ? d : d.scaled(-1));
    }
    return out->finalize();
}

namespace {

struct TwoBlocks {
    std::vector<Multideg> degs;
    std::size_t first;  // size of the first block
};

TwoBlocks combined_gens(const GradedDGModule& a, int ia, const GradedDGModule& b, int ib) {
    TwoBlocks t;
    t.degs = a.gens(ia);
    t.first = t.degs.size();
    const auto& g = b.gens(ib);
    t.degs.insert(t.degs.end(), g.begin(), g.end());
    return t;
}

}  // namespace

namespace {

bool is_zero_deg(const Multideg& w) {
    for (int x : w)
        if (x != 0) return false;
    return true;
}

// common support window of N^i ⊕ M^{i+shift}
std::pair<int, int> joint_range(const GradedDGModule& n, const GradedDGModule& m, int shift) {
    int lo = 0, hi = -1;
    bool any = false;
    if (!n.is_zero_module()) {
        lo = n.imin();
        hi = n.imax();
        any = true;
    }
    if (!m.is_zero_module()) {
        int a = m.imin() - shift, b = m.imax() - shift;
        if (!any) {
            lo = a;
            hi = b;
        } else {
            lo = std::min(lo, a);
            hi = std::max(hi, b);
        }
    }
    return {lo, hi};
}

}  // namespace

ModulePtr cone(const ModMap& phi) {
    if (phi.p() != 0 || !is_zero_deg(phi.w())) throw std::invalid_argument("cone: need a degree-(0,0) map");
    if (!phi.is_chain_map()) throw std::invalid_argument("cone: input is not a chain map");
    const GradedDGModule& m = *phi.src();
    const GradedDGModule& n = *phi.dst();
    auto out = std::make_shared<GradedDGModule>(n.ring());
    auto [lo, hi] = joint_range(n, m, 1);
    for (int i = lo; i <= hi; ++i) {
        TwoBlocks t = combined_gens(n, i, m, i + 1);
        if (t.degs.empty()) continue;
        out->set_generators(i, t.degs);
        for (const Relation& r : n.relations(i)) {
            Relation rr{r.deg, r.coeffs};
            rr.coeffs.resize(t.degs.size(), 0);
            out->add_relation(i, rr);
        }
        for (const Relation& r : m.relations(i + 1)) {
            Relation rr{r.deg, QVec(t.first, 0)};
            rr.coeffs.insert(rr.coeffs.end(), r.coeffs.begin(), r.coeffs.end());
            out->add_relation(i, rr);
        }
    }
    for (int i = lo; i < hi; ++i) {
        std::size_t rows_n = n.gens(i + 1).size(), rows_m = m.gens(i + 2).size();
        std::size_t cols_n = n.gens(i).size(), cols_m = m.gens(i + 1).size();
        QMat d(rows_n + rows_m, cols_n + cols_m);
        QMat dn = n.diff_block(i), dm = m.diff_block(i + 1), f = phi.block(i + 1);
        for (std::size_t r = 0; r < rows_n; ++r) {
            for (std::size_t c = 0; c < cols_n; ++c) d.at(r, c) = dn.at(r, c);
            for (std::size_t c = 0; c < cols_m; ++c) d.at(r, cols_n + c) = f.at(r, c);
        }
        for (std::size_t r = 0; r < rows_m; ++r)
            for (std::size_t c = 0; c < cols_m; ++c) d.at(rows_n + r, cols_n + c) = -dm.at(r, c);
        out->set_diff(i, d);
    }
    return out->finalize();
}

ModulePtr cocone(const ModMap& phi) {
    if (phi.p() != 0 || !is_zero_deg(phi.w())) throw std::invalid_argument("cocone: need a degree-(0,0) map");
    if (!phi.is_chain_map()) throw std::invalid_argument("cocone: input is not a chain map");
    const GradedDGModule& m = *phi.src();
    const GradedDGModule& n = *phi.dst();
    auto out = std::make_shared<GradedDGModule>(m.ring());
    auto [lo, hi] = joint_range(m, n, -1);
    for (int i = lo; i <= hi; ++i) {
        TwoBlocks t = combined_gens(m, i, n, i - 1);
        if (t.degs.empty()) continue;
        out->set_generators(i, t.degs);
        for (const Relation& r : m.relations(i)) {
            Relation rr{r.deg, r.coeffs};
            rr.coeffs.resize(t.degs.size(), 0);
            out->add_relation(i, rr);
        }
        for (const Relation& r : n.relations(i - 1)) {
            Relation rr{r.deg, QVec(t.first, 0)};
            rr.coeffs.insert(rr.coeffs.end(), r.coeffs.begin(), r.coeffs.end());
            out->add_relation(i, rr);
        }
    }
    for (int i = lo; i < hi; ++i) {
        std::size_t rows_m = m.gens(i + 1).size(), rows_n = n.gens(i).size();
        std::size_t cols_m = m.gens(i).size(), cols_n = n.gens(i - 1).size();
        QMat d(rows_m + rows_n, cols_m + cols_n);
        QMat dm = m.diff_block(i), dn = n.diff_block(i - 1), f = phi.block(i);
        for (std::size_t r = 0; r < rows_m; ++r)
            for (std::size_t c = 0; c < cols_m; ++c) d.at(r, c) = dm.at(r, c);
        for (std::size_t r = 0; r < rows_n; ++r) {
            for (std::size_t c = 0; c < cols_m; ++c) d.at(rows_m + r, c) = f.at(r, c);
            for (std::size_t c = 0; c < cols_n; ++c) d.at(rows_m + r, cols_m + c) = -dn.at(r, c);
        }
        out->set_diff(i, d);
    }
    return out->finalize();
}

ColimitResult poset_colimit(const PosetDiagram& d) {
    if (d.nodes.empty()) throw std::invalid_argument("poset_colimit: empty diagram");
    RingPtr ring = d.nodes[0]->ring();
    for (const ModulePtr& n : d.nodes)
        if (!n->ring()->same_as(*ring)) throw std::invalid_argument("poset_colimit: mixed rings");
    for (const auto& [pair, f] : d.maps) {
        if (f.src() != d.nodes[static_cast<std::size_t>(pair.first)] ||
            f.dst() != d.nodes[static_cast<std::size_t>(pair.second)])
            throw std::invalid_argument("poset_colimit: map endpoints mismatch");
        if (!f.is_chain_map()) throw std::invalid_argument("poset_colimit: map is not a chain map");
    }
    // commutation: for a <= b <= c with all pairs present, f_bc ∘ f_ab = f_ac
    for (const auto& [ab, fab] : d.maps)
        for (const auto& [bc, fbc] : d.maps) {
            if (ab.second != bc.first) continue;
            auto it = d.maps.find({ab.first, bc.second});
            if (it == d.maps.end()) continue;
            if (!maps_equal(ModMap::compose(fbc, fab), it->second))
                throw std::invalid_argument("poset_colimit: diagram does not commute");
        }

    int lo = 0, hi = -1;
    bool any = false;
    for (const ModulePtr& n : d.nodes) {
        if (n->is_zero_module()) continue;
        if (!any) {
            lo = n->imin();
            hi = n->imax();
            any = true;
        } else {
            lo = std::min(lo, n->imin());
            hi = std::max(hi, n->imax());
        }
    }
    auto out = std::make_shared<GradedDGModule>(ring);
    std::map<int, std::vector<std::size_t>> offset;  // per degree, per node
    for (int i = lo; i <= hi && any; ++i) {
        std::vector<Multideg> degs;
        std::vector<std::size_t> offs;
        for (const ModulePtr& n : d.nodes) {
            offs.push_back(degs.size());
            const auto& g = n->gens(i);
            degs.insert(degs.end(), g.begin(), g.end());
        }
        offset[i] = offs;
        if (degs.empty()) continue;
        out->set_generators(i, degs);
        std::size_t total = degs.size();
        for (std::size_t k = 0; k < d.nodes.size(); ++k)
            for (const Relation& r : d.nodes[k]->relations(i)) {
                Relation rr{r.deg, QVec(total, 0)};
                for (std::size_t j = 0; j < r.coeffs.size(); ++j) rr.coeffs[offs[k] + j] = r.coeffs[j];
                out->add_relation(i, rr);
            }
        // glue: x - f(x) for every listed pair
        for (const auto& [pair, f] : d.maps) {
            auto a = static_cast<std::size_t>(pair.first);
            auto b = static_cast<std::size_t>(pair.second);
            const auto& ga = d.nodes[a]->gens(i);
            QMat fb = f.block(i);
            for (std::size_t j = 0; j < ga.size(); ++j) {
                Relation rr{ga[j], QVec(total, 0)};
                rr.coeffs[offs[a] + j] = 1;
                for (std::size_t t = 0; t < d.nodes[b]->gens(i).size(); ++t)
                    rr.coeffs[offs[b] + t] -= fb.at(t, j);
                out->add_relation(i, rr);
            }
        }
    }
    for (int i = lo; i < hi && any; ++i) {
        std::size_t rows = 0, cols = 0;
        for (const ModulePtr& n : d.nodes) {
            rows += n->gens(i + 1).size();
            cols += n->gens(i).size();
        }
        if (rows == 0 || cols == 0) continue;
        QMat dd(rows, cols);
        for (std::size_t k = 0; k < d.nodes.size(); ++k) {
            QMat b = d.nodes[k]->diff_block(i);
            for (std::size_t r = 0; r < b.rows(); ++r)
                for (std::size_t c = 0; c < b.cols(); ++c)
                    dd.at(offset[i + 1][k] + r, offset[i][k] + c) = b.at(r, c);
        }
        out->set_diff(i, dd);
    }
    ColimitResult res;
    res.module = out->finalize();
    for (std::size_t k = 0; k < d.nodes.size(); ++k) {
        ModMap inj(d.nodes[k], res.module, 0, deg_zero(ring->lattice_rank()));
        for (int i = lo; i <= hi && any; ++i) {
            const auto& g = d.nodes[k]->gens(i);
            if (res.module->gens(i).empty()) continue;
            QMat b(res.module->gens(i).size(), g.size());
            for (std::size_t j = 0; j < g.size(); ++j) b.at(offset[i][k] + j, j) = 1;
            inj.set_block(i, b);
        }
        inj.finalize();
        res.injections.push_back(std::move(inj));
    }
    return res;
}

QisVerdict is_quasi_iso(const ModMap& phi, const DegreeBox& box) {
    ModulePtr c = cone(phi);
    QisVerdict v;
    DegreeBox b = box;
    int rounds = box.policy == DegreeBox::Policy::AutoStabilize ? 2 : 0;
    for (int round = 0; round <= rounds; ++round) {
        for (const Multideg& m : b.points())
            for (int i = c->imin(); i <= c->imax(); ++i)
                if (c->cohomology_dim(i, m) != 0) {
                    v.verdict = Verdict::No;
                    v.witness = std::make_pair(i, m);
                    return v;
                }
        b = b.expanded(1);
    }
    v.verdict = Verdict::Yes;
    return v;
}

bool is_degreewise_surjective(const ModMap& phi, const DegreeBox& box) {
    const GradedDGModule& dst = *phi.dst();
    DegreeBox b = box.policy == DegreeBox::Policy::AutoStabilize ? box.expanded(1) : box;
    for (const Multideg& m : b.points())
        for (int i = dst.imin(); i <= dst.imax(); ++i) {
            int dd = dst.piece_dim(i, m);
            if (dd == 0) continue;
            if (static_cast<int>(rank(phi.piece_matrix(i - phi.p(), deg_sub(m, phi.w())))) != dd) return false;
        }
    return true;
}

}  // namespace dgn
