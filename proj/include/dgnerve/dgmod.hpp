#pragma once
// Complexes of finitely presented Z^n-graded modules over a monomial ring.
// A homogeneous element between graded pieces is a scalar times a forced
// monomial, so presentations, differentials and maps are plain rational
// coefficient matrices with degree bookkeeping; every graded piece is a
// finite-dimensional quotient space evaluated exactly.

#include "dgnerve/linalg.hpp"
#include "dgnerve/rings.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace dgn {

struct DegreeBox {
    Multideg lo, hi;
    enum class Policy { Fixed, AutoStabilize };
    Policy policy = Policy::AutoStabilize;
    int max_expansions = 4;

    static DegreeBox cube(int lattice_rank, int lo, int hi);
    bool contains(const Multideg& m) const;
    DegreeBox expanded(int by) const;
    std::vector<Multideg> points() const;
};

struct Relation {
    Multideg deg;
    QVec coeffs;  // over the generators of the relevant cohomological degree
};

// One graded piece: ambient basis x^{m-d_j} e_j for the listed generators,
// modulo the row space of the relation pieces (kept in RREF).
struct Piece {
    std::vector<int> amb;              // generator indices present at this degree
    QMat rel;                          // RREF rows over ambient coordinates
    std::vector<std::size_t> pivots;   // pivot ambient positions
    std::vector<std::size_t> free_cols;
    int dim() const { return static_cast<int>(free_cols.size()); }

    QVec canon(QVec ambient) const;          // reduce mod relations
    QVec coords(const QVec& canon) const;    // restrict to free columns
    QVec embed(const QVec& coords) const;    // place coords at free columns
};

class GradedDGModule;
using ModulePtr = std::shared_ptr<const GradedDGModule>;

class GradedDGModule : public std::enable_shared_from_this<GradedDGModule> {
public:
    explicit GradedDGModule(RingPtr ring) : ring_(std::move(ring)) {}

    void set_generators(int i, std::vector<Multideg> degs);
    void add_relation(int i, Relation r);
    void set_diff(int i, QMat block);  // shape gens(i+1) x gens(i)
    // Validates homogeneity, d(relations) ⊆ relations and d∘d = 0 mod
    // relations; the module is immutable afterwards.
    ModulePtr finalize();

    RingPtr ring() const { return ring_; }
    int imin() const { return imin_; }
    int imax() const { return imax_; }
    bool is_zero_module() const { return imin_ > imax_; }
    const std::vector<Multideg>& gens(int i) const;
    const std::vector<Relation>& relations(int i) const;
    QMat diff_block(int i) const;  // gens(i+1) x gens(i), zero-filled outside support

    const Piece& piece(int i, const Multideg& m) const;  // cached
    int piece_dim(int i, const Multideg& m) const { return piece(i, m).dim(); }

    // Compact matrix of multiplication by x^u : piece(i, m) -> piece(i, m+u).
    QMat mult_matrix(int i, const Multideg& m, const Multideg& u) const;
    // Compact matrix of the differential piece(i, m) -> piece(i+1, m).
    QMat diff_matrix(int i, const Multideg& m) const;

    int cohomology_dim(int i, const Multideg& m) const;

    // Membership of an ambient vector at (i, m) in the relation row space.
    bool in_relations(int i, const Multideg& m, const QVec& ambient) const;

private:
    void require_open() const;
    void require_final() const;

    RingPtr ring_;
    int imin_ = 1, imax_ = 0;
    std::map<int, std::vector<Multideg>> gens_;
    std::map<int, std::vector<Relation>> rels_;
    std::map<int, QMat> diff_;
    bool final_ = false;

    mutable std::map<std::pair<int, Multideg>, Piece> piece_cache_;
    mutable std::mutex mu_;

    static const std::vector<Multideg> kNoGens;
    static const std::vector<Relation> kNoRels;
};

ModulePtr zero_module(RingPtr ring);
// Free module with the listed generators, zero differential.
ModulePtr free_module(RingPtr ring, const std::vector<std::pair<int, Multideg>>& gens);

// Degree-(p, w) map of presented modules, given on generators.
class ModMap {
public:
    ModMap() = default;
    ModMap(ModulePtr src, ModulePtr dst, int p, Multideg w);

    void set_block(int i, QMat block);  // shape dst.gens(i+p) x src.gens(i)
    void finalize();                    // homogeneity + well-definedness on relations

    ModulePtr src() const { return src_; }
    ModulePtr dst() const { return dst_; }
    int p() const { return p_; }
    const Multideg& w() const { return w_; }
    QMat block(int i) const;  // zero-filled outside support

    bool is_chain_map() const;  // φ d = (-1)^p d φ as presented maps
    // Compact matrix piece_src(i, m) -> piece_dst(i+p, m+w).
    QMat piece_matrix(int i, const Multideg& m) const;
    QVec apply_coords(int i, const Multideg& m, const QVec& coords) const;

    static ModMap compose(const ModMap& g, const ModMap& f);  // g ∘ f
    static ModMap identity(ModulePtr m);
    ModMap operator+(const ModMap& o) const;
    ModMap operator-(const ModMap& o) const;
    ModMap scaled(const Q& c) const;
    ModMap with_codomain(ModulePtr dst2) const;  // same blocks over a larger ring

private:
    ModulePtr src_, dst_;
    int p_ = 0;
    Multideg w_;
    std::map<int, QMat> blocks_;
    bool final_ = false;
};

bool maps_equal(const ModMap& a, const ModMap& b);  // as presented-module maps

// ---- operations ----

struct PieceComplex {
    Multideg m;
    int imin = 0, imax = -1;
    std::vector<int> dims;    // dims[i - imin]
    std::vector<QMat> diffs;  // compact matrices piece(i) -> piece(i+1)
};

PieceComplex piece_complex(const GradedDGModule& mod, const Multideg& m);

// (cohomological degree, Z^n degree) -> dim H; zero entries omitted.
using BettiTable = std::map<std::pair<int, Multideg>, int>;
BettiTable cohomology_dims(const GradedDGModule& mod, const DegreeBox& box);

ModulePtr base_change(const GradedDGModule& mod, const RingMap& f);
ModMap base_change(const ModMap& map, const RingMap& f);

ModulePtr shift(ModulePtr mod, int k);
// cone(φ)^i = N^i ⊕ M^{i+1}, d(n, m) = (d_N n + φ m, -d_M m).
ModulePtr cone(const ModMap& phi);
// cocone(φ)^i = M^i ⊕ N^{i-1}, d(m, n) = (d_M m, φ m - d_N n);
// cocone(Id) is the contractible two-row factorization complex.
ModulePtr cocone(const ModMap& phi);

struct PosetDiagram {
    std::vector<ModulePtr> nodes;                // all over one ring
    std::map<std::pair<int, int>, ModMap> maps;  // one map per comparable pair a < b
};

struct ColimitResult {
    ModulePtr module;
    std::vector<ModMap> injections;  // one per node
};

// Coequalizer presentation (⊕ M_γ) / (x - f(x)); rejects non-commuting data.
ColimitResult poset_colimit(const PosetDiagram& d);

enum class Verdict { Yes, No, Inconclusive };

struct QisVerdict {
    Verdict verdict = Verdict::Inconclusive;
    std::optional<std::pair<int, Multideg>> witness;  // piece with nonzero cone cohomology
};

QisVerdict is_quasi_iso(const ModMap& phi, const DegreeBox& box);

bool is_degreewise_surjective(const ModMap& phi, const DegreeBox& box);

}  // namespace dgn
