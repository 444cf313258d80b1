#pragma once
// Semicosimplicial DG-Lie algebras over the ordered nerve, their normalized
// total complex C(V), Ext computation through three models, and a truncated
// Thom-Whitney totalization with exact Whitney integration for property
// testing.

#include "dgnerve/homcx.hpp"

#include <map>
#include <memory>
#include <vector>

namespace dgn {

class SemicosimplicialDGLA {
public:
    // levels 𝔏_n = ∏_{tuples} Hom*(Q,Q)_α(tuple), cofaces by restriction
    static std::shared_ptr<SemicosimplicialDGLA> build_L(AModulePtr q);
    // levels from a pointwise free complex E: End over each chart, cofaces by
    // base change conjugated with the (piecewise inverted) transitions
    static std::shared_ptr<SemicosimplicialDGLA> build_h(AModulePtr e);

    const AModulePtr& base() const { return base_; }
    const Nerve& nerve() const { return base_->nerve(); }
    HomSystemPtr component(int simplex) const { return comps_[static_cast<std::size_t>(simplex)]; }
    std::vector<Tuple> tuples(int level) const { return ordered_nerve(nerve(), level); }
    std::vector<Tuple> norm_tuples(int level) const { return increasing_tuples(nerve(), level); }
    int max_norm_level() const { return nerve().max_deg(); }

    // matrix of the transport Hom_α -> Hom_β on (p, w) blocks, for α ⊆ β
    const QMat& transport(int a, int b, int p, const Multideg& w) const;

    // an element of 𝔏_n (full ordered-tuple model), sparse over
    // (tuple index, internal degree p, Z^n degree w) blocks in component
    // block coordinates
    struct LevelValue {
        int level = 0;
        std::map<std::tuple<std::size_t, int, Multideg>, QVec> chunks;

        bool is_zero() const;
    };

    LevelValue zero_level(int n) const { return LevelValue{n, {}}; }
    LevelValue level_add(const LevelValue& a, const LevelValue& b) const;
    LevelValue level_scale(const LevelValue& a, const Q& c) const;
    LevelValue level_diff(const LevelValue& a) const;
    // δ^k_* : 𝔏_n → 𝔏_{n+1}
    LevelValue coface(int k, const LevelValue& a) const;
    // componentwise graded commutator (product DG-Lie algebra)
    LevelValue level_bracket(const LevelValue& a, const LevelValue& b) const;
    bool level_equal(const LevelValue& a, const LevelValue& b) const;
    // basis chunk: the c-th basis vector of component block (p, w) at tuple t
    LevelValue basis_chunk(int level, std::size_t tuple_idx, int p, const Multideg& w, std::size_t c) const;

private:
    SemicosimplicialDGLA() = default;

    AModulePtr base_;
    bool conjugated_ = false;
    std::vector<HomSystemPtr> comps_;  // per simplex
    mutable std::map<std::tuple<int, int, int, Multideg>, QMat> transport_cache_;
    mutable std::map<std::pair<int, int>, ModMap> bc_maps_;  // conjugation transitions
    mutable std::mutex mu_;

    QMat compute_transport(int a, int b, int p, const Multideg& w) const;
};

// The normalized (strictly increasing tuples) total complex C(V) with
// D(x)_n = (-1)^n d(x_n) + Σ_i (-1)^i δ^i(x_{n-1}).
class TotalComplex {
public:
    TotalComplex(const SemicosimplicialDGLA* v, int level_cap);

    int level_cap() const { return cap_; }
    int dim(int p, const Multideg& w) const;
    const QMat& d_matrix(int p, const Multideg& w) const;
    int cohomology_dim(int p, const Multideg& w) const;
    // (level, tuple) block layout inside the (p, w) block
    std::vector<std::pair<int, Tuple>> layout() const;

private:
    struct BlockInfo {
        std::vector<std::size_t> offsets;  // per (level, tuple) slot
        std::size_t total = 0;
        QMat d;
        bool has_d = false;
    };
    BlockInfo& info(int p, const Multideg& w) const;

    const SemicosimplicialDGLA* v_;
    int cap_;
    std::vector<std::pair<int, Tuple>> slots_;  // (level, tuple), all levels <= cap
    mutable std::map<std::pair<int, Multideg>, BlockInfo> blocks_;
    mutable std::mutex mu_;
};

// ---- Ext through the three models ----

enum class ExtModel { EndOfQ, COfL, COfH };

struct ExtResult {
    std::map<int, int> dims;  // k -> dim Ext^k (k >= 0)
    bool stable = true;       // totals unchanged under two box expansions
};

// totals of H^k over the box, with stabilization when the policy asks for it
ExtResult ext_via_end(const HomSystem& end, const DegreeBox& box, int kmax);
ExtResult ext_via_total(const SemicosimplicialDGLA& v, const DegreeBox& box, int kmax);
ExtResult ext_via_total_cached(const TotalComplex& c, const DegreeBox& box, int kmax);

// builds the model inputs from a sheaf description; COfH on skyscrapers is
// supported on single-chart schemes (Koszul resolution of the chart origin)
ExtResult ext_dims(const SheafDescription& sheaf, const Scheme& scheme, ExtModel model, const DegreeBox& box,
                   int depth_cap = 16);

// H^k(C(𝔏)) for k < 0 must vanish; returns the first violation if any
bool nonnegative_cohomology(const SemicosimplicialDGLA& v, const DegreeBox& box, int kmin,
                            std::pair<int, Multideg>* witness = nullptr);

// full-tuple level blocks as plain matrices (tuples in ordered_nerve order)
int level_dim(const SemicosimplicialDGLA& v, int level, int p, const Multideg& w);
QMat level_diff_matrix(const SemicosimplicialDGLA& v, int level, int p, const Multideg& w);
QMat level_coface_matrix(const SemicosimplicialDGLA& v, int level, int k, int p, const Multideg& w);

// a complex of line-bundle sums presented by per-open generator degrees and
// one rational coefficient matrix per differential (monomials implied)
struct FreeComplexDescription {
    std::map<int, std::vector<LineBundleData>> terms;
    std::map<int, QMat> diffs;  // terms[i+1] x terms[i]
};

AModulePtr free_complex_module(const FreeComplexDescription& d, const Scheme& scheme);

// the Koszul-type resolution of a chart-origin skyscraper on a single-chart
// scheme with a principal vanishing ideal
AModulePtr skyscraper_resolution(const SheafDescription& sheaf, const Scheme& scheme);

// ---- polynomial forms on simplices ----

// element of Ω_n in the reduced coordinates t_1..t_n (t_0 eliminated);
// key = (exponent vector, dt subset bitmask)
struct PolyForm {
    int n = 0;
    std::map<std::pair<std::vector<int>, unsigned>, Q> terms;

    bool is_zero() const { return terms.empty(); }
    int max_poly_degree() const;
};

PolyForm pf_zero(int n);
PolyForm pf_one(int n);
PolyForm pf_var(int n, int i);  // t_i, 1 <= i <= n
PolyForm pf_dt(int n, int i);   // dt_i
PolyForm pf_add(const PolyForm& a, const PolyForm& b);
PolyForm pf_scale(const PolyForm& a, const Q& c);
PolyForm pf_mul(const PolyForm& a, const PolyForm& b);  // wedge product
PolyForm pf_d(const PolyForm& a);
// pullback along the k-th face Δ^{n-1} → Δ^n
PolyForm pf_face(const PolyForm& a, int k);
// split into dt-degree-homogeneous parts
std::map<int, PolyForm> pf_by_degree(const PolyForm& a);
// exact integral over Δ^n of the top-degree (dt_1∧...∧dt_n) part
Q pf_integrate_top(const PolyForm& a);

// ---- truncated Thom-Whitney totalization ----

struct TWElement {
    const SemicosimplicialDGLA* v = nullptr;
    int level_cap = 0;
    // levels[n]: finite sum of ω ⊗ value
    std::vector<std::vector<std::pair<PolyForm, SemicosimplicialDGLA::LevelValue>>> levels;
};

TWElement tw_zero(const SemicosimplicialDGLA* v, int cap);
TWElement tw_add(const TWElement& a, const TWElement& b);
TWElement tw_scale(const TWElement& a, const Q& c);
TWElement tw_diff(const TWElement& a);
TWElement tw_bracket(const TWElement& a, const TWElement& b);
bool tw_equal(const TWElement& a, const TWElement& b);
// the Tot_TW compatibility equations (δ_k^* ⊗ Id)x_n = (Id ⊗ δ_k)x_{n-1}
bool tw_compatible(const TWElement& a);
int tw_max_poly_degree(const TWElement& a);

// ĝ for g = the level-0 inclusion of a global Hom element
TWElement tw_lift(const SemicosimplicialDGLA& v, int cap, const HomElement& global_elem);
// Whitney map of a single level-m value into the totalization
TWElement tw_whitney(const SemicosimplicialDGLA& v, int cap, const SemicosimplicialDGLA::LevelValue& y);

// ---- the full-tuple Čech model used by Whitney integration ----

struct CechElement {
    const SemicosimplicialDGLA* v = nullptr;
    int level_cap = 0;
    std::vector<SemicosimplicialDGLA::LevelValue> levels;
};

CechElement cech_zero(const SemicosimplicialDGLA* v, int cap);
CechElement cech_add(const CechElement& a, const CechElement& b);
bool cech_equal(const CechElement& a, const CechElement& b);
// D(x)_n = (-1)^n d(x_n) + Σ_i (-1)^i δ^i(x_{n-1}); the top truncation level
// is dropped from comparisons (it would need level cap + 1 data)
CechElement cech_diff(const CechElement& a);
// simplexwise integration of the top-form parts
CechElement whitney_integrate(const TWElement& a);

}  // namespace dgn
