#pragma once
// Deformation theory over nilpotent Artin coefficients: Maurer-Cartan
// elements, the gauge action (formula and operator forms), the truncated
// Baker-Campbell-Hausdorff product, the Z^1/H^1 functor of a
// semicosimplicial DG-Lie algebra, deformed complexes and tangent spaces.

#include "dgnerve/cech.hpp"

#include <optional>

namespace dgn {

// Element of g ⊗ m_A for an End-type DG-Lie algebra g: a finite sum of
// homogeneous Hom elements tensored with maximal-ideal basis elements.
struct DGLAElem {
    const ArtinLocalRing* A = nullptr;
    int degree = 0;
    std::vector<std::pair<int, HomElement>> terms;  // artin index >= 1

    static DGLAElem zero(const ArtinLocalRing& a, int degree);
    static DGLAElem single(const ArtinLocalRing& a, int artin_idx, HomElement x);

    DGLAElem operator+(const DGLAElem& o) const;
    DGLAElem operator-(const DGLAElem& o) const;
    DGLAElem scaled(const Q& c) const;
    DGLAElem normalized() const;  // collect terms by (artin index, p, w)
    bool is_zero() const;
    bool equals(const DGLAElem& o) const;
};

DGLAElem d_elem(const DGLAElem& x);
DGLAElem bracket_elem(const DGLAElem& x, const DGLAElem& y);

// x • y = log(e^x e^y), exact up to nilpotency index 5
DGLAElem bch(const DGLAElem& x, const DGLAElem& y);

// e^a * l = l + Σ_k ad_a^k([a,l] - ∂a)/(k+1)!; the formula agrees with
// conjugating d + l by e^a (cross-checked exactly by the operator model)
DGLAElem gauge_act(const DGLAElem& a, const DGLAElem& l);

// Maurer-Cartan: ∂η + ½[η,η] = 0
bool mc_check(const DGLAElem& eta);

// operator cross-check: e^a (d + l) e^{-a} - d computed on the pieces of
// Q ⊗ A equals the formula gauge action, coefficient by coefficient
bool gauge_conjugation_matches(const DGLAElem& a, const DGLAElem& l);

struct DeformResult {
    bool square_zero = false;             // (d + η)^2 = 0 on all generators
    bool structure_maps_compatible = false;  // q(d+η) = (d+η)q over all pairs
    bool flat = false;                    // underlying module free over A
};

// deformed family (Q_α ⊗ A, d + η_α); throws if η fails mc_check
DeformResult deform(const AModulePtr& q, const DGLAElem& eta);

// ---- the H^1 functor of a semicosimplicial DG-Lie algebra ----

// element of 𝔏_n^deg ⊗ m_A in the full ordered-tuple model
struct ScElem {
    const SemicosimplicialDGLA* v = nullptr;
    const ArtinLocalRing* A = nullptr;
    int level = 0;
    int degree = 0;
    std::map<std::size_t, DGLAElem> comps;  // by tuple index, missing = 0

    bool is_zero() const;
};

ScElem sc_zero(const SemicosimplicialDGLA& v, const ArtinLocalRing& a, int level, int degree);
ScElem sc_add(const ScElem& x, const ScElem& y);
ScElem sc_scale(const ScElem& x, const Q& c);
ScElem sc_diff(const ScElem& x);
ScElem sc_coface(int k, const ScElem& x);
ScElem sc_bracket(const ScElem& x, const ScElem& y);
ScElem sc_bch(const ScElem& x, const ScElem& y);
ScElem sc_gauge(const ScElem& a, const ScElem& l);
bool sc_equal(const ScElem& x, const ScElem& y);

struct H1Datum {
    ScElem l;  // level 0, degree 1
    ScElem m;  // level 1, degree 0
};

struct Z1Report {
    bool mc_ok = false;          // dl + ½[l,l] = 0
    bool transition_ok = false;  // ∂_{1,1} l = e^m * ∂_{0,1} l
    bool cocycle_ok = false;     // BCH cocycle solvable for some n
    std::optional<ScElem> witness_n;
    bool ok() const { return mc_ok && transition_ok && cocycle_ok; }
};

Z1Report z1_check(const H1Datum& datum, const DegreeBox& box);

struct EquivReport {
    bool equivalent = false;
    std::optional<ScElem> witness_a;
    std::optional<ScElem> witness_b;
    std::string failure;
};

// Solves e^a * l_0 = l_1 order by order along the m_A-adic filtration, then
// the b-equation (-∂_{0,1}a) • (-m_1) • (∂_{1,1}a) • m_0 = db + [∂_{0,1}l_0, b]
// as a linear system.
EquivReport h1_equiv(const H1Datum& d0, const H1Datum& d1, const DegreeBox& box);

// ---- tangent spaces over K[eps] ----

// dim MC(K[eps]) / gauge for an End-type DG-Lie algebra, computed from the
// linearized MC and gauge systems, summed over the box
int tangent_dim_end(const HomSystem& end, const DegreeBox& box);

// dim H^1_𝔏(K[eps]) via the linearized Z^1 and orbit systems
int h1_dim_eps(const SemicosimplicialDGLA& v, const DegreeBox& box);

}  // namespace dgn
