#pragma once
// Cover combinatorics: the nerve poset of an open cover, its degree function,
// ordered tuples with repeats, and oriented simplicial chain complexes of the
// simplices (used to build the standard cofibrant replacement).

#include "dgnerve/linalg.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace dgn {

// Index subsets are kept sorted ascending; the ambient order on cover indices
// is the orientation order for all boundary signs.
using Simplex = std::vector<int>;
using Tuple = std::vector<int>;  // ordered, repeats allowed

struct CoverDescription {
    std::vector<std::string> open_names;
    bool all_nonempty = true;
    // Listed nonempty intersections (only consulted when !all_nonempty).
    // Must contain every singleton and be closed under nonempty subsets.
    std::set<Simplex> nonempty;
};

class Nerve {
public:
    static Nerve build(const CoverDescription& cover);

    int num_opens() const { return num_opens_; }
    const std::vector<std::string>& open_names() const { return names_; }
    int size() const { return static_cast<int>(simplices_.size()); }
    const std::vector<Simplex>& simplices() const { return simplices_; }
    const Simplex& simplex(int idx) const { return simplices_[idx]; }
    int index_of(const Simplex& s) const;  // -1 if absent
    bool contains(const Simplex& s) const { return index_of(s) >= 0; }
    int deg(int idx) const { return static_cast<int>(simplices_[idx].size()) - 1; }
    int max_deg() const;
    bool leq(int a, int b) const;  // subset order

    std::vector<int> strict_subfaces(int idx) const;  // {γ | γ < α}
    std::vector<int> opens_above(int idx) const;      // V_α = {γ | γ ≥ α}
    std::vector<int> all_indices() const;

    // Covering pairs γ ⋖ γ' (|γ'| = |γ|+1) with both ends in `subset`.
    std::vector<std::pair<int, int>> hasse_pairs(const std::vector<int>& subset) const;
    // All comparable pairs a < b within `subset`.
    std::vector<std::pair<int, int>> comparable_pairs(const std::vector<int>& subset) const;

private:
    int num_opens_ = 0;
    std::vector<std::string> names_;
    std::vector<Simplex> simplices_;  // sorted by (size, lex)
    std::map<Simplex, int> index_;
};

using NervePtr = std::shared_ptr<const Nerve>;

// All tuples (j_0,...,j_n) whose underlying set is a simplex, lexicographic.
std::vector<Tuple> ordered_nerve(const Nerve& n, int level);
// The strictly increasing view (normalized Čech model).
std::vector<Tuple> increasing_tuples(const Nerve& n, int level);

Simplex underlying_simplex(const Tuple& t);

// δ^k : [n] → [n+1] as a value table of length n+1.
std::vector<int> delta_map(int k, int n);
// (a_{f(0)},...,a_{f(n)}) for monotone f : [n] → [m] given by its values.
Tuple coface_reindex(const std::vector<int>& f, const Tuple& t);

// Oriented simplicial chain complex of the full face poset of one simplex.
// faces[r] lists the (r+1)-subsets of the simplex in lex order; boundary[r]
// is the integer matrix C_r -> C_{r-1}.
struct SimplicialChainComplex {
    Simplex simplex;
    std::vector<std::vector<Simplex>> faces;
    std::vector<ZMat> boundary;  // boundary[r] defined for r >= 1

    int top_degree() const { return static_cast<int>(faces.size()) - 1; }
    int rank(int r) const;
};

SimplicialChainComplex chain_complex(const Simplex& s, const Nerve& n);

// Homology ranks/torsion via Smith normal form; returns true iff
// H_0 = Z and H_j = 0 for j != 0.
bool chain_homology_is_point(const SimplicialChainComplex& c);

}  // namespace dgn
