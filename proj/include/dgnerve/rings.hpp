#pragma once
// Coefficient algebras: affine-semigroup (monomial) rings over Q with exact
// monoid membership, flat localization-style ring maps, and finite
// dimensional nilpotent Artin local rings for deformation coefficients.

#include "dgnerve/linalg.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace dgn {

using Multideg = std::vector<int>;  // point of the ambient lattice Z^n

Multideg deg_add(const Multideg& a, const Multideg& b);
Multideg deg_sub(const Multideg& a, const Multideg& b);
Multideg deg_neg(const Multideg& a);
Multideg deg_zero(int rank);
std::string deg_str(const Multideg& a);

// Graded piece at m is Q when m lies in the monoid generated by `gens`,
// zero otherwise. Membership is decided exactly: by the Steinitz
// rearrangement bound, any representation of m as a sum of generators can be
// reordered so every partial sum stays in the sup-norm ball of radius
// |m| + rank * max|gen|; a memoized BFS over that ball is complete.
class MonomialRing {
public:
    MonomialRing(int lattice_rank, std::vector<Multideg> gens, std::string name = "");

    int lattice_rank() const { return rank_; }
    const std::vector<Multideg>& gens() const { return gens_; }
    const std::string& name() const { return name_; }

    bool contains(const Multideg& m) const;
    bool submonoid_of(const MonomialRing& other) const;
    // structural equality: same lattice and same generator set
    bool same_as(const MonomialRing& other) const;

private:
    int rank_;
    std::vector<Multideg> gens_;
    std::string name_;
    long max_gen_norm_;
    mutable std::map<Multideg, bool> memo_;
    mutable long memo_radius_ = -1;
    mutable std::mutex mu_;
};

using RingPtr = std::shared_ptr<const MonomialRing>;

RingPtr make_ring(int lattice_rank, std::vector<Multideg> gens, std::string name = "");

// A flat map of chart rings: a monoid inclusion within one ambient lattice.
struct RingMap {
    RingPtr source;
    RingPtr target;
};

RingMap ring_map(RingPtr source, RingPtr target);  // throws unless source ⊆ target

// ---- Artin local rings ----

// K-algebra with basis e_0 = 1, e_1, ..., e_r where m_A = span(e_1..e_r) is
// nilpotent. Structure constants are validated on construction.
class ArtinLocalRing {
public:
    static ArtinLocalRing dual_numbers();            // K[eps]/eps^2
    static ArtinLocalRing truncated_poly(int k);     // K[t]/t^k, k >= 2
    // table[i][j] = coordinates of e_i * e_j over the full basis, for
    // i,j >= 1 (products with e_0 are forced by unitality).
    static ArtinLocalRing from_table(std::vector<std::string> names,
                                     std::vector<std::vector<QVec>> table);

    int dim() const { return static_cast<int>(names_.size()); }
    int max_ideal_dim() const { return dim() - 1; }
    int nilpotency_index() const { return nu_; }
    // m_A-adic order of a basis element (0 for the unit)
    int order(int i) const { return orders_[static_cast<std::size_t>(i)]; }
    const std::string& basis_name(int i) const { return names_[i]; }
    // e_i * e_j over the full basis (any i, j including 0).
    QVec product(int i, int j) const;

    QVec mul(const QVec& a, const QVec& b) const;

private:
    ArtinLocalRing() = default;
    void validate_and_finish();

    std::vector<std::string> names_;
    std::vector<std::vector<QVec>> table_;  // (r x r), indices shifted by one
    std::vector<int> orders_;
    int nu_ = 0;
};

using ArtinPtr = std::shared_ptr<const ArtinLocalRing>;

// Element of an Artin local ring: coordinates over the full basis.
struct ArtinElem {
    const ArtinLocalRing* ring = nullptr;
    QVec c;

    static ArtinElem zero(const ArtinLocalRing& a);
    static ArtinElem one(const ArtinLocalRing& a);
    static ArtinElem basis(const ArtinLocalRing& a, int i);

    bool is_zero() const { return vec_is_zero(c); }
    bool in_max_ideal() const { return c.empty() || c[0] == 0; }
    ArtinElem operator+(const ArtinElem& o) const;
    ArtinElem operator-(const ArtinElem& o) const;
    ArtinElem operator*(const ArtinElem& o) const;
    ArtinElem scaled(const Q& q) const;
    bool operator==(const ArtinElem& o) const { return c == o.c; }
};

}  // namespace dgn
