#pragma once
// Hom complexes of A_•-modules: families of homogeneous A_γ-linear maps
// commuting with the structure maps, over the whole nerve (global Hom) or
// over an Alexandroff basic open V_α (local Hom). Each (cohomological
// degree, Z^n degree) block is a finite-dimensional solution space of exact
// linear constraints; the End complex carries the graded-commutator DG-Lie
// structure.

#include "dgnerve/amod.hpp"

#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace dgn {

// (i, j) pairs enumerating the generators of a module, in degree order
std::vector<std::pair<int, std::size_t>> gen_index(const GradedDGModule& m);

// coords of a piece vector transported along a base change (same generators)
QVec transport_coords(const GradedDGModule& from, const GradedDGModule& to, int i, const Multideg& m,
                      const QVec& coords);

// applies a family given by generator-image coordinates: `images` is indexed
// like gen_index(fmod) and holds coords in gmod pieces (i+p, d+w); the input
// is a piece vector of fmod at (i, m)
QVec apply_generator_images(const GradedDGModule& fmod, const GradedDGModule& gmod,
                            const std::vector<QVec>& images, int p, const Multideg& w, int i,
                            const Multideg& m, const QVec& coords);
std::size_t flat_gen_of(const GradedDGModule& m, int i, std::size_t j);

struct HomElement {
    AModulePtr F, G;
    std::vector<int> S;  // up-closed simplex index set, sorted
    int p = 0;
    Multideg w;
    // images[k][t]: coords of φ_{S[k]}(g_t) in G_{S[k]}.piece(i_t + p, d_t + w),
    // t indexing gen_index(F_{S[k]})
    std::vector<std::vector<QVec>> images;

    static HomElement zero(AModulePtr f, AModulePtr g, std::vector<int> s, int p, Multideg w);

    bool is_zero() const;
    bool operator==(const HomElement& o) const;
    HomElement operator+(const HomElement& o) const;
    HomElement operator-(const HomElement& o) const;
    HomElement scaled(const Q& c) const;

    // φ_{S[k]} applied to a piece vector of F_{S[k]} at (i, m)
    QVec apply(std::size_t k, int i, const Multideg& m, const QVec& coords) const;

    HomElement differential() const;  // ∂φ = d_G∘φ - (-1)^p φ∘d_F
    HomElement restricted(const std::vector<int>& s2) const;

    static HomElement compose(const HomElement& g, const HomElement& f);  // g ∘ f
    // graded commutator [a, b] = a∘b - (-1)^{|a||b|} b∘a (requires F == G)
    static HomElement bracket(const HomElement& a, const HomElement& b);
};

class HomSystem {
public:
    HomSystem(AModulePtr f, AModulePtr g, std::vector<int> s);

    static std::shared_ptr<HomSystem> global(AModulePtr f, AModulePtr g);
    static std::shared_ptr<HomSystem> local(AModulePtr f, AModulePtr g, int alpha);

    const AModulePtr& F() const { return f_; }
    const AModulePtr& G() const { return g_; }
    const std::vector<int>& S() const { return s_; }

    const std::vector<HomElement>& basis(int p, const Multideg& w) const;
    int dim(int p, const Multideg& w) const;
    // matrix of ∂ from block (p, w) to block (p+1, w)
    const QMat& diff_matrix(int p, const Multideg& w) const;
    int cohomology_dim(int p, const Multideg& w) const;

    // coordinates of a concrete element in the block basis; throws if the
    // element does not satisfy the block constraints
    QVec coordinates(const HomElement& e) const;
    HomElement from_coordinates(int p, const Multideg& w, const QVec& coords) const;

    std::pair<int, int> p_range() const;

private:
    struct Block {
        std::vector<HomElement> basis;
        QMat flat;  // rows = flattened basis vectors (unknown coordinates)
        std::optional<QMat> diff;
    };
    const Block& block(int p, const Multideg& w) const;
    QVec flatten(const HomElement& e) const;

    AModulePtr f_, g_;
    std::vector<int> s_;
    mutable std::map<std::pair<int, Multideg>, Block> blocks_;
    mutable std::mutex mu_;
};

using HomSystemPtr = std::shared_ptr<HomSystem>;

// matrix of the restriction Hom(..)_from → Hom(..)_to on (p, w) blocks;
// to.S() must be contained in from.S()
QMat restriction_matrix(const HomSystem& from, const HomSystem& to, int p, const Multideg& w);

// dimension of the space of A_•-module morphisms of Z^n-degree w, solved
// directly (chain-map + commutation constraints in one system); this is the
// independent cross-check for Z^0 of the Hom complex
int morphism_space_dim(AModulePtr f, AModulePtr g, const Multideg& w);

// DG-Lie axioms on all stored basis elements of the blocks listed
struct DGLAAxiomReport {
    bool differential_squares_to_zero = true;
    bool antisymmetry = true;
    bool jacobi = true;
    bool leibniz = true;
    bool ok() const { return differential_squares_to_zero && antisymmetry && jacobi && leibniz; }
};

DGLAAxiomReport check_dgla_axioms(const HomSystem& end, const std::vector<std::pair<int, Multideg>>& blocks);

// h with π∘h = f, solved on the (p, w) block; requires π degreewise
// surjective and Q cofibrant for guaranteed existence
std::optional<HomElement> lift_against_surjection(const HomSystem& hom_qp, const AModuleMap& pi,
                                                  const HomElement& f);

// definitional flasqueness check on basic opens and the global sections,
// per piece inside the box
bool is_flasque_in_box(const AModule& f, const DegreeBox& box);

}  // namespace dgn
