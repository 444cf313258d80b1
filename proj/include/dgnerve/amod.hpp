#pragma once
// A_•-modules over the nerve of a cover: the scheme diagram of chart rings,
// Υ* of described sheaves, cocycle and quasi-coherence checks, latching
// modules, cofibrancy verdicts and cofibrant replacements.

#include "dgnerve/dgmod.hpp"
#include "dgnerve/nerve.hpp"
#include "dgnerve/rings.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dgn {

// A scheme presented as a diagram of monomial chart rings over a nerve.
// Intersection rings are generated by the union of the open charts'
// monoid generators.
struct Scheme {
    NervePtr nerve;
    std::vector<RingPtr> rings;  // per simplex index
    int lattice_rank = 0;

    static Scheme builtin(const std::string& name);  // "A1" | "P1" | "P2"
    static Scheme from_opens(const CoverDescription& cover, int lattice_rank,
                             const std::vector<std::vector<Multideg>>& open_gens);

    RingPtr ring(int alpha) const { return rings[static_cast<std::size_t>(alpha)]; }
    RingMap chart_map(int a, int b) const;  // A_a -> A_b for a <= b
};

class AModule;
using AModulePtr = std::shared_ptr<const AModule>;

class AModule : public std::enable_shared_from_this<AModule> {
public:
    AModule(NervePtr nerve, std::vector<RingPtr> rings);

    void set_module(int alpha, ModulePtr m);
    // adjoint-form structure map F_a -> F_b over A_a, for a covering pair
    void set_structure_map(int a, int b, ModMap m);
    // Validates chain-map property, path independence of composites and the
    // cocycle condition on all chains of length 3.
    AModulePtr finalize();

    const Nerve& nerve() const { return *nerve_; }
    NervePtr nerve_ptr() const { return nerve_; }
    RingPtr ring(int alpha) const { return rings_[static_cast<std::size_t>(alpha)]; }
    ModulePtr module(int alpha) const { return modules_[static_cast<std::size_t>(alpha)]; }
    // composite adjoint map F_a -> F_b for any a <= b (identity when a == b)
    const ModMap& map(int a, int b) const;
    // the same map in base-changed form F_a ⊗_{A_a} A_b -> F_b
    ModMap base_changed_map(int a, int b) const;

private:
    NervePtr nerve_;
    std::vector<RingPtr> rings_;
    std::vector<ModulePtr> modules_;
    mutable std::map<std::pair<int, int>, ModMap> maps_;
    bool final_ = false;
};

// Morphism of A_•-modules: degree-(0,0) chain maps commuting with structure.
struct AModuleMap {
    AModulePtr src, dst;
    std::vector<ModMap> components;  // per simplex

    void validate() const;  // throws on violation
    const ModMap& at(int alpha) const { return components[static_cast<std::size_t>(alpha)]; }
};

// ---- sheaf descriptions ----

struct LineBundleData {
    // generator Z^n-degree per open chart; intersections use the degree at
    // their smallest open index
    std::map<int, Multideg> open_deg;
};

struct SkyscraperData {
    int chart_open = 0;
    std::vector<Multideg> ideal_gens;  // monomial relations cutting the point
};

struct SheafDescription {
    enum class Kind { LineBundleSum, Skyscraper, Explicit };
    Kind kind = Kind::LineBundleSum;
    std::vector<LineBundleData> summands;
    SkyscraperData sky;
    AModulePtr explicit_mod;

    static SheafDescription structure_sheaf(const Scheme& s);
    // one generator degree per open chart, per summand
    static SheafDescription line_bundle_sum(const std::vector<std::vector<Multideg>>& open_degs);
    // O(d_1) ⊕ ... ⊕ O(d_k) on the builtin charts: open 0 carries degree 0,
    // open h > 0 carries -d * (its first monoid generator)
    static SheafDescription standard_twists(const Scheme& s, const std::vector<int>& ds);
    static SheafDescription skyscraper(const Scheme& s, int chart_open);
};

AModulePtr upsilon_star(const SheafDescription& sheaf, const Scheme& scheme);

// degree of the line-bundle summand on a given simplex
Multideg summand_degree(const LineBundleData& lb, const Nerve& nerve, int alpha);

// ---- verdict-producing operations ----

struct QcohReport {
    Verdict verdict = Verdict::Yes;
    std::optional<std::pair<int, int>> witness;  // failing pair a <= b
};

QcohReport check_quasi_coherent(const AModule& f, const DegreeBox& box);

struct LatchingResult {
    ModulePtr module;
    ModMap comparison;            // L_α F -> F_α
    std::vector<int> subfaces;    // node order of the colimit
    std::vector<ModMap> injections;
};

LatchingResult latching(const AModule& f, int alpha);

struct CofibrancyReport {
    struct PerSimplex {
        bool split_injective = false;
        bool coker_free = false;
        std::vector<std::pair<int, Multideg>> coker_basis;  // (cohdeg, Z^n deg)
    };
    Verdict verdict = Verdict::Yes;
    int witness = -1;
    bool pointwise_cofibrant = true;
    std::vector<PerSimplex> per_simplex;
};

CofibrancyReport check_cofibrant(const AModule& f, const DegreeBox& box);

// ---- replacements ----

struct Replacement {
    AModulePtr q;
    AModulePtr target;
    AModuleMap augmentation;  // q -> target, pointwise surjective quasi-iso
};

Replacement qx_replacement(const Scheme& scheme);
Replacement locally_free_replacement(const SheafDescription& sheaf, const Scheme& scheme);

struct ReplaceDiagnostics {
    int rounds_used = 0;
    bool stabilized = false;
    std::string message;
};

// General inductive cofibrant replacement for a bounded-above, pointwise
// finitely generated, quasi-coherent input. Throws std::runtime_error with
// diagnostics if depth_cap is exhausted before the box verdict stabilizes.
Replacement cofibrant_replace(AModulePtr f, const DegreeBox& box, int depth_cap,
                              ReplaceDiagnostics* diag = nullptr);

}  // namespace dgn
