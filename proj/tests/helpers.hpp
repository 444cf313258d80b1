#pragma once
// Shared builders for the test suites.

#include "dgnerve/dgmod.hpp"
#include "dgnerve/nerve.hpp"
#include "dgnerve/rings.hpp"

namespace dgn::testing {

inline RingPtr k_u() { return make_ring(1, {{1}}, "K[u]"); }
inline RingPtr k_uinv() { return make_ring(1, {{-1}}, "K[u^-1]"); }
inline RingPtr k_laurent() { return make_ring(1, {{1}, {-1}}, "K[u,u^-1]"); }
inline RingPtr k_field(int rank = 0) { return make_ring(rank, {}, "K"); }

// free rank-1 module concentrated in degree 0 with generator degree d
inline ModulePtr line_module(RingPtr ring, Multideg d) {
    return free_module(std::move(ring), {{0, std::move(d)}});
}

// the Koszul resolution K[u] --*u--> K[u] of the origin skyscraper,
// in cohomological degrees -1, 0
inline ModulePtr koszul_point(RingPtr ku) {
    auto m = std::make_shared<GradedDGModule>(std::move(ku));
    m->set_generators(-1, {{1}});
    m->set_generators(0, {{0}});
    QMat d(1, 1);
    d.at(0, 0) = 1;
    m->set_diff(-1, d);
    return m->finalize();
}

// skyscraper K[u]/(u) as a presented module in degree 0
inline ModulePtr point_module(RingPtr ku) {
    auto m = std::make_shared<GradedDGModule>(std::move(ku));
    m->set_generators(0, {{0}});
    m->add_relation(0, Relation{{1}, {Q(1)}});
    return m->finalize();
}

// C_alpha^op ⊗ A: the oriented chain complex of one simplex placed in
// nonpositive cohomological degrees, with scalars extended to `ring`
inline ModulePtr cop_module(const SimplicialChainComplex& c, RingPtr ring) {
    auto m = std::make_shared<GradedDGModule>(ring);
    int top = c.top_degree();
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

}  // namespace dgn::testing
