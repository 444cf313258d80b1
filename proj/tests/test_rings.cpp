#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgnerve/rings.hpp"

using namespace dgn;

namespace {

// independent oracle: bounded brute-force search for a nonnegative generator
// combination, coefficients up to `cap` each
bool member_bruteforce(const std::vector<Multideg>& gens, const Multideg& m, int cap) {
    std::vector<int> c(gens.size(), 0);
    while (true) {
        Multideg s = deg_zero(static_cast<int>(m.size()));
        for (std::size_t i = 0; i < gens.size(); ++i)
            for (int k = 0; k < c[i]; ++k) s = deg_add(s, gens[i]);
        if (s == m) return true;
        std::size_t i = 0;
        while (i < c.size() && c[i] == cap) c[i++] = 0;
        if (i == c.size()) return false;
        ++c[i];
    }
}

}  // namespace

TEST_CASE("chart_ring membership: K[u] and Laurent") {
    MonomialRing ku(1, {{1}}, "K[u]");
    CHECK(ku.contains({0}));
    CHECK(ku.contains({3}));
    CHECK(!ku.contains({-1}));

    MonomialRing laurent(1, {{1}, {-1}}, "K[u,u^-1]");
    for (int m = -5; m <= 5; ++m) CHECK(laurent.contains({m}));
}

TEST_CASE("chart_ring with empty generator list is the base field") {
    MonomialRing k(1, {}, "K");
    CHECK(k.contains({0}));
    CHECK(!k.contains({1}));
    MonomialRing k0(0, {}, "K");
    CHECK(k0.contains(Multideg{}));
}

TEST_CASE("blow-up chart membership, against brute force") {
    std::vector<Multideg> gens = {{1, 0}, {0, 1}, {-1, 1}};
    MonomialRing r(2, gens, "blowup");
    CHECK(!r.contains({-2, 1}));
    CHECK(r.contains({-1, 2}));
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b) {
            Multideg m{a, b};
            CHECK(r.contains(m) == member_bruteforce(gens, m, 7));
        }
}

TEST_CASE("monoid membership with cancellation needs the Steinitz detour") {
    // reaching (0,0) by non-trivial combinations: g1 + g2 = 0
    MonomialRing r(2, {{3, -1}, {-3, 1}}, "line");
    CHECK(r.contains({0, 0}));
    CHECK(r.contains({3, -1}));
    CHECK(r.contains({-6, 2}));
    CHECK(!r.contains({1, 0}));
}

TEST_CASE("ring_map requires a monoid inclusion") {
    RingPtr ku = make_ring(1, {{1}});
    RingPtr laurent = make_ring(1, {{1}, {-1}});
    CHECK_NOTHROW(ring_map(ku, laurent));
    CHECK_THROWS(ring_map(laurent, ku));
}

TEST_CASE("artin_ring builtin kinds") {
    ArtinLocalRing eps = ArtinLocalRing::dual_numbers();
    CHECK(eps.dim() == 2);
    CHECK(eps.nilpotency_index() == 2);

    ArtinLocalRing t3 = ArtinLocalRing::truncated_poly(3);
    CHECK(t3.dim() == 3);
    CHECK(t3.nilpotency_index() == 3);
    // t * t = t^2, t * t^2 = 0
    QVec tt = t3.product(1, 1);
    CHECK(tt[2] == 1);
    CHECK(vec_is_zero(t3.product(1, 2)));

    // K[x,y]/(x^2, xy, y^2)
    auto z = [] { return QVec(3, 0); };
    ArtinLocalRing fat = ArtinLocalRing::from_table({"1", "x", "y"}, {{z(), z()}, {z(), z()}});
    CHECK(fat.dim() == 3);
    CHECK(fat.nilpotency_index() == 2);
}

TEST_CASE("artin_ring rejects non-nilpotent and non-associative tables") {
    // e * e = e is idempotent, not nilpotent
    QVec ee(2, 0);
    ee[1] = 1;
    CHECK_THROWS(ArtinLocalRing::from_table({"1", "e"}, {{ee}}));
    // unit component in a product of maximal-ideal elements
    QVec bad(2, 0);
    bad[0] = 1;
    CHECK_THROWS(ArtinLocalRing::from_table({"1", "e"}, {{bad}}));
}

TEST_CASE("artin associativity and nilpotency invariants") {
    ArtinLocalRing t4 = ArtinLocalRing::truncated_poly(4);
    const int n = t4.dim();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                QVec ei(static_cast<std::size_t>(n), 0), ej = ei, ek = ei;
                ei[static_cast<std::size_t>(i)] = 1;
                ej[static_cast<std::size_t>(j)] = 1;
                ek[static_cast<std::size_t>(k)] = 1;
                CHECK(t4.mul(t4.mul(ei, ej), ek) == t4.mul(ei, t4.mul(ej, ek)));
            }
    // all products of ν basis elements of m_A vanish
    int nu = t4.nilpotency_index();
    QVec acc(static_cast<std::size_t>(n), 0);
    acc[1] = 1;
    for (int step = 1; step < nu; ++step) {
        QVec t(static_cast<std::size_t>(n), 0);
        t[1] = 1;
        acc = t4.mul(acc, t);
    }
    CHECK(vec_is_zero(acc));
}

TEST_CASE("artin element arithmetic") {
    ArtinLocalRing t3 = ArtinLocalRing::truncated_poly(3);
    ArtinElem t = ArtinElem::basis(t3, 1);
    ArtinElem one = ArtinElem::one(t3);
    ArtinElem x = one + t;           // 1 + t
    ArtinElem y = (x * x) - one;     // 2t + t^2
    CHECK(y.c == QVec{Q(0), Q(2), Q(1)});
    CHECK(y.in_max_ideal());
    CHECK(!x.in_max_ideal());
}
