// Acceptance suite: runs every acceptance criterion at its stated tolerance
// (exact equality throughout) and prints one pass/fail line per criterion.

#include "dgnerve/cli.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

using namespace dgn;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
    std::string name;
    bool pass = true;
    double seconds = 0;
    std::string detail;
};

std::vector<Criterion> results;

void run_criterion(const std::string& name, const std::function<bool(std::string&)>& body) {
    Criterion c;
    c.name = name;
    auto t0 = Clock::now();
    try {
        c.pass = body(c.detail);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail += std::string(" exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream line;
    line << (c.pass ? "PASS" : "FAIL") << "  " << name << "  (" << c.seconds << " s)";
    if (!c.detail.empty()) line << "  [" << c.detail << "]";
    std::cout << line.str() << std::endl;
    results.push_back(c);
}

struct Case {
    std::string name;
    Scheme scheme;
    SheafDescription sheaf;
    DegreeBox box;
};

std::vector<Case> corpus() {
    std::vector<Case> cs;
    Scheme p1 = Scheme::builtin("P1");
    DegreeBox b1 = DegreeBox::cube(1, -4, 4);
    cs.push_back({"P1/O", p1, SheafDescription::structure_sheaf(p1), b1});
    cs.push_back({"P1/O(2)", p1, SheafDescription::standard_twists(p1, {2}), b1});
    cs.push_back({"P1/O(-1)", p1, SheafDescription::standard_twists(p1, {-1}), b1});
    cs.push_back({"P1/O+O(2)", p1, SheafDescription::standard_twists(p1, {0, 2}), b1});
    Scheme p2 = Scheme::builtin("P2");
    cs.push_back({"P2/O", p2, SheafDescription::structure_sheaf(p2), DegreeBox::cube(2, -2, 2)});
    return cs;
}

Scheme four_open_cover() {
    CoverDescription c;
    c.open_names = {"U0", "U1", "U2", "U3"};
    return Scheme::from_opens(c, 1, {{{1}}, {{-1}}, {{1}, {-1}}, {{1}, {-1}}});
}

Scheme broken_chain_cover() {
    CoverDescription c;
    c.open_names = {"U0", "U1", "U2"};
    c.all_nonempty = false;
    c.nonempty = {{0}, {1}, {2}, {0, 1}, {1, 2}};
    return Scheme::from_opens(c, 1, {{{1}}, {{1}, {-1}}, {{-1}}});
}

bool same_tables(const std::map<int, int>& a, const std::map<int, int>& b, std::string& why) {
    std::set<int> keys;
    for (const auto& [k, v] : a) keys.insert(k);
    for (const auto& [k, v] : b) keys.insert(k);
    for (int k : keys) {
        int x = a.count(k) ? a.at(k) : 0;
        int y = b.count(k) ? b.at(k) : 0;
        if (x != y) {
            why += " k=" + std::to_string(k) + ": " + std::to_string(x) + " vs " + std::to_string(y) + ";";
            return false;
        }
    }
    return true;
}

}  // namespace

int main() {
    std::cout << "dgnerve acceptance suite (exact arithmetic; every comparison is equality)\n";

    // 1. Ext agreement of the three models with the independent oracle
    for (const Case& c : corpus()) {
        run_criterion("1. ext agreement [" + c.name + "]", [&](std::string& why) {
            ExtResult oracle = cech_oracle_ext(c.sheaf, c.scheme, c.box);
            if (!oracle.stable) {
                why = "oracle box unstable";
                return false;
            }
            bool ok = true;
            for (ExtModel model : {ExtModel::EndOfQ, ExtModel::COfL, ExtModel::COfH}) {
                ExtResult r = ext_dims(c.sheaf, c.scheme, model, c.box);
                if (!r.stable) {
                    why += " model box unstable;";
                    ok = false;
                }
                if (!same_tables(r.dims, oracle.dims, why)) ok = false;
            }
            std::ostringstream os;
            os << " ext =";
            for (const auto& [k, v] : oracle.dims) os << " " << v;
            why += os.str();
            return ok;
        });
    }

    // 2. Cofibrancy suite for Q_X over covers of sizes 2..4
    {
        std::vector<std::pair<std::string, Scheme>> covers;
        covers.emplace_back("P1(2 opens)", Scheme::builtin("P1"));
        covers.emplace_back("chain(3 opens)", broken_chain_cover());
        covers.emplace_back("P2(3 opens)", Scheme::builtin("P2"));
        covers.emplace_back("P1(4 opens)", four_open_cover());
        for (auto& [name, scheme] : covers) {
            run_criterion("2. Q_X cofibrant replacement [" + name + "]", [&](std::string& why) {
                DegreeBox box = DegreeBox::cube(scheme.lattice_rank, scheme.lattice_rank > 1 ? -2 : -3,
                                                scheme.lattice_rank > 1 ? 2 : 3);
                Replacement qx = qx_replacement(scheme);
                CofibrancyReport rep = check_cofibrant(*qx.q, box);
                bool ok = rep.verdict == Verdict::Yes;
                if (!ok) why += " not cofibrant;";
                for (int a = 0; a < scheme.nerve->size(); ++a) {
                    const auto& per = rep.per_simplex[static_cast<std::size_t>(a)];
                    if (per.coker_basis.size() != 1 || per.coker_basis[0].first != -scheme.nerve->deg(a)) {
                        why += " coker at simplex " + std::to_string(a) + " not free of rank 1;";
                        ok = false;
                    }
                    if (!is_degreewise_surjective(qx.augmentation.at(a), box) ||
                        is_quasi_iso(qx.augmentation.at(a), box).verdict != Verdict::Yes) {
                        why += " augmentation fails at simplex " + std::to_string(a) + ";";
                        ok = false;
                    }
                }
                return ok;
            });
        }
    }

    // 3. Hom-complex and DG-Lie axioms; Z^0 against direct enumeration
    run_criterion("3. Hom/DGLA axioms and Z^0", [&](std::string& why) {
        bool ok = true;
        Scheme p1 = Scheme::builtin("P1");
        std::vector<std::pair<std::string, Replacement>> reps;
        reps.emplace_back("P1/O", qx_replacement(p1));
        reps.emplace_back("P1/O+O(2)",
                          locally_free_replacement(SheafDescription::standard_twists(p1, {0, 2}), p1));
        Scheme a1 = Scheme::builtin("A1");
        reps.emplace_back("A1/sky", cofibrant_replace(upsilon_star(SheafDescription::skyscraper(a1, 0), a1),
                                                      DegreeBox::cube(1, -3, 3), 16));
        for (auto& [name, rep] : reps) {
            auto end = HomSystem::global(rep.q, rep.q);
            std::vector<std::pair<int, Multideg>> blocks;
            for (int p = -1; p <= 2; ++p)
                for (int m = -2; m <= 2; ++m) blocks.emplace_back(p, Multideg{m});
            DGLAAxiomReport ax = check_dgla_axioms(*end, blocks);
            if (!ax.ok()) {
                why += " axioms fail for " + name + ";";
                ok = false;
            }
            for (int m = -2; m <= 2; ++m) {
                int z0 = static_cast<int>(kernel_basis(end->diff_matrix(0, {m})).cols());
                if (z0 != morphism_space_dim(rep.q, rep.q, {m})) {
                    why += " Z^0 mismatch for " + name + " at w=" + std::to_string(m) + ";";
                    ok = false;
                }
            }
        }
        return ok;
    });

    // 4. Semicosimplicial and totalization checks
    run_criterion("4. semicosimplicial + Whitney integration", [&](std::string& why) {
        bool ok = true;
        Scheme p1 = Scheme::builtin("P1");
        Replacement qx = qx_replacement(p1);
        auto l = SemicosimplicialDGLA::build_L(qx.q);
        AModulePtr e = upsilon_star(SheafDescription::standard_twists(p1, {0, 2}), p1);
        auto h = SemicosimplicialDGLA::build_h(e);
        // coface identities on levels 0..2 for both
        auto coface_ok = [&](const SemicosimplicialDGLA& v, int pmin, int pmax) {
            for (int n = 0; n <= 1; ++n) {
                auto ts = v.tuples(n);
                for (std::size_t ti = 0; ti < ts.size(); ++ti) {
                    int simplex = v.nerve().index_of(underlying_simplex(ts[ti]));
                    for (int p = pmin; p <= pmax; ++p)
                        for (int m = -1; m <= 1; ++m)
                            for (int c = 0; c < v.component(simplex)->dim(p, {m}); ++c) {
                                auto x = v.basis_chunk(n, ti, p, {m}, static_cast<std::size_t>(c));
                                for (int k = 0; k <= n + 1; ++k)
                                    for (int ll = k + 1; ll <= n + 2; ++ll)
                                        if (!v.level_equal(v.coface(ll, v.coface(k, x)),
                                                           v.coface(k, v.coface(ll - 1, x))))
                                            return false;
                            }
                }
            }
            return true;
        };
        if (!coface_ok(*l, 0, 1)) {
            why += " coface identities fail on L;";
            ok = false;
        }
        if (!coface_ok(*h, 0, 1)) {
            why += " coface identities fail on h;";
            ok = false;
        }
        // D^2 = 0 on C(V)
        for (const SemicosimplicialDGLA* v : {l.get(), h.get()}) {
            TotalComplex c(v, v->max_norm_level());
            for (int p = -1; p <= 1; ++p)
                for (int m = -2; m <= 2; ++m)
                    if (!(c.d_matrix(p + 1, {m}) * c.d_matrix(p, {m})).is_zero()) {
                        why += " D^2 != 0;";
                        ok = false;
                    }
        }
        // ĝ integrates to the level-0 inclusion
        auto end = HomSystem::global(qx.q, qx.q);
        int cap = 2;  // cover size
        for (int p = 0; p <= 1; ++p)
            for (int m = -1; m <= 1; ++m)
                for (const HomElement& g : end->basis(p, {m})) {
                    TWElement x = tw_lift(*l, cap, g);
                    if (!tw_compatible(x)) {
                        why += " g-hat incompatible;";
                        ok = false;
                    }
                    CechElement ig = whitney_integrate(x);
                    for (int n = 1; n <= cap; ++n)
                        if (!ig.levels[static_cast<std::size_t>(n)].is_zero()) {
                            why += " int(g-hat) has higher levels;";
                            ok = false;
                        }
                    if (g.is_zero() == ig.levels[0].is_zero() && ig.levels[0].is_zero() && !g.is_zero()) {
                        why += " int(g-hat) lost the element;";
                        ok = false;
                    }
                }
        // >= 100 random valid TW elements: compatibility, polycap, chain map
        std::mt19937_64 rng(2026);
        std::uniform_int_distribution<int> coef(-3, 3);
        std::vector<TWElement> gens;
        for (int p = 0; p <= 1; ++p)
            for (int m = -1; m <= 1; ++m)
                for (const HomElement& g : end->basis(p, {m})) gens.push_back(tw_lift(*l, cap, g));
        for (int level = 0; level <= cap; ++level) {
            auto ts = l->tuples(level);
            for (std::size_t ti = 0; ti < ts.size(); ++ti) {
                int simplex = l->nerve().index_of(underlying_simplex(ts[ti]));
                for (int p = 0; p <= 1; ++p)
                    for (int m = -1; m <= 1; ++m)
                        for (int c = 0; c < l->component(simplex)->dim(p, {m}) && c < 2; ++c)
                            gens.push_back(
                                tw_whitney(*l, cap, l->basis_chunk(level, ti, p, {m}, static_cast<std::size_t>(c))));
            }
        }
        int sampled = 0;
        for (int trial = 0; trial < 100; ++trial) {
            TWElement x = tw_zero(l.get(), cap);
            for (int pick = 0; pick < 3; ++pick) x = tw_add(x, tw_scale(gens[rng() % gens.size()], Q(coef(rng))));
            if (!tw_compatible(x)) {
                why += " sample incompatible;";
                ok = false;
                break;
            }
            if (tw_max_poly_degree(x) > 3) {
                why += " polycap exceeded;";
                ok = false;
                break;
            }
            if (!cech_equal(whitney_integrate(tw_diff(x)), cech_diff(whitney_integrate(x)))) {
                why += " chain map fails;";
                ok = false;
                break;
            }
            ++sampled;
        }
        why += " samples=" + std::to_string(sampled);
        return ok && sampled == 100;
    });

    // 5. Nonnegative cohomology of C(L)
    run_criterion("5. H^k(C(L)) = 0 for k < 0", [&](std::string& why) {
        bool ok = true;
        for (const Case& c : corpus()) {
            Replacement rep = (c.sheaf.kind == SheafDescription::Kind::LineBundleSum)
                                  ? locally_free_replacement(c.sheaf, c.scheme)
                                  : cofibrant_replace(upsilon_star(c.sheaf, c.scheme), c.box, 16);
            auto l = SemicosimplicialDGLA::build_L(rep.q);
            std::pair<int, Multideg> witness;
            DegreeBox box = c.scheme.lattice_rank > 1 ? DegreeBox::cube(2, -2, 2) : DegreeBox::cube(1, -3, 3);
            if (!nonnegative_cohomology(*l, box, -3, &witness)) {
                why += " violation for " + c.name + " at k=" + std::to_string(witness.first) + ";";
                ok = false;
            }
        }
        // and the skyscraper
        Scheme a1 = Scheme::builtin("A1");
        Replacement rep = cofibrant_replace(upsilon_star(SheafDescription::skyscraper(a1, 0), a1),
                                            DegreeBox::cube(1, -3, 3), 16);
        auto l = SemicosimplicialDGLA::build_L(rep.q);
        if (!nonnegative_cohomology(*l, DegreeBox::cube(1, -3, 3), -3, nullptr)) {
            why += " violation for A1/sky;";
            ok = false;
        }
        return ok;
    });

    // 6. Deformation suite
    run_criterion("6. deformations (MC, gauge, BCH, H^1)", [&](std::string& why) {
        bool ok = true;
        // (a) tangent dimension equals Ext^1 for every corpus sheaf
        for (const Case& c : corpus()) {
            Replacement rep = (c.sheaf.kind == SheafDescription::Kind::LineBundleSum)
                                  ? locally_free_replacement(c.sheaf, c.scheme)
                                  : cofibrant_replace(upsilon_star(c.sheaf, c.scheme), c.box, 16);
            auto end = HomSystem::global(rep.q, rep.q);
            ExtResult oracle = cech_oracle_ext(c.sheaf, c.scheme, c.box);
            if (tangent_dim_end(*end, c.box) != oracle.dims.at(1)) {
                why += " (a) tangent != Ext^1 for " + c.name + ";";
                ok = false;
            }
        }
        // (b) the explicit skyscraper deformation over K[t]/t^2
        Scheme a1 = Scheme::builtin("A1");
        AModulePtr koszul;
        {
            auto m = std::make_shared<GradedDGModule>(a1.ring(0));
            m->set_generators(-1, {{1}});
            m->set_generators(0, {{0}});
            QMat d(1, 1);
            d.at(0, 0) = 1;
            m->set_diff(-1, d);
            auto f = std::make_shared<AModule>(a1.nerve, a1.rings);
            f->set_module(0, m->finalize());
            koszul = f->finalize();
        }
        auto ends = HomSystem::global(koszul, koszul);
        DegreeBox boxa = DegreeBox::cube(1, -3, 3);
        if (tangent_dim_end(*ends, boxa) != 1) {
            why += " (b) skyscraper tangent != 1;";
            ok = false;
        }
        ArtinLocalRing eps = ArtinLocalRing::dual_numbers();
        if (ends->dim(1, {-1}) != 1) {
            why += " (b) missing End^1 block;";
            ok = false;
        } else {
            DGLAElem eta = DGLAElem::single(eps, 1, ends->basis(1, {-1})[0]);
            if (!mc_check(eta)) {
                why += " (b) MC fails;";
                ok = false;
            } else {
                DeformResult dr = deform(koszul, eta);
                if (!dr.square_zero || !dr.structure_maps_compatible || !dr.flat) {
                    why += " (b) deform fails;";
                    ok = false;
                }
            }
        }
        // (c) conjugation vs formula over K[t]/t^3, (d) BCH identities
        ArtinLocalRing t3 = ArtinLocalRing::truncated_poly(3);
        std::mt19937_64 rng(4096);
        std::uniform_int_distribution<int> coef(-2, 2);
        auto rand_elem = [&](const HomSystem& end, const ArtinLocalRing& art, int degree) {
            DGLAElem e = DGLAElem::zero(art, degree);
            for (int ai = 1; ai < art.dim(); ++ai)
                for (int m = -2; m <= 2; ++m)
                    for (const HomElement& b : end.basis(degree, {m})) {
                        int cc = coef(rng);
                        if (cc != 0) e.terms.emplace_back(ai, b.scaled(cc));
                    }
            return e.normalized();
        };
        for (int trial = 0; trial < 5; ++trial) {
            DGLAElem a = rand_elem(*ends, t3, 0);
            DGLAElem lel = rand_elem(*ends, t3, 1);
            if (!gauge_conjugation_matches(a, lel)) {
                why += " (c) conjugation mismatch;";
                ok = false;
            }
            DGLAElem b = rand_elem(*ends, t3, 0);
            if (!bch(a, DGLAElem::zero(t3, 0)).equals(a)) {
                why += " (d) x•0 != x;";
                ok = false;
            }
            if (!gauge_act(a, gauge_act(b, lel)).equals(gauge_act(bch(a, b), lel))) {
                why += " (d) group law fails;";
                ok = false;
            }
            ArtinLocalRing e2 = ArtinLocalRing::dual_numbers();
            DGLAElem a2 = rand_elem(*ends, e2, 0), b2 = rand_elem(*ends, e2, 0), l2 = rand_elem(*ends, e2, 1);
            if (!gauge_act(a2, gauge_act(b2, l2)).equals(gauge_act(bch(a2, b2), l2))) {
                why += " (d) group law fails at nu=2;";
                ok = false;
            }
        }
        // (e) dim H^1_L(K[eps]) equals dim H^1(C(L))
        std::vector<Case> h1_corpus = corpus();
        for (const Case& c : h1_corpus) {
            Replacement rep = (c.sheaf.kind == SheafDescription::Kind::LineBundleSum)
                                  ? locally_free_replacement(c.sheaf, c.scheme)
                                  : cofibrant_replace(upsilon_star(c.sheaf, c.scheme), c.box, 16);
            auto l = SemicosimplicialDGLA::build_L(rep.q);
            DegreeBox box = c.scheme.lattice_rank > 1 ? DegreeBox::cube(2, -2, 2) : c.box;
            int lhs = h1_dim_eps(*l, box);
            ExtResult ext = ext_via_total(*l, box, 1);
            if (lhs != ext.dims.at(1)) {
                why += " (e) H^1 mismatch for " + c.name + ";";
                ok = false;
            }
        }
        {
            auto l = SemicosimplicialDGLA::build_L(koszul);
            if (h1_dim_eps(*l, boxa) != ext_via_total(*l, boxa, 1).dims.at(1)) {
                why += " (e) H^1 mismatch for A1/sky;";
                ok = false;
            }
        }
        return ok;
    });

    // 7. Replacement equivalence: general replacement vs Q_X
    {
        std::vector<std::pair<std::string, Scheme>> covers;
        covers.emplace_back("P1", Scheme::builtin("P1"));
        covers.emplace_back("chain(3 opens)", broken_chain_cover());
        covers.emplace_back("P2", Scheme::builtin("P2"));
        for (auto& [name, scheme] : covers) {
            run_criterion("7. replacement equivalence [" + name + "]", [&](std::string& why) {
                DegreeBox box = DegreeBox::cube(scheme.lattice_rank, scheme.lattice_rank > 1 ? -2 : -3,
                                                scheme.lattice_rank > 1 ? 2 : 3);
                AModulePtr f = upsilon_star(SheafDescription::structure_sheaf(scheme), scheme);
                Replacement general = cofibrant_replace(f, box, 20);
                Replacement qx = qx_replacement(scheme);
                auto end1 = HomSystem::global(general.q, general.q);
                auto end2 = HomSystem::global(qx.q, qx.q);
                for (int k = -1; k <= scheme.nerve->max_deg() + 1; ++k)
                    for (const Multideg& m : box.points())
                        if (end1->cohomology_dim(k, m) != end2->cohomology_dim(k, m)) {
                            why += " End tables differ at k=" + std::to_string(k) + " w=" + deg_str(m) + ";";
                            return false;
                        }
                return true;
            });
        }
    }

    int failed = 0;
    for (const Criterion& c : results)
        if (!c.pass) ++failed;
    std::cout << "\n" << (results.size() - static_cast<std::size_t>(failed)) << "/" << results.size()
              << " acceptance criteria passed\n";
    return failed == 0 ? 0 : 1;
}
