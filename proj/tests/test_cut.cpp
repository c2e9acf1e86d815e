#include <catch2/catch_amalgamated.hpp>

#include "pgt/min_cut.hpp"
#include "pgt/oracles.hpp"
#include "support.hpp"

using namespace pgt;
using pgt_test::Builder;

namespace {

Weight brute_force_global_mincut(const WeightedGraph& g) {
    int n = g.size();
    Weight best = Weight::infinity();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        if (!(mask & 1u)) continue;  // fix vertex 0 on one side
        Weight total(0);
        for (const auto& e : g.edges) {
            bool us = mask & (1u << e.u), vs = mask & (1u << e.v);
            if (us != vs) total += e.w;
        }
        if (total < best) best = total;
    }
    return best;
}

WeightedGraph undirected_random(unsigned long long seed, int n_max) {
    std::mt19937_64 rng(seed);
    WeightedGraph g;
    g.directed = false;
    int n = 3 + (int)(rng() % (n_max - 2));
    for (int i = 0; i < n; ++i) g.add_vertex("v" + std::to_string(i));
    for (int i = 1; i < n; ++i) g.add_edge(i, (int)(rng() % i), Weight((long long)(1 + rng() % 4)));
    int extra = (int)(rng() % (2 * n));
    for (int i = 0; i < extra; ++i) {
        int u = (int)(rng() % n), v = (int)(rng() % n);
        if (u != v) g.add_edge(u, v, Weight((long long)(1 + rng() % 4)));
    }
    return g;
}

}  // namespace

TEST_CASE("stoer-wagner basics") {
    WeightedGraph tri;
    tri.directed = false;
    for (int i = 0; i < 3; ++i) tri.add_vertex("v" + std::to_string(i));
    tri.add_edge(0, 1, Weight(1));
    tri.add_edge(1, 2, Weight(1));
    tri.add_edge(2, 0, Weight(1));
    CHECK(solve_global_mincut(tri).value == Weight(2));

    WeightedGraph path;
    path.directed = false;
    for (int i = 0; i < 4; ++i) path.add_vertex("v" + std::to_string(i));
    for (int i = 0; i < 3; ++i) path.add_edge(i, i + 1, Weight(1));
    CHECK(solve_global_mincut(path).value == Weight(1));

    WeightedGraph disc;
    disc.directed = false;
    disc.add_vertex("a");
    disc.add_vertex("b");
    GlobalCut cut = solve_global_mincut(disc);
    CHECK(cut.value == Weight(0));
    CHECK(cut.side.size() == 1);
}

TEST_CASE("stoer-wagner equals exhaustive bipartition enumeration") {
    for (unsigned long long seed = 1; seed <= 30; ++seed) {
        WeightedGraph g = undirected_random(seed, 8);
        GlobalCut cut = solve_global_mincut(g);
        CHECK(cut.value == brute_force_global_mincut(g));
        // witness evaluates to its claimed value
        Weight crossing(0);
        for (const auto& e : g.edges)
            if (cut.side.count(e.u) != cut.side.count(e.v)) crossing += e.w;
        CHECK(crossing == cut.value);
    }
}

TEST_CASE("mincut_no_cross candidates") {
    SECTION("star cuts off one instance") {
        Builder b(false);
        b.tmpl("T0", "-", 1).tmpl("C", "T0", 5);
        b.vertex("r", "T0").vertex("v", "C").edge("r", "v");
        CutResult r = mincut_no_cross(b.model());
        CHECK(r.value == Weight(1));
    }
    SECTION("single-template model gives the plain min cut") {
        Builder b(false);
        b.tmpl("T0", "-", 1);
        b.vertex("a", "T0").vertex("b", "T0").vertex("c", "T0");
        b.edge("a", "b", 2).edge("b", "c", 1).edge("c", "a", 1);
        CutResult r = mincut_no_cross(b.model());
        CHECK(r.value == Weight(2));
    }
    SECTION("triangle hanging off the root by a heavy edge") {
        Builder b(false);
        b.tmpl("T0", "-", 1).tmpl("C", "T0", 2);
        b.vertex("r", "T0").vertex("x", "C").vertex("y", "C").vertex("z", "C");
        b.edge("r", "x", 10).edge("x", "y").edge("y", "z").edge("z", "x");
        CutResult r = mincut_no_cross(b.model());
        CHECK(r.value == Weight(2));
        Model m = b.model();
        Instantiation inst = instantiate(m);
        CHECK(oracle::mincut(m, inst) == Weight(2));
    }
}

TEST_CASE("mincut_cross candidates") {
    SECTION("star reweights the boundary edge at the root stage") {
        Builder b(false);
        b.tmpl("T0", "-", 1).tmpl("C", "T0", 5);
        b.vertex("r", "T0").vertex("v", "C").edge("r", "v");
        CutResult r = mincut_cross(b.model());
        // candidates: whole-instance side (1) at C, reweighted edge (5) at the root
        CHECK(r.value == Weight(1));
    }
    SECTION("all-root model gives the plain min cut") {
        Builder b(false);
        b.tmpl("T0", "-", 1);
        b.vertex("a", "T0").vertex("b", "T0").vertex("c", "T0");
        b.edge("a", "b").edge("b", "c").edge("c", "a");
        CHECK(mincut_cross(b.model()).value == Weight(2));
    }
    SECTION("two-level nesting agrees with the oracle") {
        Builder b(false);
        b.tmpl("T0", "-", 1).tmpl("C", "T0", 2).tmpl("D", "C", 3);
        b.vertex("r", "T0").vertex("x", "C").vertex("y", "C").vertex("w", "D");
        b.edge("r", "x", 2).edge("x", "y", 1).edge("x", "w", 1).edge("y", "w", 1);
        Model m = b.model();
        CutResult r = min_cut(m);
        Instantiation inst = instantiate(m);
        CHECK(r.value == oracle::mincut(m, inst));
        CHECK(evaluate_cut_witness(m, inst, r) == r.value);
    }
}

TEST_CASE("min_cut combines the cases") {
    SECTION("K_1_5 star") {
        Builder b(false);
        b.tmpl("T0", "-", 1).tmpl("C", "T0", 5);
        b.vertex("r", "T0").vertex("v", "C").edge("r", "v");
        Model m = b.model();
        CutResult r = min_cut(m);
        CHECK(r.value == Weight(1));
        CHECK(r.case_tag == CutCase::no_cross);  // ties resolve toward no_cross
        Instantiation inst = instantiate(m);
        CHECK(oracle::mincut(m, inst) == Weight(1));
        CHECK(evaluate_cut_witness(m, inst, r) == r.value);
    }
    SECTION("root-only C4") {
        Builder b(false);
        b.tmpl("T0", "-", 1);
        b.vertex("a", "T0").vertex("b", "T0").vertex("c", "T0").vertex("d", "T0");
        b.edge("a", "b").edge("b", "c").edge("c", "d").edge("d", "a");
        CHECK(min_cut(b.model()).value == Weight(2));
    }
    SECTION("disconnected instantiation yields zero with a component witness") {
        Builder b(false);
        b.tmpl("T0", "-", 1).tmpl("C", "T0", 3);
        b.vertex("r", "T0").vertex("v", "C");  // no edges at all
        Model m = b.model();
        CutResult r = min_cut(m);
        CHECK(r.value == Weight(0));
        CHECK(r.case_tag == CutCase::disconnected);
        Instantiation inst = instantiate(m);
        CHECK(evaluate_cut_witness(m, inst, r) == Weight(0));
    }
    SECTION("disconnected template splits without changing the result") {
        Builder b(false);
        b.tmpl("T0", "-", 1).tmpl("C", "T0", 2);
        b.vertex("r", "T0").vertex("x", "C").vertex("y", "C");
        b.edge("r", "x").edge("r", "y");  // x and y are separate components inside C
        Model m = b.model();
        CutResult r = min_cut(m);
        Instantiation inst = instantiate(m);
        CHECK(r.value == oracle::mincut(m, inst));
        CHECK(evaluate_cut_witness(m, inst, r) == r.value);
    }
}

TEST_CASE("min_cut matches the oracle on random undirected models") {
    for (unsigned long long seed = 1; seed <= 40; ++seed) {
        Model m{pgt_test::random_model(seed * 17 + 3, false)};
        Instantiation inst = instantiate(m);
        if (inst.vertices.size() < 2) continue;
        CutResult r = min_cut(m);
        Weight oracle_value = oracle::mincut(m, inst);
        CHECK(r.value == oracle_value);
        CHECK(evaluate_cut_witness(m, inst, r) == r.value);
    }
}
