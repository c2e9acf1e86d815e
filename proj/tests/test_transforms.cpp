#include <catch2/catch_amalgamated.hpp>

#include "pgt/discovery.hpp"
#include "pgt/instantiate.hpp"
#include "pgt/transforms.hpp"
#include "support.hpp"

using namespace pgt;
using pgt_test::Builder;
using pgt_test::fig1;

TEST_CASE("edge reweighting multiplies by containing parameters") {
    Builder b(true);
    b.tmpl("T0", "-", 1).tmpl("T1", "T0", 2);
    b.vertex("a", "T0").vertex("bb", "T1").edge("a", "bb", 1);
    ReweightedGraph g = edge_reweight(b.model());
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].w == Weight(2));

    Model f = fig1();
    ReweightedGraph fg = edge_reweight(f);
    // edge (c,e): templates T0, T2, T3 contain an endpoint -> 1*2*3
    for (const auto& e : fg.edges)
        if (fg.names[e.u] == "c" && fg.names[e.v] == "e") CHECK(e.w == Weight(6));

    Builder r(true);
    r.tmpl("T0", "-", 1);
    r.vertex("x", "T0").vertex("y", "T0").edge("x", "y", 3);
    ReweightedGraph rg = edge_reweight(r.model());
    CHECK(rg.edges[0].w == Weight(3));  // all-root: weights unchanged
}

TEST_CASE("edge reweighting rejects sibling edges") {
    Builder b(true);
    b.tmpl("T0", "-", 1).tmpl("C", "T0", 4);
    b.vertex("r", "T0").vertex("v", "C").edge("r", "v").sedge("v", "v", 1);
    CHECK_THROWS_AS(edge_reweight(b.model()), std::invalid_argument);
}

TEST_CASE("edge reweighting doubles with the parameter") {
    Builder b(true);
    b.tmpl("T0", "-", 1).tmpl("C", "T0", 2);
    b.vertex("r", "T0").vertex("v", "C").edge("r", "v", 3);
    ReweightedGraph g2 = edge_reweight(b.model());
    Builder b4(true);
    b4.tmpl("T0", "-", 1).tmpl("C", "T0", 4);
    b4.vertex("r", "T0").vertex("v", "C").edge("r", "v", 3);
    ReweightedGraph g4 = edge_reweight(b4.model());
    CHECK(g2.edges[0].w == Weight(6));
    CHECK(g4.edges[0].w == Weight(12));
}

TEST_CASE("instance merge leaves root vertices alone") {
    Builder b(true);
    b.tmpl("T0", "-", 1).tmpl("C", "T0", 2);
    b.vertex("r", "T0").vertex("v", "C").edge("r", "v");
    Model m = b.model();
    Model merged = instance_merge(m, m.vertex("r"));
    CHECK(merged.vertex_count() == m.vertex_count());
    CHECK(merged.data().edges.size() == m.data().edges.size());
}

TEST_CASE("instance merge pushes fig1 e into the root with dummies per level") {
    Model m = fig1();
    Model merged = instance_merge(m, m.vertex("e"));
    VertexId e = merged.vertex("e");
    CHECK(merged.template_of(e) == merged.tree().root);
    // the former (c,e) and (d,e) edges got a dummy in T3 and one in T2 each
    CHECK(merged.vertex_count() == m.vertex_count() + 4);
    int inf_edges = 0;
    for (const auto& ed : merged.data().edges) inf_edges += ed.weight.is_infinite();
    CHECK(inf_edges == 4);
}

TEST_CASE("instance merge contract matches merging all instances") {
    Builder b(true);
    b.tmpl("T0", "-", 1).tmpl("C", "T0", 2);
    b.vertex("r", "T0").vertex("v", "C").edge("r", "v");
    Model m = b.model();
    Model merged = instance_merge(m, m.vertex("v"));

    // contract infinite edges of the merged instantiation
    Instantiation inst = instantiate(merged);
    WeightedGraph g = inst.to_graph(merged);
    std::vector<int> uf(g.size());
    for (int i = 0; i < g.size(); ++i) uf[i] = i;
    std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
    for (const auto& e : g.edges)
        if (e.w.is_infinite()) uf[find(e.u)] = find(e.v);
    WeightedGraph contracted;
    contracted.directed = g.directed;
    std::map<int, int> node;
    for (int i = 0; i < g.size(); ++i)
        if (!node.count(find(i))) node[find(i)] = contracted.add_vertex("g" + std::to_string(find(i)));
    for (const auto& e : g.edges)
        if (!e.w.is_infinite() && find(e.u) != find(e.v))
            contracted.add_edge(node[find(e.u)], node[find(e.v)], e.w);

    // reference: instantiate the original and merge all instances of v
    Instantiation oinst = instantiate(m);
    WeightedGraph og = oinst.to_graph(m);
    WeightedGraph merged_ref;
    merged_ref.directed = og.directed;
    std::map<std::string, int> ref_ids;
    auto ref_id = [&](const std::string& name) {
        std::string key = name.substr(0, 2) == "v@" ? "v" : name;
        if (!ref_ids.count(key)) ref_ids[key] = merged_ref.add_vertex(key);
        return ref_ids[key];
    };
    for (int i = 0; i < og.size(); ++i) ref_id(og.names[i]);
    for (const auto& e : og.edges) merged_ref.add_edge(ref_id(og.names[e.u]), ref_id(og.names[e.v]), e.w);

    CHECK(canonical_form(contracted, nullptr, true) == canonical_form(merged_ref, nullptr, true));
}

TEST_CASE("upwards partial instantiation basics") {
    Builder b(true);
    b.tmpl("T0", "-", 1).tmpl("C", "T0", 3);
    b.vertex("r", "T0").vertex("v", "C").edge("r", "v");
    Model m = b.model();

    Model unchanged = upwards_partial_instantiation(m, m.vertex("r"));
    CHECK(unchanged.template_count() == m.template_count());

    Model lifted = upwards_partial_instantiation(m, m.vertex("v"));
    CHECK(lifted.template_of(lifted.vertex("v")) == lifted.tree().root);
    REQUIRE(lifted.template_count() == 2);
    for (TemplateId t = 0; t < lifted.template_count(); ++t)
        if (t != lifted.tree().root) CHECK(lifted.param(t) == 2);
    CHECK(pgt_test::instantiations_isomorphic(m, lifted));
}

TEST_CASE("upwards partial instantiation from fig1 e preserves the instantiation") {
    Model m = fig1();
    Model lifted = upwards_partial_instantiation(m, m.vertex("e"));
    CHECK(lifted.template_of(lifted.vertex("e")) == lifted.tree().root);
    CHECK(pgt_test::instantiations_isomorphic(m, lifted));
}

TEST_CASE("upwards partial instantiation preserves instantiations on random models") {
    for (unsigned long long seed = 1; seed <= 20; ++seed) {
        Model m{pgt_test::random_model(seed, true)};
        for (VertexId s = 0; s < m.vertex_count(); s += 3) {
            Model lifted = upwards_partial_instantiation(m, s);
            CHECK(pgt_test::instantiations_isomorphic(m, lifted));
        }
    }
}

TEST_CASE("induced parametric subgraph") {
    Model m = fig1();
    SECTION("root, unmerged: whole model with root parameter 1") {
        Model sub = induced_parametric_subgraph(m, m.tree().root, false);
        CHECK(sub.vertex_count() == m.vertex_count());
        CHECK(sub.param(sub.tree().root) == 1);
        CHECK(sub.template_count() == m.template_count());
    }
    SECTION("T2 keeps its parameter, descendants and boundary") {
        Model sub = induced_parametric_subgraph(m, m.template_id("T2"), false);
        std::set<std::string> names(sub.data().vertices.begin(), sub.data().vertices.end());
        CHECK(names == std::set<std::string>{"a", "c", "d", "e", "f"});
        CHECK(sub.param(sub.template_id("T2")) == 2);
        CHECK(sub.param(sub.template_id("T3")) == 3);
        CHECK(sub.param(sub.tree().root) == 1);
        // a, f single; c, d twice; e six times
        CHECK(instantiate(sub).vertices.size() == 12);
    }
    SECTION("merged boundary collapses to one vertex") {
        Builder b(false);
        b.tmpl("T0", "-", 1).tmpl("C", "T0", 5);
        b.vertex("r", "T0").vertex("v", "C").edge("r", "v");
        Model sm = b.model();
        Model sub = induced_parametric_subgraph(sm, sm.template_id("C"), true);
        CHECK(sub.vertex_count() == 2);
        CHECK(sub.param(sub.template_id("C")) == 5);
    }
}
