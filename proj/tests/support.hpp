#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pgt/discovery.hpp"
#include "pgt/instantiate.hpp"
#include "pgt/io.hpp"
#include "pgt/model.hpp"

namespace pgt_test {

using namespace pgt;

/// The running example model: templates T0 = V, T1 = {b}, T2 = {c,d,e},
/// T3 = {e} with parameters 1, 2, 2, 3. The edge set is a fixed DAG over the
/// published vertex/template structure.
inline PgtData fig1_data() {
    return parse_pgt(std::string(R"(pgt 1 directed
template T0 parent - param 1
template T1 parent T0 param 2
template T2 parent T0 param 2
template T3 parent T2 param 3
vertex a in T0
vertex b in T1
vertex c in T2
vertex d in T2
vertex e in T3
vertex f in T0
vertex g in T0
vertex i in T0
edge a b
edge b g
edge a c
edge c d
edge c e
edge d e
edge d f
edge f g
edge g i
)"));
}

inline Model fig1() { return Model(fig1_data()); }

/// Quick model builder: vertex -> template name, template -> (parent, param),
/// plus edge lists. Member sets are expanded from the parent tree.
struct Builder {
    PgtData g;
    std::map<std::string, VertexId> vid;
    std::vector<std::string> tmpl_names;
    std::map<std::string, std::pair<std::string, long long>> tmpl_info;
    std::map<std::string, std::vector<VertexId>> owned;

    explicit Builder(bool directed) { g.directed = directed; }

    Builder& tmpl(const std::string& name, const std::string& parent, long long param) {
        tmpl_names.push_back(name);
        tmpl_info[name] = {parent, param};
        return *this;
    }
    Builder& vertex(const std::string& name, const std::string& tmpl_name) {
        VertexId v = g.add_vertex(name);
        vid[name] = v;
        owned[tmpl_name].push_back(v);
        return *this;
    }
    Builder& edge(const std::string& u, const std::string& v, long long w = 1) {
        g.add_edge(vid.at(u), vid.at(v), Weight(Rational(w)));
        return *this;
    }
    Builder& sedge(const std::string& u, const std::string& v, long long delta, long long w = 1) {
        g.add_sibling_edge(vid.at(u), vid.at(v), delta, Weight(Rational(w)));
        return *this;
    }
    PgtData data() {
        PgtData out = g;
        std::map<std::string, std::vector<VertexId>> full = owned;
        for (size_t pass = 0; pass < tmpl_names.size(); ++pass)
            for (auto it = tmpl_names.rbegin(); it != tmpl_names.rend(); ++it) {
                const auto& [parent, param] = tmpl_info[*it];
                if (parent == "-") continue;
                auto& p = full[parent];
                for (VertexId v : full[*it])
                    if (std::find(p.begin(), p.end(), v) == p.end()) p.push_back(v);
            }
        for (const auto& name : tmpl_names)
            out.templates.push_back({name, full[name], tmpl_info[name].second});
        return out;
    }
    Model model() { return Model(data()); }
};

/// Seeded random model for the flow/cut oracle suites: n <= 8 vertices,
/// m <= 14 edges, at most 4 templates, parameters <= 3, integer weights <= 4.
inline PgtData random_model(unsigned long long seed, bool directed, bool allow_params_one = true) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return lo + (int)(rng() % (unsigned)(hi - lo + 1)); };

    int k = pick(1, 4);  // templates including the root
    Builder b(directed);
    b.tmpl("T0", "-", 1);
    std::vector<std::string> tnames{"T0"};
    std::vector<int> depth{0};
    for (int t = 1; t < k; ++t) {
        int parent = pick(0, t - 1);
        if (depth[parent] >= 2) parent = 0;  // keep depth <= 3 levels
        std::string name = "T" + std::to_string(t);
        long long param = allow_params_one ? pick(1, 3) : pick(2, 3);
        b.tmpl(name, tnames[parent], param);
        tnames.push_back(name);
        depth.push_back(depth[parent] + 1);
    }
    int n = pick(std::max(2, k), 8);
    std::vector<int> vtmpl(n);
    for (int v = 0; v < n; ++v) {
        vtmpl[v] = v < k ? v : pick(0, k - 1);  // every template owns a vertex
        b.vertex("v" + std::to_string(v), tnames[vtmpl[v]]);
    }
    // template relation lookup for no-skipping
    std::vector<int> parent_of(k, 0);
    for (int t = 1; t < k; ++t) {
        // recover parent index from names
        for (int p = 0; p < k; ++p)
            if (b.tmpl_info["T" + std::to_string(t)].first == tnames[p]) parent_of[t] = p;
    }
    auto legal = [&](int u, int v) {
        int a = vtmpl[u], c = vtmpl[v];
        return a == c || parent_of[a] == c || parent_of[c] == a;
    };
    int m = pick(n - 1, 14);
    int added = 0;
    for (int tries = 0; tries < 200 && added < m; ++tries) {
        int u = pick(0, n - 1), v = pick(0, n - 1);
        if (u == v || !legal(u, v)) continue;
        b.edge("v" + std::to_string(u), "v" + std::to_string(v), pick(1, 4));
        ++added;
    }
    return b.data();
}

inline bool instantiations_isomorphic(const Model& a, const Model& b, bool use_weights = true) {
    WeightedGraph ga = instantiate(a).to_graph(a);
    WeightedGraph gb = instantiate(b).to_graph(b);
    if (ga.names.size() != gb.names.size() || ga.edges.size() != gb.edges.size()) return false;
    return canonical_form(ga, nullptr, use_weights) == canonical_form(gb, nullptr, use_weights);
}

}  // namespace pgt_test
