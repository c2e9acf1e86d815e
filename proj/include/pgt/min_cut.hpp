#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "pgt/graph.hpp"
#include "pgt/instantiate.hpp"
#include "pgt/model.hpp"
#include "pgt/transforms.hpp"

namespace pgt {

/// Global minimum cut of a connected weighted undirected graph with a witness
/// side. Deterministic Stoer-Wagner on an adjacency matrix of exact weights.
struct GlobalCut {
    Weight value;
    std::set<int> side;  // vertex ids of one side
};

inline GlobalCut solve_global_mincut(const WeightedGraph& g) {
    int n = g.size();
    if (n < 2) throw std::invalid_argument("global min cut needs at least 2 vertices");

    // connectivity precheck: disconnected input has cut value 0
    {
        std::vector<int> comp(n, -1);
        std::vector<std::vector<int>> adj(n);
        for (const auto& e : g.edges) {
            adj[e.u].push_back(e.v);
            adj[e.v].push_back(e.u);
        }
        std::vector<int> stack{0};
        comp[0] = 0;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int w : adj[u])
                if (comp[w] < 0) {
                    comp[w] = 0;
                    stack.push_back(w);
                }
        }
        for (int v = 0; v < n; ++v)
            if (comp[v] < 0) {
                GlobalCut cut;
                cut.value = Weight(0);
                for (int u = 0; u < n; ++u)
                    if (comp[u] == 0) cut.side.insert(u);
                return cut;
            }
    }

    std::vector<std::vector<Weight>> w(n, std::vector<Weight>(n, Weight(0)));
    for (const auto& e : g.edges) {
        if (e.u == e.v) continue;
        w[e.u][e.v] += e.w;
        w[e.v][e.u] += e.w;
    }
    std::vector<std::vector<int>> group(n);
    for (int v = 0; v < n; ++v) group[v] = {v};
    std::vector<bool> dead(n, false);

    GlobalCut best;
    bool have_best = false;
    for (int phase = n; phase > 1; --phase) {
        // maximum-adjacency order, ties to the smallest id
        std::vector<bool> added(n, false);
        std::vector<Weight> conn(n, Weight(0));
        int first = -1;
        for (int v = 0; v < n && first < 0; ++v)
            if (!dead[v]) first = v;
        added[first] = true;
        for (int v = 0; v < n; ++v)
            if (!dead[v] && v != first) conn[v] = w[first][v];
        int prev = first, last = first;
        for (int step = 1; step < phase; ++step) {
            int pick = -1;
            for (int v = 0; v < n; ++v) {
                if (dead[v] || added[v]) continue;
                if (pick < 0 || conn[pick] < conn[v]) pick = v;
            }
            added[pick] = true;
            prev = last;
            last = pick;
            for (int v = 0; v < n; ++v)
                if (!dead[v] && !added[v]) conn[v] += w[pick][v];
        }
        // cut of the phase: `last` versus the rest
        if (!have_best || conn[last] < best.value) {
            best.value = conn[last];
            best.side = std::set<int>(group[last].begin(), group[last].end());
            have_best = true;
        }
        // merge last into prev
        dead[last] = true;
        for (int v : group[last]) group[prev].push_back(v);
        for (int v = 0; v < n; ++v) {
            if (dead[v] || v == prev) continue;
            w[prev][v] += w[last][v];
            w[v][prev] = w[prev][v];
        }
    }
    return best;
}

enum class CutCase { no_cross, cross, disconnected };

/// Minimum cut with the structural case that produced it. The witness cut of
/// the instantiation places, for the named template chain, the all-zero
/// instance of every `inside` origin vertex on one side and everything else
/// on the other.
struct CutResult {
    Weight value;
    CutCase case_tag;
    std::string tmpl;                        // template whose stage produced the cut
    std::vector<std::string> chain;          // template names, root..tmpl (original model)
    std::set<std::string> inside;            // origin vertex names of the inside part

    static const char* case_name(CutCase c) {
        switch (c) {
            case CutCase::no_cross: return "no_cross";
            case CutCase::cross: return "cross";
            default: return "disconnected";
        }
    }
};

/// Candidate where no template crosses the cut: walk templates leaf-first,
/// cut the merged-boundary subgraph of each, then contract it into its
/// boundary.
inline CutResult mincut_no_cross(const Model& m) {
    if (m.directed()) throw std::invalid_argument("min cut is defined on undirected models");
    if (m.has_sibling_edges())
        throw std::invalid_argument("mincut: sibling edges are not supported");

    auto [model, origin_tmpl] = split_disconnected_templates(m);
    const auto& tree = model.tree();
    int n = model.vertex_count();

    std::vector<int> uf(n);
    std::iota(uf.begin(), uf.end(), 0);
    std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };

    // leaf-first: by decreasing depth, ties by template id
    std::vector<TemplateId> order(model.template_count());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](TemplateId a, TemplateId b) {
        if (tree.depth[a] != tree.depth[b]) return tree.depth[a] > tree.depth[b];
        return a < b;
    });

    CutResult best;
    bool have = false;
    auto original_chain = [&](TemplateId t) {
        std::vector<std::string> chain;
        for (TemplateId x = t; ; x = tree.parent[x]) {
            chain.push_back(m.template_name(origin_tmpl[x]));
            if (x == tree.root) break;
        }
        std::reverse(chain.begin(), chain.end());
        // splitting can produce repeated original names on a chain; dedupe
        chain.erase(std::unique(chain.begin(), chain.end()), chain.end());
        return chain;
    };
    auto consider = [&](const Weight& value, TemplateId t, const std::set<std::string>& inside) {
        if (!have || value < best.value) {
            best.value = value;
            best.case_tag = CutCase::no_cross;
            best.tmpl = m.template_name(origin_tmpl[t]);
            best.chain = original_chain(t);
            best.inside = inside;
            have = true;
        }
    };

    for (TemplateId t : order) {
        std::set<int> s_groups;
        for (VertexId v : model.owned_vertices(t)) s_groups.insert(find(v));
        std::set<int> b_groups;
        if (t != tree.root)
            for (VertexId b : model.boundary_vertices(t)) b_groups.insert(find(b));
        for (int gb : b_groups) s_groups.erase(gb);

        // candidate graph: one node per interior group plus one merged boundary node
        std::map<int, int> node_of;
        WeightedGraph cand;
        cand.directed = false;
        for (int gp : s_groups) node_of[gp] = cand.add_vertex(std::to_string(gp));
        int meta = -1;
        if (!b_groups.empty()) meta = cand.add_vertex("$boundary");
        for (const auto& e : model.data().edges) {
            int gu = find(e.tail), gv = find(e.head);
            int a = node_of.count(gu) ? node_of[gu] : (b_groups.count(gu) ? meta : -1);
            int b = node_of.count(gv) ? node_of[gv] : (b_groups.count(gv) ? meta : -1);
            if (a < 0 || b < 0 || a == b) continue;
            cand.add_edge(a, b, e.weight);
        }
        if (cand.size() >= 2) {
            GlobalCut cut = solve_global_mincut(cand);
            // keep the side without the merged boundary
            std::set<int> side = cut.side;
            if (meta >= 0 && side.count(meta)) {
                side.clear();
                for (int i = 0; i < cand.size(); ++i)
                    if (!cut.side.count(i)) side.insert(i);
            }
            std::set<std::string> inside;
            std::set<int> side_groups;
            for (auto& [gp, node] : node_of)
                if (side.count(node)) side_groups.insert(gp);
            for (VertexId v = 0; v < n; ++v)
                if (side_groups.count(find(v))) inside.insert(model.vertex_name(v));
            if (!inside.empty()) consider(cut.value, t, inside);
        }
        // contract the processed template into its boundary
        std::vector<int> all(s_groups.begin(), s_groups.end());
        all.insert(all.end(), b_groups.begin(), b_groups.end());
        for (size_t i = 1; i < all.size(); ++i) uf[find(all[i])] = find(all[0]);
    }
    if (!have) throw std::invalid_argument("mincut: model has no cut (single vertex)");
    return best;
}

/// Candidate where some template crosses the cut: the minimum, over all
/// templates, of the global cut of the reweighted merged-boundary subgraph.
inline CutResult mincut_cross(const Model& m) {
    if (m.directed()) throw std::invalid_argument("min cut is defined on undirected models");
    if (m.has_sibling_edges())
        throw std::invalid_argument("mincut: sibling edges are not supported");

    auto [model, origin_tmpl] = split_disconnected_templates(m);
    const auto& tree = model.tree();

    CutResult best;
    bool have = false;
    for (TemplateId t = 0; t < model.template_count(); ++t) {
        Model sub0 = induced_parametric_subgraph(model, t, /*merge_boundary=*/true);
        if (sub0.vertex_count() < 2) continue;
        // One side of the sought cut lives inside a single instance of t, so
        // t itself contributes no multiplier; only its descendants repeat
        // within that instance.
        PgtData sub_data = sub0.data();
        if (t != model.tree().root) {
            for (auto& td : sub_data.templates)
                if (td.name == model.template_name(t)) td.param = 1;
        }
        Model sub{std::move(sub_data)};
        ReweightedGraph rw = edge_reweight(sub);
        GlobalCut cut = solve_global_mincut(rw);
        std::string merged_name = model.template_name(t) + "$b";
        std::set<int> side = cut.side;
        auto merged = sub.find_vertex(merged_name);
        if (merged && side.count(*merged)) {
            side.clear();
            for (int i = 0; i < rw.size(); ++i)
                if (!cut.side.count(i)) side.insert(i);
        }
        std::set<std::string> inside;
        for (int v : side) inside.insert(rw.names[v]);
        inside.erase(merged_name);
        if (inside.empty()) continue;
        if (!have || cut.value < best.value) {
            best.value = cut.value;
            best.case_tag = CutCase::cross;
            best.tmpl = m.template_name(origin_tmpl[t]);
            best.chain.clear();
            for (TemplateId x = t; ; x = tree.parent[x]) {
                best.chain.push_back(m.template_name(origin_tmpl[x]));
                if (x == tree.root) break;
            }
            std::reverse(best.chain.begin(), best.chain.end());
            best.chain.erase(std::unique(best.chain.begin(), best.chain.end()), best.chain.end());
            best.inside = inside;
            have = true;
        }
    }
    if (!have) throw std::invalid_argument("mincut: model has no cut (single vertex)");
    return best;
}

namespace detail {

// Sibling-free models instantiate a connected graph exactly when the template
// graph is connected.
inline bool template_graph_connected(const Model& m, std::set<std::string>* component = nullptr) {
    int n = m.vertex_count();
    if (n == 0) return true;
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : m.data().edges) {
        adj[e.tail].push_back(e.head);
        adj[e.head].push_back(e.tail);
    }
    std::vector<bool> seen(n, false);
    std::vector<int> stack{0};
    seen[0] = true;
    int count = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int w : adj[u])
            if (!seen[w]) {
                seen[w] = true;
                ++count;
                stack.push_back(w);
            }
    }
    if (component)
        for (int v = 0; v < n; ++v)
            if (seen[v]) component->insert(m.vertex_name(v));
    return count == n;
}

}  // namespace detail

/// Global minimum cut of the instantiation: minimum of the two structural
/// cases. Ties resolve toward no_cross. A disconnected instantiation yields
/// value 0 with one component as witness.
inline CutResult min_cut(const Model& m) {
    if (m.directed()) throw std::invalid_argument("min cut is defined on undirected models");
    if (m.has_sibling_edges())
        throw std::invalid_argument("mincut: sibling edges are not supported");
    std::set<std::string> component;
    if (!detail::template_graph_connected(m, &component)) {
        CutResult r;
        r.value = Weight(0);
        r.case_tag = CutCase::disconnected;
        r.tmpl = m.template_name(m.tree().root);
        r.chain = {r.tmpl};
        r.inside = component;
        return r;
    }
    CutResult a = mincut_no_cross(m);
    CutResult b = mincut_cross(m);
    return b.value < a.value ? b : a;
}

/// Evaluates a witness on an explicit instantiation: the inside side holds
/// every instance of an `inside` origin whose address components along the
/// witness chain are all zero. Returns the crossing weight.
inline Weight evaluate_cut_witness(const Model& m, const Instantiation& inst, const CutResult& cut) {
    std::set<std::string> chain_set(cut.chain.begin(), cut.chain.end());
    int n = (int)inst.vertices.size();
    std::vector<bool> side_a(n, false);
    for (int i = 0; i < n; ++i) {
        const auto& iv = inst.vertices[i];
        if (!cut.inside.count(m.vertex_name(iv.origin))) continue;
        auto chain = m.template_chain(iv.origin);  // root..T(v), addresses skip the root
        bool zero = true;
        for (size_t c = 1; c < chain.size(); ++c)
            if (chain_set.count(m.template_name(chain[c])) && iv.address[c - 1] != 0) zero = false;
        side_a[i] = zero;
    }
    Weight total(0);
    for (const auto& e : inst.edges)
        if (side_a[e.tail] != side_a[e.head]) total += e.weight;
    return total;
}

}  // namespace pgt
