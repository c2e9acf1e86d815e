#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "pgt/instantiate.hpp"
#include "pgt/model.hpp"

namespace pgt {

/// The template graph of one template with sibling edges weighted by their
/// instance shift and every other edge weighted zero. Walk weights mod P
/// characterize inter-instance reachability.
struct JumpGraph {
    TemplateId tmpl = -1;
    long long modulus = 1;
    std::vector<VertexId> vertices;  // model vertex ids in Sub(T)
    struct Edge {
        VertexId tail, head;
        long long weight;
    };
    std::vector<Edge> edges;
};

inline JumpGraph build_jump_graph(const Model& m, TemplateId t) {
    JumpGraph jg;
    jg.tmpl = t;
    jg.modulus = m.param(t);
    std::set<VertexId> sub;
    for (VertexId v = 0; v < m.vertex_count(); ++v)
        if (m.is_ancestor_or_self(t, m.template_of(v))) {
            sub.insert(v);
            jg.vertices.push_back(v);
        }
    for (const auto& e : m.data().edges) {
        if (!sub.count(e.tail) || !sub.count(e.head)) continue;
        jg.edges.push_back({e.tail, e.head, 0});
        if (!m.directed()) jg.edges.push_back({e.head, e.tail, 0});
    }
    for (const auto& e : m.data().sibling_edges) {
        if (!sub.count(e.tail)) continue;
        long long w = m.template_of(e.tail) == t ? e.delta : 0;  // deeper shifts move other indices
        jg.edges.push_back({e.tail, e.head, w});
        if (!m.directed()) jg.edges.push_back({e.head, e.tail, -w});
    }
    return jg;
}

/// Jump graph restricted to sibling-edge endpoints plus a query vertex, with
/// zero-weight edges standing for zero-weight paths. At most 2x+1 vertices.
struct ShrunkJumpGraph {
    TemplateId tmpl = -1;
    long long modulus = 1;
    VertexId query = -1;
    std::vector<VertexId> vertices;
    struct Edge {
        VertexId tail, head;
        long long weight;
    };
    std::vector<Edge> edges;
};

inline ShrunkJumpGraph shrink(const JumpGraph& jg, VertexId query) {
    ShrunkJumpGraph s;
    s.tmpl = jg.tmpl;
    s.modulus = jg.modulus;
    s.query = query;
    std::set<VertexId> keep{query};
    for (const auto& e : jg.edges)
        if (e.weight != 0) {
            keep.insert(e.tail);
            keep.insert(e.head);
        }
    s.vertices.assign(keep.begin(), keep.end());

    std::map<VertexId, std::vector<VertexId>> zero_adj;
    for (const auto& e : jg.edges)
        if (e.weight == 0) zero_adj[e.tail].push_back(e.head);
    for (const auto& e : jg.edges)
        if (e.weight != 0) s.edges.push_back({e.tail, e.head, e.weight});
    for (VertexId u : s.vertices) {
        // zero-weight closure by breadth-first search
        std::set<VertexId> seen{u};
        std::queue<VertexId> q;
        q.push(u);
        while (!q.empty()) {
            VertexId a = q.front();
            q.pop();
            for (VertexId b : zero_adj[a])
                if (seen.insert(b).second) q.push(b);
        }
        for (VertexId w : s.vertices)
            if (w != u && seen.count(w)) s.edges.push_back({u, w, 0});
    }
    return s;
}

using ResidueSet = std::set<long long>;

namespace sibdetail {

inline long long norm_mod(long long x, long long p) { return ((x % p) + p) % p; }

}  // namespace sibdetail

/// Residues of instances reachable from instance 0 of v, per vertex of the
/// template, via a topological-order DP over the shrunk jump graph. Errors on
/// a cyclic shrunk jump graph; closed walks need the undirected machinery.
inline std::map<VertexId, ResidueSet> reachable_instances(const Model& m, TemplateId t, VertexId v) {
    JumpGraph jg = build_jump_graph(m, t);
    ShrunkJumpGraph sj = shrink(jg, v);
    long long p = sj.modulus;

    std::map<VertexId, int> idx;
    for (size_t i = 0; i < sj.vertices.size(); ++i) idx[sj.vertices[i]] = (int)i;
    int n = (int)sj.vertices.size();
    std::vector<std::vector<std::pair<int, long long>>> adj(n);
    std::vector<int> indeg(n, 0);
    for (const auto& e : sj.edges) {
        adj[idx.at(e.tail)].emplace_back(idx.at(e.head), e.weight);
        indeg[idx.at(e.head)]++;
    }
    std::vector<int> order;
    std::queue<int> q;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) q.push(i);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        order.push_back(u);
        for (auto [w, d] : adj[u])
            if (--indeg[w] == 0) q.push(w);
    }
    if ((int)order.size() != n)
        throw std::invalid_argument(
            "reachable_instances: cyclic shrunk jump graph; use the undirected machinery");

    // weight sets: reduce mod p early when p is small, otherwise keep raw
    // path weights and reduce at the end (the pseudo-polynomial route)
    bool reduce_early = p <= 4096;
    std::vector<ResidueSet> weights(n);
    weights[idx.at(v)].insert(0);
    for (int u : order) {
        for (auto [w, d] : adj[u]) {
            for (long long x : weights[u]) {
                long long y = x + d;
                weights[w].insert(reduce_early ? sibdetail::norm_mod(y, p) : y);
            }
        }
    }

    // propagate to every template vertex along zero-weight paths of the full
    // jump graph
    std::map<VertexId, std::vector<VertexId>> zero_adj;
    for (const auto& e : jg.edges)
        if (e.weight == 0) zero_adj[e.tail].push_back(e.head);
    std::map<VertexId, ResidueSet> result;
    for (size_t i = 0; i < sj.vertices.size(); ++i) {
        if (weights[i].empty()) continue;
        ResidueSet residues;
        for (long long x : weights[i]) residues.insert(sibdetail::norm_mod(x, p));
        std::set<VertexId> seen{sj.vertices[i]};
        std::queue<VertexId> bfs;
        bfs.push(sj.vertices[i]);
        while (!bfs.empty()) {
            VertexId a = bfs.front();
            bfs.pop();
            for (VertexId b : zero_adj[a])
                if (seen.insert(b).second) bfs.push(b);
        }
        for (VertexId u : seen) result[u].insert(residues.begin(), residues.end());
    }
    return result;
}

/// Linear congruence a1 x1 + ... + ak xk = b (mod p) is solvable iff
/// gcd(a1, ..., ak, p) divides b.
inline bool congruence_feasible(const std::vector<long long>& a, long long p, long long b) {
    if (p < 1) throw std::invalid_argument("modulus must be positive");
    long long g = p;
    for (long long x : a) g = std::gcd(g, x < 0 ? -x : x);
    return sibdetail::norm_mod(b, g) == 0;
}

namespace sibdetail {

// Per-vertex reachable residues within template t from (v, residue 0),
// computed on the (vertex, residue) product graph. Exact for any shape of the
// jump graph; used where cycles are allowed.
inline std::map<VertexId, ResidueSet> residue_closure(const Model& m, TemplateId t, VertexId v) {
    JumpGraph jg = build_jump_graph(m, t);
    long long p = jg.modulus;
    std::map<VertexId, std::vector<std::pair<VertexId, long long>>> adj;
    for (const auto& e : jg.edges) adj[e.tail].emplace_back(e.head, e.weight);
    std::map<VertexId, ResidueSet> seen;
    std::queue<std::pair<VertexId, long long>> q;
    seen[v].insert(0);
    q.push({v, 0});
    while (!q.empty()) {
        auto [u, r] = q.front();
        q.pop();
        for (auto [w, d] : adj[u]) {
            long long nr = norm_mod(r + d, p);
            if (seen[w].insert(nr).second) q.push({w, nr});
        }
    }
    return seen;
}

}  // namespace sibdetail

namespace sibdetail {

// Materializes the listed residues of template x as explicit copies named
// `<name>:<r>`. x dissolves into its parent; strict descendants are
// duplicated per residue with their parameters intact.
inline PgtData materialize(const Model& work, TemplateId x, const std::set<long long>& visited) {
    const PgtData& cur = work.data();
    long long p = work.param(x);
    std::set<VertexId> sub;
    for (VertexId u = 0; u < work.vertex_count(); ++u)
        if (work.is_ancestor_or_self(x, work.template_of(u))) sub.insert(u);

    PgtData next;
    next.directed = cur.directed;
    std::map<VertexId, VertexId> outside;                       // old id -> new id
    std::map<std::pair<VertexId, long long>, VertexId> copies;  // (old id, residue) -> new id
    for (VertexId u = 0; u < work.vertex_count(); ++u) {
        if (sub.count(u)) continue;
        outside[u] = next.add_vertex(cur.vertices[u]);
    }
    for (long long r : visited)
        for (VertexId u : sub)
            copies[{u, r}] = next.add_vertex(cur.vertices[u] + ":" + std::to_string(r));

    for (const auto& e : cur.edges) {
        bool tin = sub.count(e.tail), hin = sub.count(e.head);
        if (!tin && !hin) {
            next.add_edge(outside[e.tail], outside[e.head], e.weight);
        } else if (tin && hin) {
            for (long long r : visited)
                next.add_edge(copies[{e.tail, r}], copies[{e.head, r}], e.weight);
        } else {
            // boundary edges connect to every materialized instance
            for (long long r : visited) {
                VertexId a = tin ? copies[{e.tail, r}] : outside[e.tail];
                VertexId b = hin ? copies[{e.head, r}] : outside[e.head];
                next.add_edge(a, b, e.weight);
            }
        }
    }
    for (const auto& e : cur.sibling_edges) {
        if (!sub.count(e.tail)) {
            next.add_sibling_edge(outside[e.tail], outside[e.head], e.delta, e.weight);
            continue;
        }
        if (work.template_of(e.tail) == x) {
            // shifts become explicit edges between materialized instances
            for (long long r : visited) {
                long long rr = norm_mod(r + e.delta, p);
                if (!visited.count(rr)) continue;
                next.add_edge(copies[{e.tail, r}], copies[{e.head, rr}], e.weight);
            }
        } else {
            for (long long r : visited)
                next.add_sibling_edge(copies[{e.tail, r}], copies[{e.head, r}], e.delta, e.weight);
        }
    }
    // templates: outside ones keep their members; strict descendants of x are
    // duplicated per materialized instance; x itself dissolves
    for (TemplateId ti = 0; ti < work.template_count(); ++ti) {
        const auto& td = cur.templates[ti];
        if (ti == x) continue;
        bool inside = work.is_ancestor_or_self(x, ti) && ti != x;
        if (inside) {
            for (long long r : visited) {
                TemplateData nd;
                nd.name = td.name + ":" + std::to_string(r);
                nd.param = td.param;
                for (VertexId u : td.members) nd.members.push_back(copies.at({u, r}));
                next.templates.push_back(std::move(nd));
            }
        } else {
            TemplateData nd;
            nd.name = td.name;
            nd.param = td.param;
            for (VertexId u : td.members) {
                if (sub.count(u)) {
                    for (long long r : visited) nd.members.push_back(copies.at({u, r}));
                } else {
                    nd.members.push_back(outside.at(u));
                }
            }
            next.templates.push_back(std::move(nd));
        }
    }
    return next;
}

}  // namespace sibdetail

/// Materializes, level by level up to the root, the instances reachable from
/// the chosen (index 0) instance of v. Side templates hanging off the chain
/// are duplicated per materialized instance; everything reachable from v ends
/// up rooted at a root-template copy of v. Copies are named `<name>:<i>`.
inline Model upwards_partial_instantiation_sib(const Model& m, VertexId v,
                                               std::string* chosen_name = nullptr) {
    if (!is_template_acyclic(m))
        throw std::invalid_argument("upwards partial instantiation needs a template-acyclic model");

    PgtData cur = m.data();
    std::string vname = m.vertex_name(v);

    while (true) {
        Model work{cur};
        VertexId cv = work.vertex(vname);
        TemplateId x = work.template_of(cv);
        if (x == work.tree().root) {
            if (chosen_name) *chosen_name = vname;
            return work;
        }
        auto residues = sibdetail::residue_closure(work, x, cv);
        std::set<long long> visited;
        for (auto& [u, rs] : residues) visited.insert(rs.begin(), rs.end());
        PgtData next = sibdetail::materialize(work, x, visited);
        vname = cur.vertices[cv] + ":0";
        cur = std::move(next);
    }
}

/// BFS or shortest-path arborescence over a strongly template-acyclic model,
/// returned as a parametric graph template whose instantiation is the
/// arborescence of the instantiation rooted at instance 0 of s.
///
/// A tree edge that ascended out of a still-replicated template would
/// instantiate into parallel in-edges, so any template the search exits
/// upward gets materialized and the search reruns; each materialization
/// moves vertices to the root level, so this terminates.
inline Model search_tree_template(const Model& m, VertexId s, bool weighted,
                                  long long budget = kDefaultInstantiationBudget) {
    if (!is_strongly_template_acyclic(m))
        throw std::invalid_argument("search trees need a strongly template-acyclic model");

    std::string chosen;
    PgtData cur = upwards_partial_instantiation_sib(m, s, &chosen).data();

    struct Arc {
        VertexId to;
        bool sibling;
        int index;
        Rational w;
    };

    while (true) {
        Model work{cur};
        if (work.vertex_count() > budget) throw budget_error("search tree materialization budget");
        VertexId root = work.vertex(chosen);
        int n = work.vertex_count();

        std::vector<std::vector<Arc>> adj(n);
        for (int i = 0; i < (int)work.data().edges.size(); ++i) {
            const auto& e = work.data().edges[i];
            Rational w = e.weight.is_infinite() ? Rational(0) : e.weight.finite();
            adj[e.tail].push_back({e.head, false, i, w});
        }
        for (int i = 0; i < (int)work.data().sibling_edges.size(); ++i) {
            const auto& e = work.data().sibling_edges[i];
            Rational w = e.weight.is_infinite() ? Rational(0) : e.weight.finite();
            adj[e.tail].push_back({e.head, true, i, w});
        }

        std::vector<Rational> dist(n, Rational(0));
        std::vector<bool> reached(n, false);
        std::vector<std::pair<bool, int>> tree_edge(n, {false, -1});  // (sibling?, index)
        if (!weighted) {
            std::queue<VertexId> q;
            reached[root] = true;
            q.push(root);
            while (!q.empty()) {
                VertexId u = q.front();
                q.pop();
                for (const Arc& a : adj[u]) {
                    if (reached[a.to]) continue;
                    reached[a.to] = true;
                    dist[a.to] = dist[u] + Rational(1);
                    tree_edge[a.to] = {a.sibling, a.index};
                    q.push(a.to);
                }
            }
        } else {
            // Dijkstra with exact distances, deterministic tie-break on id
            std::set<std::pair<Rational, VertexId>> heap;
            std::vector<bool> done(n, false);
            reached[root] = true;
            heap.insert({Rational(0), root});
            while (!heap.empty()) {
                auto [d, u] = *heap.begin();
                heap.erase(heap.begin());
                if (done[u]) continue;
                done[u] = true;
                for (const Arc& a : adj[u]) {
                    Rational nd = d + a.w;
                    if (!reached[a.to] || nd < dist[a.to]) {
                        if (reached[a.to]) heap.erase({dist[a.to], a.to});
                        reached[a.to] = true;
                        dist[a.to] = nd;
                        tree_edge[a.to] = {a.sibling, a.index};
                        heap.insert({nd, a.to});
                    }
                }
            }
        }

        // a used tree edge must not ascend out of a replicated template
        TemplateId offender = -1;
        for (VertexId u = 0; u < n && offender < 0; ++u) {
            if (!reached[u] || u == root || tree_edge[u].first) continue;
            if (tree_edge[u].second < 0) continue;
            const auto& e = work.data().edges[tree_edge[u].second];
            TemplateId tt = work.template_of(e.tail), th = work.template_of(e.head);
            if (tt != th && work.tree().parent[tt] == th && work.param(tt) > 1) offender = tt;
        }
        if (offender >= 0) {
            std::set<long long> all;
            for (long long r = 0; r < work.param(offender); ++r) all.insert(r);
            cur = sibdetail::materialize(work, offender, all);
            continue;
        }

        PgtData out;
        out.directed = true;
        std::map<VertexId, VertexId> remap;
        for (VertexId u = 0; u < n; ++u)
            if (reached[u]) remap[u] = out.add_vertex(work.vertex_name(u));
        for (VertexId u = 0; u < n; ++u) {
            if (!reached[u] || u == root) continue;
            auto [sib, idx] = tree_edge[u];
            if (!sib) {
                const auto& e = work.data().edges[idx];
                out.add_edge(remap[e.tail], remap[e.head], e.weight);
            } else {
                const auto& e = work.data().sibling_edges[idx];
                out.add_sibling_edge(remap[e.tail], remap[e.head], e.delta, e.weight);
            }
        }
        for (TemplateId t = 0; t < work.template_count(); ++t) {
            TemplateData td;
            td.name = work.template_name(t);
            td.param = work.param(t);
            for (VertexId u : work.data().templates[t].members)
                if (reached[u]) td.members.push_back(remap[u]);
            if (!td.members.empty()) out.templates.push_back(std::move(td));
        }
        return Model(out);
    }
}

inline Model bfs_template(const Model& m, VertexId s) { return search_tree_template(m, s, false); }
inline Model sssp_template(const Model& m, VertexId s) { return search_tree_template(m, s, true); }

/// Rewrites one leaf template so that a spanning tree of its jump graph
/// carries no shifts; every other edge becomes a sibling edge whose shift is
/// adjusted by the tree-path weights. The instantiation stays isomorphic for
/// every parameter.
inline Model retemplate(const Model& m, TemplateId t) {
    if (m.directed()) throw std::invalid_argument("retemplating works on undirected models");
    for (TemplateId i = 0; i < m.template_count(); ++i)
        if (i != t && m.is_ancestor_or_self(t, i))
            throw std::invalid_argument("retemplating applies to leaf templates");

    JumpGraph jg = build_jump_graph(m, t);
    long long p = jg.modulus;
    std::set<VertexId> sub(jg.vertices.begin(), jg.vertices.end());

    // spanning tree by BFS from the lowest-id vertex, ignoring directions
    std::map<VertexId, std::vector<std::pair<VertexId, long long>>> adj;
    for (const auto& e : jg.edges) adj[e.tail].emplace_back(e.head, e.weight);
    std::map<VertexId, long long> alpha;
    if (!jg.vertices.empty()) {
        VertexId start = *std::min_element(jg.vertices.begin(), jg.vertices.end());
        alpha[start] = 0;
        std::queue<VertexId> q;
        q.push(start);
        while (!q.empty()) {
            VertexId u = q.front();
            q.pop();
            for (auto [w, d] : adj[u]) {
                if (alpha.count(w)) continue;
                // alpha(child) = alpha(parent) - w(parent -> child)
                alpha[w] = sibdetail::norm_mod(alpha[u] - d, p);
                q.push(w);
            }
        }
        if ((int)alpha.size() != (int)jg.vertices.size())
            throw std::invalid_argument("retemplating needs a connected template graph");
    }

    PgtData out = m.data();
    std::vector<EdgeData> edges;
    std::vector<SiblingEdgeData> sibs;
    auto emit = [&](VertexId a, VertexId b, const Weight& w, long long delta) {
        long long nd = sibdetail::norm_mod(delta + alpha[b] - alpha[a], p);
        if (nd == 0)
            edges.push_back({a, b, w});
        else
            sibs.push_back({a, b, w, nd});
    };
    for (const auto& e : out.edges) {
        if (sub.count(e.tail) && sub.count(e.head))
            emit(e.tail, e.head, e.weight, 0);
        else
            edges.push_back(e);
    }
    for (const auto& e : out.sibling_edges) {
        if (sub.count(e.tail) && m.template_of(e.tail) == t)
            emit(e.tail, e.head, e.weight, e.delta);
        else
            sibs.push_back(e);
    }
    out.edges = std::move(edges);
    out.sibling_edges = std::move(sibs);
    return Model(out);
}

/// Number of connected components of the instantiation. Bottom-up boundary
/// merging; each boundary-free piece contributes gcd(P, adjusted shifts)
/// components, multiplied by the parameters of the enclosing templates.
inline long long connected_components(const Model& m) {
    if (m.directed()) throw std::invalid_argument("component counting works on undirected models");
    int n = m.vertex_count();
    if (n == 0) return 0;
    const auto& tree = m.tree();

    std::vector<int> uf(n);
    std::iota(uf.begin(), uf.end(), 0);
    std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
    std::vector<bool> alive(n, true);

    std::vector<TemplateId> order(m.template_count());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](TemplateId a, TemplateId b) {
        if (tree.depth[a] != tree.depth[b]) return tree.depth[a] > tree.depth[b];
        return a < b;
    });

    long long total = 0;
    for (TemplateId t : order) {
        bool is_root = t == tree.root;
        std::set<VertexId> sub;
        for (VertexId v = 0; v < n; ++v)
            if (alive[v] && (is_root || m.is_ancestor_or_self(t, m.template_of(v)))) sub.insert(v);
        if (sub.empty()) continue;

        // group-level connectivity inside the piece: plain edges and this
        // template's sibling edges both connect
        std::map<int, std::vector<int>> group_adj;
        std::set<int> groups;
        for (VertexId v : sub) groups.insert(find(v));
        auto connect = [&](VertexId a, VertexId b) {
            if (!sub.count(a) || !sub.count(b)) return;
            group_adj[find(a)].push_back(find(b));
            group_adj[find(b)].push_back(find(a));
        };
        for (const auto& e : m.data().edges)
            if (alive[e.tail] && alive[e.head]) connect(e.tail, e.head);
        for (const auto& e : m.data().sibling_edges)
            if (alive[e.tail] && m.template_of(e.tail) == t) connect(e.tail, e.head);

        std::map<int, int> comp;
        int nc = 0;
        for (int g : groups) {
            if (comp.count(g)) continue;
            std::vector<int> stack{g};
            comp[g] = nc;
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (int w : group_adj[u])
                    if (!comp.count(w)) {
                        comp[w] = nc;
                        stack.push_back(w);
                    }
            }
            ++nc;
        }

        // boundary attachment per component
        std::vector<std::set<VertexId>> touches(nc);
        if (!is_root) {
            for (const auto& e : m.data().edges) {
                if (!alive[e.tail] || !alive[e.head]) continue;
                bool tin = sub.count(e.tail), hin = sub.count(e.head);
                if (tin == hin) continue;
                VertexId inside = tin ? e.tail : e.head;
                VertexId outside = tin ? e.head : e.tail;
                touches[comp[find(inside)]].insert(outside);
            }
        }

        long long strict_anc_product = m.ancestor_param_product(t) / m.param(t);
        for (int c = 0; c < nc; ++c) {
            std::vector<int> members;
            for (int g : groups)
                if (comp[g] == c) members.push_back(g);
            if (!is_root && !touches[c].empty()) {
                // merge the whole component into its boundary vertices
                int anchor = find(*touches[c].begin());
                for (VertexId b : touches[c]) uf[find(b)] = find(anchor);
                for (int g : members) uf[find(g)] = find(anchor);
                continue;
            }
            if (is_root) {
                total += 1;
            } else {
                // boundary-free piece: spanning tree of the group-level jump
                // graph, then gcd of the adjusted shifts against P
                std::map<int, std::vector<std::pair<int, long long>>> jadj;
                auto arc = [&](VertexId a, VertexId b, long long w) {
                    if (!sub.count(a) || !sub.count(b)) return;
                    int ga = find(a), gb = find(b);
                    if (comp[ga] != c) return;
                    jadj[ga].emplace_back(gb, w);
                    jadj[gb].emplace_back(ga, -w);
                };
                for (const auto& e : m.data().edges)
                    if (alive[e.tail] && alive[e.head]) arc(e.tail, e.head, 0);
                std::vector<std::tuple<int, int, long long>> sib_arcs;
                for (const auto& e : m.data().sibling_edges) {
                    if (!alive[e.tail] || m.template_of(e.tail) != t) continue;
                    int ga = find(e.tail), gb = find(e.head);
                    if (comp.count(ga) && comp[ga] == c) sib_arcs.emplace_back(ga, gb, e.delta);
                    arc(e.tail, e.head, e.delta);
                }
                long long p = m.param(t);
                std::map<int, long long> alpha;
                alpha[members[0]] = 0;
                std::vector<int> stack{members[0]};
                while (!stack.empty()) {
                    int u = stack.back();
                    stack.pop_back();
                    for (auto [w, d] : jadj[u])
                        if (!alpha.count(w)) {
                            alpha[w] = sibdetail::norm_mod(alpha[u] - d, p);
                            stack.push_back(w);
                        }
                }
                long long g = p;
                for (const auto& e : m.data().edges) {
                    if (!alive[e.tail] || !alive[e.head]) continue;
                    int ga = find(e.tail), gb = find(e.head);
                    if (!sub.count(e.tail) || !sub.count(e.head) || comp[ga] != c) continue;
                    g = std::gcd(g, sibdetail::norm_mod(0 + alpha[gb] - alpha[ga], p));
                }
                for (auto [ga, gb, d] : sib_arcs)
                    g = std::gcd(g, sibdetail::norm_mod(d + alpha[gb] - alpha[ga], p));
                if (g == 0) g = p;
                total += g * strict_anc_product;
                for (int gmem : members)
                    for (VertexId v : sub)
                        if (find(v) == gmem) alive[v] = false;
            }
        }
    }
    return total;
}

}  // namespace pgt
