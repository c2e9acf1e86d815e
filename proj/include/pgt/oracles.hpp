#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pgt/graph.hpp"
#include "pgt/instantiate.hpp"
#include "pgt/max_flow.hpp"
#include "pgt/min_cut.hpp"
#include "pgt/model.hpp"

namespace pgt {
namespace oracle {

/// Maximum flow from all listed source instances to all listed sink
/// instances, via a super-source and super-sink joined by infinite arcs.
inline Weight flow(const Model& m,
                   const Instantiation& inst,
                   const std::set<int>& sources,
                   const std::set<int>& sinks) {
    WeightedGraph g = inst.to_graph(m);
    int s = g.add_vertex("$source");
    int t = g.add_vertex("$sink");
    for (int v : sources) g.add_edge(s, v, Weight::infinity());
    for (int v : sinks) g.add_edge(v, t, Weight::infinity());
    return solve_max_flow(g, s, t).value;
}

/// Instances of a given origin vertex.
inline std::set<int> instances_of(const Instantiation& inst, VertexId origin) {
    std::set<int> out;
    for (int i = 0; i < (int)inst.vertices.size(); ++i)
        if (inst.vertices[i].origin == origin) out.insert(i);
    return out;
}

inline int instance_at(const Instantiation& inst, VertexId origin, const std::vector<long long>& addr) {
    for (int i = 0; i < (int)inst.vertices.size(); ++i)
        if (inst.vertices[i].origin == origin && inst.vertices[i].address == addr) return i;
    throw std::invalid_argument("no such instance");
}

inline Weight mincut(const Model& m, const Instantiation& inst) {
    return solve_global_mincut(inst.to_graph(m)).value;
}

inline long long components(const Instantiation& inst) {
    int n = (int)inst.vertices.size();
    std::vector<int> uf(n);
    for (int i = 0; i < n; ++i) uf[i] = i;
    std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
    for (const auto& e : inst.edges) uf[find(e.tail)] = find(e.head);
    std::set<int> reps;
    for (int i = 0; i < n; ++i) reps.insert(find(i));
    return (long long)reps.size();
}

/// Rooted tree pattern for exhaustive matching: parent[i] = -1 marks the root.
struct Pattern {
    std::vector<int> parent;
    int size() const { return (int)parent.size(); }
    int root() const {
        for (int i = 0; i < size(); ++i)
            if (parent[i] < 0) return i;
        return -1;
    }
    std::vector<std::vector<int>> children() const {
        std::vector<std::vector<int>> ch(size());
        for (int i = 0; i < size(); ++i)
            if (parent[i] >= 0) ch[parent[i]].push_back(i);
        return ch;
    }
};

namespace detail {

// Pre-order DFS over pattern vertices; position i gets a candidate adjacent
// to its parent's image. Explores the full product space.
inline bool embed(const std::vector<std::vector<int>>& adj,
                  const Pattern& pat,
                  const std::vector<int>& order,
                  std::vector<int>& assign,
                  std::vector<bool>& used,
                  size_t i) {
    if (i == order.size()) return true;
    int p = order[i];
    for (int cand : adj[assign[pat.parent[p]]]) {
        if (used[cand]) continue;
        assign[p] = cand;
        used[cand] = true;
        if (embed(adj, pat, order, assign, used, i + 1)) return true;
        used[cand] = false;
        assign[p] = -1;
    }
    return false;
}

}  // namespace detail

/// Does the rooted tree pattern occur with its root mapped to some instance
/// of root_origin? Exhaustive injective embedding search.
inline bool tree_occurs(const Instantiation& inst, const Pattern& pat, VertexId root_origin) {
    int n = (int)inst.vertices.size();
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : inst.edges) adj[e.tail].push_back(e.head);
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    auto pat_children = pat.children();
    int pr = pat.root();
    std::vector<int> order;  // pre-order, root excluded
    std::vector<int> stack{pr};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (v != pr) order.push_back(v);
        for (auto it = pat_children[v].rbegin(); it != pat_children[v].rend(); ++it)
            stack.push_back(*it);
    }
    for (int start = 0; start < n; ++start) {
        if (inst.vertices[start].origin != root_origin) continue;
        std::vector<int> assign(pat.size(), -1);
        std::vector<bool> used(n, false);
        assign[pr] = start;
        used[start] = true;
        if (detail::embed(adj, pat, order, assign, used, 0)) return true;
    }
    return false;
}

namespace detail {

// Builds paths of length >= 2 one at a time; interior vertices are marked
// used, endpoints are shared.
inline bool disjoint_paths_rec(const std::vector<std::vector<int>>& adj,
                               int s,
                               int t,
                               int k,
                               int len_lo,
                               int len_hi,
                               std::set<int>& used,
                               int cur,
                               int steps) {
    if (k == 0) return true;
    for (int next : adj[cur]) {
        if (next == t) {
            if (steps + 1 >= len_lo && steps + 1 <= len_hi && steps >= 1) {
                if (disjoint_paths_rec(adj, s, t, k - 1, len_lo, len_hi, used, s, 0)) return true;
            }
            continue;
        }
        if (used.count(next) || next == s) continue;
        if (steps + 1 >= len_hi) continue;
        used.insert(next);
        if (disjoint_paths_rec(adj, s, t, k, len_lo, len_hi, used, next, steps + 1)) return true;
        used.erase(next);
    }
    return false;
}

}  // namespace detail

/// Are there k vertex-disjoint paths (sharing only the endpoints) of length
/// exactly L (mode_exact) or at most L, between some instance of s and some
/// instance of t? Exhaustive search over endpoint instances and path tuples.
/// Length-1 paths are parallel s-t edges and are counted by multiplicity.
inline bool disjoint_paths(const Instantiation& inst,
                           VertexId s_origin,
                           VertexId t_origin,
                           int k,
                           int len,
                           bool mode_exact) {
    int n = (int)inst.vertices.size();
    std::vector<std::vector<int>> adj(n);
    std::map<std::pair<int, int>, int> multiplicity;
    for (const auto& e : inst.edges) {
        adj[e.tail].push_back(e.head);
        multiplicity[{e.tail, e.head}]++;
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    if (k == 0) return true;
    int lo = mode_exact ? len : 1;
    for (int s : instances_of(inst, s_origin)) {
        for (int t : instances_of(inst, t_origin)) {
            if (s == t) continue;
            // direct s-t edges serve as length-1 paths and block nothing else
            int direct = 0;
            if (lo <= 1 && 1 <= len) {
                auto it = multiplicity.find({s, t});
                if (it != multiplicity.end()) direct = it->second;
            }
            int remaining = std::max(0, k - direct);
            if (remaining == 0) return true;
            std::set<int> used;
            if (detail::disjoint_paths_rec(adj, s, t, remaining, std::max(lo, 2), len, used, s, 0))
                return true;
        }
    }
    return false;
}

}  // namespace oracle
}  // namespace pgt
