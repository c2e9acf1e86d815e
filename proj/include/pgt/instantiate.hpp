#pragma once

#include <algorithm>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "pgt/graph.hpp"
#include "pgt/model.hpp"

namespace pgt {

constexpr long long kDefaultInstantiationBudget = 10'000'000;

/// Canonical name of a vertex instance: origin name, '@', and the instance
/// indices of the non-root ancestor templates joined by '.', top-down.
/// A root-owned vertex prints as `name@`.
struct InstanceAddress {
    std::vector<std::pair<TemplateId, long long>> indices;

    std::string suffix() const {
        std::string s = "@";
        for (size_t i = 0; i < indices.size(); ++i) {
            if (i) s += '.';
            s += std::to_string(indices[i].second);
        }
        return s;
    }
};

/// Explicit expanded graph. Every vertex carries its origin vertex and the
/// instance indices of the non-root templates on the origin's chain.
struct Instantiation {
    bool directed = true;
    struct Vertex {
        VertexId origin;
        std::vector<long long> address;  // aligned with non-root chain of origin, top-down
    };
    std::vector<Vertex> vertices;
    enum class EdgeOrigin { regular, sibling };
    struct Edge {
        int tail, head;
        Weight weight;
        EdgeOrigin origin_kind;
        int origin_index;
    };
    std::vector<Edge> edges;

    std::string vertex_label(const Model& m, int i) const {
        std::string s = m.vertex_name(vertices[i].origin) + "@";
        for (size_t j = 0; j < vertices[i].address.size(); ++j) {
            if (j) s += '.';
            s += std::to_string(vertices[i].address[j]);
        }
        return s;
    }

    WeightedGraph to_graph(const Model& m) const {
        WeightedGraph g;
        g.directed = directed;
        for (int i = 0; i < (int)vertices.size(); ++i) g.add_vertex(vertex_label(m, i));
        for (const auto& e : edges) g.add_edge(e.tail, e.head, e.weight);
        return g;
    }
};

namespace detail {

// Work state for the leaf-first rewriting. Each work vertex remembers the
// template it currently belongs to in the shrinking template tree.
struct RewriteState {
    struct WorkVertex {
        VertexId origin;
        std::vector<std::pair<TemplateId, long long>> addr;  // (template, index), unordered
        TemplateId current;
    };
    std::vector<WorkVertex> verts;
    struct WorkEdge {
        int tail, head;
        Weight w;
        Instantiation::EdgeOrigin kind;
        int origin_index;
    };
    std::vector<WorkEdge> edges;
    struct WorkSibling {
        int tail, head;
        Weight w;
        long long delta;
        TemplateId owner;
        int origin_index;
    };
    std::vector<WorkSibling> siblings;
};

}  // namespace detail

/// Leaf-first rewriting exactly as the model defines instantiation. The
/// processing order over leaf templates is configurable for the
/// order-independence property; the default processes leaves in ascending
/// template id, which fixes canonical addresses.
inline Instantiation instantiate(const Model& m,
                                 long long budget = kDefaultInstantiationBudget,
                                 const std::vector<TemplateId>* leaf_order = nullptr) {
    const auto& tree = m.tree();
    int k = m.template_count();

    detail::RewriteState st;
    for (VertexId v = 0; v < m.vertex_count(); ++v)
        st.verts.push_back({v, {}, m.template_of(v)});
    for (int i = 0; i < (int)m.data().edges.size(); ++i) {
        const auto& e = m.data().edges[i];
        st.edges.push_back({e.tail, e.head, e.weight, Instantiation::EdgeOrigin::regular, i});
    }
    for (int i = 0; i < (int)m.data().sibling_edges.size(); ++i) {
        const auto& e = m.data().sibling_edges[i];
        st.siblings.push_back({e.tail, e.head, e.weight, e.delta, m.template_of(e.tail), i});
    }

    std::vector<int> live_children(k, 0);
    std::vector<bool> alive(k, true);
    for (int t = 0; t < k; ++t)
        if (t != tree.root) live_children[tree.parent[t]]++;

    std::vector<TemplateId> order;
    if (leaf_order) order = *leaf_order;

    auto next_leaf = [&]() -> TemplateId {
        if (!order.empty()) {
            for (size_t i = 0; i < order.size(); ++i) {
                TemplateId t = order[i];
                if (alive[t] && t != tree.root && live_children[t] == 0) {
                    order.erase(order.begin() + i);
                    return t;
                }
            }
        }
        for (TemplateId t = 0; t < k; ++t)
            if (alive[t] && t != tree.root && live_children[t] == 0) return t;
        return -1;
    };

    while (true) {
        TemplateId t = next_leaf();
        if (t < 0) break;
        long long p = m.param(t);
        TemplateId parent = tree.parent[t];

        std::vector<int> in_t;  // work-vertex ids currently in t
        std::vector<int> remap(st.verts.size(), -1);
        for (int i = 0; i < (int)st.verts.size(); ++i)
            if (st.verts[i].current == t) in_t.push_back(i);

        if ((long long)st.verts.size() + (long long)in_t.size() * (p - 1) > budget)
            throw budget_error("instantiation budget exceeded");

        detail::RewriteState next;
        next.verts.reserve(st.verts.size() + in_t.size() * (p - 1));
        // copies[i][j] = new id of instance j of work vertex i (for i in t)
        std::map<int, std::vector<int>> copies;
        for (int i = 0; i < (int)st.verts.size(); ++i) {
            if (st.verts[i].current != t) {
                remap[i] = (int)next.verts.size();
                next.verts.push_back(st.verts[i]);
            }
        }
        for (int i : in_t) {
            auto& slot = copies[i];
            for (long long j = 0; j < p; ++j) {
                auto wv = st.verts[i];
                wv.addr.emplace_back(t, j);
                wv.current = parent;
                slot.push_back((int)next.verts.size());
                next.verts.push_back(std::move(wv));
            }
        }

        auto expand_pair = [&](int a, int b, auto&& emit) {
            bool a_in = copies.count(a), b_in = copies.count(b);
            if (a_in && b_in) {
                for (long long j = 0; j < p; ++j) emit(copies[a][j], copies[b][j]);
            } else if (a_in) {
                for (long long j = 0; j < p; ++j) emit(copies[a][j], remap[b]);
            } else if (b_in) {
                for (long long j = 0; j < p; ++j) emit(remap[a], copies[b][j]);
            } else {
                emit(remap[a], remap[b]);
            }
        };

        for (const auto& e : st.edges)
            expand_pair(e.tail, e.head, [&](int a, int b) {
                next.edges.push_back({a, b, e.w, e.kind, e.origin_index});
            });
        for (const auto& se : st.siblings) {
            if (se.owner == t) {
                // sibling expansion: tail instance j connects to head instance (j + delta) mod p
                for (long long j = 0; j < p; ++j) {
                    long long jj = ((j + se.delta) % p + p) % p;
                    next.edges.push_back({copies[se.tail][j], copies[se.head][jj], se.w,
                                          Instantiation::EdgeOrigin::sibling, se.origin_index});
                }
            } else {
                next.siblings.push_back({remap[se.tail], remap[se.head], se.w, se.delta, se.owner,
                                         se.origin_index});
            }
        }

        st = std::move(next);
        alive[t] = false;
        live_children[parent]--;
    }

    Instantiation inst;
    inst.directed = m.directed();
    for (auto& wv : st.verts) {
        // order address components top-down along the chain
        std::sort(wv.addr.begin(), wv.addr.end(), [&](const auto& a, const auto& b) {
            return tree.depth[a.first] < tree.depth[b.first];
        });
        Instantiation::Vertex iv;
        iv.origin = wv.origin;
        for (auto& [tid, idx] : wv.addr) iv.address.push_back(idx);
        inst.vertices.push_back(std::move(iv));
    }
    for (const auto& e : st.edges)
        inst.edges.push_back({e.tail, e.head, e.w, e.kind, e.origin_index});
    return inst;
}

/// True iff no walk in the template graph leaves the instance set of a
/// template and re-enters it. Sibling edges are traversed as ordinary arcs;
/// they stay within their template's instances.
inline bool is_template_acyclic(const Model& m) {
    if (!m.directed()) throw std::invalid_argument("template-acyclicity is a directed notion");
    int n = m.vertex_count();
    std::vector<std::pair<int, int>> arcs;
    for (const auto& e : m.data().edges) arcs.emplace_back(e.tail, e.head);
    for (const auto& e : m.data().sibling_edges) arcs.emplace_back(e.tail, e.head);

    for (TemplateId t = 0; t < m.template_count(); ++t) {
        if (t == m.tree().root) continue;
        std::vector<bool> inside(n, false);
        for (VertexId v = 0; v < n; ++v)
            inside[v] = m.is_ancestor_or_self(t, m.template_of(v));

        // frontier: outside vertices directly entered from inside
        std::vector<bool> seen(n, false);
        std::queue<int> q;
        for (auto [a, b] : arcs)
            if (inside[a] && !inside[b] && !seen[b]) {
                seen[b] = true;
                q.push(b);
            }
        // walk outside; re-entry into the template set means a template-cycle
        std::vector<std::vector<int>> adj(n);
        for (auto [a, b] : arcs)
            if (!inside[a]) adj[a].push_back(b);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int w : adj[u]) {
                if (inside[w]) return false;
                if (!seen[w]) {
                    seen[w] = true;
                    q.push(w);
                }
            }
        }
    }
    return true;
}

/// Template-acyclic and the template graph (with sibling edges as arcs) is a
/// DAG.
inline bool is_strongly_template_acyclic(const Model& m) {
    if (!is_template_acyclic(m)) return false;
    int n = m.vertex_count();
    std::vector<std::vector<int>> adj(n);
    std::vector<int> indeg(n, 0);
    auto arc = [&](int a, int b) {
        adj[a].push_back(b);
        indeg[b]++;
    };
    for (const auto& e : m.data().edges) arc(e.tail, e.head);
    for (const auto& e : m.data().sibling_edges) arc(e.tail, e.head);
    std::queue<int> q;
    for (int v = 0; v < n; ++v)
        if (indeg[v] == 0) q.push(v);
    int seen = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        ++seen;
        for (int w : adj[u])
            if (--indeg[w] == 0) q.push(w);
    }
    return seen == n;
}

}  // namespace pgt
