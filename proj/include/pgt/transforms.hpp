#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pgt/graph.hpp"
#include "pgt/model.hpp"

namespace pgt {

/// Reweighted graph: same vertices and edges as the template graph, each edge
/// weight multiplied by the parameters of all templates containing at least
/// one of its endpoints.
using ReweightedGraph = WeightedGraph;

/// O(m) reweighting. The ancestor-parameter products are precomputed per
/// template by the model. Rejects sibling edges; the reweighting lemma does
/// not cover them.
inline ReweightedGraph edge_reweight(const Model& m) {
    if (m.has_sibling_edges())
        throw std::invalid_argument("edge_reweight: sibling edges are not supported");
    ReweightedGraph g;
    g.directed = m.directed();
    for (VertexId v = 0; v < m.vertex_count(); ++v) g.add_vertex(m.vertex_name(v));
    for (const auto& e : m.data().edges) {
        // I(e): templates containing an endpoint = ancestors-or-self of the
        // deeper endpoint (no-skipping makes the chains nested)
        TemplateId tu = m.template_of(e.tail);
        TemplateId tv = m.template_of(e.head);
        TemplateId deep = m.tree().depth[tu] >= m.tree().depth[tv] ? tu : tv;
        long long mult = m.ancestor_param_product(deep);
        g.add_edge(e.tail, e.head, e.weight * Rational(mult));
    }
    return g;
}

namespace detail {

inline std::string fresh_name(const PgtData& g, std::string base) {
    std::set<std::string> used(g.vertices.begin(), g.vertices.end());
    while (used.count(base)) base += "~";
    return base;
}

}  // namespace detail

/// Moves all instances of v into the root by rerouting each cross-template
/// edge at v through a chain of dummy vertices whose edges toward v carry
/// infinite weight. Adds at most d(v)*h vertices and edges.
inline Model instance_merge(const Model& m, VertexId v) {
    for (const auto& se : m.data().sibling_edges)
        if (se.tail == v || se.head == v)
            throw std::invalid_argument("instance_merge: vertex carries a sibling edge");

    PgtData g = m.data();
    std::vector<std::set<VertexId>> sets(g.templates.size());
    for (size_t i = 0; i < g.templates.size(); ++i)
        sets[i] = std::set<VertexId>(g.templates[i].members.begin(), g.templates[i].members.end());

    // deepest template currently containing a vertex
    auto belongs_to = [&](VertexId x) {
        int best = -1;
        for (size_t i = 0; i < sets.size(); ++i)
            if (sets[i].count(x) && (best < 0 || sets[i].size() < sets[best].size())) best = (int)i;
        return best;
    };

    std::vector<TemplateId> chain = m.template_chain(v);  // root .. T(v)
    int dummy_counter = 0;
    // walk v upward; at each level reroute the edges that are cross-template
    // at v's current position through a dummy in that template
    for (int level = (int)chain.size() - 1; level >= 1; --level) {
        TemplateId cur = chain[level];
        size_t n_edges = g.edges.size();
        for (size_t i = 0; i < n_edges; ++i) {
            bool at_tail = g.edges[i].tail == v, at_head = g.edges[i].head == v;
            if (!at_tail && !at_head) continue;
            VertexId other = at_tail ? g.edges[i].head : g.edges[i].tail;
            if (belongs_to(other) == cur) continue;  // within-template edge
            std::string name =
                detail::fresh_name(g, g.vertices[v] + "~d" + std::to_string(dummy_counter++));
            VertexId d = g.add_vertex(name);
            // d belongs to cur: add to cur and every ancestor set
            for (size_t j = 0; j < sets.size(); ++j)
                if ((int)j == cur ||
                    (std::includes(sets[j].begin(), sets[j].end(), sets[cur].begin(),
                                   sets[cur].end()) &&
                     sets[j] != sets[cur]))
                    sets[j].insert(d);
            // (other, v) becomes (other, d) with the original weight plus an
            // infinite-weight (d, v) hop
            if (at_head) {
                g.edges[i].head = d;
                g.add_edge(d, v, Weight::infinity());
            } else {
                g.edges[i].tail = d;
                g.add_edge(v, d, Weight::infinity());
            }
        }
        sets[cur].erase(v);  // v moves to the parent template
    }
    for (size_t i = 0; i < g.templates.size(); ++i)
        g.templates[i].members.assign(sets[i].begin(), sets[i].end());
    return Model(g);
}

namespace detail {

// Duplicates the subtree of template `t` (vertices, internal edges, sibling
// edges, descendant templates). Boundary edges are duplicated to connect the
// copy the same way. Returns the mapping old vertex -> copy vertex.
inline std::map<VertexId, VertexId> copy_template_subtree(PgtData& g,
                                                          std::vector<std::set<VertexId>>& sets,
                                                          std::set<VertexId> sub,  // by value: sets grows below
                                                          int suffix,
                                                          TemplateId t,
                                                          long long copy_param) {
    std::map<VertexId, VertexId> clone;
    for (VertexId x : sub) {
        VertexId c = g.add_vertex(fresh_name(g, g.vertices[x] + "'" + std::to_string(suffix)));
        clone[x] = c;
    }
    size_t n_templates = g.templates.size();
    // copy of t itself
    std::set<VertexId> tset;
    for (VertexId x : sub) tset.insert(clone[x]);
    g.templates.push_back({fresh_name(g, g.templates[t].name + "'" + std::to_string(suffix)),
                           {tset.begin(), tset.end()},
                           copy_param});
    sets.push_back(tset);
    // copies of strict descendants of t
    for (size_t i = 0; i < n_templates; ++i) {
        if ((int)i == t) continue;
        if (!std::includes(sets[t].begin(), sets[t].end(), sets[i].begin(), sets[i].end()))
            continue;
        std::set<VertexId> cset;
        for (VertexId x : sets[i]) cset.insert(clone.at(x));
        g.templates.push_back({fresh_name(g, g.templates[i].name + "'" + std::to_string(suffix)),
                               {cset.begin(), cset.end()},
                               g.templates[i].param});
        sets.push_back(cset);
    }
    // enclosing templates contain the copies too
    for (size_t i = 0; i < n_templates; ++i) {
        if ((int)i == t) continue;
        if (std::includes(sets[i].begin(), sets[i].end(), sets[t].begin(), sets[t].end()) &&
            sets[i] != sets[t])
            for (auto& [x, c] : clone) sets[i].insert(c);
    }
    size_t n_edges = g.edges.size();
    for (size_t i = 0; i < n_edges; ++i) {
        auto e = g.edges[i];
        bool tin = sub.count(e.tail), hin = sub.count(e.head);
        if (!tin && !hin) continue;
        e.tail = tin ? clone[e.tail] : e.tail;
        e.head = hin ? clone[e.head] : e.head;
        g.edges.push_back(e);
    }
    size_t n_sib = g.sibling_edges.size();
    for (size_t i = 0; i < n_sib; ++i) {
        auto e = g.sibling_edges[i];
        if (!sub.count(e.tail)) continue;  // sibling edges live inside one template
        e.tail = clone[e.tail];
        e.head = clone[e.head];
        g.sibling_edges.push_back(e);
    }
    return clone;
}

}  // namespace detail

/// Rewrites the model so the chosen instance of s belongs to the root, without
/// changing the instantiation up to isomorphism. Splits the topmost
/// parameter->1 template repeatedly (the split-off copy keeps parameter P-1
/// and gets `'k`-suffixed names), then dissolves the parameter-1 chain into
/// the root. Instance index 0 of each split template is the chosen one.
///
/// When `follow` is given, it names a vertex whose identity should be tracked
/// through the splits: `follow_stays` tells, per split (outermost first),
/// whether the followed vertex stays with the chosen parameter-1 copy or moves
/// to the split-off copy. The followed vertex's final id is written back.
inline Model upwards_partial_instantiation(const Model& m,
                                           VertexId s,
                                           VertexId* follow = nullptr,
                                           const std::vector<bool>* follow_stays = nullptr) {
    if (m.has_sibling_edges())
        throw std::invalid_argument(
            "upwards_partial_instantiation: sibling edges need the sibling-aware variant");

    PgtData g = m.data();
    std::vector<std::set<VertexId>> sets(g.templates.size());
    for (size_t i = 0; i < g.templates.size(); ++i)
        sets[i] = std::set<VertexId>(g.templates[i].members.begin(), g.templates[i].members.end());

    TemplateId root = m.tree().root;
    VertexId cur = s;
    VertexId tracked = follow ? *follow : -1;
    int split_no = 0;

    while (true) {
        // topmost template containing cur with parameter > 1
        int top = -1;
        for (size_t i = 0; i < sets.size(); ++i) {
            if ((int)i == root || !sets[i].count(cur) || g.templates[i].param <= 1) continue;
            if (top < 0 || sets[i].size() > sets[top].size()) top = (int)i;
        }
        if (top < 0) break;
        ++split_no;
        long long p = g.templates[top].param;
        auto clone = detail::copy_template_subtree(g, sets, sets[top], split_no, top, p - 1);
        g.templates[top].param = 1;
        bool tracked_moves = false;
        if (tracked >= 0 && clone.count(tracked)) {
            bool stays = true;
            if (follow_stays && split_no - 1 < (int)follow_stays->size())
                stays = (*follow_stays)[split_no - 1];
            if (!stays) {
                tracked = clone.at(tracked);
                tracked_moves = true;
            }
        }
        (void)tracked_moves;
    }

    // dissolve the parameter-1 templates on the chain from T(cur) to the root
    std::vector<size_t> drop;
    for (size_t i = 0; i < sets.size(); ++i)
        if ((int)i != root && sets[i].count(cur)) drop.push_back(i);
    std::sort(drop.rbegin(), drop.rend());
    for (size_t i : drop) {
        g.templates.erase(g.templates.begin() + i);
        sets.erase(sets.begin() + i);
    }
    for (size_t i = 0; i < g.templates.size(); ++i)
        g.templates[i].members.assign(sets[i].begin(), sets[i].end());
    if (follow) *follow = tracked;
    return Model(g);
}

/// Splits every template whose induced subgraph is disconnected into one
/// template per connected component (same parameter). Keeps height and the
/// instantiation unchanged up to relabeling. Returns the model plus a map
/// from new template index to the original template index.
inline std::pair<Model, std::vector<TemplateId>> split_disconnected_templates(const Model& m) {
    PgtData g = m.data();
    std::vector<TemplateId> origin(g.templates.size());
    for (size_t i = 0; i < origin.size(); ++i) origin[i] = (TemplateId)i;

    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < g.templates.size() && !changed; ++i) {
            std::set<VertexId> members(g.templates[i].members.begin(), g.templates[i].members.end());
            if (members.empty() || members.size() == g.vertices.size()) continue;
            std::map<VertexId, int> comp;
            int nc = 0;
            for (VertexId v : members) {
                if (comp.count(v)) continue;
                std::vector<VertexId> stack{v};
                comp[v] = nc;
                while (!stack.empty()) {
                    VertexId u = stack.back();
                    stack.pop_back();
                    auto visit = [&](VertexId a, VertexId b) {
                        if (a == u && members.count(b) && !comp.count(b)) {
                            comp[b] = nc;
                            stack.push_back(b);
                        }
                    };
                    for (const auto& e : g.edges) {
                        visit(e.tail, e.head);
                        visit(e.head, e.tail);
                    }
                    for (const auto& e : g.sibling_edges) {
                        visit(e.tail, e.head);
                        visit(e.head, e.tail);
                    }
                }
                ++nc;
            }
            if (nc <= 1) continue;
            auto base = g.templates[i];
            TemplateId orig = origin[i];
            g.templates.erase(g.templates.begin() + i);
            origin.erase(origin.begin() + i);
            for (int c = 0; c < nc; ++c) {
                TemplateData td;
                td.name = base.name + "/" + std::to_string(c);
                td.param = base.param;
                for (VertexId v : base.members)
                    if (comp[v] == c) td.members.push_back(v);
                g.templates.push_back(td);
                origin.push_back(orig);
            }
            changed = true;
        }
    }
    return {Model(std::move(g)), origin};
}

/// The parametric subgraph induced by a template and its boundary vertices.
/// Descendants of T keep their parameters; the new root has parameter 1. With
/// merge_boundary, all boundary vertices collapse into one root vertex.
inline Model induced_parametric_subgraph(const Model& m, TemplateId t, bool merge_boundary) {
    std::set<VertexId> keep;
    for (VertexId v = 0; v < m.vertex_count(); ++v)
        if (m.is_ancestor_or_self(t, m.template_of(v))) keep.insert(v);
    std::set<VertexId> boundary;
    if (t != m.tree().root) boundary = m.boundary_vertices(t);
    for (VertexId b : boundary) keep.insert(b);

    PgtData g;
    g.directed = m.directed();
    std::map<VertexId, VertexId> remap;
    VertexId merged = -1;
    if (merge_boundary && !boundary.empty()) {
        merged = g.add_vertex(detail::fresh_name(g, m.template_name(t) + "$b"));
    }
    for (VertexId v : keep) {
        if (merge_boundary && boundary.count(v)) {
            remap[v] = merged;
        } else {
            remap[v] = g.add_vertex(m.vertex_name(v));
        }
    }
    for (const auto& e : m.data().edges) {
        if (!keep.count(e.tail) || !keep.count(e.head)) continue;
        VertexId a = remap[e.tail], b = remap[e.head];
        if (a == b && merge_boundary) continue;  // boundary merge would create a plain self-loop
        g.add_edge(a, b, e.weight);
    }
    for (const auto& e : m.data().sibling_edges) {
        if (!keep.count(e.tail)) continue;
        g.add_sibling_edge(remap[e.tail], remap[e.head], e.delta, e.weight);
    }
    // new root over everything; T and its descendants keep their parameters
    std::vector<VertexId> all(g.vertices.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = (VertexId)i;
    g.templates.push_back({detail::fresh_name(g, m.template_name(t) + "$r"), all, 1});
    for (TemplateId i = 0; i < m.template_count(); ++i) {
        if (!m.is_ancestor_or_self(t, i)) continue;
        if (i == t && t == m.tree().root) continue;  // the new root already covers it
        std::vector<VertexId> members;
        for (VertexId v : m.data().templates[i].members)
            if (keep.count(v) && (!merge_boundary || !boundary.count(v))) members.push_back(remap[v]);
        if (members.empty()) continue;
        g.templates.push_back({m.template_name(i), members, m.param(i)});
    }
    return Model(g);
}

}  // namespace pgt
