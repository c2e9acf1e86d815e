#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "pgt/discovery.hpp"
#include "pgt/graph.hpp"
#include "pgt/instantiate.hpp"
#include "pgt/model.hpp"
#include "pgt/transforms.hpp"

namespace pgt {

/// Binary tree of bags over the target graph's vertices.
struct TreeDecomposition {
    std::vector<std::vector<int>> bags;
    std::vector<int> parent;  // -1 for the root
    std::vector<std::vector<int>> children;
    int root = -1;

    int width() const {
        int w = 0;
        for (const auto& b : bags) w = std::max(w, (int)b.size());
        return w - 1;
    }
};

inline ValidationReport validate_decomposition(const WeightedGraph& g, const TreeDecomposition& d) {
    ValidationReport report;
    auto violate = [&](std::string rule, std::string subject) {
        report.violations.push_back({std::move(rule), std::move(subject)});
    };
    int nodes = (int)d.bags.size();
    if (d.root < 0 || d.root >= nodes) violate("bad decomposition root", "");
    for (int i = 0; i < nodes; ++i)
        if ((int)d.children[i].size() > 2) violate("node with more than two children", std::to_string(i));
    // each vertex occurs in a nonempty connected subtree
    for (int v = 0; v < g.size(); ++v) {
        std::vector<int> holding;
        for (int i = 0; i < nodes; ++i)
            if (std::find(d.bags[i].begin(), d.bags[i].end(), v) != d.bags[i].end())
                holding.push_back(i);
        if (holding.empty()) {
            violate("vertex in no bag", g.names[v]);
            continue;
        }
        std::set<int> hold(holding.begin(), holding.end());
        std::set<int> seen{holding[0]};
        std::vector<int> stack{holding[0]};
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            std::vector<int> adj = d.children[i];
            if (d.parent[i] >= 0) adj.push_back(d.parent[i]);
            for (int j : adj)
                if (hold.count(j) && seen.insert(j).second) stack.push_back(j);
        }
        if (seen.size() != hold.size()) violate("vertex bags are not a connected subtree", g.names[v]);
    }
    for (const auto& e : g.edges) {
        bool covered = false;
        for (int i = 0; i < nodes && !covered; ++i) {
            bool has_u = std::find(d.bags[i].begin(), d.bags[i].end(), e.u) != d.bags[i].end();
            bool has_v = std::find(d.bags[i].begin(), d.bags[i].end(), e.v) != d.bags[i].end();
            covered = has_u && has_v;
        }
        if (!covered) violate("edge not covered by any bag", g.names[e.u] + "-" + g.names[e.v]);
    }
    return report;
}

namespace tddetail {

// Q(v, S): vertices outside S reachable from v through S, as a bitmask.
inline std::uint32_t reach_through(const std::vector<std::uint32_t>& adj, int v, std::uint32_t s) {
    std::uint32_t frontier = adj[v];
    std::uint32_t outside = frontier & ~s & ~(1u << v);
    std::uint32_t visited_in = 0;
    std::uint32_t in_s = frontier & s;
    while (in_s & ~visited_in) {
        std::uint32_t next = 0;
        std::uint32_t fresh = in_s & ~visited_in;
        visited_in |= fresh;
        for (int u = 0; u < 32; ++u)
            if ((fresh >> u) & 1) next |= adj[u];
        outside |= next & ~s & ~(1u << v);
        in_s |= next & s;
    }
    return outside;
}

}  // namespace tddetail

/// Valid binary tree decomposition: exact minimum width up to 20 vertices via
/// an elimination-order subset sweep, greedy min-fill beyond that.
inline TreeDecomposition tree_decomposition(const WeightedGraph& g, int width_hint = -1) {
    int n = g.size();
    if (n == 0) throw std::invalid_argument("tree decomposition of an empty graph");
    std::vector<std::uint32_t> adj(n, 0);
    for (const auto& e : g.edges) {
        if (e.u == e.v) continue;
        adj[e.u] |= 1u << e.v;
        adj[e.v] |= 1u << e.u;
    }

    std::vector<int> order;
    bool exact = n <= 20;
    if (width_hint >= 0) {
        // try the cheap route first; escalate only if it misses the hint
        exact = false;
    }
    auto greedy_order = [&]() {
        std::vector<std::uint32_t> fill = adj;
        std::vector<bool> gone(n, false);
        std::vector<int> out;
        for (int step = 0; step < n; ++step) {
            int best = -1;
            long long best_fill = -1;
            for (int v = 0; v < n; ++v) {
                if (gone[v]) continue;
                long long fills = 0;
                for (int a = 0; a < n; ++a) {
                    if (gone[a] || !((fill[v] >> a) & 1)) continue;
                    for (int b = a + 1; b < n; ++b)
                        if (!gone[b] && ((fill[v] >> b) & 1) && !((fill[a] >> b) & 1)) ++fills;
                }
                if (best < 0 || fills < best_fill) {
                    best = v;
                    best_fill = fills;
                }
            }
            out.push_back(best);
            gone[best] = true;
            for (int a = 0; a < n; ++a) {
                if (gone[a] || !((fill[best] >> a) & 1)) continue;
                for (int b = 0; b < n; ++b)
                    if (!gone[b] && b != a && ((fill[best] >> b) & 1)) fill[a] |= 1u << b;
            }
        }
        return out;
    };
    if (!exact) {
        order = greedy_order();
        if (width_hint >= 0 && n <= 20) {
            // check the greedy width against the hint
            int width = 0;
            for (int i = 0; i < n; ++i) {
                std::uint32_t s = 0;
                for (int j = 0; j < i; ++j) s |= 1u << order[j];
                width = std::max(width, __builtin_popcount(tddetail::reach_through(adj, order[i], s)));
            }
            if (width > width_hint) exact = true;
        }
    }
    if (exact) {
        // F(S) = best width for eliminating V \ S after S, computed backwards
        std::vector<std::int8_t> memo(1u << n, -1);
        std::vector<std::int8_t> choice(1u << n, -1);
        std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1;
        memo[all] = 0;
        std::vector<std::uint32_t> by_pop(1u << n);
        std::iota(by_pop.begin(), by_pop.end(), 0);
        std::sort(by_pop.begin(), by_pop.end(), [](std::uint32_t a, std::uint32_t b) {
            return __builtin_popcount(a) > __builtin_popcount(b);
        });
        for (std::uint32_t s : by_pop) {
            if (s == all) continue;
            int best = 127, pick = -1;
            for (int v = 0; v < n; ++v) {
                if ((s >> v) & 1) continue;
                int deg = __builtin_popcount(tddetail::reach_through(adj, v, s));
                int rest = memo[s | (1u << v)];
                int width = std::max(deg, rest);
                if (width < best) {
                    best = width;
                    pick = v;
                }
            }
            memo[s] = (std::int8_t)best;
            choice[s] = (std::int8_t)pick;
        }
        order.clear();
        std::uint32_t s = 0;
        while (s != all) {
            int v = choice[s];
            order.push_back(v);
            s |= 1u << v;
        }
    }

    // bags from the elimination order; bag(v) = {v} + later reachable-through
    TreeDecomposition d;
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[order[i]] = i;
    std::vector<int> bag_of(n);
    for (int i = 0; i < n; ++i) {
        std::uint32_t s = 0;
        for (int j = 0; j < i; ++j) s |= 1u << order[j];
        std::uint32_t q = tddetail::reach_through(adj, order[i], s);
        std::vector<int> bag{order[i]};
        for (int u = 0; u < n; ++u)
            if ((q >> u) & 1) bag.push_back(u);
        std::sort(bag.begin(), bag.end());
        bag_of[order[i]] = (int)d.bags.size();
        d.bags.push_back(bag);
        d.parent.push_back(-1);
    }
    // link each bag to the bag of its earliest-later neighbor
    for (int i = 0; i < n; ++i) {
        int v = order[i];
        int next = -1;
        for (int u : d.bags[bag_of[v]]) {
            if (u == v) continue;
            if (next < 0 || pos[u] < pos[next]) next = u;
        }
        if (next >= 0) d.parent[bag_of[v]] = bag_of[next];
    }
    d.children.assign(d.bags.size(), {});
    for (int i = 0; i < (int)d.bags.size(); ++i) {
        if (d.parent[i] < 0)
            d.root = i;
        else
            d.children[d.parent[i]].push_back(i);
    }
    // binarize: nodes with more than two children get duplicated
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < (int)d.bags.size(); ++i) {
            if ((int)d.children[i].size() <= 2) continue;
            int copy = (int)d.bags.size();
            d.bags.push_back(d.bags[i]);
            d.parent.push_back(i);
            d.children.push_back({});
            while (d.children[i].size() > 1) {
                int c = d.children[i].back();
                d.children[i].pop_back();
                d.parent[c] = copy;
                d.children[copy].push_back(c);
            }
            d.children[i].push_back(copy);
            changed = true;
        }
    }
    return d;
}

class state_budget_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace isodetail {

// Active-instance forest with per-instance matched masks and per-child-
// template closed counters. Node 0 is the root instance.
struct InstNode {
    TemplateId tmpl;
    int parent;
    std::uint32_t used = 0;
    std::vector<std::uint16_t> closed;  // aligned with tree().children[tmpl]
};

struct State {
    std::vector<InstNode> nodes;
    // bag vertex (target id) -> (node index, owned-vertex index)
    std::map<int, std::pair<int, int>> phi;
};

struct Context {
    const Model& m;
    const WeightedGraph& target;
    std::vector<std::vector<VertexId>> owned;          // per template
    std::vector<std::map<VertexId, int>> owned_index;  // vertex -> position
    std::map<std::pair<int, int>, int> target_mult;    // undirected multiplicity
    // model edge multiplicity between owned vertices (any orientation)
    std::map<std::pair<VertexId, VertexId>, int> model_mult;
    long long cap;

    Context(const Model& mm, const WeightedGraph& tg, long long state_cap)
        : m(mm), target(tg), cap(state_cap) {
        owned.resize(m.template_count());
        owned_index.resize(m.template_count());
        for (TemplateId t = 0; t < m.template_count(); ++t) {
            owned[t] = m.owned_vertices(t);
            if (owned[t].size() > 31)
                throw std::invalid_argument("templates with more than 31 owned vertices");
            for (int i = 0; i < (int)owned[t].size(); ++i) owned_index[t][owned[t][i]] = i;
        }
        for (const auto& e : target.edges) {
            auto key = std::minmax(e.u, e.v);
            target_mult[{key.first, key.second}]++;
        }
        for (const auto& e : m.data().edges) {
            auto key = std::minmax(e.tail, e.head);
            model_mult[{key.first, key.second}]++;
        }
    }

    int tmult(int u, int v) const {
        auto key = std::minmax(u, v);
        auto it = target_mult.find({key.first, key.second});
        return it == target_mult.end() ? 0 : it->second;
    }
    int mmult(VertexId a, VertexId b) const {
        auto key = std::minmax(a, b);
        auto it = model_mult.find({key.first, key.second});
        return it == model_mult.end() ? 0 : it->second;
    }
    int child_slot(TemplateId parent, TemplateId child) const {
        const auto& ch = m.tree().children[parent];
        for (int i = 0; i < (int)ch.size(); ++i)
            if (ch[i] == child) return i;
        return -1;
    }
};

inline std::string serialize(const State& s) {
    // canonical form: children sorted by their full subtree signature, with
    // phi references folded into the per-node text
    std::vector<std::vector<int>> kids(s.nodes.size());
    for (int i = 1; i < (int)s.nodes.size(); ++i) kids[s.nodes[i].parent].push_back(i);
    std::vector<std::vector<std::pair<int, int>>> phi_at(s.nodes.size());
    for (const auto& [v, img] : s.phi) phi_at[img.first].emplace_back(v, img.second);
    std::function<std::string(int)> sig = [&](int i) {
        std::string out = "(" + std::to_string(s.nodes[i].tmpl) + ":" +
                          std::to_string(s.nodes[i].used) + ":";
        for (auto c : s.nodes[i].closed) out += std::to_string(c) + ",";
        out += "|";
        for (auto [v, idx] : phi_at[i]) out += std::to_string(v) + ">" + std::to_string(idx) + ";";
        std::vector<std::string> subs;
        for (int c : kids[i]) subs.push_back(sig(c));
        std::sort(subs.begin(), subs.end());
        for (auto& x : subs) out += x;
        return out + ")";
    };
    return sig(0);
}

using StateSet = std::map<std::string, State>;

inline void insert_state(const Context& ctx, StateSet& set, State s) {
    if ((long long)set.size() >= ctx.cap)
        throw state_budget_error("instance isomorphism state budget exceeded");
    std::string key = serialize(s);
    set.emplace(std::move(key), std::move(s));
}

// active-support per node: number of phi images in the node's subtree
inline std::vector<int> subtree_support(const State& s) {
    std::vector<int> support(s.nodes.size(), 0);
    for (const auto& [v, img] : s.phi) {
        for (int i = img.first; i >= 0; i = i == 0 ? -1 : s.nodes[i].parent) support[i]++;
    }
    return support;
}

// Folds every unsupported non-root node: it must be fully matched and its
// child templates closed exactly P times. Returns false when the state dies.
inline bool sweep(const Context& ctx, State& s) {
    while (true) {
        auto support = subtree_support(s);
        int victim = -1;
        for (int i = 1; i < (int)s.nodes.size(); ++i) {
            if (support[i] != 0) continue;
            bool has_child = false;
            for (int j = 1; j < (int)s.nodes.size(); ++j) has_child |= s.nodes[j].parent == i;
            if (!has_child) {
                victim = i;
                break;
            }
        }
        if (victim < 0) return true;
        const InstNode& node = s.nodes[victim];
        std::uint32_t full = ctx.owned[node.tmpl].empty()
                                 ? 0
                                 : (std::uint32_t)((1u << ctx.owned[node.tmpl].size()) - 1);
        if (node.used != full) return false;
        const auto& child_templates = ctx.m.tree().children[node.tmpl];
        for (int i = 0; i < (int)child_templates.size(); ++i)
            if ((long long)node.closed[i] != ctx.m.param(child_templates[i])) return false;
        // fold into the parent's counter
        int parent = node.parent;
        int slot = ctx.child_slot(s.nodes[parent].tmpl, node.tmpl);
        long long p = ctx.m.param(node.tmpl);
        if (s.nodes[parent].closed[slot] <= p) s.nodes[parent].closed[slot]++;
        // remove the node, remap indices
        std::vector<int> remap(s.nodes.size());
        std::vector<InstNode> next;
        for (int i = 0; i < (int)s.nodes.size(); ++i) {
            if (i == victim) continue;
            remap[i] = (int)next.size();
            next.push_back(s.nodes[i]);
        }
        for (auto& n : next)
            if (n.parent >= 0) n.parent = remap[n.parent];
        for (auto& [v, img] : s.phi) img.first = remap[img.first];
        s.nodes = std::move(next);
    }
}

// Places target vertex u onto (node, owned index); extends the forest with a
// fresh instance chain when `chain` is nonempty (templates top-down under
// `node`). Returns false if edge multiplicities disagree with the bag.
inline bool place(const Context& ctx, State& s, int u, int node, int owned_idx,
                  const std::vector<TemplateId>& chain) {
    int host = node;
    for (TemplateId t : chain) {
        // capacity: active siblings plus closed ones must stay under P
        int slot = ctx.child_slot(s.nodes[host].tmpl, t);
        int active = 0;
        for (int j = 1; j < (int)s.nodes.size(); ++j)
            active += s.nodes[j].parent == host && s.nodes[j].tmpl == t;
        if (active + (long long)s.nodes[host].closed[slot] + 1 > ctx.m.param(t)) return false;
        InstNode fresh;
        fresh.tmpl = t;
        fresh.parent = host;
        fresh.closed.assign(ctx.m.tree().children[t].size(), 0);
        s.nodes.push_back(fresh);
        host = (int)s.nodes.size() - 1;
    }
    VertexId z = ctx.owned[s.nodes[host].tmpl][owned_idx];
    if ((s.nodes[host].used >> owned_idx) & 1) return false;
    // edge multiplicities against every vertex already in the bag
    for (const auto& [w, img] : s.phi) {
        VertexId zw = ctx.owned[s.nodes[img.first].tmpl][img.second];
        int expected = 0;
        if (img.first == host) {
            expected = ctx.mmult(z, zw);
        } else if (s.nodes[img.first].parent == host || s.nodes[host].parent == img.first) {
            expected = ctx.mmult(z, zw);
        }
        if (ctx.tmult(u, w) != expected) return false;
    }
    s.nodes[host].used |= 1u << owned_idx;
    s.phi[u] = {host, owned_idx};
    return true;
}

// All ways to introduce target vertex u into the state.
inline void introduce(const Context& ctx, const State& base, int u, StateSet& out) {
    int nn = (int)base.nodes.size();
    for (int node = 0; node < nn; ++node) {
        TemplateId t = base.nodes[node].tmpl;
        // directly into an existing instance
        for (int idx = 0; idx < (int)ctx.owned[t].size(); ++idx) {
            if ((base.nodes[node].used >> idx) & 1) continue;
            State s = base;
            if (place(ctx, s, u, node, idx, {})) insert_state(ctx, out, std::move(s));
        }
        // into a fresh chain of descendant instances
        std::vector<TemplateId> chain;
        std::function<void(TemplateId)> descend = [&](TemplateId at) {
            for (TemplateId c : ctx.m.tree().children[at]) {
                chain.push_back(c);
                for (int idx = 0; idx < (int)ctx.owned[c].size(); ++idx) {
                    State s = base;
                    if (place(ctx, s, u, node, idx, chain)) insert_state(ctx, out, std::move(s));
                }
                descend(c);
                chain.pop_back();
            }
        };
        descend(t);
    }
}

inline bool forget(const Context& ctx, State& s, const std::vector<int>& drop) {
    for (int v : drop) s.phi.erase(v);
    return sweep(ctx, s);
}

// Identification of instances across two child states through shared bag
// vertices, then union of the forests.
inline bool join(const Context& ctx, const State& l, const State& r, State& out) {
    std::map<int, int> r_to_l;  // node index in r -> node index in l
    r_to_l[0] = 0;
    std::map<int, int> l_claimed;
    l_claimed[0] = 0;
    // seed identification from shared phi vertices
    for (const auto& [v, ri] : r.phi) {
        auto it = l.phi.find(v);
        if (it == l.phi.end()) continue;
        if (it->second.second != ri.second) return false;  // different template vertex
        int ln = it->second.first, rn = ri.first;
        while (true) {
            auto have = r_to_l.find(rn);
            if (have != r_to_l.end()) {
                if (have->second != ln) return false;
                break;
            }
            if (l.nodes[ln].tmpl != r.nodes[rn].tmpl) return false;
            auto claimed = l_claimed.find(ln);
            if (claimed != l_claimed.end() && claimed->second != rn) return false;
            r_to_l[rn] = ln;
            l_claimed[ln] = rn;
            ln = l.nodes[ln].parent;
            rn = r.nodes[rn].parent;
            if (ln < 0 || rn < 0) {
                if (ln != rn) return false;
                break;
            }
        }
    }

    out = l;
    // shared-image bits per identified left node
    std::map<int, std::uint32_t> shared_bits;
    for (const auto& [v, ri] : r.phi) {
        auto it = l.phi.find(v);
        if (it != l.phi.end()) shared_bits[it->second.first] |= 1u << it->second.second;
    }
    // merge identified nodes
    for (const auto& [rn, ln] : r_to_l) {
        std::uint32_t both = l.nodes[ln].used & r.nodes[rn].used;
        if (both != shared_bits[ln]) return false;  // a vertex matched on both sides
        out.nodes[ln].used = l.nodes[ln].used | r.nodes[rn].used;
        for (size_t i = 0; i < out.nodes[ln].closed.size(); ++i) {
            long long sum = (long long)l.nodes[ln].closed[i] + r.nodes[rn].closed[i];
            TemplateId ct = ctx.m.tree().children[l.nodes[ln].tmpl][i];
            long long p = ctx.m.param(ct);
            out.nodes[ln].closed[i] = (std::uint16_t)std::min(sum, p + 1);
        }
    }
    // append unidentified right nodes
    std::map<int, int> r_new;
    for (int rn = 0; rn < (int)r.nodes.size(); ++rn) {
        if (r_to_l.count(rn)) continue;
        InstNode copy = r.nodes[rn];
        r_new[rn] = (int)out.nodes.size();
        out.nodes.push_back(copy);
    }
    for (auto& [rn, ni] : r_new) {
        int rp = r.nodes[rn].parent;
        out.nodes[ni].parent = r_to_l.count(rp) ? r_to_l[rp] : r_new.at(rp);
    }
    for (const auto& [v, ri] : r.phi) {
        if (l.phi.count(v)) continue;
        int node = r_to_l.count(ri.first) ? r_to_l[ri.first] : r_new.at(ri.first);
        out.phi[v] = {node, ri.second};
    }
    // capacity: active plus closed children per template under each node
    for (int i = 0; i < (int)out.nodes.size(); ++i) {
        const auto& cts = ctx.m.tree().children[out.nodes[i].tmpl];
        for (int slot = 0; slot < (int)cts.size(); ++slot) {
            int active = 0;
            for (int j = 1; j < (int)out.nodes.size(); ++j)
                active += out.nodes[j].parent == i && out.nodes[j].tmpl == cts[slot];
            if (active + (long long)out.nodes[i].closed[slot] > ctx.m.param(cts[slot])) return false;
        }
    }
    // cross-side edge consistency for bag pairs that never met in one state:
    // vertices of the parent bag placed in unrelated instances must not be
    // adjacent in the target
    for (const auto& [v, vi] : out.phi) {
        for (const auto& [w, wi] : out.phi) {
            if (v >= w) continue;
            bool related = vi.first == wi.first || out.nodes[vi.first].parent == wi.first ||
                           out.nodes[wi.first].parent == vi.first;
            VertexId zv = ctx.owned[out.nodes[vi.first].tmpl][vi.second];
            VertexId zw = ctx.owned[out.nodes[wi.first].tmpl][wi.second];
            int expected = related ? ctx.mmult(zv, zw) : 0;
            if (ctx.tmult(v, w) != expected) return false;
        }
    }
    return true;
}

}  // namespace isodetail

/// Decides target == instantiation(model) up to isomorphism by dynamic
/// programming over the tree decomposition: per-bag partial matches into an
/// active-instance forest, with exact per-template instance counting.
inline bool instance_iso_decide(const Model& m_in, const WeightedGraph& target,
                                const TreeDecomposition& dec, long long state_cap = 200000) {
    if (m_in.directed() != target.directed)
        throw std::invalid_argument("model and target directedness differ");
    if (m_in.has_sibling_edges())
        throw std::invalid_argument("instance isomorphism does not support sibling edges");
    auto dv = validate_decomposition(target, dec);
    if (!dv.ok()) throw std::invalid_argument("invalid tree decomposition\n" + dv.str());
    // instances must induce connected subgraphs for the identification rule
    Model m = split_disconnected_templates(m_in).first;

    // size prechecks: vertex and edge instance counts must agree
    long long n_inst = 0;
    for (VertexId v = 0; v < m.vertex_count(); ++v) n_inst += m.instance_count(v);
    if (n_inst != (long long)target.size()) return false;
    long long m_inst = 0;
    for (const auto& e : m.data().edges) {
        TemplateId deep = m.tree().depth[m.template_of(e.tail)] >= m.tree().depth[m.template_of(e.head)]
                              ? m.template_of(e.tail)
                              : m.template_of(e.head);
        m_inst += m.ancestor_param_product(deep);
    }
    if (m_inst != (long long)target.edges.size()) return false;
    if (target.size() == 1) return true;

    isodetail::Context ctx(m, target, state_cap);

    // post-order over the decomposition
    std::vector<int> post;
    {
        std::vector<std::pair<int, bool>> stack{{dec.root, false}};
        while (!stack.empty()) {
            auto [i, expanded] = stack.back();
            stack.pop_back();
            if (expanded) {
                post.push_back(i);
                continue;
            }
            stack.push_back({i, true});
            for (int c : dec.children[i]) stack.push_back({c, false});
        }
    }

    std::vector<isodetail::StateSet> table(dec.bags.size());
    auto root_tmpl = m.tree().root;

    for (int node : post) {
        isodetail::StateSet states;
        const auto& kids = dec.children[node];
        if (kids.empty()) {
            isodetail::State empty;
            isodetail::InstNode root;
            root.tmpl = root_tmpl;
            root.parent = -1;
            root.closed.assign(m.tree().children[root_tmpl].size(), 0);
            empty.nodes.push_back(root);
            isodetail::StateSet cur;
            cur.emplace(isodetail::serialize(empty), empty);
            for (int v : dec.bags[node]) {
                isodetail::StateSet next;
                for (auto& [key, s] : cur) isodetail::introduce(ctx, s, v, next);
                cur = std::move(next);
            }
            states = std::move(cur);
        } else {
            // merge child states (one or two children)
            isodetail::StateSet merged;
            if (kids.size() == 1) {
                merged = std::move(table[kids[0]]);
            } else {
                for (auto& [kl, sl] : table[kids[0]]) {
                    for (auto& [kr, sr] : table[kids[1]]) {
                        isodetail::State joined;
                        if (isodetail::join(ctx, sl, sr, joined))
                            isodetail::insert_state(ctx, merged, std::move(joined));
                    }
                }
                table[kids[0]].clear();
                table[kids[1]].clear();
            }
            // forget vertices leaving the bag, then introduce new ones
            std::set<int> here(dec.bags[node].begin(), dec.bags[node].end());
            for (auto& [key, s] : merged) {
                std::vector<int> drop;
                for (const auto& [v, img] : s.phi)
                    if (!here.count(v)) drop.push_back(v);
                isodetail::State cur = s;
                if (!isodetail::forget(ctx, cur, drop)) continue;
                std::vector<int> fresh;
                for (int v : dec.bags[node])
                    if (!cur.phi.count(v)) fresh.push_back(v);
                isodetail::StateSet frontier;
                frontier.emplace(isodetail::serialize(cur), cur);
                for (int v : fresh) {
                    isodetail::StateSet next;
                    for (auto& [k2, s2] : frontier) isodetail::introduce(ctx, s2, v, next);
                    frontier = std::move(next);
                }
                for (auto& [k2, s2] : frontier) isodetail::insert_state(ctx, states, std::move(s2));
            }
            if (kids.size() == 1) table[kids[0]].clear();
        }
        table[node] = std::move(states);
    }

    // final acceptance: forget everything; the root instance must be complete
    for (auto& [key, s] : table[dec.root]) {
        isodetail::State fin = s;
        std::vector<int> drop;
        for (const auto& [v, img] : fin.phi) drop.push_back(v);
        if (!isodetail::forget(ctx, fin, drop)) continue;
        if (fin.nodes.size() != 1) continue;
        std::uint32_t full = ctx.owned[root_tmpl].empty()
                                 ? 0
                                 : (std::uint32_t)((1u << ctx.owned[root_tmpl].size()) - 1);
        if (fin.nodes[0].used != full) continue;
        bool complete = true;
        const auto& cts = m.tree().children[root_tmpl];
        for (int i = 0; i < (int)cts.size(); ++i)
            if ((long long)fin.nodes[0].closed[i] != m.param(cts[i])) complete = false;
        if (complete) return true;
    }
    return false;
}

/// Reference route: instantiate, then compare canonical forms.
inline bool naive_instance_iso(const Model& m, const WeightedGraph& target,
                               long long budget = kDefaultInstantiationBudget) {
    Instantiation inst = instantiate(m, budget);
    WeightedGraph flat = inst.to_graph(m);
    if (flat.size() != target.size() || flat.edges.size() != target.edges.size()) return false;
    return canonical_form(flat) == canonical_form(target);
}

}  // namespace pgt
