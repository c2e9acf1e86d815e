#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pgt/graph.hpp"
#include "pgt/instantiate.hpp"
#include "pgt/model.hpp"

namespace pgt {

namespace canon {

// Colored multigraph view used by the canonical labeling. Edge labels encode
// weights (or 1 for unweighted use); loops become vertex attributes.
struct Input {
    int n = 0;
    bool directed = false;
    std::vector<int> color;                                // initial colors
    std::vector<std::vector<std::pair<int, int>>> out;     // (to, label)
    std::vector<std::vector<std::pair<int, int>>> in;      // (from, label), directed only
    std::vector<std::vector<int>> loops;                   // loop labels per vertex
};

inline Input make_input(const WeightedGraph& g, const std::vector<int>* init_colors, bool use_weights) {
    Input x;
    x.n = g.size();
    x.directed = g.directed;
    x.color.assign(x.n, 0);
    if (init_colors) x.color = *init_colors;
    x.out.resize(x.n);
    x.in.resize(x.n);
    x.loops.resize(x.n);

    std::map<std::string, int> label_ids;
    auto label_of = [&](const Weight& w) {
        if (!use_weights) return 0;
        std::string key = w.str();
        auto it = label_ids.find(key);
        if (it != label_ids.end()) return it->second;
        int id = (int)label_ids.size() + 1;
        label_ids[key] = id;
        return id;
    };
    // deterministic label ids: collect sorted first
    if (use_weights) {
        std::set<std::string> keys;
        for (const auto& e : g.edges) keys.insert(e.w.str());
        for (const auto& k : keys) label_ids[k] = (int)label_ids.size() + 1;
    }
    for (const auto& e : g.edges) {
        int lab = label_of(e.w);
        if (e.u == e.v) {
            x.loops[e.u].push_back(lab);
            continue;
        }
        x.out[e.u].emplace_back(e.v, lab);
        if (g.directed) {
            x.in[e.v].emplace_back(e.u, lab);
        } else {
            x.out[e.v].emplace_back(e.u, lab);
        }
    }
    for (auto& l : x.loops) std::sort(l.begin(), l.end());
    return x;
}

// Stable color refinement: a vertex key combines its color with the sorted
// multiset of (direction, label, neighbor color) plus loop labels.
inline void refine(const Input& x, std::vector<int>& color) {
    while (true) {
        std::vector<std::pair<std::vector<int>, int>> keys(x.n);
        for (int v = 0; v < x.n; ++v) {
            std::vector<int> key;
            key.push_back(color[v]);
            std::vector<std::pair<int, int>> neigh;
            for (auto [u, lab] : x.out[v]) neigh.emplace_back(lab * 2, color[u]);
            for (auto [u, lab] : x.in[v]) neigh.emplace_back(lab * 2 + 1, color[u]);
            std::sort(neigh.begin(), neigh.end());
            for (auto [a, b] : neigh) {
                key.push_back(a);
                key.push_back(b);
            }
            key.push_back(-1);
            for (int l : x.loops[v]) key.push_back(l);
            keys[v] = {std::move(key), v};
        }
        auto sorted = keys;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> next(x.n);
        int rank = -1;
        const std::vector<int>* prev = nullptr;
        for (auto& [key, v] : sorted) {
            if (!prev || key != *prev) ++rank;
            next[v] = rank;
            prev = &key;
        }
        if (next == color) return;
        color = std::move(next);
    }
}

inline std::string signature_if_discrete(const Input& x, const std::vector<int>& color) {
    std::vector<int> pos(x.n, -1);
    for (int v = 0; v < x.n; ++v) {
        if (pos[color[v]] != -1) return {};  // not discrete
        pos[color[v]] = v;
    }
    std::string sig = "n" + std::to_string(x.n) + ";";
    std::vector<int> init_by_rank(x.n);
    for (int v = 0; v < x.n; ++v) init_by_rank[color[v]] = v;
    for (int r = 0; r < x.n; ++r) {
        int v = init_by_rank[r];
        sig += "c" + std::to_string(x.color[v]);
        for (int l : x.loops[v]) sig += "l" + std::to_string(l);
        sig += ";";
    }
    std::vector<std::string> edge_strs;
    for (int v = 0; v < x.n; ++v)
        for (auto [u, lab] : x.out[v]) {
            if (!x.directed && color[v] > color[u]) continue;  // one direction suffices
            edge_strs.push_back(std::to_string(color[v]) + ">" + std::to_string(color[u]) + ":" +
                                std::to_string(lab));
        }
    std::sort(edge_strs.begin(), edge_strs.end());
    for (auto& s : edge_strs) sig += s + ",";
    return sig;
}

// Vertices whose transposition is an automorphism branch identically, so one
// representative per twin class suffices. Exact: equal neighborhoods (apart
// from each other) with equal labels make the swap an automorphism.
inline std::vector<int> twin_representatives(const Input& x, const std::vector<int>& cell) {
    auto row = [&](int v) {
        std::vector<std::pair<int, int>> r;
        for (auto [w, lab] : x.out[v]) r.emplace_back(w, lab * 2);
        for (auto [w, lab] : x.in[v]) r.emplace_back(w, lab * 2 + 1);
        std::sort(r.begin(), r.end());
        return r;
    };
    std::vector<std::vector<std::pair<int, int>>> rows;
    rows.reserve(cell.size());
    for (int v : cell) rows.push_back(row(v));
    auto strip = [](std::vector<std::pair<int, int>> r, int skip) {
        r.erase(std::remove_if(r.begin(), r.end(),
                               [&](const std::pair<int, int>& p) { return p.first == skip; }),
                r.end());
        return r;
    };
    std::vector<int> cls((int)cell.size());
    std::iota(cls.begin(), cls.end(), 0);
    std::function<int(int)> find = [&](int a) { return cls[a] == a ? a : cls[a] = find(cls[a]); };
    for (size_t i = 0; i < cell.size(); ++i) {
        for (size_t j = i + 1; j < cell.size(); ++j) {
            if (x.loops[cell[i]] != x.loops[cell[j]]) continue;
            auto ri = strip(rows[i], cell[j]);
            auto rj = strip(rows[j], cell[i]);
            // mutual edges must be symmetric for the swap to preserve them
            std::vector<int> iedges, jedges;
            for (auto [w, lab] : rows[i])
                if (w == cell[j]) iedges.push_back(lab);
            for (auto [w, lab] : rows[j])
                if (w == cell[i]) jedges.push_back(lab);
            std::sort(iedges.begin(), iedges.end());
            std::sort(jedges.begin(), jedges.end());
            if (ri == rj && iedges == jedges) cls[find((int)j)] = find((int)i);
        }
    }
    std::vector<int> reps;
    for (size_t i = 0; i < cell.size(); ++i)
        if (find((int)i) == (int)i) reps.push_back(cell[i]);
    return reps;
}

inline void search(const Input& x, std::vector<int> color, std::string& best, long long& nodes) {
    if (++nodes > 500000)
        throw std::runtime_error("canonical labeling budget exceeded");
    refine(x, color);
    std::string sig = signature_if_discrete(x, color);
    if (!sig.empty()) {
        if (best.empty() || sig < best) best = std::move(sig);
        return;
    }
    // first smallest non-singleton color class
    std::map<int, std::vector<int>> classes;
    for (int v = 0; v < x.n; ++v) classes[color[v]].push_back(v);
    const std::vector<int>* target = nullptr;
    for (auto& [c, vs] : classes) {
        if (vs.size() < 2) continue;
        if (!target || vs.size() < target->size()) target = &vs;
    }
    for (int v : twin_representatives(x, *target)) {
        auto branched = color;
        branched[v] = x.n + 1;  // individualize
        search(x, std::move(branched), best, nodes);
    }
}

inline std::string canonical_connected(const Input& x) {
    std::string best;
    long long nodes = 0;
    search(x, x.color, best, nodes);
    return best;
}

}  // namespace canon

/// Exact canonical form of a (multi)graph: equal strings iff the graphs are
/// isomorphic, respecting initial vertex colors and, optionally, edge
/// weights. Color refinement with individualization backtracking, applied per
/// connected component.
inline std::string canonical_form(const WeightedGraph& g,
                                  const std::vector<int>* init_colors = nullptr,
                                  bool use_weights = false) {
    canon::Input whole = canon::make_input(g, init_colors, use_weights);
    // split into connected components (ignoring direction)
    std::vector<int> comp(whole.n, -1);
    int nc = 0;
    for (int v = 0; v < whole.n; ++v) {
        if (comp[v] >= 0) continue;
        std::vector<int> stack{v};
        comp[v] = nc;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            auto visit = [&](int w) {
                if (comp[w] < 0) {
                    comp[w] = nc;
                    stack.push_back(w);
                }
            };
            for (auto [w, lab] : whole.out[u]) visit(w);
            for (auto [w, lab] : whole.in[u]) visit(w);
        }
        ++nc;
    }
    std::vector<std::string> parts(nc);
    for (int c = 0; c < nc; ++c) {
        canon::Input sub;
        sub.directed = whole.directed;
        std::vector<int> local(whole.n, -1);
        for (int v = 0; v < whole.n; ++v)
            if (comp[v] == c) {
                local[v] = sub.n++;
                sub.color.push_back(whole.color[v]);
                sub.loops.push_back(whole.loops[v]);
            }
        sub.out.resize(sub.n);
        sub.in.resize(sub.n);
        for (int v = 0; v < whole.n; ++v) {
            if (comp[v] != c) continue;
            for (auto [u, lab] : whole.out[v]) sub.out[local[v]].emplace_back(local[u], lab);
            for (auto [u, lab] : whole.in[v]) sub.in[local[v]].emplace_back(local[u], lab);
        }
        parts[c] = canon::canonical_connected(sub);
    }
    std::sort(parts.begin(), parts.end());
    std::string sig;
    for (auto& p : parts) sig += "[" + p + "]";
    return sig;
}

inline bool graph_isomorphic(const WeightedGraph& a, const WeightedGraph& b, bool use_weights = false) {
    if (a.size() != b.size() || a.edges.size() != b.edges.size() || a.directed != b.directed)
        return false;
    return canonical_form(a, nullptr, use_weights) == canonical_form(b, nullptr, use_weights);
}

/// Partition of graphs into groups of pairwise isomorphic members; returns
/// indices into the input list.
inline std::vector<std::vector<int>> group_isomorphic_components(const std::vector<WeightedGraph>& graphs) {
    std::map<std::string, std::vector<int>> by_form;
    for (int i = 0; i < (int)graphs.size(); ++i)
        by_form[canonical_form(graphs[i])].push_back(i);
    std::vector<std::vector<int>> groups;
    for (auto& [form, members] : by_form) groups.push_back(members);
    std::sort(groups.begin(), groups.end());
    return groups;
}

struct DiscoveryConfig {
    int beta_max = 2;
    long long min_param = 2;
    bool first_only = true;          // stop at the first nontrivial model
    int max_models = 64;             // cap for mode=all enumeration
    long long verify_budget = 200000;
};

namespace detail {

struct DiscoveryStats {
    int recursive_calls = 0;
    bool shrinkage_ok = true;  // every recursive call at most half the vertices
};

// Subgraph of g induced by `members`, names preserved.
inline WeightedGraph induced_subgraph(const WeightedGraph& g, const std::vector<int>& members) {
    WeightedGraph sub;
    sub.directed = g.directed;
    std::vector<int> local(g.size(), -1);
    for (int v : members) local[v] = sub.add_vertex(g.names[v]);
    for (const auto& e : g.edges)
        if (local[e.u] >= 0 && local[e.v] >= 0) sub.add_edge(local[e.u], local[e.v], e.w);
    return sub;
}

inline std::vector<std::vector<int>> components_without(const WeightedGraph& g,
                                                        const std::set<int>& removed) {
    std::vector<std::vector<int>> adj(g.size());
    for (const auto& e : g.edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<int> comp(g.size(), -1);
    std::vector<std::vector<int>> out;
    for (int v = 0; v < g.size(); ++v) {
        if (comp[v] >= 0 || removed.count(v)) continue;
        std::vector<int> stack{v}, members{v};
        comp[v] = (int)out.size();
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int w : adj[u]) {
                if (comp[w] >= 0 || removed.count(w)) continue;
                comp[w] = (int)out.size();
                stack.push_back(w);
                members.push_back(w);
            }
        }
        std::sort(members.begin(), members.end());
        out.push_back(members);
    }
    return out;
}

// Anchored key: the component plus the boundary set, boundary vertices pinned
// with distinct colors. Components with equal keys attach to B identically up
// to isomorphism.
inline std::string anchored_key(const WeightedGraph& g,
                                const std::vector<int>& comp,
                                const std::vector<int>& boundary) {
    WeightedGraph sub;
    sub.directed = g.directed;
    std::vector<int> local(g.size(), -1);
    std::vector<int> colors;
    for (size_t i = 0; i < boundary.size(); ++i) {
        local[boundary[i]] = sub.add_vertex(g.names[boundary[i]]);
        colors.push_back((int)i + 1);
    }
    for (int v : comp) {
        local[v] = sub.add_vertex(g.names[v]);
        colors.push_back(0);
    }
    std::set<int> comp_set(comp.begin(), comp.end());
    for (const auto& e : g.edges) {
        bool u_in = comp_set.count(e.u), v_in = comp_set.count(e.v);
        if (!u_in && !v_in) continue;  // boundary-boundary edges are shared context
        if (local[e.u] < 0 || local[e.v] < 0) continue;
        sub.add_edge(local[e.u], local[e.v], Weight(1));
    }
    return canonical_form(sub, &colors);
}

// Recursive discovery on a connected graph. `pinned` vertices must end up in
// the emitted model's root template. Emitted models use g's vertex names.
inline std::vector<PgtData> discover_rec(const WeightedGraph& g,
                                         const std::set<int>& pinned,
                                         const DiscoveryConfig& cfg,
                                         DiscoveryStats& stats,
                                         int* tmpl_counter,
                                         int depth);

inline PgtData trivial_model(const WeightedGraph& g, int* tmpl_counter) {
    PgtData m;
    m.directed = false;
    for (const auto& name : g.names) m.add_vertex(name);
    for (const auto& e : g.edges) m.add_edge(e.u, e.v, Weight(1));
    std::vector<VertexId> all(g.size());
    for (int i = 0; i < g.size(); ++i) all[i] = i;
    m.templates.push_back({"T" + std::to_string((*tmpl_counter)++), all, 1});
    return m;
}

// Splices a sub-model (over a component) into the parent model as a child
// template with the given parameter.
inline void splice_child(PgtData& model,
                         std::map<std::string, VertexId>& ids,
                         const PgtData& sub,
                         long long param) {
    std::vector<VertexId> remap(sub.vertices.size());
    for (size_t i = 0; i < sub.vertices.size(); ++i) {
        auto it = ids.find(sub.vertices[i]);
        VertexId v = it != ids.end() ? it->second : model.add_vertex(sub.vertices[i]);
        if (it == ids.end()) ids[sub.vertices[i]] = v;
        remap[i] = v;
    }
    for (const auto& e : sub.edges) model.add_edge(remap[e.tail], remap[e.head], e.weight);
    // sub's root (the full vertex set) becomes the child template with `param`
    size_t root_idx = 0;
    for (size_t i = 0; i < sub.templates.size(); ++i)
        if (sub.templates[i].members.size() == sub.vertices.size()) root_idx = i;
    for (size_t i = 0; i < sub.templates.size(); ++i) {
        TemplateData td;
        td.name = sub.templates[i].name;
        td.param = i == root_idx ? param : sub.templates[i].param;
        for (VertexId v : sub.templates[i].members) td.members.push_back(remap[v]);
        model.templates.push_back(std::move(td));
    }
}

inline std::vector<PgtData> discover_rec(const WeightedGraph& g,
                                         const std::set<int>& pinned,
                                         const DiscoveryConfig& cfg,
                                         DiscoveryStats& stats,
                                         int* tmpl_counter,
                                         int depth) {
    std::vector<PgtData> results;
    std::vector<PgtData> trivial;
    trivial.push_back(trivial_model(g, tmpl_counter));
    if (g.size() <= 1) return trivial;

    std::vector<int> vertices(g.size());
    for (int i = 0; i < g.size(); ++i) vertices[i] = i;

    // boundary sets in increasing size, lexicographic
    std::vector<std::vector<int>> boundary_sets;
    for (int size = 0; size <= std::min(cfg.beta_max, g.size() - 1); ++size) {
        std::vector<int> pick(size);
        std::function<void(int, int)> gen = [&](int start, int chosen) {
            if (chosen == size) {
                boundary_sets.push_back(pick);
                return;
            }
            for (int v = start; v < g.size(); ++v) {
                pick[chosen] = v;
                gen(v + 1, chosen + 1);
            }
        };
        gen(0, 0);
    }

    for (const auto& bvec : boundary_sets) {
        if (!cfg.first_only && (int)results.size() >= cfg.max_models) break;
        std::set<int> b(bvec.begin(), bvec.end());
        auto comps = components_without(g, b);
        if (comps.size() < 2 && !b.empty()) continue;  // removing B must split something

        std::map<std::string, std::vector<int>> groups;
        for (int c = 0; c < (int)comps.size(); ++c)
            groups[anchored_key(g, comps[c], bvec)].push_back(c);

        // eligible groups: enough isomorphic copies, no pinned vertex inside
        std::vector<std::vector<int>> eligible;
        std::set<int> root_vertices(b.begin(), b.end());
        for (auto& [key, members] : groups) {
            bool has_pinned = false;
            for (int c : members)
                for (int v : comps[c])
                    if (pinned.count(v)) has_pinned = true;
            if ((long long)members.size() >= cfg.min_param && !has_pinned && comps[members[0]].size() >= 1) {
                eligible.push_back(members);
            } else {
                for (int c : members)
                    for (int v : comps[c]) root_vertices.insert(v);
            }
        }
        if (eligible.empty()) continue;
        std::sort(eligible.begin(), eligible.end());

        // recurse into one representative per eligible group
        std::vector<std::vector<PgtData>> choices;
        bool bad = false;
        for (auto& members : eligible) {
            int rep = members[0];
            for (int c : members)
                if (comps[c] < comps[rep]) rep = c;
            if ((int)comps[rep].size() * 2 > g.size()) stats.shrinkage_ok = false;
            stats.recursive_calls++;
            WeightedGraph sub = induced_subgraph(g, comps[rep]);
            std::set<int> anchors;
            std::set<int> rep_set(comps[rep].begin(), comps[rep].end());
            for (const auto& e : g.edges) {
                if (rep_set.count(e.u) && b.count(e.v)) anchors.insert(sub.vertex(g.names[e.u]));
                if (rep_set.count(e.v) && b.count(e.u)) anchors.insert(sub.vertex(g.names[e.v]));
            }
            auto sub_models = discover_rec(sub, anchors, cfg, stats, tmpl_counter, depth + 1);
            if (sub_models.empty()) {
                bad = true;
                break;
            }
            if (cfg.first_only) sub_models.resize(1);
            choices.push_back(std::move(sub_models));
        }
        if (bad) continue;

        // assemble one model per combination of sub-model choices
        std::vector<int> pickidx(choices.size(), 0);
        while (true) {
            PgtData model;
            model.directed = false;
            std::map<std::string, VertexId> ids;
            for (int v : root_vertices) ids[g.names[v]] = model.add_vertex(g.names[v]);
            std::set<std::pair<int, int>> root_edge_seen;
            for (const auto& e : g.edges) {
                bool u_root = root_vertices.count(e.u), v_root = root_vertices.count(e.v);
                if (u_root && v_root)
                    model.add_edge(ids[g.names[e.u]], ids[g.names[e.v]], Weight(1));
            }
            for (size_t gi = 0; gi < eligible.size(); ++gi) {
                const auto& members = eligible[gi];
                int rep = members[0];
                for (int c : members)
                    if (comps[c] < comps[rep]) rep = c;
                const PgtData& sub = choices[gi][pickidx[gi]];
                splice_child(model, ids, sub, (long long)members.size());
                // attachment edges: representative component to B
                std::set<int> rep_set(comps[rep].begin(), comps[rep].end());
                for (const auto& e : g.edges) {
                    bool u_in = rep_set.count(e.u), v_in = rep_set.count(e.v);
                    if (u_in && b.count(e.v))
                        model.add_edge(ids.at(g.names[e.u]), ids.at(g.names[e.v]), Weight(1));
                    else if (v_in && b.count(e.u))
                        model.add_edge(ids.at(g.names[e.u]), ids.at(g.names[e.v]), Weight(1));
                }
            }
            // root template covers everything in the assembled model
            std::vector<VertexId> all(model.vertices.size());
            for (size_t i = 0; i < all.size(); ++i) all[i] = (VertexId)i;
            model.templates.push_back({"T" + std::to_string((*tmpl_counter)++), all, 1});

            results.push_back(std::move(model));
            if (cfg.first_only) return results;

            // next combination
            size_t level = 0;
            while (level < pickidx.size() && ++pickidx[level] >= (int)choices[level].size()) {
                pickidx[level] = 0;
                ++level;
            }
            if (level >= pickidx.size()) break;
            if ((int)results.size() >= cfg.max_models) break;
        }
    }
    if (results.empty()) return trivial;
    if (!cfg.first_only) {
        for (auto& t : trivial) results.push_back(std::move(t));
    }
    return results;
}

}  // namespace detail

/// Enumerates parametric graph templates whose instantiation is isomorphic to
/// the connected undirected target. Every emitted model is verified by a
/// round-trip instantiation before being returned; first_only stops at the
/// first nontrivial verified model (small boundary sets first).
inline std::vector<PgtData> discover(const WeightedGraph& target, const DiscoveryConfig& cfg) {
    if (target.directed) throw std::invalid_argument("discovery works on undirected graphs");
    int tmpl_counter = 0;
    detail::DiscoveryStats stats;
    DiscoveryConfig inner = cfg;
    inner.first_only = false;  // enumerate, filter by verification below
    inner.max_models = cfg.first_only ? 16 : cfg.max_models;

    auto candidates = detail::discover_rec(target, {}, inner, stats, &tmpl_counter, 0);
    std::string target_form = canonical_form(target);
    std::vector<PgtData> verified;
    std::set<std::string> seen_keys;
    PgtData trivial;
    bool have_trivial = false;
    for (auto& cand : candidates) {
        Model m{cand};
        bool nontrivial = m.template_count() >= 2;
        Instantiation inst = instantiate(m, cfg.verify_budget);
        WeightedGraph flat = inst.to_graph(m);
        if (canonical_form(flat) != target_form) continue;  // grouping was unsound here
        if (!nontrivial) {
            if (!have_trivial) {
                trivial = cand;
                have_trivial = true;
            }
            continue;
        }
        // dedupe structurally equal models
        std::vector<int> colors(cand.vertices.size());
        for (size_t v = 0; v < cand.vertices.size(); ++v) {
            auto chain = m.template_chain((VertexId)v);
            int key = 0;
            for (TemplateId t : chain) key = key * 131 + (int)m.param(t) + m.tree().depth[t] * 7;
            colors[v] = key & 0x7fffffff;
        }
        WeightedGraph tg;
        tg.directed = false;
        for (const auto& name : cand.vertices) tg.add_vertex(name);
        for (const auto& e : cand.edges) tg.add_edge(e.tail, e.head, Weight(1));
        std::string key = canonical_form(tg, &colors);
        if (!seen_keys.insert(key).second) continue;
        verified.push_back(cand);
        if (cfg.first_only) return verified;
    }
    if (verified.empty() && have_trivial) verified.push_back(trivial);
    return verified;
}

}  // namespace pgt
