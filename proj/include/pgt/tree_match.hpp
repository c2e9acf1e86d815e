#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pgt/instantiate.hpp"
#include "pgt/model.hpp"

namespace pgt {

/// Rooted tree pattern with the child-attachment order preserved; the DP
/// always splits off the last-attached child of a subtree root.
struct TreePattern {
    std::vector<std::string> names;
    std::vector<int> parent;                 // -1 for the root
    std::vector<std::vector<int>> children;  // in attachment order
    int root = -1;

    static TreePattern from_parents(std::vector<std::string> names, std::vector<int> parent) {
        TreePattern p;
        p.names = std::move(names);
        p.parent = std::move(parent);
        p.children.assign(p.parent.size(), {});
        for (int i = 0; i < (int)p.parent.size(); ++i) {
            if (p.parent[i] < 0)
                p.root = i;
            else
                p.children[p.parent[i]].push_back(i);
        }
        if (p.root < 0) throw std::invalid_argument("pattern has no root");
        return p;
    }

    int size() const { return (int)parent.size(); }
};

/// Assignment of a template-tree level to every pattern vertex; adjacent
/// pattern vertices differ by -1, 0, or +1 and levels stay within [0, h).
struct LevelMapping {
    std::vector<int> level;
};

/// All valid level mappings; at most h * 3^(k-1) of them.
inline std::vector<LevelMapping> enumerate_level_mappings(const TreePattern& pattern, int h) {
    std::vector<LevelMapping> out;
    std::vector<int> level(pattern.size(), -1);
    // depth-first over the pattern, children after parents
    std::vector<int> order;
    std::vector<int> stack{pattern.root};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (auto it = pattern.children[v].rbegin(); it != pattern.children[v].rend(); ++it)
            stack.push_back(*it);
    }
    std::vector<size_t> pos(order.size());
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == order.size()) {
            out.push_back({level});
            return;
        }
        int v = order[i];
        if (v == pattern.root) {
            for (int l = 0; l < h; ++l) {
                level[v] = l;
                rec(i + 1);
            }
        } else {
            int base = level[pattern.parent[v]];
            for (int d = -1; d <= 1; ++d) {
                int l = base + d;
                if (l < 0 || l >= h) continue;
                level[v] = l;
                rec(i + 1);
            }
        }
        level[v] = -1;
    };
    rec(0);
    return out;
}

/// Random coloring for one level mapping: k colors are partitioned into
/// palettes per level class (levels taken mod k+1), sized by the number of
/// pattern vertices in the class; template-graph vertices draw uniformly from
/// their depth's palette, or get no color when the palette is empty.
struct Coloring {
    int k = 0;
    std::vector<int> color;                    // per template vertex, -1 = unmatchable
    std::vector<std::uint64_t> palette_mask;   // per level class in [0, k+1)
    std::vector<long long> group_param;        // per template: its parameter (group tag)
};

inline Coloring color_code(const Model& m, const TreePattern& pattern, const LevelMapping& mapping,
                           std::uint64_t seed) {
    int k = pattern.size();
    if (k > 62) throw std::invalid_argument("patterns above 62 vertices are unsupported");
    Coloring c;
    c.k = k;
    int classes = k + 1;
    std::vector<int> class_size(classes, 0);
    for (int v = 0; v < k; ++v) class_size[mapping.level[v] % classes]++;
    c.palette_mask.assign(classes, 0);
    std::vector<std::vector<int>> palette(classes);
    int next_color = 0;
    for (int cls = 0; cls < classes; ++cls)
        for (int i = 0; i < class_size[cls]; ++i) {
            palette[cls].push_back(next_color);
            c.palette_mask[cls] |= 1ull << next_color;
            ++next_color;
        }
    std::mt19937_64 rng(seed);
    c.color.assign(m.vertex_count(), -1);
    for (VertexId v = 0; v < m.vertex_count(); ++v) {
        int cls = m.tree().depth[m.template_of(v)] % classes;
        if (palette[cls].empty()) continue;
        c.color[v] = palette[cls][rng() % palette[cls].size()];
    }
    c.group_param.assign(m.template_count(), 1);
    for (TemplateId t = 0; t < m.template_count(); ++t) c.group_param[t] = m.param(t);
    return c;
}

/// DP table of spine color sets C(sub, x) with per-color usage counters and
/// derivation back-pointers for witness reconstruction.
class ColorTable {
public:
    struct Entry {
        std::uint64_t mask;
        std::vector<std::uint8_t> counts;
        // derivation: -1,-1 for base entries, otherwise indices into the
        // left/right tables plus the template edge endpoint y
        struct Derivation {
            int left = -1, right = -1;
            VertexId x = -1, y = -1;
            bool strip = false;
            bool early_sink = false;
        };
        std::vector<Derivation> derivations;
    };

    // subproblem = (pattern node u, number of attached children j)
    struct SubId {
        int node;
        int prefix;
        bool operator<(const SubId& o) const {
            return node != o.node ? node < o.node : prefix < o.prefix;
        }
    };

    std::map<SubId, std::vector<std::vector<Entry>>> table;  // per sub, per vertex

    std::vector<Entry>& entries(SubId sub, VertexId x) { return table.at(sub)[x]; }
    const std::vector<Entry>& entries(SubId sub, VertexId x) const { return table.at(sub)[x]; }
};

namespace treedetail {

inline int add_entry(std::vector<ColorTable::Entry>& list, std::uint64_t mask,
                     std::vector<std::uint8_t> counts, ColorTable::Entry::Derivation d,
                     int derivation_cap = 6) {
    for (int i = 0; i < (int)list.size(); ++i) {
        if (list[i].mask == mask && list[i].counts == counts) {
            if ((int)list[i].derivations.size() < derivation_cap) list[i].derivations.push_back(d);
            return i;
        }
    }
    list.push_back({mask, std::move(counts), {d}});
    return (int)list.size() - 1;
}

}  // namespace treedetail

struct TreeMatchOptions {
    VertexId sink = -1;          // disjoint-path variant: leaf must reach the sink
    bool early_sink = false;     // at-most variant: chains may stop at any depth
};

/// One deterministic pattern-matching pass over a fixed coloring. Combines
/// subtree color sets along template edges; a descent into a child template
/// strips that level's colors from the spine and charges the per-color usage
/// against the child template's parameter.
inline ColorTable match_tree_once(const Model& m, const TreePattern& pattern,
                                  const LevelMapping& mapping, const Coloring& coloring,
                                  const TreeMatchOptions& opts = {}) {
    if (!m.directed()) throw std::invalid_argument("tree matching works on directed models");
    if (m.has_sibling_edges())
        throw std::invalid_argument("tree matching does not support sibling edges");
    if (!is_template_acyclic(m))
        throw std::invalid_argument("tree matching requires a template-acyclic model");

    int k = pattern.size();
    int classes = k + 1;
    int n = m.vertex_count();
    const auto& tree = m.tree();

    ColorTable ct;
    // evaluation order: children's full subtrees before their parent prefixes
    std::vector<int> post;
    {
        std::vector<std::pair<int, bool>> stack{{pattern.root, false}};
        while (!stack.empty()) {
            auto [v, expanded] = stack.back();
            stack.pop_back();
            if (expanded) {
                post.push_back(v);
                continue;
            }
            stack.push_back({v, true});
            for (int c : pattern.children[v]) stack.push_back({c, false});
        }
    }

    // adjacency by template edge, multi-edges collapse for matching purposes
    std::vector<std::vector<VertexId>> out_neighbors(n);
    for (const auto& e : m.data().edges) out_neighbors[e.tail].push_back(e.head);
    for (auto& a : out_neighbors) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    bool has_sink = opts.sink >= 0;

    for (int u : post) {
        // base: the bare node
        std::vector<std::vector<ColorTable::Entry>> base(n);
        bool is_leaf = pattern.children[u].empty();
        for (VertexId x = 0; x < n; ++x) {
            if (coloring.color[x] < 0) continue;
            if (tree.depth[m.template_of(x)] != mapping.level[u]) continue;
            if (has_sink && is_leaf) {
                // leaf of a path bundle: only usable next to the sink
                bool ok = std::binary_search(out_neighbors[x].begin(), out_neighbors[x].end(),
                                             opts.sink);
                if (!ok) continue;
            }
            std::vector<std::uint8_t> counts(k, 0);
            counts[coloring.color[x]] = 1;
            ColorTable::Entry::Derivation d;
            d.x = x;
            treedetail::add_entry(base[x], 1ull << coloring.color[x], std::move(counts), d);
        }
        ct.table[{u, 0}] = std::move(base);

        // attach children left to right
        for (int j = 1; j <= (int)pattern.children[u].size(); ++j) {
            int child = pattern.children[u][j - 1];
            ColorTable::SubId left_id{u, j - 1};
            ColorTable::SubId right_id{child, (int)pattern.children[child].size()};
            const auto& left = ct.table.at(left_id);
            const auto& right = ct.table.at(right_id);
            std::vector<std::vector<ColorTable::Entry>> next(n);

            int lu = mapping.level[u], lc = mapping.level[child];
            std::uint64_t c_low = lc == lu + 1 ? coloring.palette_mask[(lu + 1) % classes] : 0;

            for (VertexId x = 0; x < n; ++x) {
                if (left[x].empty()) continue;
                for (VertexId y : out_neighbors[x]) {
                    if (right[y].empty()) continue;
                    TemplateId tx = m.template_of(x), ty = m.template_of(y);
                    bool case1 = ty != tx && tree.parent[ty] == tx;
                    bool case2 = tx == ty || (tx != ty && tree.parent[tx] == ty);
                    // the template relation must agree with the level delta
                    if (case1 && lc != lu + 1) continue;
                    if (case2 && tx == ty && lc != lu) continue;
                    if (case2 && tx != ty && lc != lu - 1) continue;
                    if (!case1 && !case2) continue;

                    for (int li = 0; li < (int)left[x].size(); ++li) {
                        const auto& el = left[x][li];
                        for (int ri = 0; ri < (int)right[y].size(); ++ri) {
                            const auto& er = right[y][ri];
                            std::uint64_t keep_r = case1 ? (er.mask & ~c_low) : er.mask;
                            if (el.mask & keep_r) continue;  // spine colors must stay distinct
                            std::uint64_t stripped = case1 ? (er.mask & c_low) : 0;
                            std::vector<std::uint8_t> counts(k, 0);
                            bool ok = true;
                            long long bound = case1 ? coloring.group_param[ty] : 0;
                            for (int col = 0; col < k; ++col) {
                                int c = el.counts[col] + er.counts[col];
                                counts[col] = (std::uint8_t)std::min(c, 250);
                                if ((stripped >> col) & 1 && c > bound) ok = false;
                            }
                            if (!ok) continue;
                            ColorTable::Entry::Derivation d;
                            d.left = li;
                            d.right = ri;
                            d.x = x;
                            d.y = y;
                            d.strip = case1;
                            treedetail::add_entry(next[x], el.mask | keep_r, std::move(counts), d);
                        }
                    }
                }
            }
            // at-most path variant: a chain may terminate early next to the
            // sink (never at the root; length-1 paths are counted separately)
            if (opts.early_sink && j == 1 && pattern.children[u].size() == 1 &&
                u != pattern.root) {
                for (VertexId x = 0; x < n; ++x) {
                    if (coloring.color[x] < 0) continue;
                    if (tree.depth[m.template_of(x)] != mapping.level[u]) continue;
                    if (!std::binary_search(out_neighbors[x].begin(), out_neighbors[x].end(),
                                            opts.sink))
                        continue;
                    std::vector<std::uint8_t> counts(k, 0);
                    counts[coloring.color[x]] = 1;
                    ColorTable::Entry::Derivation d;
                    d.x = x;
                    d.early_sink = true;
                    treedetail::add_entry(next[x], 1ull << coloring.color[x], std::move(counts), d);
                }
            }
            ct.table[{u, j}] = std::move(next);
        }
    }
    return ct;
}

/// Table sanity: stored sets carry only colors whose palette level is at or
/// above the subtree root's level.
inline bool spine_discipline_ok(const Model& m, const TreePattern& pattern,
                                const LevelMapping& mapping, const Coloring& coloring,
                                const ColorTable& ct) {
    int classes = pattern.size() + 1;
    for (const auto& [sub, per_vertex] : ct.table) {
        std::uint64_t allowed = 0;
        std::set<int> levels(mapping.level.begin(), mapping.level.end());
        for (int l : levels)
            if (l <= mapping.level[sub.node]) allowed |= coloring.palette_mask[l % classes];
        for (const auto& entries : per_vertex)
            for (const auto& e : entries)
                if (e.mask & ~allowed) return false;
    }
    (void)m;
    return true;
}

/// A certified occurrence: pattern vertex -> (origin vertex, address).
struct TreeWitness {
    std::vector<VertexId> origin;
    std::vector<std::vector<long long>> address;
};

namespace treedetail {

// Backtracking realizer: instance indices for each descent and the stored
// derivation alternatives are search choices; occupied (vertex, address)
// slots prune. Bounded by k choices with at most k+1 indices each.
struct Realizer {
    const Model& m;
    const TreePattern& pattern;
    const ColorTable& ct;
    TreeWitness witness;
    std::set<std::pair<VertexId, std::vector<long long>>> occupied;
    const std::function<bool(const TreeWitness&)>* accept = nullptr;
    long long steps = 0;
    static constexpr long long kStepBudget = 200000;

    Realizer(const Model& mm, const TreePattern& p, const ColorTable& c) : m(mm), pattern(p), ct(c) {
        witness.origin.assign(p.size(), -1);
        witness.address.assign(p.size(), {});
    }

    struct Task {
        ColorTable::SubId sub;
        VertexId x;
        int entry;
        std::vector<long long> addr;
        int pattern_node;
    };

    bool run(std::vector<Task> agenda, size_t i) {
        if (++steps > kStepBudget) return false;
        if (i == agenda.size()) return !accept || (*accept)(witness);
        Task t = agenda[i];
        const auto& entry = ct.entries(t.sub, t.x)[t.entry];
        for (const auto& d : entry.derivations) {
            if (d.left < 0 || d.early_sink) {
                // base or early-terminated chain: claim the slot
                auto slot = std::make_pair(t.x, t.addr);
                if (occupied.count(slot)) continue;
                occupied.insert(slot);
                witness.origin[t.pattern_node] = t.x;
                witness.address[t.pattern_node] = t.addr;
                if (run(agenda, i + 1)) return true;
                occupied.erase(slot);
                witness.origin[t.pattern_node] = -1;
                continue;
            }
            int child = pattern.children[t.pattern_node][t.sub.prefix - 1];
            std::vector<Task> next = agenda;
            next[i] = {{t.pattern_node, t.sub.prefix - 1}, t.x, d.left, t.addr, t.pattern_node};
            Task right{{child, (int)pattern.children[child].size()}, d.y, d.right, {}, child};
            TemplateId tx = m.template_of(d.x), ty = m.template_of(d.y);
            if (d.strip) {
                // try the small index range; more than k chunks never help
                long long limit = std::min<long long>(m.param(ty), pattern.size() + 1);
                for (long long idx = 0; idx < limit; ++idx) {
                    right.addr = t.addr;
                    right.addr.push_back(idx);
                    auto with_right = next;
                    with_right.insert(with_right.begin() + i + 1, right);
                    if (run(std::move(with_right), i)) return true;
                }
            } else {
                right.addr = t.addr;
                if (tx != ty) right.addr.pop_back();  // ascend to the parent template
                auto with_right = next;
                with_right.insert(with_right.begin() + i + 1, right);
                if (run(std::move(with_right), i)) return true;
            }
        }
        return false;
    }
};

}  // namespace treedetail

/// Rebuilds a concrete embedding from an accepted table entry and checks it:
/// injective instances, indices within parameters, and an instantiation edge
/// for every pattern edge. Returns the witness when the check passes; an
/// optional predicate filters the search further.
inline std::optional<TreeWitness> certify(
    const Model& m, const TreePattern& pattern, const ColorTable& ct, VertexId root_vertex,
    int entry_idx, const std::function<bool(const TreeWitness&)>* accept = nullptr) {
    treedetail::Realizer r(m, pattern, ct);
    r.accept = accept;
    ColorTable::SubId full{pattern.root, (int)pattern.children[pattern.root].size()};
    std::vector<long long> root_addr(m.template_chain(root_vertex).size() - 1, 0);
    std::vector<treedetail::Realizer::Task> agenda{
        {full, root_vertex, entry_idx, root_addr, pattern.root}};
    if (!r.run(std::move(agenda), 0)) return std::nullopt;

    // defensive re-check of the found witness
    for (int p = 0; p < pattern.size(); ++p) {
        if (r.witness.origin[p] < 0) continue;
        auto chain = m.template_chain(r.witness.origin[p]);
        if (r.witness.address[p].size() != chain.size() - 1) return std::nullopt;
        for (size_t i = 0; i + 1 < chain.size(); ++i)
            if (r.witness.address[p][i] < 0 || r.witness.address[p][i] >= m.param(chain[i + 1]))
                return std::nullopt;
    }
    // every pattern edge must be realizable: a template edge whose endpoint
    // addresses agree on the shared template chain
    for (int p = 0; p < pattern.size(); ++p) {
        int par = pattern.parent[p];
        if (par < 0 || r.witness.origin[p] < 0 || r.witness.origin[par] < 0) continue;
        VertexId a = r.witness.origin[par], b = r.witness.origin[p];
        bool have_edge = false;
        for (const auto& e : m.data().edges) have_edge |= e.tail == a && e.head == b;
        if (!have_edge) return std::nullopt;
        const auto& aa = r.witness.address[par];
        const auto& ab = r.witness.address[p];
        size_t shared = std::min(aa.size(), ab.size());
        for (size_t i = 0; i < shared; ++i)
            if (aa[i] != ab[i]) return std::nullopt;
    }
    return r.witness;
}

/// Default repetition count for failure probability eps = 2^-20 per root,
/// from the e^-k success bound per trial.
inline int default_trials(int k) {
    double t = std::ceil(std::exp((double)k) * 20.0 * std::log(2.0));
    return (int)std::min(t, 2e6);
}

struct OccursResult {
    bool found = false;
    std::map<VertexId, bool> per_root;
    std::map<VertexId, TreeWitness> witnesses;
    long long mappings_enumerated = 0;
};

namespace treedetail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (a + 1) + 0xc2b2ae3d27d4eb4full * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

}  // namespace treedetail

/// Randomized tree subgraph isomorphism: repeats color coding and matching
/// for every level mapping. True answers are certified by a reconstructed
/// embedding; false answers hold with high probability.
inline OccursResult occurs(const Model& m, const TreePattern& pattern, int trials,
                           std::uint64_t seed, const TreeMatchOptions& opts = {}) {
    int k = pattern.size();
    OccursResult result;
    for (VertexId v = 0; v < m.vertex_count(); ++v) result.per_root[v] = false;

    long long total_instances = 0;
    for (VertexId v = 0; v < m.vertex_count(); ++v) total_instances += m.instance_count(v);
    if ((long long)k > total_instances) return result;

    auto mappings = enumerate_level_mappings(pattern, m.tree().height);
    result.mappings_enumerated = (long long)mappings.size();
    ColorTable::SubId full{pattern.root, (int)pattern.children[pattern.root].size()};

    // The matching pass is deterministic given (mapping, coloring), and small
    // models admit few distinct colorings: skip repeats and stop a mapping
    // once its coloring space is exhausted.
    std::vector<int> depth_population(m.tree().height, 0);
    for (VertexId v = 0; v < m.vertex_count(); ++v)
        depth_population[m.tree().depth[m.template_of(v)]]++;

    for (size_t mi = 0; mi < mappings.size(); ++mi) {
        bool matchable = true;
        for (int l : mappings[mi].level) matchable &= depth_population[l] > 0;
        if (!matchable) continue;

        double distinct = 1;
        {
            Coloring probe = color_code(m, pattern, mappings[mi], 0);
            int classes = k + 1;
            for (VertexId v = 0; v < m.vertex_count(); ++v) {
                int cls = m.tree().depth[m.template_of(v)] % classes;
                int size = __builtin_popcountll(probe.palette_mask[cls]);
                if (size > 0) distinct *= size;
                if (distinct > 1e9) break;
            }
        }
        std::map<std::vector<int>, char> seen;
        for (int trial = 0; trial < trials && (double)seen.size() < distinct; ++trial) {
            Coloring coloring =
                color_code(m, pattern, mappings[mi], treedetail::mix_seed(seed, trial, mi));
            auto [it, fresh] = seen.emplace(coloring.color, 0);
            if (!fresh) continue;
            ColorTable ct = match_tree_once(m, pattern, mappings[mi], coloring, opts);
            for (VertexId x = 0; x < m.vertex_count(); ++x) {
                if (result.per_root[x]) continue;
                const auto& entries = ct.entries(full, x);
                for (int ei = 0; ei < (int)entries.size() && !result.per_root[x]; ++ei) {
                    auto witness = certify(m, pattern, ct, x, ei);
                    if (witness) {
                        result.per_root[x] = true;
                        result.witnesses[x] = *witness;
                    }
                }
            }
        }
    }
    for (auto& [v, f] : result.per_root) result.found |= f;
    return result;
}

enum class PathMode { exactly, at_most };

/// Decides whether k vertex-disjoint s-t paths of length exactly (or at most)
/// L exist in the instantiation, for a single instance pair of s and t.
inline bool disjoint_paths(const Model& m, VertexId s, VertexId t, int k_paths, int length,
                           PathMode mode, int trials, std::uint64_t seed) {
    if (k_paths <= 0) return true;
    if (length < 1) return false;

    // direct s-t edges are the length-1 paths; they block no interior vertex
    int direct = 0;
    for (const auto& e : m.data().edges) direct += e.tail == s && e.head == t;

    if (length == 1) return direct >= k_paths;

    int need = k_paths;
    PgtData data = m.data();
    if (mode == PathMode::at_most) {
        need -= std::min(direct, k_paths);
        if (need == 0) return true;
        PgtData stripped = m.data();
        stripped.edges.clear();
        for (const auto& e : data.edges)
            if (!(e.tail == s && e.head == t)) stripped.edges.push_back(e);
        data = std::move(stripped);
    }
    Model work{data};

    // pattern: a root with `need` chains of length-1 .. the chains have
    // (length - 1) interior vertices each
    std::vector<std::string> names;
    std::vector<int> parent;
    names.push_back("s");
    parent.push_back(-1);
    for (int p = 0; p < need; ++p) {
        int prev = 0;
        for (int i = 0; i < length - 1; ++i) {
            names.push_back("p" + std::to_string(p) + "_" + std::to_string(i));
            parent.push_back(prev);
            prev = (int)names.size() - 1;
        }
    }
    TreePattern pattern = TreePattern::from_parents(std::move(names), std::move(parent));

    TreeMatchOptions opts;
    opts.sink = t;
    opts.early_sink = mode == PathMode::at_most;

    if (trials <= 0) trials = default_trials(pattern.size());
    auto mappings = enumerate_level_mappings(pattern, work.tree().height);
    ColorTable::SubId full{pattern.root, (int)pattern.children[pattern.root].size()};

    // every chain must converge on one sink instance and stay off it
    auto t_chain = work.template_chain(t);
    std::function<bool(const TreeWitness&)> accept = [&](const TreeWitness& w) {
        std::vector<long long> sink_addr;
        bool first = true;
        for (int p = 0; p < pattern.size(); ++p) {
            if (w.origin[p] < 0 || p == pattern.root) continue;
            bool chain_end = pattern.children[p].empty() || w.origin[pattern.children[p][0]] < 0;
            if (!chain_end) continue;
            const auto& ax = w.address[p];
            auto x_chain = work.template_chain(w.origin[p]);
            std::vector<long long> at;
            for (size_t i = 1; i < t_chain.size(); ++i) {
                long long idx = 0;
                for (size_t j = 1; j < x_chain.size() && j - 1 < ax.size(); ++j)
                    if (x_chain[j] == t_chain[i]) idx = ax[j - 1];
                at.push_back(idx);
            }
            if (first) {
                sink_addr = at;
                first = false;
            } else if (at != sink_addr) {
                return false;
            }
        }
        for (int p = 0; p < pattern.size(); ++p) {
            if (w.origin[p] < 0 || p == pattern.root) continue;
            if (w.origin[p] == t && w.address[p] == sink_addr) return false;
        }
        return true;
    };

    std::vector<int> depth_population(work.tree().height, 0);
    for (VertexId v = 0; v < work.vertex_count(); ++v)
        depth_population[work.tree().depth[work.template_of(v)]]++;
    int s_depth = work.tree().depth[work.template_of(s)];

    // the chains are interchangeable: keep one mapping per branch multiset
    std::set<std::vector<std::vector<int>>> branch_shapes;

    for (size_t mi = 0; mi < mappings.size(); ++mi) {
        bool matchable = mappings[mi].level[pattern.root] == s_depth;
        for (int l : mappings[mi].level) matchable &= depth_population[l] > 0;
        if (!matchable) continue;
        {
            std::vector<std::vector<int>> shape;
            for (int c : pattern.children[pattern.root]) {
                std::vector<int> branch;
                for (int p = c; p >= 0; p = pattern.children[p].empty() ? -1 : pattern.children[p][0])
                    branch.push_back(mappings[mi].level[p]);
                shape.push_back(branch);
            }
            std::sort(shape.begin(), shape.end());
            if (!branch_shapes.insert(shape).second) continue;
        }
        double distinct = 1;
        {
            Coloring probe = color_code(work, pattern, mappings[mi], 0);
            int classes = pattern.size() + 1;
            for (VertexId v = 0; v < work.vertex_count(); ++v) {
                int cls = work.tree().depth[work.template_of(v)] % classes;
                int size = __builtin_popcountll(probe.palette_mask[cls]);
                if (size > 0) distinct *= size;
                if (distinct > 1e9) break;
            }
        }
        std::map<std::vector<int>, char> seen;
        for (int trial = 0; trial < trials && (double)seen.size() < distinct; ++trial) {
            Coloring coloring =
                color_code(work, pattern, mappings[mi], treedetail::mix_seed(seed, trial, mi));
            auto [cit, fresh] = seen.emplace(coloring.color, 0);
            if (!fresh) continue;
            ColorTable ct = match_tree_once(work, pattern, mappings[mi], coloring, opts);
            const auto& entries = ct.entries(full, s);
            for (int ei = 0; ei < (int)entries.size(); ++ei) {
                if (certify(work, pattern, ct, s, ei, &accept)) return true;
            }
        }
    }
    return false;
}

}  // namespace pgt
