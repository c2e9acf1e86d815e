#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgt/rational.hpp"

namespace pgt {

using VertexId = int;
using TemplateId = int;

struct EdgeData {
    VertexId tail = -1;
    VertexId head = -1;
    Weight weight = Weight(1);
};

/// Edge between instances of the same template; instance j of the tail
/// connects to instance (j + delta) mod P of the head.
struct SiblingEdgeData {
    VertexId tail = -1;
    VertexId head = -1;
    Weight weight = Weight(1);
    long long delta = 0;
};

struct TemplateData {
    std::string name;
    std::vector<VertexId> members;  // full nested vertex set, not just owned vertices
    long long param = 1;
};

/// Raw parametric graph template: template graph + laminar template family +
/// parameters + sibling edges. Mutable while being assembled; algorithms work
/// on the validated, immutable Model view below.
struct PgtData {
    bool directed = true;
    std::vector<std::string> vertices;  // names; index is the VertexId
    std::vector<EdgeData> edges;
    std::vector<SiblingEdgeData> sibling_edges;
    std::vector<TemplateData> templates;

    VertexId add_vertex(const std::string& name) {
        vertices.push_back(name);
        return (VertexId)vertices.size() - 1;
    }
    void add_edge(VertexId u, VertexId v, Weight w = Weight(1)) { edges.push_back({u, v, w}); }
    void add_sibling_edge(VertexId u, VertexId v, long long delta, Weight w = Weight(1)) {
        sibling_edges.push_back({u, v, w, delta});
    }
};

struct Violation {
    std::string rule;     // e.g. "non-laminar pair", "skipping edge"
    std::string subject;  // offending element
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string str() const {
        std::string s;
        for (const auto& v : violations) s += v.rule + ": " + v.subject + "\n";
        return s;
    }
};

class validation_error : public std::runtime_error {
public:
    explicit validation_error(ValidationReport report)
        : std::runtime_error("invalid parametric graph template\n" + report.str()),
          report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

class budget_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline bool subset_of(const std::set<VertexId>& a, const std::set<VertexId>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace detail

/// Checks the model rules: laminar family, root covering V with parameter 1,
/// no-skipping cross edges, parameter/weight ranges, sibling edges confined to
/// one template. Returns all violations found rather than stopping early.
inline ValidationReport validate(const PgtData& g) {
    ValidationReport report;
    auto violate = [&](std::string rule, std::string subject) {
        report.violations.push_back({std::move(rule), std::move(subject)});
    };

    std::map<std::string, int> name_count;
    for (const auto& n : g.vertices)
        if (++name_count[n] == 2) violate("duplicate vertex name", n);

    int n = (int)g.vertices.size();
    std::vector<std::set<VertexId>> sets(g.templates.size());
    for (size_t i = 0; i < g.templates.size(); ++i) {
        const auto& t = g.templates[i];
        if (t.param < 1) violate("bad parameter", t.name);
        for (VertexId v : t.members) {
            if (v < 0 || v >= n) {
                violate("unknown vertex in template", t.name);
                continue;
            }
            sets[i].insert(v);
        }
        if (sets[i].empty()) violate("empty template", t.name);
    }

    // Full-size templates: the root, plus optionally one replicated template
    // over the whole vertex set (a parametrized copy of everything).
    std::vector<int> full_size;
    for (size_t i = 0; i < sets.size(); ++i)
        if ((int)sets[i].size() == n && n > 0) full_size.push_back((int)i);
    int root = -1;
    for (int i : full_size)
        if (g.templates[i].param == 1) root = i;
    if (full_size.empty() || (root < 0 && full_size.size() < 2)) {
        if (full_size.empty())
            violate("missing root", "no template covers all vertices");
        else
            violate("bad parameter",
                    "root " + g.templates[full_size[0]].name + " must have parameter 1");
    } else if (root < 0 || full_size.size() > 2) {
        violate("duplicate template set", "more than one replicated full template");
    }

    for (size_t i = 0; i < sets.size(); ++i) {
        for (size_t j = i + 1; j < sets.size(); ++j) {
            std::vector<VertexId> inter;
            std::set_intersection(sets[i].begin(), sets[i].end(), sets[j].begin(), sets[j].end(),
                                  std::back_inserter(inter));
            if (inter.empty()) continue;
            if (sets[i] == sets[j]) {
                if ((int)sets[i].size() == n) continue;  // root plus one full copy is fine
                violate("duplicate template set", g.templates[i].name + ", " + g.templates[j].name);
            } else if (!detail::subset_of(sets[i], sets[j]) && !detail::subset_of(sets[j], sets[i])) {
                violate("non-laminar pair", g.templates[i].name + ", " + g.templates[j].name);
            }
        }
    }
    if (!report.ok()) return report;  // tree structure below needs laminarity

    // Deepest template per vertex; parent = smallest strict superset. Ties on
    // full-size sets resolve away from the root.
    std::vector<int> deepest(n, root);
    for (VertexId v = 0; v < n; ++v) {
        size_t best = SIZE_MAX;
        for (size_t i = 0; i < sets.size(); ++i) {
            if (!sets[i].count(v)) continue;
            if (sets[i].size() < best || (sets[i].size() == best && deepest[v] == root)) {
                best = sets[i].size();
                deepest[v] = (int)i;
            }
        }
    }

    auto is_ancestor_or_self = [&](int anc, int t) {
        return anc == t || detail::subset_of(sets[t], sets[anc]);
    };
    auto check_cross = [&](VertexId u, VertexId v, bool sibling, const std::string& what) {
        if (u < 0 || u >= n || v < 0 || v >= n) {
            violate("unknown vertex in edge", what);
            return;
        }
        int tu = deepest[u], tv = deepest[v];
        if (sibling) {
            if (tu != tv) violate("sibling edge crossing templates", what);
            return;
        }
        if (tu == tv) return;
        // no-skipping: T(u) must be the parent or child of T(v)
        bool nested = is_ancestor_or_self(tu, tv) || is_ancestor_or_self(tv, tu);
        int deep = sets[tu].size() < sets[tv].size() ? tu : tv;
        int shallow = deep == tu ? tv : tu;
        bool direct = true;
        if (nested) {
            for (size_t i = 0; i < sets.size(); ++i) {
                if ((int)i == deep || (int)i == shallow) continue;
                if (detail::subset_of(sets[deep], sets[i]) && detail::subset_of(sets[i], sets[shallow]) &&
                    sets[i] != sets[deep] && sets[i] != sets[shallow]) {
                    direct = false;  // an intermediate template sits between them
                    break;
                }
            }
        }
        if (!nested || !direct) violate("skipping edge", what);
    };

    for (const auto& e : g.edges) {
        std::string what = (e.tail >= 0 && e.tail < n ? g.vertices[e.tail] : "?") + " -> " +
                           (e.head >= 0 && e.head < n ? g.vertices[e.head] : "?");
        if (!e.weight.is_infinite() && e.weight.finite() < Rational(0))
            violate("negative weight", what);
        check_cross(e.tail, e.head, false, what);
    }
    for (const auto& e : g.sibling_edges) {
        std::string what = (e.tail >= 0 && e.tail < n ? g.vertices[e.tail] : "?") + " ~> " +
                           (e.head >= 0 && e.head < n ? g.vertices[e.head] : "?");
        if (!e.weight.is_infinite() && e.weight.finite() < Rational(0))
            violate("negative weight", what);
        check_cross(e.tail, e.head, true, what);
    }
    return report;
}

/// Derived template tree: parent mapping (root maps to itself), children
/// adjacency, depth in edges from the root, and h, the number of levels
/// (max depth + 1).
struct TemplateTree {
    TemplateId root = -1;
    std::vector<TemplateId> parent;
    std::vector<std::vector<TemplateId>> children;
    std::vector<int> depth;
    int height = 0;
};

/// Validated, immutable parametric graph template. All algorithm entry points
/// take a Model; construction throws validation_error on rule violations.
class Model {
public:
    explicit Model(PgtData data) : data_(std::move(data)) {
        auto report = validate(data_);
        if (!report.ok()) throw validation_error(std::move(report));
        build_derived();
    }

    const PgtData& data() const { return data_; }
    bool directed() const { return data_.directed; }
    int vertex_count() const { return (int)data_.vertices.size(); }
    int template_count() const { return (int)data_.templates.size(); }
    const std::string& vertex_name(VertexId v) const { return data_.vertices.at(v); }
    const std::string& template_name(TemplateId t) const { return data_.templates.at(t).name; }
    long long param(TemplateId t) const { return data_.templates.at(t).param; }
    const TemplateTree& tree() const { return tree_; }

    VertexId vertex(const std::string& name) const {
        auto it = vertex_by_name_.find(name);
        if (it == vertex_by_name_.end()) throw std::invalid_argument("unknown vertex: " + name);
        return it->second;
    }
    std::optional<VertexId> find_vertex(const std::string& name) const {
        auto it = vertex_by_name_.find(name);
        if (it == vertex_by_name_.end()) return std::nullopt;
        return it->second;
    }
    TemplateId template_id(const std::string& name) const {
        auto it = template_by_name_.find(name);
        if (it == template_by_name_.end()) throw std::invalid_argument("unknown template: " + name);
        return it->second;
    }

    /// T(v): the deepest template the vertex belongs to.
    TemplateId template_of(VertexId v) const {
        if (v < 0 || v >= vertex_count()) throw std::invalid_argument("unknown vertex id");
        return vertex_template_.at(v);
    }

    /// Chain of templates from the root down to T(v), inclusive.
    std::vector<TemplateId> template_chain(VertexId v) const {
        std::vector<TemplateId> chain;
        for (TemplateId t = template_of(v); ; t = tree_.parent[t]) {
            chain.push_back(t);
            if (t == tree_.root) break;
        }
        std::reverse(chain.begin(), chain.end());
        return chain;
    }

    bool is_ancestor_or_self(TemplateId anc, TemplateId t) const {
        while (true) {
            if (t == anc) return true;
            if (t == tree_.root) return false;
            t = tree_.parent[t];
        }
    }

    /// Vertices owned by T itself (T(v) == T).
    const std::vector<VertexId>& owned_vertices(TemplateId t) const { return owned_.at(t); }

    /// Number of instances of v in the instantiation: the product of the
    /// parameters of every template containing v.
    long long instance_count(VertexId v) const {
        __int128 prod = 1;
        for (TemplateId t : template_chain(v)) {
            prod *= param(t);
            if (prod > (__int128)1 << 62) throw std::overflow_error("instance count overflow");
        }
        return (long long)prod;
    }

    /// Product of parameters of T and all its ancestors.
    long long ancestor_param_product(TemplateId t) const { return anc_product_.at(t); }

    /// Parent-template vertices adjacent (either direction) to a vertex of T.
    std::set<VertexId> boundary_vertices(TemplateId t) const {
        if (t == tree_.root) throw std::invalid_argument("root template has no boundary");
        std::set<VertexId> result;
        TemplateId par = tree_.parent[t];
        auto consider = [&](VertexId a, VertexId b) {
            if (vertex_template_[a] == par && is_ancestor_or_self(t, vertex_template_[b]))
                result.insert(a);
        };
        for (const auto& e : data_.edges) {
            consider(e.tail, e.head);
            consider(e.head, e.tail);
        }
        return result;
    }

    bool has_sibling_edges() const { return !data_.sibling_edges.empty(); }

private:
    void build_derived() {
        int n = vertex_count();
        int k = template_count();
        std::vector<std::set<VertexId>> sets(k);
        for (int i = 0; i < k; ++i)
            sets[i] = std::set<VertexId>(data_.templates[i].members.begin(),
                                         data_.templates[i].members.end());

        tree_.parent.assign(k, -1);
        tree_.children.assign(k, {});
        tree_.depth.assign(k, 0);
        for (int i = 0; i < k; ++i) {
            if ((int)sets[i].size() == n && (tree_.root < 0 || data_.templates[i].param == 1))
                tree_.root = i;
        }
        for (int i = 0; i < k; ++i) {
            if (i == tree_.root) {
                tree_.parent[i] = i;
                continue;
            }
            int best = tree_.root;
            size_t best_size = SIZE_MAX;
            for (int j = 0; j < k; ++j) {
                if (j == i || j == tree_.root) continue;
                if (detail::subset_of(sets[i], sets[j]) && sets[j] != sets[i] &&
                    sets[j].size() < best_size) {
                    best = j;
                    best_size = sets[j].size();
                }
            }
            tree_.parent[i] = best;
            tree_.children[best].push_back(i);
        }
        // depths via repeated relaxation (k is small)
        for (int pass = 0; pass < k; ++pass)
            for (int i = 0; i < k; ++i)
                if (i != tree_.root) tree_.depth[i] = tree_.depth[tree_.parent[i]] + 1;
        tree_.height = 1;
        for (int i = 0; i < k; ++i) tree_.height = std::max(tree_.height, tree_.depth[i] + 1);

        vertex_template_.assign(n, tree_.root);
        for (VertexId v = 0; v < n; ++v) {
            size_t best = SIZE_MAX;
            for (int i = 0; i < k; ++i) {
                if (!sets[i].count(v)) continue;
                if (sets[i].size() < best ||
                    (sets[i].size() == best && vertex_template_[v] == tree_.root)) {
                    best = sets[i].size();
                    vertex_template_[v] = i;
                }
            }
        }
        owned_.assign(k, {});
        for (VertexId v = 0; v < n; ++v) owned_[vertex_template_[v]].push_back(v);

        anc_product_.assign(k, 1);
        for (int i = 0; i < k; ++i) {
            __int128 prod = 1;
            for (TemplateId t = i; ; t = tree_.parent[t]) {
                prod *= param(t);
                if (prod > (__int128)1 << 62) throw std::overflow_error("parameter product overflow");
                if (t == tree_.root) break;
            }
            anc_product_[i] = (long long)prod;
        }

        for (VertexId v = 0; v < n; ++v) vertex_by_name_[data_.vertices[v]] = v;
        for (int i = 0; i < k; ++i) template_by_name_[data_.templates[i].name] = i;
    }

    PgtData data_;
    TemplateTree tree_;
    std::vector<TemplateId> vertex_template_;
    std::vector<std::vector<VertexId>> owned_;
    std::vector<long long> anc_product_;
    std::map<std::string, VertexId> vertex_by_name_;
    std::map<std::string, TemplateId> template_by_name_;
};

/// Free-standing T(v) lookup matching the model definition.
inline TemplateId template_of(const Model& m, VertexId v) { return m.template_of(v); }

}  // namespace pgt
