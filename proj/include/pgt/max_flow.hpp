#pragma once

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "pgt/graph.hpp"
#include "pgt/instantiate.hpp"
#include "pgt/model.hpp"
#include "pgt/transforms.hpp"

namespace pgt {

/// Exact flow value with a minimum-cut witness on the working graph. The cut
/// weight always equals the flow value (strong duality, checked by tests).
struct FlowResult {
    Weight value;
    std::set<int> source_side;  // vertex ids of the working graph
    WeightedGraph working_graph;

    std::set<std::string> source_side_names() const {
        std::set<std::string> s;
        for (int v : source_side) s.insert(working_graph.names[v]);
        return s;
    }

    /// Total weight of edges crossing the witness cut.
    Weight cut_weight() const {
        Weight total(0);
        for (const auto& e : working_graph.edges) {
            bool us = source_side.count(e.u) > 0, vs = source_side.count(e.v) > 0;
            if (us != vs && (us || !working_graph.directed)) total += e.w;
        }
        return total;
    }
};

namespace detail {

// Dinic with exact rational capacities. Infinite capacities are solved as
// (sum of finite capacities + 1), which no finite cut can reach; if the
// witness cut crosses such an arc the true value is infinite.
class DinicSolver {
public:
    explicit DinicSolver(int n) : head_(n, -1) {}

    void add_arc(int u, int v, const Rational& cap, bool infinite) {
        arcs_.push_back({v, head_[u], cap, infinite});
        head_[u] = (int)arcs_.size() - 1;
        arcs_.push_back({u, head_[v], Rational(0), false});
        head_[v] = (int)arcs_.size() - 1;
    }

    Rational solve(int s, int t) {
        Rational bound(1);
        for (auto& a : arcs_)
            if (!a.infinite) bound += a.cap;
        for (auto& a : arcs_)
            if (a.infinite) a.cap = bound;

        Rational total(0);
        while (bfs(s, t)) {
            iter_ = head_;
            while (true) {
                Rational pushed = dfs(s, t, bound);
                if (pushed.is_zero()) break;
                total += pushed;
            }
        }
        return total;
    }

    std::set<int> residual_reachable(int s) const {
        std::set<int> seen{s};
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int i = head_[u]; i >= 0; i = arcs_[i].next) {
                if (arcs_[i].cap.is_zero() || seen.count(arcs_[i].to)) continue;
                seen.insert(arcs_[i].to);
                q.push(arcs_[i].to);
            }
        }
        return seen;
    }

private:
    struct Arc {
        int to;
        int next;
        Rational cap;
        bool infinite;
    };

    bool bfs(int s, int t) {
        level_.assign(head_.size(), -1);
        level_[s] = 0;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int i = head_[u]; i >= 0; i = arcs_[i].next) {
                if (arcs_[i].cap.is_zero() || level_[arcs_[i].to] >= 0) continue;
                level_[arcs_[i].to] = level_[u] + 1;
                q.push(arcs_[i].to);
            }
        }
        return level_[t] >= 0;
    }

    Rational dfs(int u, int t, const Rational& limit) {
        if (u == t || limit.is_zero()) return limit;
        for (int& i = iter_[u]; i >= 0; i = arcs_[i].next) {
            Arc& a = arcs_[i];
            if (a.cap.is_zero() || level_[a.to] != level_[u] + 1) continue;
            Rational pushed = dfs(a.to, t, std::min(limit, a.cap));
            if (!pushed.is_zero()) {
                a.cap -= pushed;
                arcs_[i ^ 1].cap += pushed;
                return pushed;
            }
        }
        level_[u] = -1;
        return Rational(0);
    }

    std::vector<int> head_;
    std::vector<int> iter_;
    std::vector<int> level_;
    std::vector<Arc> arcs_;
};

}  // namespace detail

/// Exact maximum s-t flow on a plain weighted graph, with a minimum-cut
/// witness. Undirected edges expand to an arc pair sharing the capacity.
inline FlowResult solve_max_flow(const WeightedGraph& g, int s, int t) {
    if (s == t) throw std::invalid_argument("max flow requires s != t");
    detail::DinicSolver solver(g.size());
    for (const auto& e : g.edges) {
        Rational cap = e.w.is_infinite() ? Rational(0) : e.w.finite();
        solver.add_arc(e.u, e.v, cap, e.w.is_infinite());
        if (!g.directed) solver.add_arc(e.v, e.u, cap, e.w.is_infinite());
    }
    Rational value = solver.solve(s, t);

    FlowResult result;
    result.working_graph = g;
    result.source_side = solver.residual_reachable(s);
    bool cut_hits_infinite = false;
    for (const auto& e : g.edges) {
        bool us = result.source_side.count(e.u) > 0, vs = result.source_side.count(e.v) > 0;
        if (us != vs && (us || !g.directed) && e.w.is_infinite()) cut_hits_infinite = true;
    }
    result.value = cut_hits_infinite ? Weight::infinity() : Weight(value);
    return result;
}

/// Value of the maximum flow from all instances of s to all instances of t:
/// edge reweighting followed by a plain max flow on the template graph.
inline FlowResult max_all_st_flow(const Model& m, VertexId s, VertexId t) {
    if (m.has_sibling_edges())
        throw std::invalid_argument("max_all_st_flow: sibling edges are not supported");
    if (s == t) throw std::invalid_argument("max flow requires s != t");
    return solve_max_flow(edge_reweight(m), s, t);
}

/// Valid instance address for a vertex: one index per non-root template on
/// its chain, top-down. Throws if out of range.
inline void check_address(const Model& m, VertexId v, const std::vector<long long>& addr) {
    auto chain = m.template_chain(v);
    if ((int)addr.size() != (int)chain.size() - 1)
        throw std::invalid_argument("address length must equal the depth of T(v)");
    for (size_t i = 0; i + 1 < chain.size(); ++i)
        if (addr[i] < 0 || addr[i] >= m.param(chain[i + 1]))
            throw std::invalid_argument("address index out of range");
}

/// Flow between one fixed instance of s and one fixed instance of t:
/// upwards partial instantiation from both endpoints, then edge reweighting
/// and a plain max flow. In template-acyclic models this is zero whenever the
/// two addresses disagree on a shared template.
inline FlowResult max_single_st_flow(const Model& m,
                                     VertexId s,
                                     const std::vector<long long>& s_addr,
                                     VertexId t,
                                     const std::vector<long long>& t_addr) {
    if (m.has_sibling_edges())
        throw std::invalid_argument("max_single_st_flow: sibling edges are not supported");
    if (s == t) throw std::invalid_argument("max flow requires s != t");
    check_address(m, s, s_addr);
    check_address(m, t, t_addr);

    // Relative identity of t's instance against s's: walk the templates that
    // contain both; the first index disagreement sends t to the split-off
    // copy at that split.
    auto s_chain = m.template_chain(s);
    auto t_chain = m.template_chain(t);
    std::map<TemplateId, long long> t_index;
    for (size_t i = 1; i < t_chain.size(); ++i) t_index[t_chain[i]] = t_addr[i - 1];

    std::vector<bool> follow_stays;
    bool diverged = false;
    for (size_t i = 1; i < s_chain.size(); ++i) {
        if (m.param(s_chain[i]) <= 1) continue;  // not split
        auto it = t_index.find(s_chain[i]);
        bool stays = true;
        if (it != t_index.end() && !diverged && it->second != s_addr[i - 1]) {
            stays = false;
            diverged = true;
        }
        follow_stays.push_back(stays);
    }

    VertexId tracked = t;
    Model after_s = upwards_partial_instantiation(m, s, &tracked, &follow_stays);
    VertexId s2 = after_s.vertex(m.vertex_name(s));
    Model after_t = upwards_partial_instantiation(after_s, tracked);
    VertexId s3 = after_t.vertex(after_s.vertex_name(s2));
    VertexId t3 = after_t.vertex(after_s.vertex_name(tracked));
    return solve_max_flow(edge_reweight(after_t), s3, t3);
}

}  // namespace pgt
