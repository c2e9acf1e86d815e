#pragma once

#include <map>
#include <string>
#include <vector>

#include "pgt/rational.hpp"

namespace pgt {

/// Plain weighted graph with named vertices. Multi-edges allowed; used for
/// reweighted graphs, instantiations flattened for solvers, oracle inputs,
/// and discovery targets.
struct WeightedGraph {
    bool directed = true;
    std::vector<std::string> names;
    struct Edge {
        int u, v;
        Weight w;
    };
    std::vector<Edge> edges;

    int add_vertex(const std::string& name) {
        names.push_back(name);
        return (int)names.size() - 1;
    }
    void add_edge(int u, int v, Weight w = Weight(1)) { edges.push_back({u, v, w}); }
    int size() const { return (int)names.size(); }

    int vertex(const std::string& name) const {
        for (int i = 0; i < (int)names.size(); ++i)
            if (names[i] == name) return i;
        throw std::invalid_argument("unknown vertex: " + name);
    }

    std::vector<std::vector<int>> out_adjacency() const {
        std::vector<std::vector<int>> adj(names.size());
        for (int i = 0; i < (int)edges.size(); ++i) {
            adj[edges[i].u].push_back(i);
            if (!directed) adj[edges[i].v].push_back(i);
        }
        return adj;
    }
};

}  // namespace pgt
