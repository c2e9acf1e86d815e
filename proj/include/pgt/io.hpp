#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pgt/instantiate.hpp"
#include "pgt/model.hpp"

namespace pgt {

class parse_error : public std::runtime_error {
public:
    parse_error(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what) {}
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream in(line);
    std::string t;
    while (in >> t) {
        if (t[0] == '#') break;
        toks.push_back(t);
    }
    return toks;
}

}  // namespace detail

/// PGT text format, one record per line:
///   pgt 1 directed|undirected
///   template <id> parent <id|-> param <int>
///   vertex <name> in <template-id>
///   edge <u> <v> [w <rational>]
///   sedge <u> <v> [w <rational>] delta <int>
inline PgtData parse_pgt(std::istream& in) {
    PgtData g;
    std::map<std::string, VertexId> vertex_ids;
    struct TInfo {
        std::string parent;
        long long param;
    };
    std::vector<std::string> tmpl_names;
    std::map<std::string, int> tmpl_ids;
    std::map<std::string, TInfo> tmpl_info;
    std::map<std::string, std::vector<VertexId>> owned;

    std::string line;
    int lineno = 0;
    bool header = false;
    auto need = [&](bool cond, const std::string& msg) {
        if (!cond) throw parse_error(lineno, msg);
    };
    auto vertex_id = [&](const std::string& name) {
        auto it = vertex_ids.find(name);
        need(it != vertex_ids.end(), "unknown vertex " + name);
        return it->second;
    };

    while (std::getline(in, line)) {
        ++lineno;
        auto toks = detail::tokenize(line);
        if (toks.empty()) continue;
        if (!header) {
            need(toks.size() == 3 && toks[0] == "pgt" && toks[1] == "1", "expected `pgt 1 directed|undirected`");
            need(toks[2] == "directed" || toks[2] == "undirected", "bad directedness flag");
            g.directed = toks[2] == "directed";
            header = true;
            continue;
        }
        if (toks[0] == "template") {
            need(toks.size() == 6 && toks[2] == "parent" && toks[4] == "param",
                 "expected `template <id> parent <id|-> param <int>`");
            need(!tmpl_info.count(toks[1]), "duplicate template " + toks[1]);
            need(toks[3] == "-" || tmpl_info.count(toks[3]), "parent must appear before children");
            tmpl_names.push_back(toks[1]);
            tmpl_ids[toks[1]] = (int)tmpl_names.size() - 1;
            try {
                tmpl_info[toks[1]] = {toks[3], std::stoll(toks[5])};
            } catch (const std::logic_error&) {
                throw parse_error(lineno, "bad parameter " + toks[5]);
            }
        } else if (toks[0] == "vertex") {
            need(toks.size() == 4 && toks[2] == "in", "expected `vertex <name> in <template-id>`");
            need(!vertex_ids.count(toks[1]), "duplicate vertex " + toks[1]);
            need(tmpl_info.count(toks[3]), "unknown template " + toks[3]);
            VertexId v = g.add_vertex(toks[1]);
            vertex_ids[toks[1]] = v;
            owned[toks[3]].push_back(v);
        } else if (toks[0] == "edge" || toks[0] == "sedge") {
            bool sib = toks[0] == "sedge";
            need(toks.size() >= 3, "expected `edge <u> <v> ...`");
            VertexId u = vertex_id(toks[1]);
            VertexId v = vertex_id(toks[2]);
            Weight w = Weight(1);
            long long delta = 0;
            bool have_delta = false;
            for (size_t i = 3; i + 1 < toks.size(); i += 2) {
                if (toks[i] == "w") {
                    try {
                        w = Weight::parse(toks[i + 1]);
                    } catch (const std::invalid_argument& ex) {
                        throw parse_error(lineno, ex.what());
                    }
                } else if (toks[i] == "delta" && sib) {
                    try {
                        delta = std::stoll(toks[i + 1]);
                    } catch (const std::logic_error&) {
                        throw parse_error(lineno, "bad delta " + toks[i + 1]);
                    }
                    have_delta = true;
                } else {
                    throw parse_error(lineno, "unexpected token " + toks[i]);
                }
            }
            if (sib) {
                need(have_delta, "sedge requires `delta <int>`");
                g.add_sibling_edge(u, v, delta, w);
            } else {
                g.add_edge(u, v, w);
            }
        } else {
            throw parse_error(lineno, "unknown record " + toks[0]);
        }
    }
    need(header, "missing `pgt 1 ...` header");

    // Expand the parent tree into full nested member sets.
    std::map<std::string, std::vector<VertexId>> full = owned;
    // children accumulate into parents; process deepest-first by repeated passes
    for (size_t pass = 0; pass < tmpl_names.size(); ++pass) {
        for (auto it = tmpl_names.rbegin(); it != tmpl_names.rend(); ++it) {
            const auto& info = tmpl_info[*it];
            if (info.parent == "-") continue;
            auto& p = full[info.parent];
            for (VertexId v : full[*it])
                if (std::find(p.begin(), p.end(), v) == p.end()) p.push_back(v);
        }
    }
    for (const auto& name : tmpl_names)
        g.templates.push_back({name, full[name], tmpl_info[name].param});
    return g;
}

inline PgtData parse_pgt(const std::string& text) {
    std::istringstream in(text);
    return parse_pgt(in);
}

inline void write_pgt(std::ostream& os, const PgtData& g) {
    os << "pgt 1 " << (g.directed ? "directed" : "undirected") << "\n";
    // order templates parents-first
    Model m{g};  // validates and derives the tree
    const auto& tree = m.tree();
    std::vector<TemplateId> order;
    std::vector<TemplateId> stack{tree.root};
    while (!stack.empty()) {
        TemplateId t = stack.back();
        stack.pop_back();
        order.push_back(t);
        auto kids = tree.children[t];
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    for (TemplateId t : order) {
        os << "template " << g.templates[t].name << " parent "
           << (t == tree.root ? "-" : g.templates[tree.parent[t]].name) << " param "
           << g.templates[t].param << "\n";
    }
    for (VertexId v = 0; v < (int)g.vertices.size(); ++v)
        os << "vertex " << g.vertices[v] << " in " << g.templates[m.template_of(v)].name << "\n";
    for (const auto& e : g.edges)
        os << "edge " << g.vertices[e.tail] << " " << g.vertices[e.head] << " w " << e.weight.str()
           << "\n";
    for (const auto& e : g.sibling_edges)
        os << "sedge " << g.vertices[e.tail] << " " << g.vertices[e.head] << " w " << e.weight.str()
           << " delta " << e.delta << "\n";
}

inline std::string pgt_to_string(const PgtData& g) {
    std::ostringstream os;
    write_pgt(os, g);
    return os.str();
}

/// Plain graph format, used for instantiation output and `.el` inputs:
///   graph 1 directed|undirected
///   vertex <name>
///   edge <a> <b> [w <rational>]
inline WeightedGraph parse_graph(std::istream& in) {
    WeightedGraph g;
    std::map<std::string, int> ids;
    std::string line;
    int lineno = 0;
    bool header = false;
    auto need = [&](bool cond, const std::string& msg) {
        if (!cond) throw parse_error(lineno, msg);
    };
    auto vid = [&](const std::string& name) {
        auto it = ids.find(name);
        if (it != ids.end()) return it->second;
        int v = g.add_vertex(name);
        ids[name] = v;
        return v;
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = detail::tokenize(line);
        if (toks.empty()) continue;
        if (!header) {
            need(toks.size() == 3 && toks[0] == "graph" && toks[1] == "1",
                 "expected `graph 1 directed|undirected`");
            need(toks[2] == "directed" || toks[2] == "undirected", "bad directedness flag");
            g.directed = toks[2] == "directed";
            header = true;
            continue;
        }
        if (toks[0] == "vertex") {
            need(toks.size() == 2, "expected `vertex <name>`");
            vid(toks[1]);
        } else if (toks[0] == "edge") {
            need(toks.size() == 3 || (toks.size() == 5 && toks[3] == "w"), "expected `edge <a> <b> [w <r>]`");
            Weight w = Weight(1);
            if (toks.size() == 5) {
                try {
                    w = Weight::parse(toks[4]);
                } catch (const std::invalid_argument& ex) {
                    throw parse_error(lineno, ex.what());
                }
            }
            g.add_edge(vid(toks[1]), vid(toks[2]), w);
        } else {
            throw parse_error(lineno, "unknown record " + toks[0]);
        }
    }
    need(header, "missing `graph 1 ...` header");
    return g;
}

inline WeightedGraph parse_graph(const std::string& text) {
    std::istringstream in(text);
    return parse_graph(in);
}

inline void write_graph(std::ostream& os, const WeightedGraph& g) {
    os << "graph 1 " << (g.directed ? "directed" : "undirected") << "\n";
    for (const auto& name : g.names) os << "vertex " << name << "\n";
    for (const auto& e : g.edges)
        os << "edge " << g.names[e.u] << " " << g.names[e.v] << " w " << e.w.str() << "\n";
}

inline void write_instantiation(std::ostream& os, const Model& m, const Instantiation& inst) {
    write_graph(os, inst.to_graph(m));
}

/// Rooted tree pattern format:
///   tree 1
///   node <id>
///   child <parent> <id>
struct TreePatternFile {
    std::vector<std::string> node_names;
    std::vector<int> parent;  // -1 for the root
};

inline TreePatternFile parse_tree(std::istream& in) {
    TreePatternFile t;
    std::map<std::string, int> ids;
    std::string line;
    int lineno = 0;
    bool header = false;
    auto need = [&](bool cond, const std::string& msg) {
        if (!cond) throw parse_error(lineno, msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = detail::tokenize(line);
        if (toks.empty()) continue;
        if (!header) {
            need(toks.size() == 2 && toks[0] == "tree" && toks[1] == "1", "expected `tree 1`");
            header = true;
            continue;
        }
        if (toks[0] == "node") {
            need(toks.size() == 2, "expected `node <id>`");
            need(!ids.count(toks[1]), "duplicate node " + toks[1]);
            ids[toks[1]] = (int)t.node_names.size();
            t.node_names.push_back(toks[1]);
            t.parent.push_back(-1);
        } else if (toks[0] == "child") {
            need(toks.size() == 3, "expected `child <parent> <id>`");
            need(ids.count(toks[1]) && ids.count(toks[2]), "unknown node in child record");
            int c = ids[toks[2]];
            need(t.parent[c] == -1 && c != 0, "node already attached: " + toks[2]);
            t.parent[c] = ids[toks[1]];
        } else {
            throw parse_error(lineno, "unknown record " + toks[0]);
        }
    }
    need(header, "missing `tree 1` header");
    int roots = 0;
    for (int p : t.parent) roots += p == -1;
    need(roots == 1, "pattern must have exactly one root");
    return t;
}

inline TreePatternFile parse_tree(const std::string& text) {
    std::istringstream in(text);
    return parse_tree(in);
}

/// Tree decomposition format:
///   td 1
///   bag <id> v1 v2 ...
///   link <parent> <child>
struct TreeDecompositionFile {
    std::vector<std::string> bag_names;
    std::vector<std::vector<std::string>> bags;
    std::vector<std::pair<std::string, std::string>> links;
};

inline TreeDecompositionFile parse_td(std::istream& in) {
    TreeDecompositionFile t;
    std::string line;
    int lineno = 0;
    bool header = false;
    auto need = [&](bool cond, const std::string& msg) {
        if (!cond) throw parse_error(lineno, msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = detail::tokenize(line);
        if (toks.empty()) continue;
        if (!header) {
            need(toks.size() == 2 && toks[0] == "td" && toks[1] == "1", "expected `td 1`");
            header = true;
            continue;
        }
        if (toks[0] == "bag") {
            need(toks.size() >= 2, "expected `bag <id> v1 ...`");
            t.bag_names.push_back(toks[1]);
            t.bags.emplace_back(toks.begin() + 2, toks.end());
        } else if (toks[0] == "link") {
            need(toks.size() == 3, "expected `link <parent> <child>`");
            t.links.emplace_back(toks[1], toks[2]);
        } else {
            throw parse_error(lineno, "unknown record " + toks[0]);
        }
    }
    need(header, "missing `td 1` header");
    return t;
}

inline TreeDecompositionFile parse_td(const std::string& text) {
    std::istringstream in(text);
    return parse_td(in);
}

}  // namespace pgt
