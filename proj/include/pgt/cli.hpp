#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgt/discovery.hpp"
#include "pgt/instance_iso.hpp"
#include "pgt/instantiate.hpp"
#include "pgt/io.hpp"
#include "pgt/max_flow.hpp"
#include "pgt/min_cut.hpp"
#include "pgt/model.hpp"
#include "pgt/oracles.hpp"
#include "pgt/siblings.hpp"
#include "pgt/transforms.hpp"
#include "pgt/tree_match.hpp"

namespace pgt {
namespace cli {

using nlohmann::json;

struct Options {
    std::uint64_t seed = 0;
    long long budget = kDefaultInstantiationBudget;
    int trials = 0;  // 0 = derive from the pattern size
    bool json_mode = false;
    std::string output_path;
};

namespace detail {

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void emit(std::ostream& out, const Options& opt, const json& payload,
                 const std::string& text) {
    if (opt.json_mode)
        out << payload.dump() << "\n";
    else
        out << text;
}

inline void write_payload(std::ostream& out, const Options& opt, const std::string& body) {
    if (!opt.output_path.empty()) {
        std::ofstream f(opt.output_path);
        if (!f) throw std::runtime_error("cannot write " + opt.output_path);
        f << body;
    } else if (opt.json_mode) {
        out << json{{"pgt", body}}.dump() << "\n";
    } else {
        out << body;
    }
}

// `name` or `name@i1.i2...`; a bare name means the all-zero instance
inline std::pair<VertexId, std::vector<long long>> parse_instance(const Model& m,
                                                                  const std::string& instance_text) {
    auto at = instance_text.find('@');
    std::string name = at == std::string::npos ? instance_text : instance_text.substr(0, at);
    VertexId v = m.vertex(name);
    std::vector<long long> addr(m.template_chain(v).size() - 1, 0);
    if (at != std::string::npos && at + 1 < instance_text.size()) {
        addr.clear();
        std::string rest = instance_text.substr(at + 1);
        size_t pos = 0;
        while (pos <= rest.size()) {
            size_t dot = rest.find('.', pos);
            std::string tok = rest.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
            addr.push_back(std::stoll(tok));
            if (dot == std::string::npos) break;
            pos = dot + 1;
        }
    }
    return {v, addr};
}

inline TreePattern load_pattern(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    TreePatternFile f = parse_tree(in);
    return TreePattern::from_parents(f.node_names, f.parent);
}

inline TreeDecomposition load_td(const WeightedGraph& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    TreeDecompositionFile f = parse_td(in);
    TreeDecomposition d;
    std::map<std::string, int> ids;
    for (size_t i = 0; i < f.bags.size(); ++i) {
        ids[f.bag_names[i]] = (int)i;
        std::vector<int> bag;
        for (const auto& name : f.bags[i]) bag.push_back(g.vertex(name));
        d.bags.push_back(bag);
    }
    d.parent.assign(d.bags.size(), -1);
    d.children.assign(d.bags.size(), {});
    for (auto& [p, c] : f.links) {
        if (!ids.count(p) || !ids.count(c)) throw std::runtime_error("unknown bag in link");
        d.parent[ids[c]] = ids[p];
        d.children[ids[p]].push_back(ids[c]);
    }
    for (size_t i = 0; i < d.bags.size(); ++i)
        if (d.parent[i] < 0) d.root = (int)i;
    return d;
}

inline Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return Model(parse_pgt(in));
}

inline WeightedGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_graph(in);
}

inline std::string names_line(const std::set<std::string>& names) {
    std::string s;
    for (const auto& n : names) s += " " + n;
    return s;
}

// self-audit used by every --oracle runner
inline int report_agreement(std::ostream& out, const Options& opt, json& payload,
                            std::string& text, bool agree) {
    payload["agree"] = agree;
    text += std::string("agree ") + (agree ? "true" : "false") + "\n";
    emit(out, opt, payload, text);
    return agree ? 0 : 1;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"parametric graph template toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global options are accepted after the subcommand too

    Options opt;
    if (const char* env = std::getenv("PGT_BUDGET")) opt.budget = std::atoll(env);
    app.add_option("--seed", opt.seed, "seed for randomized algorithms");
    app.add_option("--budget", opt.budget, "instantiation vertex budget");
    app.add_option("--trials", opt.trials, "color-coding repetitions (0 = auto)");
    bool json_mode = false;
    app.add_flag("--json", json_mode, "json-lines output");
    std::string format;
    app.add_option("--format", format, "text|json")->check(CLI::IsMember({"text", "json"}));
    app.add_option("-o,--output", opt.output_path, "write the result file here");

    std::string file, pattern_path, td_path, template_name, graph_path, model_path;
    std::string source, sink, mode = "all", dp_mode = "exact", discover_mode = "first";
    bool oracle = false, certify = false, naive = false;
    int k_paths = 1, length = 1, beta_max = 2;
    long long min_param = 2;

    auto* c_validate = app.add_subcommand("validate", "check the model rules");
    c_validate->add_option("file", file)->required();

    auto* c_inst = app.add_subcommand("instantiate", "expand the model explicitly");
    c_inst->add_option("file", file)->required();

    auto* c_flow = app.add_subcommand("flow", "maximum all- or single-instance flow");
    c_flow->add_option("--mode", mode)->check(CLI::IsMember({"all", "single"}));
    c_flow->add_option("--source", source)->required();
    c_flow->add_option("--sink", sink)->required();
    c_flow->add_flag("--oracle", oracle);
    c_flow->add_option("file", file)->required();

    auto* c_cut = app.add_subcommand("mincut", "global minimum cut");
    c_cut->add_flag("--oracle", oracle);
    c_cut->add_option("file", file)->required();

    auto* c_match = app.add_subcommand("match-tree", "tree subgraph isomorphism");
    c_match->add_option("--pattern", pattern_path)->required();
    c_match->add_flag("--certify", certify);
    c_match->add_flag("--oracle", oracle);
    c_match->add_option("file", file)->required();

    auto* c_paths = app.add_subcommand("disjoint-paths", "vertex-disjoint bounded-length paths");
    c_paths->add_option("--source", source)->required();
    c_paths->add_option("--sink", sink)->required();
    c_paths->add_option("-k", k_paths)->required();
    c_paths->add_option("-L", length)->required();
    c_paths->add_option("--mode", dp_mode)->check(CLI::IsMember({"exact", "atmost"}));
    c_paths->add_flag("--oracle", oracle);
    c_paths->add_option("file", file)->required();

    auto* c_bfs = app.add_subcommand("bfs", "parametric BFS tree");
    c_bfs->add_option("--root", source)->required();
    c_bfs->add_flag("--oracle", oracle);
    c_bfs->add_option("file", file)->required();

    auto* c_sssp = app.add_subcommand("sssp", "parametric shortest-path tree");
    c_sssp->add_option("--root", source)->required();
    c_sssp->add_flag("--oracle", oracle);
    c_sssp->add_option("file", file)->required();

    auto* c_comp = app.add_subcommand("components", "connected components of the instantiation");
    c_comp->add_flag("--oracle", oracle);
    c_comp->add_option("file", file)->required();

    auto* c_ret = app.add_subcommand("retemplate", "move shifts off a spanning tree");
    c_ret->add_option("--template", template_name)->required();
    c_ret->add_flag("--oracle", oracle);
    c_ret->add_option("file", file)->required();

    auto* c_disc = app.add_subcommand("discover", "find templates that instantiate a graph");
    c_disc->add_option("--beta-max", beta_max);
    c_disc->add_option("--mode", discover_mode)->check(CLI::IsMember({"first", "all"}));
    c_disc->add_option("--min-param", min_param);
    c_disc->add_option("file", graph_path)->required();

    auto* c_iso = app.add_subcommand("iso", "decide instance isomorphism");
    c_iso->add_option("--template", model_path)->required();
    c_iso->add_option("--target", graph_path)->required();
    c_iso->add_option("--decomposition", td_path);
    c_iso->add_flag("--naive", naive);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 2;
    }
    opt.json_mode = json_mode || format == "json";

    try {
        if (*c_validate) {
            std::ifstream in(file);
            if (!in) throw std::runtime_error("cannot open " + file);
            auto report = validate(parse_pgt(in));
            json payload{{"ok", report.ok()}};
            std::string text = report.ok() ? "ok\n" : report.str();
            if (!report.ok()) {
                json v = json::array();
                for (const auto& x : report.violations) v.push_back({{"rule", x.rule}, {"subject", x.subject}});
                payload["violations"] = v;
            }
            detail::emit(out, opt, payload, text);
            return report.ok() ? 0 : 1;
        }
        if (*c_inst) {
            Model m = detail::load_model(file);
            Instantiation inst = instantiate(m, opt.budget);
            std::ostringstream body;
            write_instantiation(body, m, inst);
            detail::write_payload(out, opt, body.str());
            return 0;
        }
        if (*c_flow) {
            Model m = detail::load_model(file);
            auto [s, s_addr] = detail::parse_instance(m, source);
            auto [t, t_addr] = detail::parse_instance(m, sink);
            FlowResult r = mode == "all" ? max_all_st_flow(m, s, t)
                                         : max_single_st_flow(m, s, s_addr, t, t_addr);
            json payload{{"value", r.value.str()}};
            auto side = r.source_side_names();
            payload["cut"] = side;
            std::string text = "value " + r.value.str() + "\ncut" + detail::names_line(side) + "\n";
            if (!oracle) {
                detail::emit(out, opt, payload, text);
                return 0;
            }
            Instantiation inst = instantiate(m, opt.budget);
            Weight reference;
            if (mode == "all") {
                reference = oracle::flow(m, inst, oracle::instances_of(inst, s),
                                         oracle::instances_of(inst, t));
            } else {
                reference = oracle::flow(m, inst, {oracle::instance_at(inst, s, s_addr)},
                                         {oracle::instance_at(inst, t, t_addr)});
            }
            payload["oracle"] = reference.str();
            text += "oracle " + reference.str() + "\n";
            return detail::report_agreement(out, opt, payload, text, reference == r.value);
        }
        if (*c_cut) {
            Model m = detail::load_model(file);
            CutResult r = min_cut(m);
            json payload{{"value", r.value.str()},
                         {"case", CutResult::case_name(r.case_tag)},
                         {"template", r.tmpl},
                         {"side", r.inside}};
            std::string text = "value " + r.value.str() + "\ncase " +
                               CutResult::case_name(r.case_tag) + "\ntemplate " + r.tmpl +
                               "\nside" + detail::names_line(r.inside) + "\n";
            if (!oracle) {
                detail::emit(out, opt, payload, text);
                return 0;
            }
            Instantiation inst = instantiate(m, opt.budget);
            Weight reference = oracle::mincut(m, inst);
            Weight witness_value = evaluate_cut_witness(m, inst, r);
            payload["oracle"] = reference.str();
            payload["witness_value"] = witness_value.str();
            text += "oracle " + reference.str() + "\nwitness_value " + witness_value.str() + "\n";
            bool agree = reference == r.value && witness_value == r.value;
            return detail::report_agreement(out, opt, payload, text, agree);
        }
        if (*c_match) {
            Model m = detail::load_model(file);
            TreePattern pattern = detail::load_pattern(pattern_path);
            int trials = opt.trials > 0 ? opt.trials : default_trials(pattern.size());
            OccursResult r = occurs(m, pattern, trials, opt.seed);
            json roots = json::object();
            std::string text = std::string("found ") + (r.found ? "true" : "false") + "\n";
            for (auto& [v, hit] : r.per_root) {
                roots[m.vertex_name(v)] = hit;
                text += "root " + m.vertex_name(v) + (hit ? " true" : " false") + "\n";
            }
            json payload{{"found", r.found}, {"roots", roots}};
            if (certify) {
                json maps = json::object();
                for (auto& [v, w] : r.witnesses) {
                    json wmap = json::object();
                    for (int p = 0; p < pattern.size(); ++p) {
                        if (w.origin[p] < 0) continue;
                        std::string label = m.vertex_name(w.origin[p]) + "@";
                        for (size_t i = 0; i < w.address[p].size(); ++i)
                            label += (i ? "." : "") + std::to_string(w.address[p][i]);
                        wmap[pattern.names[p]] = label;
                        text += "map " + m.vertex_name(v) + " " + pattern.names[p] + " " + label + "\n";
                    }
                    maps[m.vertex_name(v)] = wmap;
                }
                payload["witnesses"] = maps;
            }
            if (!oracle) {
                detail::emit(out, opt, payload, text);
                return 0;
            }
            Instantiation inst = instantiate(m, opt.budget);
            oracle::Pattern opat;
            opat.parent = pattern.parent;
            bool agree = true;
            for (auto& [v, hit] : r.per_root) {
                bool expected = oracle::tree_occurs(inst, opat, v);
                if (expected != hit) agree = false;
            }
            return detail::report_agreement(out, opt, payload, text, agree);
        }
        if (*c_paths) {
            Model m = detail::load_model(file);
            VertexId s = m.vertex(source), t = m.vertex(sink);
            PathMode pm = dp_mode == "exact" ? PathMode::exactly : PathMode::at_most;
            bool found = disjoint_paths(m, s, t, k_paths, length, pm, opt.trials, opt.seed);
            json payload{{"found", found}};
            std::string text = std::string("found ") + (found ? "true" : "false") + "\n";
            if (!oracle) {
                detail::emit(out, opt, payload, text);
                return 0;
            }
            Instantiation inst = instantiate(m, opt.budget);
            bool expected =
                oracle::disjoint_paths(inst, s, t, k_paths, length, pm == PathMode::exactly);
            payload["oracle"] = expected;
            text += std::string("oracle ") + (expected ? "true" : "false") + "\n";
            return detail::report_agreement(out, opt, payload, text, expected == found);
        }
        if (*c_bfs || *c_sssp) {
            bool weighted = (bool)*c_sssp;
            Model m = detail::load_model(file);
            VertexId s = m.vertex(source);
            Model tree = weighted ? sssp_template(m, s) : bfs_template(m, s);
            std::string body = pgt_to_string(tree.data());
            if (!oracle) {
                detail::write_payload(out, opt, body);
                return 0;
            }
            // arborescence + span check against the explicit instantiation
            Instantiation tinst = instantiate(tree, opt.budget);
            std::map<int, int> indeg;
            for (const auto& e : tinst.edges) indeg[e.head]++;
            bool arborescence = tinst.edges.size() + 1 == tinst.vertices.size();
            for (auto& [v, d] : indeg) arborescence &= d <= 1;
            Instantiation oinst = instantiate(m, opt.budget);
            WeightedGraph og = oinst.to_graph(m);
            int start = -1;
            for (int i = 0; i < og.size(); ++i)
                if (oinst.vertices[i].origin == s &&
                    std::all_of(oinst.vertices[i].address.begin(), oinst.vertices[i].address.end(),
                                [](long long z) { return z == 0; }))
                    start = i;
            std::vector<std::vector<int>> adj(og.size());
            for (const auto& e : og.edges) adj[e.u].push_back(e.v);
            std::vector<bool> seen(og.size(), false);
            std::vector<int> stack{start};
            seen[start] = true;
            long long reach = 1;
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (int w : adj[u])
                    if (!seen[w]) {
                        seen[w] = true;
                        ++reach;
                        stack.push_back(w);
                    }
            }
            bool spans = (long long)tinst.vertices.size() == reach;
            json payload{{"pgt", body}, {"arborescence", arborescence}, {"spans", spans}};
            std::string text = body + std::string("arborescence ") +
                               (arborescence ? "true" : "false") + "\nspans " +
                               (spans ? "true" : "false") + "\n";
            return detail::report_agreement(out, opt, payload, text, arborescence && spans);
        }
        if (*c_comp) {
            Model m = detail::load_model(file);
            long long got = connected_components(m);
            json payload{{"components", got}};
            std::string text = "components " + std::to_string(got) + "\n";
            if (!oracle) {
                detail::emit(out, opt, payload, text);
                return 0;
            }
            long long expected = oracle::components(instantiate(m, opt.budget));
            payload["oracle"] = expected;
            text += "oracle " + std::to_string(expected) + "\n";
            return detail::report_agreement(out, opt, payload, text, got == expected);
        }
        if (*c_ret) {
            Model m = detail::load_model(file);
            Model rt = retemplate(m, m.template_id(template_name));
            std::string body = pgt_to_string(rt.data());
            if (!oracle) {
                detail::write_payload(out, opt, body);
                return 0;
            }
            WeightedGraph a = instantiate(m, opt.budget).to_graph(m);
            WeightedGraph b = instantiate(rt, opt.budget).to_graph(rt);
            bool agree = canonical_form(a, nullptr, true) == canonical_form(b, nullptr, true);
            json payload{{"pgt", body}};
            std::string text = body;
            return detail::report_agreement(out, opt, payload, text, agree);
        }
        if (*c_disc) {
            WeightedGraph target = detail::load_graph(graph_path);
            DiscoveryConfig cfg;
            cfg.beta_max = beta_max;
            cfg.min_param = min_param;
            cfg.first_only = discover_mode == "first";
            auto models = discover(target, cfg);
            std::string text;
            json list = json::array();
            for (size_t i = 0; i < models.size(); ++i) {
                std::string body = pgt_to_string(models[i]);
                list.push_back(body);
                text += "# model " + std::to_string(i) + "\n" + body;
                if (!opt.output_path.empty()) {
                    std::ofstream f(opt.output_path + std::to_string(i) + ".pgt");
                    if (!f) throw std::runtime_error("cannot write " + opt.output_path);
                    f << body;
                }
            }
            json payload{{"models", list}};
            detail::emit(out, opt, payload, text);
            return 0;
        }
        if (*c_iso) {
            Model m = detail::load_model(model_path);
            WeightedGraph target = detail::load_graph(graph_path);
            bool result;
            if (naive) {
                result = naive_instance_iso(m, target, opt.budget);
            } else {
                TreeDecomposition d = td_path.empty() ? tree_decomposition(target)
                                                      : detail::load_td(target, td_path);
                result = instance_iso_decide(m, target, d);
            }
            json payload{{"isomorphic", result}};
            detail::emit(out, opt, payload, result ? "isomorphic true\n" : "isomorphic false\n");
            return 0;
        }
    } catch (const validation_error& e) {
        err << "error: " << e.what();
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "usage error: no subcommand\n";
    return 2;
}

}  // namespace cli
}  // namespace pgt
