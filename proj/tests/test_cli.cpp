#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pgt/cli.hpp"
#include "support.hpp"

using namespace pgt;

namespace {

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& body) {
    auto dir = std::filesystem::temp_directory_path() / "pgt_cli_tests";
    std::filesystem::create_directories(dir);
    std::string path = (dir / name).string();
    std::ofstream f(path);
    f << body;
    return path;
}

const char* kStar3 = R"(pgt 1 directed
template T0 parent - param 1
template C parent T0 param 3
vertex s in T0
vertex t in T0
vertex v in C
edge s v
edge v t
)";

const char* kStar5 = R"(pgt 1 undirected
template T0 parent - param 1
template C parent T0 param 5
vertex r in T0
vertex v in C
edge r v
)";

}  // namespace

TEST_CASE("cli validate") {
    auto fig1 = write_temp("fig1.pgt", pgt_to_string(pgt_test::fig1_data()));
    auto r = run_cli({"validate", fig1});
    CHECK(r.code == 0);
    CHECK(r.out == "ok\n");

    auto bad = write_temp("bad.pgt", "pgt 1 directed\ntemplate A parent - param 2\nvertex x in A\n");
    auto rb = run_cli({"validate", bad});
    CHECK(rb.code == 1);
    CHECK(rb.out.find("bad parameter") != std::string::npos);
}

TEST_CASE("cli usage errors exit with 2") {
    auto r = run_cli({"flow", "--mode", "all", "nosuch.pgt"});
    CHECK(r.code == 2);  // missing required --source/--sink
    auto r2 = run_cli({"nonsense"});
    CHECK(r2.code == 2);
}

TEST_CASE("cli flow prints the exact value") {
    auto star = write_temp("star3.pgt", kStar3);
    auto r = run_cli({"flow", "--mode", "all", "--source", "s", "--sink", "t", star});
    CHECK(r.code == 0);
    CHECK(r.out.find("value 3\n") == 0);

    auto ro = run_cli({"flow", "--mode", "all", "--source", "s", "--sink", "t", "--oracle", star});
    CHECK(ro.code == 0);
    CHECK(ro.out.find("agree true") != std::string::npos);

    auto rs = run_cli({"flow", "--mode", "single", "--source", "s", "--sink", "t@", "--oracle", star});
    CHECK(rs.code == 0);
}

TEST_CASE("cli mincut self-audits against the oracle") {
    auto star = write_temp("star5.pgt", kStar5);
    auto r = run_cli({"mincut", "--oracle", star});
    CHECK(r.code == 0);
    CHECK(r.out.find("value 1\n") == 0);
    CHECK(r.out.find("oracle 1") != std::string::npos);
    CHECK(r.out.find("agree true") != std::string::npos);
}

TEST_CASE("cli output is byte-identical across runs") {
    auto star = write_temp("star3b.pgt", kStar3);
    auto pat = write_temp("pat.tree", "tree 1\nnode r\nnode a\nchild r a\n");
    std::vector<std::string> argsets[] = {
        {"flow", "--mode", "all", "--source", "s", "--sink", "t", star},
        {"instantiate", star},
        {"match-tree", "--pattern", pat, "--seed", "42", star},
        {"mincut", write_temp("star5b.pgt", kStar5)},
    };
    for (auto& args : argsets) {
        auto a = run_cli(args);
        auto b = run_cli(args);
        CHECK(a.code == b.code);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("cli instantiate respects the budget") {
    auto star = write_temp("star3c.pgt", kStar3);
    auto r = run_cli({"--budget", "2", "instantiate", star});
    CHECK(r.code == 1);
    CHECK(r.err.find("budget") != std::string::npos);
}

TEST_CASE("cli json mode emits one object per run") {
    auto star = write_temp("star3d.pgt", kStar3);
    auto r = run_cli({"--json", "flow", "--mode", "all", "--source", "s", "--sink", "t", star});
    CHECK(r.code == 0);
    auto payload = nlohmann::json::parse(r.out);
    CHECK(payload["value"] == "3");
}

TEST_CASE("cli iso and discover round trip") {
    auto star = write_temp("k12.el", "graph 1 undirected\nvertex r\nvertex a\nvertex b\nedge r a\nedge r b\n");
    auto r = run_cli({"discover", "--beta-max", "1", star});
    REQUIRE(r.code == 0);
    // feed the first discovered model back through iso
    auto pos = r.out.find("pgt 1");
    REQUIRE(pos != std::string::npos);
    auto end = r.out.find("# model", pos);
    auto model = write_temp("disc0.pgt", r.out.substr(pos, end == std::string::npos
                                                               ? std::string::npos
                                                               : end - pos));
    auto ri = run_cli({"iso", "--template", model, "--target", star});
    CHECK(ri.code == 0);
    CHECK(ri.out == "isomorphic true\n");
    auto rn = run_cli({"iso", "--template", model, "--target", star, "--naive"});
    CHECK(rn.out == "isomorphic true\n");
}
