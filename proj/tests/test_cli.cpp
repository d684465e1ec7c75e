#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using hdks::cli::dispatch;
using json = nlohmann::ordered_json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = dispatch(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args, int expected = 0) {
    const Run r = run(std::move(args));
    INFO(r.err);
    REQUIRE(r.code == expected);
    return json::parse(r.out);
}

}  // namespace

TEST_CASE("transform prints the Kruskal image of the bifurcation-time point") {
    const Run r = run({"transform", "--from", "hd", "--to", "ks", "--mu", "1", "--region", "R_II_plus", "--point",
                       "t=0,r=2"});
    CHECK(r.code == 0);
    CHECK(r.out == "u=2.718282 v=2.718282\n");
    const Run back = run({"transform", "--from", "ks", "--to", "hd", "--mu", "1", "--point", "u=2.718281828,v=2.718281828"});
    CHECK(back.code == 0);
    CHECK(back.out.find("r=2.000000") != std::string::npos);
}

TEST_CASE("transform reports horizon and domain errors as usage errors") {
    CHECK(run({"transform", "--from", "ks", "--to", "hd", "--point", "u=0,v=1"}).code == 2);
    CHECK(run({"transform", "--from", "hd", "--to", "ks", "--region", "R_II_plus", "--point", "t=0,r=0.5"}).code == 2);
}

TEST_CASE("usage errors and help") {
    CHECK(run({"verify", "--chart", "hd", "--bogus"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"verify", "--chart", "nope"}).code == 2);
    CHECK(run({"verify", "--chart", "hd", "--mu", "-1"}).code == 2);
    CHECK(run({"verify", "--chart", "hd", "--grid", "r=2:1"}).code == 2);
    const Run h = run({"verify", "--help"});
    CHECK(h.code == 0);
    CHECK(h.out.find("--chart") != std::string::npos);
}

TEST_CASE("verify passes on vacuum charts and flags the printed forms") {
    for (const std::string id : {"hd", "ks", "schwarzschild_unimodular", "uniquely2", "er_bridge"}) {
        const json j = run_json({"verify", "--chart", id});
        CHECK(j["tool"] == "hdks");
        CHECK(j["command"] == "verify");
        CHECK(j["result"]["max_residual"].get<double>() < 1e-5);
    }
    for (const std::string id : {"lemaitre_paper", "kruskal_xy", "er_bridge_paper"}) {
        const json j = run_json({"verify", "--chart", id}, 1);
        CHECK(j["result"]["max_residual"].get<double>() > 0.1);
    }
}

TEST_CASE("verify csv has one row per grid point") {
    const Run r = run({"verify", "--chart", "hd", "--grid", "t=0:1:2,r=2:3:3", "--format", "csv"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "index,t,r,theta,phi,ricci_residual,status");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 6);
}

TEST_CASE("trace records the horizon crossing in Kruskal coordinates") {
    const json j = run_json({"trace", "--chart", "ks", "--init", "u=0.5,v=0.5,du=0,dv=-1"});
    CHECK(j["result"]["termination"] == "curvature_blowup");
    CHECK(j["result"]["horizon_crossed"] == true);
    const json h = run_json({"trace", "--chart", "hd", "--init", "t=0,r=3,dr=-1", "--null"});
    CHECK(h["result"]["termination"] == "domain_exit");
}

TEST_CASE("embed and curvature reports") {
    const json f = run_json({"embed", "--map", "fronsdal", "--branch", "both"});
    CHECK(f["result"]["max_pullback_relative"].get<double>() < 1e-6);
    const json p = run_json({"embed", "--map", "fronsdal", "--integrand", "fronsdal_paper"}, 1);
    CHECK(p["result"]["max_pullback_relative"].get<double>() > 0.1);
    const json c = run_json({"curvature"});
    CHECK(c["result"]["max_mismatch"].get<double>() < 1e-6);
}

TEST_CASE("topology reports carry the documented keys") {
    const json hd = run_json({"topology", "--space", "hd"});
    for (const char* k : {"space", "query", "points", "result", "budget_exhausted", "hops_tried", "certificate",
                          "resolution"})
        CHECK(hd["result"].contains(k));
    CHECK(hd["result"]["result"] == "not_found");
    const json ks = run_json({"topology", "--space", "ks"});
    CHECK(ks["result"]["result"] == "path");
    CHECK(ks["result"]["path_verified"] == true);
    const json w = run_json({"topology", "--query", "hausdorff", "--sequences", "500"});
    CHECK(w["result"]["result"] == "witness");
    const json b = run_json({"topology", "--space", "er", "--query", "bridge", "--mu", "3"});
    CHECK(b["result"]["homothety"].get<double>() == Catch::Approx(3.0).epsilon(1e-9));
    CHECK(b["result"]["glued_regions"] == 1);
}

TEST_CASE("conformance lists every discrepancy") {
    const json j = run_json({"conformance"});
    const auto& e = j["result"]["entries"];
    std::set<std::string> ids;
    for (const auto& x : e) {
        ids.insert(x["id"].get<std::string>());
        CHECK(x.contains("paper_form"));
        CHECK(x.contains("alternative_form"));
        CHECK(x["measured"].is_object());
    }
    CHECK(ids == std::set<std::string>{"eddington_cross_sign", "lemaitre_constant", "kruskal_xy_profile", "er_factor",
                                       "coderivatives_sign", "kasner_signature", "ks_sectional_sign",
                                       "fronsdal_integrand"});
}

TEST_CASE("config files supply defaults and the command line wins") {
    const std::string path = "hdks_test_config.cfg";
    {
        std::ofstream f(path);
        f << "# transform defaults\nfrom = hd\nto = ks\nregion = R_II_plus\nmu = 2\n";
    }
    CHECK(run({"transform", "--config", path, "--point", "t=0,r=4"}).out == "u=3.844231 v=3.844231\n");
    CHECK(run({"transform", "--config", path, "--mu", "1", "--point", "t=0,r=2"}).out == "u=2.718282 v=2.718282\n");
    {
        std::ofstream f(path);
        f << "colour = blue\n";
    }
    CHECK(run({"transform", "--config", path, "--point", "t=0,r=2"}).code == 2);
    std::remove(path.c_str());
}

TEST_CASE("reports are reproducible and independent of the worker count") {
    const std::vector<std::string> base{"verify", "--chart", "ks", "--grid", "u=-1:1:6,v=-1:1:6"};
    const Run a = run(base), b = run(base);
    CHECK(a.out == b.out);
    auto with_jobs = [&](const char* n) {
        auto args = base;
        args.insert(args.end(), {"--jobs", n});
        json j = json::parse(run(args).out);
        return j["result"].dump();
    };
    CHECK(with_jobs("1") == with_jobs("4"));
    CHECK(a.err.find("wall_clock_s=") != std::string::npos);
    CHECK(a.out.find("wall_clock") == std::string::npos);
}
