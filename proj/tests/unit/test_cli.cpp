#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "signas/error.hpp"
#include "signas/wfdb.hpp"

using namespace signas;
namespace fs = std::filesystem;

namespace {

struct Capture {
    std::ostringstream buf;
    std::streambuf* old;
    Capture() : old(std::cout.rdbuf(buf.rdbuf())) {}
    ~Capture() { std::cout.rdbuf(old); }
};

int run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--log-level", "off"});
    return cli::run(args);
}

std::pair<int, std::string> run_captured(std::vector<std::string> args) {
    Capture c;
    const int code = run(std::move(args));
    return {code, c.buf.str()};
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("signas-cli-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::string first_row(const fs::path& csv) {
    std::ifstream in(csv);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    return row.substr(0, row.find(','));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("space list") {
    auto [code, out] = run_captured({"space", "list"});
    CHECK(code == 0);
    CHECK(lines(out) == 321);
    auto [code2, small] = run_captured({"space", "list", "--s-const-bytes", "500000"});
    CHECK(code2 == 0);
    CHECK(lines(small) < lines(out));
    CHECK(lines(small) == 1 + filter_by_storage(enumerate(), 500000).size());
}

TEST_CASE("describe agrees across commands") {
    auto [a, space] = run_captured({"space", "describe", "--arch", "B=3,x=2,z=5"});
    auto [b, net] = run_captured({"netmodel", "describe", "--arch", "B=3,x=2,z=5"});
    CHECK(a == 0);
    CHECK(b == 0);
    CHECK(space == net);
    CHECK(space.find("total,,,," + std::to_string(build({3, 2, 5}).param_count)) != std::string::npos);
    CHECK(run({"netmodel", "describe", "--arch", "B=3,x=9,z=5"}) == cli::exit_usage);
}

TEST_CASE("usage errors") {
    CHECK(run({"bogus"}) == cli::exit_usage);
    CHECK(run({"search", "--engine", "hill-climb", "--out", scratch("usage").string()}) == cli::exit_usage);
    CHECK(run({"search", "--alpha", "-1", "--out", scratch("usage").string()}) == cli::exit_usage);
}

TEST_CASE("search artifacts") {
    auto dir = scratch("search");
    REQUIRE(run({"search", "--engine", "exhaustive", "--alpha", "1", "--beta", "0", "--out", dir.string()}) == 0);
    for (auto f : {"evaluated.csv", "pareto.csv", "omega.csv", "manifest.json"}) CHECK(fs::exists(dir / f));
    CHECK(lines(slurp(dir / "evaluated.csv")) == 321);

    // the top row of an alpha=1 run is the most accurate member
    SurrogateEvaluator sur(NetConfig{}, 1);
    ArchParams best{};
    double q = -1;
    for (const auto& a : enumerate()) {
        const double v = sur.evaluate(a).accuracy;
        if (v > q) {
            q = v;
            best = a;
        }
    }
    CHECK(first_row(dir / "evaluated.csv") == encode(best).to_string());

    auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["config"]["seed"] == 1);
    CHECK_FALSE(manifest["config"].contains("out"));

    auto constrained = scratch("search-s");
    REQUIRE(run({"search", "--engine", "exhaustive", "--s-const-bytes", "400000", "--out", constrained.string()}) == 0);
    CHECK(lines(slurp(constrained / "evaluated.csv")) == 1 + filter_by_storage(enumerate(), 400000).size());
}

TEST_CASE("search is reproducible from its manifest") {
    auto a = scratch("repro-a");
    auto b = scratch("repro-b");
    REQUIRE(run({"search", "--engine", "spea2", "--seed", "4", "--out", a.string()}) == 0);
    auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    std::ofstream(b / "config.json") << manifest["config"].dump();
    REQUIRE(run({"search", "--config", (b / "config.json").string(), "--out", (b / "run").string()}) == 0);
    for (auto f : {"evaluated.csv", "pareto.csv", "omega.csv", "manifest.json"})
        CHECK(slurp(a / f) == slurp(b / "run" / f));
}

TEST_CASE("config file and overrides") {
    auto dir = scratch("config");
    std::ofstream(dir / "cfg.json") << R"({"engine":"random","ga":{"random_fraction":0.2},"seed":9})";
    REQUIRE(run({"search", "--config", (dir / "cfg.json").string(), "--out", (dir / "a").string()}) == 0);
    CHECK(lines(slurp(dir / "a" / "evaluated.csv")) == 65);
    REQUIRE(run({"search", "--config", (dir / "cfg.json").string(), "--engine", "exhaustive", "--out",
                 (dir / "b").string()}) == 0);
    CHECK(lines(slurp(dir / "b" / "evaluated.csv")) == 321);
    std::ofstream(dir / "bad.json") << R"({"engin":"random"})";
    CHECK(run({"search", "--config", (dir / "bad.json").string(), "--out", (dir / "c").string()}) == cli::exit_usage);

    cli::RunConfig cfg;
    CHECK_THROWS_AS(cli::merge_config(cfg, R"({"ga":{"populaton_size":3}})"), DomainError);
    cli::merge_config(cfg, R"({"constraints":{"q_const":0.9,"metric":"recall:Anomaly"}})");
    CHECK(cfg.constraints.q_const == 0.9);
    CHECK(cfg.constraints.metric.target_class == "Anomaly");
}

TEST_CASE("search exit codes") {
    auto dir = scratch("codes");
    CHECK(run({"search", "--s-const-bytes", "0", "--out", (dir / "a").string()}) == cli::exit_empty_space);
    CHECK(run({"search", "--engine", "exhaustive", "--q-const", "0.999", "--out", (dir / "b").string()}) ==
          cli::exit_unsatisfiable);
    CHECK(fs::exists(dir / "b" / "pareto.csv"));

    const std::string fail = std::string("external:") + ECHO_TRAINER + " fail";
    CHECK(run({"search", "--evaluator", fail, "--out", (dir / "c").string()}) == cli::exit_evaluator_failure);
    auto manifest = nlohmann::json::parse(slurp(dir / "c" / "manifest.json"));
    CHECK(manifest["status"] == "evaluator-failure");
    CHECK(fs::exists(dir / "c" / "evaluated.csv"));

    const std::string ok = std::string("external:") + ECHO_TRAINER + " surrogate";
    CHECK(run({"search", "--evaluator", ok, "--engine", "tournament", "--seed", "0", "--out", (dir / "d").string()}) == 0);
    CHECK(run({"search", "--engine", "tournament", "--seed", "0", "--out", (dir / "e").string()}) == 0);
    CHECK(slurp(dir / "d" / "evaluated.csv") == slurp(dir / "e" / "evaluated.csv"));
}

TEST_CASE("table evaluator replays a run") {
    auto dir = scratch("table");
    REQUIRE(run({"search", "--engine", "exhaustive", "--out", (dir / "a").string()}) == 0);
    const std::string table = "table:" + (dir / "a" / "evaluated.csv").string();
    REQUIRE(run({"search", "--engine", "exhaustive", "--evaluator", table, "--out", (dir / "b").string()}) == 0);
    CHECK(slurp(dir / "a" / "pareto.csv") == slurp(dir / "b" / "pareto.csv"));
    CHECK(slurp(dir / "a" / "omega.csv") == slurp(dir / "b" / "omega.csv"));
}

TEST_CASE("compress prints the ratio") {
    auto dir = scratch("compress");
    auto [code, out] = run_captured({"compress", "--synthetic", "100000", "--prune", "0.9", "--bits", "4", "--out",
                                     (dir / "w.bnxc").string(), "--mask", (dir / "mask.json").string()});
    CHECK(code == 0);
    CHECK(out.find("ratio,22.7286") != std::string::npos);
    CHECK(out.find("compressed_bytes,17599") != std::string::npos);
    CHECK(fs::file_size(dir / "w.bnxc") == 17599);
    CHECK(fs::exists(dir / "mask.json"));
    CHECK(run({"compress", "--prune", "0.5"}) == cli::exit_usage);
}

TEST_CASE("metrics hand example") {
    auto dir = scratch("metrics");
    std::ofstream(dir / "cm.csv") << "Normal,Anomaly\n50,10\n5,35\n";
    auto [code, out] = run_captured({"metrics", "--confusion", (dir / "cm.csv").string()});
    CHECK(code == 0);
    CHECK(out.find("accuracy,0.85") != std::string::npos);
    CHECK(out.find("Normal,0.909") != std::string::npos);
}

TEST_CASE("dataset command") {
    auto dir = scratch("dataset");
    std::ofstream(dir / "r.hea") << "r 1 360 25600\nr.dat 212 200 11 1024 0 0 0 MLII\n";
    std::vector<std::int16_t> s(25600, 5);
    auto dat = wfdb::encode_212(s);
    std::ofstream(dir / "r.dat", std::ios::binary).write(reinterpret_cast<const char*>(dat.data()), static_cast<std::streamsize>(dat.size()));
    std::vector<wfdb::Annotation> ann;
    for (std::int64_t t = 100; t < 25600; t += 256) {
        wfdb::Annotation a;
        a.sample = t;
        ann.push_back(a);
    }
    auto atr = wfdb::serialize_annotations(ann);
    std::ofstream(dir / "r.atr", std::ios::binary).write(reinterpret_cast<const char*>(atr.data()), static_cast<std::streamsize>(atr.size()));
    auto [code, out] = run_captured({"dataset", "--record", (dir / "r").string(), "--out", (dir / "ds.bin").string()});
    CHECK(code == 0);
    CHECK(out.find("windows,100") != std::string::npos);
    CHECK(out.find("train,70") != std::string::npos);
    CHECK(out.find("val,10") != std::string::npos);
    CHECK(out.find("test,20") != std::string::npos);
    std::ifstream in(dir / "ds.bin", std::ios::binary);
    CHECK(wfdb::read_dataset(in).windows.size() == 100);
}

}
