#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "signas/error.hpp"
#include "signas/evaluate.hpp"
#include "signas/search.hpp"

using namespace signas;
namespace fs = std::filesystem;

namespace {

std::string trainer(const std::string& mode) { return std::string(ECHO_TRAINER) + " " + mode; }

EvalTask two_class() { return {{"Normal", "Anomaly"}, "data.bin"}; }

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("signas-eval-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

class Counting final : public Evaluator {
public:
    QualityReport evaluate(const ArchParams& arch) override {
        ++calls;
        return SurrogateEvaluator().evaluate(arch);
    }
    std::string name() const override { return "counting"; }
    int calls = 0;
};

}  // namespace

TEST_SUITE("evaluate") {

TEST_CASE("request wire format") {
    EvalRequest req;
    req.id = 7;
    req.arch = {5, 2, 6};
    req.task = two_class();
    const auto line = to_wire(req);
    CHECK(line.rfind(R"({"id":7,"arch":{"B":5,"x":2,"z":6},"task":{"classes":["Normal","Anomaly"])", 0) == 0);
    CHECK(line.find('\n') == std::string::npos);
    auto back = parse_request(line);
    CHECK(back.id == 7);
    CHECK(back.arch == req.arch);
    CHECK(back.task == req.task);
    CHECK(back.hp == req.hp);
    CHECK_FALSE(back.mask);
    req.mask = "mask.json";
    CHECK(parse_request(to_wire(req)).mask == "mask.json");
    CHECK_THROWS_AS(parse_request("{"), std::invalid_argument);
    CHECK_THROWS_AS(parse_request(R"({"id":1})"), std::invalid_argument);
}

TEST_CASE("response wire format") {
    EvalResponse ok;
    ok.id = 3;
    ok.quality.accuracy = 0.875;
    ok.quality.per_class = {{"Normal", 0.9, 0.8, 0.85, false}};
    auto back = parse_response(to_wire(ok));
    CHECK(back.id == 3);
    CHECK(back.status == EvalStatus::ok);
    CHECK(back.quality.accuracy == 0.875);
    REQUIRE(back.quality.per_class.size() == 1);
    CHECK(back.quality.per_class[0].recall == 0.8);

    EvalResponse bad;
    bad.id = 4;
    bad.status = EvalStatus::failed;
    bad.reason = "NaN loss";
    auto b = parse_response(to_wire(bad));
    CHECK(b.status == EvalStatus::failed);
    CHECK(b.reason == "NaN loss");
    CHECK_THROWS_AS(parse_response("[]"), std::invalid_argument);
}

TEST_CASE("metric choice") {
    QualityReport r;
    r.accuracy = 0.9;
    r.per_class = {{"Normal", 0.8, 0.7, 0.75, false}, {"Anomaly", 0.6, 0.5, 0.55, false}};
    CHECK(MetricChoice{}.extract(r) == 0.9);
    CHECK(parse_metric_choice("recall:Anomaly").extract(r) == 0.5);
    CHECK(parse_metric_choice("precision:0").extract(r) == 0.8);
    CHECK(parse_metric_choice("f1:Normal").describe() == "f1:Normal");
    CHECK_THROWS_AS(parse_metric_choice("recall"), DomainError);
    CHECK_THROWS_AS(parse_metric_choice("accuracy:Normal"), DomainError);
    CHECK_THROWS(parse_metric_choice("recall:PVC").extract(r));
}

TEST_CASE("surrogate") {
    SurrogateEvaluator ev;
    double lo = 1.0, hi = 0.0;
    for (const auto& a : enumerate()) {
        const double q = ev.evaluate(a).accuracy;
        CHECK(q == ev.evaluate(a).accuracy);
        const double base = 0.80 + 0.15 * (1.0 - std::exp(-static_cast<double>(build(a).param_count) / 1e6));
        CHECK(std::abs(q - base) <= 0.01);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    CHECK(lo >= 0.79);
    CHECK(hi <= 0.96);
    CHECK(SurrogateEvaluator::quality({3, 1, 5}, {}, 1) != SurrogateEvaluator::quality({3, 1, 5}, {}, 2));
}

TEST_CASE("table") {
    TableEvaluator t;
    QualityReport r;
    r.accuracy = 0.77;
    t.insert({1, 1, 4}, r);
    CHECK(t.evaluate({1, 1, 4}).accuracy == 0.77);
    CHECK_THROWS_AS(t.evaluate({2, 1, 4}), TableMiss);

    std::istringstream csv("B,x,z,quality,recall:PVC\n1,1,4,0.8,0.6\n2,3,5,0.9,0.7\n");
    auto tc = TableEvaluator::from_csv(csv);
    CHECK(tc.size() == 2);
    auto row = tc.evaluate({2, 3, 5});
    CHECK(row.accuracy == 0.9);
    CHECK(parse_metric_choice("recall:PVC").extract(row) == 0.7);
    std::istringstream bad("B,x,quality\n1,1,0.5\n");
    CHECK_THROWS_AS(TableEvaluator::from_csv(bad), FormatError);
}

TEST_CASE("table built from an exhaustive run replays its front") {
    auto space = enumerate();
    CostFunction cf{0.5, 0.5, static_cast<double>(s_max(space))};
    SurrogateEvaluator ev;
    auto first = run_algorithm1(space, cf, {}, Engine::exhaustive, {}, ev);
    std::stringstream csv;
    write_points_csv(csv, first.evaluated, first.engine);
    auto table = TableEvaluator::from_csv(csv);
    auto second = run_algorithm1(space, cf, {}, Engine::exhaustive, {}, table);
    CHECK(second.pareto == first.pareto);
    CHECK(second.omega == first.omega);
}

TEST_CASE("cache") {
    Counting inner;
    CachedEvaluator cache(inner, 1, 2);
    auto a = cache.evaluate({3, 2, 5});
    auto b = cache.evaluate({3, 2, 5});
    CHECK(a == b);
    CHECK(inner.calls == 1);
    CHECK(cache.hits() == 1);
    CHECK(cache.backend_calls() == 1);

    auto dir = scratch("cache");
    const auto file = dir / "cache.csv";
    {
        Counting backend;
        CachedEvaluator c(backend, 1, 2, file);
        std::vector<ArchParams> batch{{0, 1, 4}, {1, 1, 4}, {0, 1, 4}};
        c.evaluate_all(batch);
        CHECK(backend.calls == 2);
    }
    {
        std::ofstream(file, std::ios::app) << "garbage,row\n";
        Counting backend;
        CachedEvaluator c(backend, 1, 2, file);
        CHECK(c.size() == 2);
        CHECK(c.skipped_lines() == 1);
        c.evaluate({1, 1, 4});
        CHECK(backend.calls == 0);
        Counting other;
        CachedEvaluator different_hp(other, 1, 3, file);
        different_hp.evaluate({1, 1, 4});
        CHECK(other.calls == 1);
    }
    const auto row = CachedEvaluator::format_row({4, 2, 6}, 9, 10, SurrogateEvaluator().evaluate({4, 2, 6}));
    auto parsed = CachedEvaluator::parse_row(row);
    REQUIRE(parsed);
    CHECK(parsed->arch == ArchParams{4, 2, 6});
    auto tampered = row;
    tampered[tampered.size() / 2] = tampered[tampered.size() / 2] == '1' ? '2' : '1';
    CHECK_FALSE(CachedEvaluator::parse_row(tampered));
}

TEST_CASE("hashes separate settings") {
    TrainerHyperparams a, b;
    b.learning_rate = 0.01;
    CHECK(a.hash() != b.hash());
    CHECK(a.hash() == TrainerHyperparams{}.hash());
    CHECK(EvalTask{{"N", "V"}, "x"}.hash() != EvalTask{{"N", "V"}, "y"}.hash());
}

TEST_CASE("external trainer returns its metrics") {
    ExternalOptions opt;
    opt.timeout = std::chrono::seconds(10);
    ExternalEvaluator ev(trainer("echo 0.625"), two_class(), {}, opt);
    auto r = ev.evaluate({2, 1, 4});
    CHECK(r.accuracy == 0.625);
    REQUIRE(r.per_class.size() == 2);
    CHECK(r.per_class[1].label == "Anomaly");
    ev.evaluate({3, 1, 4});
    CHECK(ev.requests_sent() == 2);
}

TEST_CASE("external trainer substitutes for the surrogate") {
    ExternalOptions opt;
    opt.timeout = std::chrono::seconds(10);
    opt.max_in_flight = 4;
    ExternalEvaluator ext(trainer("surrogate"), two_class(), {}, opt);
    SurrogateEvaluator sur(NetConfig{}, 0, {"Normal", "Anomaly"});
    auto space = enumerate();
    Problem p;
    p.space = space;
    p.cost = {0.5, 0.5, static_cast<double>(s_max(space))};
    p.evaluator = &ext;
    auto a = ga_search(p, {}, Engine::nsga2);
    p.evaluator = &sur;
    auto b = ga_search(p, {}, Engine::nsga2);
    CHECK(a.evaluated == b.evaluated);
    CHECK(a.omega == b.omega);
}

TEST_CASE("external trainer errors are distinct and name the architecture") {
    ExternalOptions opt;
    opt.timeout = std::chrono::milliseconds(1500);
    const ArchParams arch{6, 3, 7};
    auto expect = [&](const std::string& mode, auto tag) {
        using E = decltype(tag);
        ExternalEvaluator ev(trainer(mode), two_class(), {}, opt);
        try {
            ev.evaluate(arch);
            FAIL("no error for " << mode);
        } catch (const E& e) {
            CHECK(e.arch() == arch);
            CHECK(std::string(e.what()).find("B=6,x=3,z=7") != std::string::npos);
        } catch (const std::exception& e) {
            FAIL("wrong error for " << mode << ": " << e.what());
        }
    };
    expect("wrong-id", ProtocolError(arch, ""));
    expect("malformed", ProtocolError(arch, ""));
    expect("exit", ProtocolError(arch, ""));
    expect("fail", TrainerFailure(arch, ""));
    expect("hang", EvaluatorTimeout(arch, ""));
}

TEST_CASE("killed trainer times out and the search resumes from the cache") {
    auto dir = scratch("resume");
    const auto file = dir / "cache.csv";
    auto space = enumerate();
    Problem p;
    p.space = space;
    p.cost = {0.5, 0.5, static_cast<double>(s_max(space))};

    ExternalOptions opt;
    opt.timeout = std::chrono::milliseconds(1500);
    std::size_t done = 0;
    {
        ExternalEvaluator ext(trainer("hang-after 20"), two_class(), {}, opt);
        CachedEvaluator cache(ext, 0, 0, file);
        p.evaluator = &cache;
        try {
            ga_search(p, {}, Engine::tournament);
            FAIL("expected a failure");
        } catch (const SearchFailure& f) {
            done = f.partial().unique_eval_calls;
            CHECK_THROWS_AS(std::rethrow_exception(f.cause()), EvaluatorTimeout);
        }
        CHECK(cache.size() == 20);
    }
    CHECK(done == 20);

    opt.timeout = std::chrono::seconds(10);
    ExternalEvaluator ext(trainer("surrogate"), two_class(), {}, opt);
    CachedEvaluator cache(ext, 0, 0, file);
    p.evaluator = &cache;
    auto resumed = ga_search(p, {}, Engine::tournament);
    CHECK(cache.hits() >= 20);
    CHECK(ext.requests_sent() == resumed.unique_eval_calls - 20);

    SurrogateEvaluator sur(NetConfig{}, 0, {"Normal", "Anomaly"});
    p.evaluator = &sur;
    CHECK(ga_search(p, {}, Engine::tournament).evaluated == resumed.evaluated);
}

}
