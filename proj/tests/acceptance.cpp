// Acceptance checks. One PASS/FAIL line per criterion; nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "signas/archspace.hpp"
#include "signas/compress.hpp"
#include "signas/error.hpp"
#include "signas/metrics.hpp"
#include "signas/netmodel.hpp"
#include "signas/rng.hpp"
#include "signas/search.hpp"
#include "signas/wfdb.hpp"

using namespace signas;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

// Runs a criterion, turning an escaped exception into a failure.
void criterion(int id, const char* title, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        auto [ok, detail] = body();
        report(id, title, ok, detail);
    } catch (const std::exception& e) {
        report(id, title, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

CostFunction default_cost(double alpha, double beta) {
    return {alpha, beta, static_cast<double>(s_max(enumerate()))};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Labels {
    std::unique_ptr<bool[]> data;
    std::size_t n;
    explicit Labels(const std::vector<bool>& v) : data(new bool[v.size()]), n(v.size()) {
        for (std::size_t i = 0; i < n; ++i) data[i] = v[i];
    }
    std::span<const bool> span() const { return {data.get(), n}; }
};

}  // namespace

int main() {
    criterion(1, "space cardinality", [] {
        const auto t0 = Clock::now();
        const auto space = enumerate();
        const double t = seconds_since(t0);
        bool ok = space.size() == 320 && t < 1.0;
        // stand-in for the post-constraint count: monotone and sound filtering
        Rng rng(1);
        const auto top = s_max(space);
        for (int i = 0; i < 200 && ok; ++i) {
            auto a = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(top) + 1));
            auto b = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(top) + 1));
            if (a > b) std::swap(a, b);
            const auto tight = filter_by_storage(space, a);
            const auto loose = filter_by_storage(space, b);
            std::set<ArchParams> outer(loose.begin(), loose.end());
            for (const auto& m : tight) ok = ok && outer.count(m) && build(m).storage_bytes <= a;
            for (const auto& m : loose) ok = ok && build(m).storage_bytes <= b;
        }
        return std::pair{ok, fmt("|psi| = %zu in %.4f s; s_const filter monotone and sound over 200 pairs", space.size(), t)};
    });

    criterion(2, "genome roundtrip", [] {
        const auto t0 = Clock::now();
        bool ok = true;
        for (const auto& a : enumerate()) ok = ok && decode(encode(a)) == a;
        int invalid = 0;
        for (unsigned b = 0; b < 512; ++b) invalid += decode(Chromosome(static_cast<std::uint16_t>(b))) ? 0 : 1;
        const double t = seconds_since(t0);
        ok = ok && invalid == 192 && t < 1.0;
        return std::pair{ok, fmt("320 roundtrips, %d of 512 genomes invalid, %.4f s", invalid, t)};
    });

    criterion(3, "cost-model oracle", [] {
        bool ok = true;
        std::string detail;
        for (ArchParams a : {ArchParams{0, 1, 4}, ArchParams{5, 2, 6}, ArchParams{4, 4, 4}}) {
            const auto got = build(a).param_count;
            const auto want = oracle::param_count(a.blocks, a.filter_interval, a.lstm_exp);
            ok = ok && got == want;
            detail += to_string(a) + "=" + std::to_string(got) + " ";
        }
        ok = ok && build({0, 1, 4}).param_count == 3842;
        for (const auto& a : enumerate()) {
            const auto s = build(a);
            ok = ok && s.param_count == oracle::param_count(a.blocks, a.filter_interval, a.lstm_exp);
            if (a.blocks < 15) {
                const auto up = build({a.blocks + 1, a.filter_interval, a.lstm_exp});
                ok = ok && up.param_count > s.param_count && up.flops > s.flops;
            }
            if (a.lstm_exp < 8) {
                const auto up = build({a.blocks, a.filter_interval, a.lstm_exp + 1});
                ok = ok && up.param_count >= s.param_count && up.flops >= s.flops;
            }
        }
        return std::pair{ok, detail + "; oracle and monotonicity hold over all 320"};
    });

    criterion(4, "exploration-cost reduction", [] {
        const auto t0 = Clock::now();
        const auto space = enumerate();
        const auto cf = default_cost(0.5, 0.5);
        bool ok = true;
        std::string detail;
        for (Engine e : {Engine::roulette, Engine::tournament, Engine::nsga2, Engine::spea2}) {
            double total = 0;
            std::size_t worst = 0;
            for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                SurrogateEvaluator sur(NetConfig{}, seed);
                CachedEvaluator cache(sur);
                GaSettings gs;
                gs.seed = seed;
                const auto r = run_algorithm1(space, cf, {}, e, gs, cache);
                ok = ok && r.unique_eval_calls < 320 && cache.backend_calls() == r.unique_eval_calls;
                worst = std::max(worst, r.unique_eval_calls);
                total += static_cast<double>(r.unique_eval_calls);
            }
            const double mean = total / 10.0;
            ok = ok && 320.0 / mean >= 3.0;
            detail += fmt("%s mean %.1f (%.2fx, max %zu) ", std::string(to_string(e)).c_str(), mean, 320.0 / mean, worst);
        }
        const double t = seconds_since(t0);
        ok = ok && t < 10.0;
        return std::pair{ok, detail + fmt("; %.2f s", t)};
    });

    criterion(5, "dominance oracle", [] {
        Rng rng(2024);
        bool ok = true;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<std::vector<double>> pts(50, std::vector<double>(2));
            for (auto& p : pts) {
                // half the instances on a coarse grid to force ties
                p[0] = trial % 2 ? rng.uniform() : static_cast<double>(rng.below(8));
                p[1] = trial % 2 ? rng.uniform() : static_cast<double>(rng.below(8));
            }
            ok = ok && nondominated_sort(pts).fronts == oracle::fronts(pts);
            std::vector<QsPoint> qs;
            std::vector<std::vector<double>> as_max;
            for (const auto& p : pts) {
                qs.push_back({p[0], p[1]});
                as_max.push_back({p[0], -p[1]});
            }
            ok = ok && nondominated_sort(qs).fronts == oracle::fronts(as_max);
        }
        return std::pair{ok, std::string("100 random 50-point instances, fronts identical")};
    });

    criterion(6, "argmax invariance", [] {
        const auto space = enumerate();
        const auto engines = {Engine::exhaustive, Engine::random, Engine::roulette, Engine::tournament,
                              Engine::nsga2, Engine::spea2};
        bool ok = true;
        int runs = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            for (Engine e : engines) {
                SurrogateEvaluator sur(NetConfig{}, seed);
                GaSettings gs;
                gs.seed = seed;
                for (int mode = 0; mode < 2; ++mode) {
                    const auto cf = mode == 0 ? default_cost(1, 0) : default_cost(0, 1);
                    const auto r = run_algorithm1(space, cf, {}, e, gs, sur);
                    const auto ranked = rank_by_fitness(r.evaluated);
                    // canonical order breaks ties on both sides
                    auto better = [&](const EvaluatedPoint& a, const EvaluatedPoint& b) {
                        if (mode == 0 && a.quality != b.quality) return a.quality > b.quality;
                        if (mode == 1 && a.storage_bytes != b.storage_bytes) return a.storage_bytes < b.storage_bytes;
                        return a.arch < b.arch;
                    };
                    const auto best = *std::min_element(r.evaluated.begin(), r.evaluated.end(), better);
                    ok = ok && ranked.front().arch == best.arch;
                    // omega is Pareto-filtered first: among storage ties only the
                    // best-quality member survives, so its head may differ in arch
                    ok = ok && !r.omega.empty();
                    if (mode == 0) {
                        ok = ok && r.omega.front().arch == best.arch;
                    } else {
                        const auto& head = r.omega.front();
                        ok = ok && head.storage_bytes == best.storage_bytes;
                        for (const auto& p : r.evaluated) {
                            if (p.storage_bytes == best.storage_bytes) ok = ok && p.quality <= head.quality;
                        }
                    }
                    ++runs;
                }
            }
        }
        return std::pair{ok, fmt("%d runs (10 seeds x 6 engines x 2 weightings)", runs)};
    });

    criterion(7, "constraint soundness", [] {
        const auto space = enumerate();
        const auto top = s_max(space);
        Rng rng(77);
        bool ok = true;
        int settings = 0, empty = 0, nonempty_omega = 0;
        const Engine engines[] = {Engine::exhaustive, Engine::random, Engine::roulette, Engine::tournament,
                                  Engine::nsga2, Engine::spea2};
        for (int i = 0; i < 120; ++i) {
            Constraints c;
            if (rng.bernoulli(0.8)) c.s_const = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(top) + 1));
            if (rng.bernoulli(0.8)) c.q_const = 0.78 + 0.19 * rng.uniform();
            SurrogateEvaluator sur(NetConfig{}, i);
            GaSettings gs;
            gs.seed = static_cast<std::uint64_t>(i) + 1;
            ++settings;
            try {
                const auto r = run_algorithm1(space, default_cost(rng.uniform(), rng.uniform()), c,
                                              engines[i % 6], gs, sur);
                for (const auto& p : r.omega) {
                    if (c.s_const) ok = ok && p.storage_bytes <= *c.s_const;
                    if (c.q_const) ok = ok && p.quality >= *c.q_const;
                }
                for (const auto& p : r.evaluated) {
                    if (c.s_const) ok = ok && p.storage_bytes <= *c.s_const;
                }
                nonempty_omega += r.omega.empty() ? 0 : 1;
            } catch (const EmptySpaceError&) {
                ++empty;
                ok = ok && c.s_const && filter_by_storage(space, *c.s_const).empty();
            }
        }
        return std::pair{ok, fmt("%d settings, %d with non-empty omega, %d empty-space", settings, nonempty_omega, empty)};
    });

    criterion(8, "compression accounting", [] {
        bool ok = true;
        double lo = 1e9;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            for (std::size_t tensors : {std::size_t{1}, std::size_t{4}}) {
                const auto store = random_store(100000, tensors, seed);
                const auto pr = prune(store, {0.9, PruneMode::class_blind});
                std::size_t zeros = 0;
                for (const auto& t : pr.store.tensors()) zeros += std::count(t.values.begin(), t.values.end(), 0.0f);
                ok = ok && pr.pruned == 90000 && zeros == 90000;
                const auto cs = quantize(pr.store, {4});
                const auto back = decompress(cs);
                for (const auto& t : back.tensors()) {
                    std::set<float> distinct;
                    for (float v : t.values)
                        if (v != 0.0f) distinct.insert(v);
                    ok = ok && distinct.size() <= 16;
                }
                const double ratio = compression_ratio(store, cs);
                ok = ok && ratio >= 20.0 && storage_bytes(cs) == serialize(cs).size();
                lo = std::min(lo, ratio);
            }
        }
        // layer-wise counts, per tensor
        const auto store = random_store(100000, 7, 9);
        const auto lw = prune(store, {0.9, PruneMode::layer_wise});
        for (std::size_t t = 0; t < store.size(); ++t) {
            const auto n = store.tensors()[t].size();
            ok = ok && static_cast<std::size_t>(std::count(lw.mask[t].begin(), lw.mask[t].end(), true)) ==
                           static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(n) + 1e-9));
        }
        return std::pair{ok, fmt("min ratio %.4fx over 10 stores; 90000 of 100000 pruned exactly; <= 16 values per tensor", lo)};
    });

    criterion(9, "metrics oracle", [] {
        ConfusionMatrix cm(2, {50, 10, 5, 35});
        const auto m = precision_recall_f1(cm, 0);
        const double a = accuracy(cm);
        bool ok = std::abs(a - 0.85) < 1e-4 && std::abs(m.precision - 0.9091) < 1e-4 &&
                  std::abs(m.recall - 0.8333) < 1e-4 && std::abs(m.f1 - 0.8696) < 1e-4;
        Rng rng(9);
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 20 + rng.below(200);
            std::vector<double> scores(n);
            std::vector<bool> pos(n);
            for (std::size_t i = 0; i < n; ++i) {
                pos[i] = rng.bernoulli(0.3 + 0.4 * rng.uniform());
                scores[i] = trial % 2 ? rng.uniform() : static_cast<double>(rng.below(10));
            }
            pos[0] = true;
            pos[1] = false;
            Labels y(pos);
            worst = std::max(worst, std::abs(roc_curve(scores, y.span()).auc - oracle::pairwise_auc(scores, pos)));
        }
        ok = ok && worst <= 1e-9;
        return std::pair{ok, fmt("A=%.4f P=%.4f R=%.4f F1=%.4f; max |auc - pairwise| = %.2e over 50 instances", a,
                                 m.precision, m.recall, m.f1, worst)};
    });

    criterion(10, "WFDB parsers", [] {
        bool ok = true;
        std::vector<std::int16_t> range;
        for (int v = -2048; v <= 2047; ++v) range.push_back(static_cast<std::int16_t>(v));
        ok = ok && wfdb::decode_212(wfdb::encode_212(range)) == range;
        // every value in both slots of a triplet
        Rng rng(10);
        std::vector<std::int16_t> paired;
        for (int v = -2048; v <= 2047; ++v) {
            paired.push_back(static_cast<std::int16_t>(v));
            paired.push_back(static_cast<std::int16_t>(static_cast<int>(rng.below(4096)) - 2048));
            paired.push_back(static_cast<std::int16_t>(static_cast<int>(rng.below(4096)) - 2048));
            paired.push_back(static_cast<std::int16_t>(v));
        }
        ok = ok && wfdb::decode_212(wfdb::encode_212(paired)) == paired;

        int streams = 0, skips = 0, auxes = 0;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<wfdb::Annotation> ann;
            std::int64_t t = 0;
            int chan = 0, num = 0;
            for (std::uint64_t i = 0, n = 1 + rng.below(60); i < n; ++i) {
                const bool jump = rng.bernoulli(0.1) || i == 0;
                t += jump ? 1024 + static_cast<std::int64_t>(rng.below(1u << 20)) : static_cast<std::int64_t>(rng.below(1024));
                skips += jump ? 1 : 0;
                wfdb::Annotation a;
                a.sample = t;
                a.code = 1 + static_cast<int>(rng.below(49));
                a.symbol = wfdb::symbol_for_code(a.code);
                if (rng.bernoulli(0.1)) a.subtype = static_cast<int>(rng.below(100));
                if (rng.bernoulli(0.1)) chan = static_cast<int>(rng.below(4));
                if (rng.bernoulli(0.1)) num = static_cast<int>(rng.below(8));
                a.chan = chan;
                a.num = num;
                if (rng.bernoulli(0.2) || i == 0) {
                    std::string aux(rng.below(12), ' ');
                    for (auto& c : aux) c = static_cast<char>('(' + rng.below(80));
                    a.aux = aux;
                    ++auxes;
                }
                ann.push_back(a);
            }
            ok = ok && wfdb::parse_annotations(wfdb::serialize_annotations(ann)) == ann;
            ++streams;
        }

        bool splits = true;
        for (std::size_t windows : {std::size_t{100}, std::size_t{37}, std::size_t{250}, std::size_t{1001}}) {
            wfdb::RecordData r;
            r.record.num_samples = static_cast<std::int64_t>(windows * 256);
            r.record.signals.resize(1);
            r.record.samples.assign(1, std::vector<int>(windows * 256, 0));
            for (std::size_t w = 0; w < windows; ++w) {
                wfdb::Annotation a;
                a.sample = static_cast<std::int64_t>(w * 256 + 20);
                a.code = w % 3 ? 1 : 5;
                a.symbol = a.code == 1 ? "N" : "V";
                r.annotations.push_back(a);
            }
            const auto task = wfdb::TaskSpec::preset("DNN2");
            const auto ds = wfdb::build_dataset(std::span(&r, 1), task, 5);
            const auto again = wfdb::build_dataset(std::span(&r, 1), task, 5);
            const double n = static_cast<double>(windows);
            auto near = [](std::size_t got, double want) { return std::abs(static_cast<double>(got) - want) <= 1.0; };
            splits = splits && ds.windows.size() == windows && near(ds.train.size(), 0.7 * n) &&
                     near(ds.val.size(), 0.1 * n) && near(ds.test.size(), 0.2 * n) &&
                     ds.train.size() + ds.val.size() + ds.test.size() == windows && again.train == ds.train &&
                     again.val == ds.val && again.test == ds.test;
            std::set<std::size_t> all(ds.train.begin(), ds.train.end());
            all.insert(ds.val.begin(), ds.val.end());
            all.insert(ds.test.begin(), ds.test.end());
            splits = splits && all.size() == windows;
        }
        ok = ok && splits;
        return std::pair{ok, fmt("4096-value 212 roundtrip; %d annotation streams (%d SKIP, %d AUX); splits within 1 window and reproducible",
                                 streams, skips, auxes)};
    });

    criterion(11, "determinism", [] {
        const auto base = fs::temp_directory_path() / "signas-acceptance";
        fs::remove_all(base);
        fs::create_directories(base);
        bool ok = true;
        std::size_t compared = 0;
        for (const char* engine : {"nsga2", "spea2", "roulette", "tournament", "random", "exhaustive"}) {
            std::string dirs[2];
            for (int run = 0; run < 2; ++run) {
                dirs[run] = (base / (std::string(engine) + "-" + std::to_string(run))).string();
                const std::string cmd = std::string("\"") + SIGNAS_CLI + "\" --log-level off search --engine " + engine +
                                        " --seed 7 --q-const 0.85 --out \"" + dirs[run] + "\" > /dev/null";
                ok = ok && std::system(cmd.c_str()) == 0;
            }
            for (const auto& entry : fs::directory_iterator(dirs[0])) {
                const auto name = entry.path().filename();
                ok = ok && fs::exists(fs::path(dirs[1]) / name) && slurp(entry.path()) == slurp(fs::path(dirs[1]) / name);
                ++compared;
            }
            ok = ok && compared > 0;
        }
        return std::pair{ok, fmt("%zu output files byte-identical across paired runs of 6 engines", compared)};
    });

    std::printf("%s\n", failures == 0 ? "all criteria passed" : "some criteria failed");
    return failures == 0 ? 0 : 1;
}
