#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "signas/compress.hpp"
#include "signas/error.hpp"
#include "signas/metrics.hpp"
#include "signas/version.hpp"
#include "signas/wfdb.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace signas::cli {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void RunConfig::finalize() {
    if (classes.empty()) classes = wfdb::TaskSpec::preset(task_id).classes;
    net.num_classes = static_cast<std::int64_t>(classes.size());
    ga.seed = seed;
    net.validate();
    ga.validate();
    constraints.validate();
    CostFunction probe{alpha, beta, s_max.value_or(1.0)};
    probe.validate();
    if (evaluator.backend != "surrogate" && evaluator.backend != "table" && evaluator.backend != "external") {
        throw DomainError("unknown evaluator backend '" + evaluator.backend + "'");
    }
    if (evaluator.backend != "surrogate" && evaluator.endpoint.empty()) {
        throw DomainError("evaluator backend '" + evaluator.backend + "' needs an endpoint");
    }
    if (!(evaluator.timeout_seconds > 0.0)) throw DomainError("evaluator timeout must be positive");
    if (evaluator.max_in_flight == 0) throw DomainError("max_in_flight must be at least 1");
    if (out.empty()) throw DomainError("output directory must not be empty");
}

namespace {

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw DomainError("config: '" + std::string(where) + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw DomainError("config: unknown key '" + std::string(where) + "." + key + "'");
    }
}

template <typename T>
void take(const json& j, const char* key, T& target) {
    if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

}  // namespace

void merge_config(RunConfig& cfg, std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DomainError(std::string("config: ") + e.what());
    }
    try {
        check_keys(doc, "", {"task", "engine", "ga", "cost", "constraints", "evaluator", "net", "hp", "seed",
                             "out", "record_timings"});
        if (doc.contains("task")) {
            const auto& t = doc["task"];
            check_keys(t, "task", {"id", "classes", "dataset"});
            take(t, "id", cfg.task_id);
            take(t, "classes", cfg.classes);
            take(t, "dataset", cfg.dataset);
        }
        if (doc.contains("engine")) cfg.engine = parse_engine(doc["engine"].get<std::string>());
        if (doc.contains("ga")) {
            const auto& g = doc["ga"];
            check_keys(g, "ga", {"population_size", "generations", "crossover_prob", "mutation_prob", "mode",
                                 "tournament_size", "duplicate_retries", "random_fraction"});
            take(g, "population_size", cfg.ga.population_size);
            take(g, "generations", cfg.ga.generations);
            take(g, "crossover_prob", cfg.ga.crossover_prob);
            take(g, "mutation_prob", cfg.ga.mutation_prob);
            if (g.contains("mode")) cfg.ga.mode = parse_ga_mode(g["mode"].get<std::string>());
            take(g, "tournament_size", cfg.ga.tournament_size);
            take(g, "duplicate_retries", cfg.ga.duplicate_retries);
            take(g, "random_fraction", cfg.ga.random_fraction);
        }
        if (doc.contains("cost")) {
            const auto& c = doc["cost"];
            check_keys(c, "cost", {"alpha", "beta", "s_max"});
            take(c, "alpha", cfg.alpha);
            take(c, "beta", cfg.beta);
            if (c.contains("s_max") && !c["s_max"].is_null()) cfg.s_max = c["s_max"].get<double>();
        }
        if (doc.contains("constraints")) {
            const auto& c = doc["constraints"];
            check_keys(c, "constraints", {"s_const_bytes", "q_const", "metric"});
            if (c.contains("s_const_bytes") && !c["s_const_bytes"].is_null()) {
                cfg.constraints.s_const = c["s_const_bytes"].get<std::int64_t>();
            }
            if (c.contains("q_const") && !c["q_const"].is_null()) cfg.constraints.q_const = c["q_const"].get<double>();
            if (c.contains("metric")) cfg.constraints.metric = parse_metric_choice(c["metric"].get<std::string>());
        }
        if (doc.contains("evaluator")) {
            const auto& e = doc["evaluator"];
            check_keys(e, "evaluator", {"backend", "endpoint", "timeout_seconds", "max_in_flight", "persist_cache"});
            take(e, "backend", cfg.evaluator.backend);
            take(e, "endpoint", cfg.evaluator.endpoint);
            take(e, "timeout_seconds", cfg.evaluator.timeout_seconds);
            take(e, "max_in_flight", cfg.evaluator.max_in_flight);
            take(e, "persist_cache", cfg.evaluator.persist_cache);
        }
        if (doc.contains("net")) {
            const auto& n = doc["net"];
            check_keys(n, "net", {"input_len", "input_channels", "kernel", "base_filters", "bytes_per_param"});
            take(n, "input_len", cfg.net.input_len);
            take(n, "input_channels", cfg.net.input_channels);
            take(n, "kernel", cfg.net.kernel);
            take(n, "base_filters", cfg.net.base_filters);
            take(n, "bytes_per_param", cfg.net.bytes_per_param);
        }
        if (doc.contains("hp")) {
            const auto& h = doc["hp"];
            check_keys(h, "hp", {"lr", "batch", "dropout", "beta1", "beta2", "max_epochs", "init"});
            take(h, "lr", cfg.hp.learning_rate);
            take(h, "batch", cfg.hp.batch_size);
            take(h, "dropout", cfg.hp.dropout);
            take(h, "beta1", cfg.hp.beta1);
            take(h, "beta2", cfg.hp.beta2);
            take(h, "max_epochs", cfg.hp.max_epochs);
            take(h, "init", cfg.hp.init_scheme);
        }
        take(doc, "seed", cfg.seed);
        take(doc, "out", cfg.out);
        take(doc, "record_timings", cfg.record_timings);
    } catch (const json::exception& e) {
        throw DomainError(std::string("config: ") + e.what());
    }
}

namespace {

ordered_json config_object(const RunConfig& cfg, bool with_out) {
    ordered_json j;
    j["task"] = {{"id", cfg.task_id}, {"classes", cfg.classes}, {"dataset", cfg.dataset}};
    j["engine"] = std::string(to_string(cfg.engine));
    j["ga"] = {{"population_size", cfg.ga.population_size},
               {"generations", cfg.ga.generations},
               {"crossover_prob", cfg.ga.crossover_prob},
               {"mutation_prob", cfg.ga.mutation_prob},
               {"mode", std::string(to_string(cfg.ga.mode))},
               {"tournament_size", cfg.ga.tournament_size},
               {"duplicate_retries", cfg.ga.duplicate_retries},
               {"random_fraction", cfg.ga.random_fraction}};
    j["cost"] = {{"alpha", cfg.alpha}, {"beta", cfg.beta}};
    j["cost"]["s_max"] = cfg.s_max ? ordered_json(*cfg.s_max) : ordered_json(nullptr);
    j["constraints"] = ordered_json::object();
    j["constraints"]["s_const_bytes"] =
        cfg.constraints.s_const ? ordered_json(*cfg.constraints.s_const) : ordered_json(nullptr);
    j["constraints"]["q_const"] =
        cfg.constraints.q_const ? ordered_json(*cfg.constraints.q_const) : ordered_json(nullptr);
    j["constraints"]["metric"] = cfg.constraints.metric.describe();
    j["evaluator"] = {{"backend", cfg.evaluator.backend},
                      {"endpoint", cfg.evaluator.endpoint},
                      {"timeout_seconds", cfg.evaluator.timeout_seconds},
                      {"max_in_flight", cfg.evaluator.max_in_flight},
                      {"persist_cache", cfg.evaluator.persist_cache}};
    j["net"] = {{"input_len", cfg.net.input_len},
                {"input_channels", cfg.net.input_channels},
                {"kernel", cfg.net.kernel},
                {"base_filters", cfg.net.base_filters},
                {"bytes_per_param", cfg.net.bytes_per_param}};
    j["hp"] = {{"lr", cfg.hp.learning_rate}, {"batch", cfg.hp.batch_size},   {"dropout", cfg.hp.dropout},
               {"beta1", cfg.hp.beta1},       {"beta2", cfg.hp.beta2},       {"max_epochs", cfg.hp.max_epochs},
               {"init", cfg.hp.init_scheme}};
    j["seed"] = cfg.seed;
    if (with_out) j["out"] = cfg.out;
    j["record_timings"] = cfg.record_timings;
    return j;
}

}  // namespace

std::string config_json(const RunConfig& cfg) { return config_object(cfg, true).dump(2); }

EvaluatorConfig parse_evaluator_spec(std::string_view spec, EvaluatorConfig base) {
    const auto colon = spec.find(':');
    base.backend = std::string(spec.substr(0, colon));
    base.endpoint = colon == std::string_view::npos ? std::string() : std::string(spec.substr(colon + 1));
    if (base.backend == "surrogate" && !base.endpoint.empty()) throw DomainError("surrogate takes no endpoint");
    return base;
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

namespace {

void write_csv(const fs::path& path, std::span<const EvaluatedPoint> points, Engine engine) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    write_points_csv(out, points, engine);
}

struct EvaluatorChain {
    std::unique_ptr<Evaluator> backend;
    std::unique_ptr<CachedEvaluator> cached;
};

EvaluatorChain make_evaluator(const RunConfig& cfg) {
    EvaluatorChain chain;
    const EvalTask task{cfg.classes, cfg.dataset};
    if (cfg.evaluator.backend == "surrogate") {
        chain.backend = std::make_unique<SurrogateEvaluator>(cfg.net, cfg.seed, cfg.classes);
    } else if (cfg.evaluator.backend == "table") {
        chain.backend = std::make_unique<TableEvaluator>(TableEvaluator::from_file(cfg.evaluator.endpoint));
    } else {
        ExternalOptions options;
        options.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(cfg.evaluator.timeout_seconds * 1000.0));
        options.max_in_flight = cfg.evaluator.max_in_flight;
        chain.backend = std::make_unique<ExternalEvaluator>(cfg.evaluator.endpoint, task, cfg.hp, options);
    }
    std::optional<fs::path> file;
    if (cfg.evaluator.persist_cache) file = fs::path(cfg.out) / "cache.csv";
    chain.cached = std::make_unique<CachedEvaluator>(*chain.backend, task.hash(), cfg.hp.hash(), file);
    return chain;
}

ordered_json generation_json(const GenerationLog& g, bool timings) {
    ordered_json j = {{"generation", g.generation},
                      {"new_evaluations", g.new_evaluations},
                      {"total_evaluations", g.total_evaluations},
                      {"valid_individuals", g.valid_individuals},
                      {"best_fitness", g.best_fitness},
                      {"mean_fitness", g.mean_fitness}};
    if (timings) j["seconds"] = g.seconds;
    return j;
}

void write_manifest(const RunConfig& cfg, std::string_view status, const SearchResult* result, double s_max_value,
                    const CachedEvaluator* cache, std::string_view message) {
    ordered_json m;
    m["tool"] = "signas";
    m["version"] = version;
    m["command"] = "search";
    m["status"] = status;
    if (!message.empty()) m["message"] = message;
    // The output directory is left out so reruns elsewhere stay byte-identical.
    m["config"] = config_object(cfg, false);
    m["s_max_bytes"] = s_max_value;
    if (result) {
        m["engine"] = std::string(to_string(result->engine));
        m["space_size"] = result->space_size;
        m["unique_eval_calls"] = result->unique_eval_calls;
        m["counts"] = {{"evaluated", result->evaluated.size()},
                       {"pareto", result->pareto.size()},
                       {"omega", result->omega.size()}};
        m["generations"] = ordered_json::array();
        for (const auto& g : result->wall_report) m["generations"].push_back(generation_json(g, cfg.record_timings));
    }
    if (cache) m["cache"] = {{"hits", cache->hits()}, {"backend_calls", cache->backend_calls()}};
    m["libraries"] = {{"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                      {"spdlog", std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
                                     std::to_string(SPDLOG_VER_PATCH)},
                      {"cli11", CLI11_VERSION}};
    std::ofstream out(fs::path(cfg.out) / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
}

void write_result_files(const RunConfig& cfg, const SearchResult& r) {
    const fs::path dir(cfg.out);
    const auto ranked = rank_by_fitness(r.evaluated);
    write_csv(dir / "evaluated.csv", ranked, r.engine);
    write_csv(dir / "pareto.csv", r.pareto, r.engine);
    write_csv(dir / "omega.csv", r.omega, r.engine);
}

}  // namespace

int run_search(const RunConfig& cfg) {
    fs::create_directories(cfg.out);
    const auto space = enumerate();
    const double s_max_value = cfg.s_max.value_or(static_cast<double>(s_max(space, cfg.net)));
    const CostFunction cf{cfg.alpha, cfg.beta, s_max_value};

    auto chain = make_evaluator(cfg);
    SearchResult result;
    try {
        result = run_algorithm1(space, cf, cfg.constraints, cfg.engine, cfg.ga, *chain.cached, cfg.net);
    } catch (const EmptySpaceError& e) {
        spdlog::error("{}", e.what());
        write_manifest(cfg, "empty-space", nullptr, s_max_value, chain.cached.get(), e.what());
        return exit_empty_space;
    } catch (const SearchFailure& e) {
        spdlog::error("{}", e.what());
        write_result_files(cfg, e.partial());
        write_manifest(cfg, "evaluator-failure", &e.partial(), s_max_value, chain.cached.get(), e.what());
        return exit_evaluator_failure;
    }

    write_result_files(cfg, result);
    for (const auto& g : result.wall_report) {
        spdlog::info("generation {}: {} new, {} total evaluations, best phi {:.6f}", g.generation, g.new_evaluations,
                     g.total_evaluations, g.best_fitness);
    }
    if (result.omega.empty()) {
        spdlog::error("no Pareto member satisfies the constraints");
        write_manifest(cfg, "constraint-unsatisfiable", &result, s_max_value, chain.cached.get(), "");
        return exit_unsatisfiable;
    }
    write_manifest(cfg, "ok", &result, s_max_value, chain.cached.get(), "");
    const auto& best = result.omega.front();
    std::cout << "best " << to_string(best.arch) << " quality " << best.quality << " storage_bytes "
              << best.storage_bytes << " fitness " << best.fitness << '\n';
    std::cout << "evaluated " << result.unique_eval_calls << " of " << result.space_size << " architectures\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

namespace {

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw FormatError("cannot write " + path);
    return file;
}

void space_list(std::optional<std::int64_t> s_const, const NetConfig& net, std::ostream& out) {
    auto space = enumerate();
    if (s_const) space = filter_by_storage(space, *s_const, net);
    out << "genome,B,x,z,params,storage_bytes,flops\n";
    for (const auto& a : space) {
        const auto s = build(a, net);
        out << encode(a).to_string() << ',' << a.blocks << ',' << a.filter_interval << ',' << a.lstm_exp << ','
            << s.param_count << ',' << s.storage_bytes << ',' << s.flops << '\n';
    }
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

struct CompressArgs {
    std::string input;
    std::size_t synthetic = 0;
    std::size_t tensors = 1;
    std::string arch;
    double fraction = 0.9;
    std::string mode = "class-blind";
    bool prune_vectors = false;
    int bits = 4;
    std::string codebook = "equally-spaced";
    std::uint64_t seed = 1;
    std::string out;
    std::string mask;
};

int compress_command(const CompressArgs& a, const NetConfig& net) {
    const int sources = (a.input.empty() ? 0 : 1) + (a.synthetic ? 1 : 0) + (a.arch.empty() ? 0 : 1);
    if (sources != 1) throw CLI::ValidationError("compress", "give exactly one of --input, --synthetic, --arch");

    TensorStore store;
    if (!a.input.empty()) store = deserialize_tensors(read_file(a.input));
    else if (a.synthetic) store = random_store(a.synthetic, a.tensors, a.seed);
    else store = synthetic_store(parse_arch(a.arch), net, a.seed);

    PruneSpec ps{a.fraction, parse_prune_mode(a.mode), a.prune_vectors};
    QuantSpec qs{a.bits, parse_codebook_mode(a.codebook), a.seed};
    const auto pruned = prune(store, ps);
    const auto cs = quantize(pruned.store, qs);
    if (!a.out.empty()) write_file(a.out, serialize(cs));
    if (!a.mask.empty()) {
        std::ofstream m(a.mask, std::ios::binary);
        if (!m) throw FormatError("cannot write " + a.mask);
        write_mask_json(m, store, pruned.mask);
    }
    std::cout << "tensors," << store.size() << '\n'
              << "weights," << store.total_elements() << '\n'
              << "pruned," << pruned.pruned << '\n'
              << "dense_bytes," << dense_bytes(store) << '\n'
              << "compressed_bytes," << storage_bytes(cs) << '\n'
              << "ratio," << fixed(compression_ratio(store, cs), 4) << '\n';
    return exit_ok;
}

struct DatasetArgs {
    std::vector<std::string> records;
    std::string task = "DNN1";
    std::uint64_t seed = 1;
    std::string out;
    std::string unmapped = "ignore";
    std::string annotator = "atr";
    std::size_t window = 256;
};

int dataset_command(const DatasetArgs& a) {
    auto task = wfdb::TaskSpec::preset(a.task);
    task.unmapped = wfdb::parse_unmapped_policy(a.unmapped);
    std::vector<wfdb::RecordData> records;
    for (const auto& r : a.records) records.push_back(wfdb::load_record(r, a.annotator));
    wfdb::DatasetOptions options;
    options.window = a.window;
    const auto ds = wfdb::build_dataset(records, task, a.seed, options);
    if (!a.out.empty()) {
        std::ofstream out(a.out, std::ios::binary);
        if (!out) throw FormatError("cannot write " + a.out);
        wfdb::write_dataset(out, ds);
    }
    std::vector<std::size_t> per_class(ds.classes.size(), 0);
    for (const auto& w : ds.windows) ++per_class[static_cast<std::size_t>(w.label)];
    std::cout << "windows," << ds.windows.size() << '\n'
              << "train," << ds.train.size() << '\n'
              << "val," << ds.val.size() << '\n'
              << "test," << ds.test.size() << '\n';
    for (std::size_t c = 0; c < ds.classes.size(); ++c) std::cout << "class:" << ds.classes[c] << ',' << per_class[c] << '\n';
    return exit_ok;
}

int metrics_command(const std::string& confusion, const std::string& out_path) {
    std::ifstream in(confusion);
    if (!in) throw FormatError("cannot open " + confusion);
    const auto lm = read_confusion_csv(in);
    const auto report = make_report(lm.matrix, lm.labels);
    std::ofstream file;
    write_metrics_csv(open_output(out_path, file), report);
    return exit_ok;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Hardware-aware architecture search for ResNet+LSTM bio-signal classifiers", "signas"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

    NetConfig net;
    auto add_net_options = [&](CLI::App* sub) {
        sub->add_option("--input-len", net.input_len, "Input window length")->capture_default_str();
        sub->add_option("--classes", net.num_classes, "Output classes")->capture_default_str();
    };

    // space
    auto* space = app.add_subcommand("space", "Enumerate the architecture space");
    space->require_subcommand(1);
    auto* space_list_cmd = space->add_subcommand("list", "CSV of every member with its costs");
    std::optional<std::int64_t> list_s_const;
    std::string list_out;
    space_list_cmd->add_option("--s-const-bytes", list_s_const, "Keep members at or under this storage");
    space_list_cmd->add_option("-o,--output", list_out, "Output file (default stdout)");
    add_net_options(space_list_cmd);
    auto* space_describe = space->add_subcommand("describe", "Per-layer costs of one member");
    std::string space_arch;
    space_describe->add_option("--arch", space_arch, "e.g. B=2,x=1,z=5")->required();
    add_net_options(space_describe);

    // netmodel
    auto* netmodel = app.add_subcommand("netmodel", "Cost model of a single architecture");
    netmodel->require_subcommand(1);
    auto* net_describe = netmodel->add_subcommand("describe", "Per-layer parameters and FLOPs");
    std::string net_arch;
    net_describe->add_option("--arch", net_arch, "e.g. B=2,x=1,z=5")->required();
    add_net_options(net_describe);

    // search
    auto* search = app.add_subcommand("search", "Weighted constrained architecture search");
    std::string config_path, engine, evaluator_spec, metric, mode;
    std::optional<double> alpha, beta, q_const, s_max_override;
    std::optional<std::int64_t> s_const;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> population, generations;
    std::string out_dir, task_id;
    bool record_timings = false, persist_cache = false;
    search->add_option("--config", config_path, "JSON run configuration; flags override it");
    search->add_option("--engine", engine, "exhaustive, random, roulette, tournament, nsga2 or spea2");
    search->add_option("--alpha", alpha, "Quality weight");
    search->add_option("--beta", beta, "Storage weight");
    search->add_option("--s-const-bytes", s_const, "Storage constraint in bytes");
    search->add_option("--q-const", q_const, "Minimum quality");
    search->add_option("--metric", metric, "accuracy or <precision|recall|f1>:<class>");
    search->add_option("--seed", seed, "Run seed");
    search->add_option("--evaluator", evaluator_spec, "surrogate, table:<file> or external:<command>");
    search->add_option("--out", out_dir, "Output directory");
    search->add_option("--task", task_id, "DNN1 .. DNN5");
    search->add_option("--population", population, "GA population size");
    search->add_option("--generations", generations, "GA generations");
    search->add_option("--ga-mode", mode, "multi-objective or scalarized");
    search->add_option("--s-max", s_max_override, "Storage normalizer in bytes");
    search->add_flag("--record-timings", record_timings, "Put wall-clock timings in the manifest");
    search->add_flag("--persist-cache", persist_cache, "Keep evaluator results in <out>/cache.csv");

    // dataset
    auto* dataset = app.add_subcommand("dataset", "Build a windowed dataset from WFDB records");
    DatasetArgs dargs;
    dataset->add_option("--record", dargs.records, "Record path without extension (repeatable)")->required();
    dataset->add_option("--task", dargs.task, "DNN1 .. DNN5")->capture_default_str();
    dataset->add_option("--seed", dargs.seed, "Shuffle seed")->capture_default_str();
    dataset->add_option("--out", dargs.out, "Dataset file to write");
    dataset->add_option("--unmapped", dargs.unmapped, "ignore, drop or other")->capture_default_str();
    dataset->add_option("--annotator", dargs.annotator, "Annotation file extension")->capture_default_str();
    dataset->add_option("--window", dargs.window, "Window length")->capture_default_str();

    // compress
    auto* compress = app.add_subcommand("compress", "Prune and quantize a weight store");
    CompressArgs cargs;
    compress->add_option("--input", cargs.input, "BNXW weight file");
    compress->add_option("--synthetic", cargs.synthetic, "Random store with this many weights");
    compress->add_option("--tensors", cargs.tensors, "Tensor count for --synthetic")->capture_default_str();
    compress->add_option("--arch", cargs.arch, "Random weights shaped like this architecture");
    compress->add_option("--prune", cargs.fraction, "Prune fraction")->capture_default_str();
    compress->add_option("--mode", cargs.mode, "class-blind or layer-wise")->capture_default_str();
    compress->add_flag("--prune-vectors", cargs.prune_vectors, "Also prune biases and batch-norm parameters");
    compress->add_option("--bits", cargs.bits, "Quantization bits")->capture_default_str();
    compress->add_option("--codebook", cargs.codebook, "equally-spaced or centroid")->capture_default_str();
    compress->add_option("--seed", cargs.seed, "Seed for k-means and synthetic weights")->capture_default_str();
    compress->add_option("--out", cargs.out, "BNXC file to write");
    compress->add_option("--mask", cargs.mask, "Pruning mask JSON to write");
    add_net_options(compress);

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Quality metrics of a confusion matrix");
    std::string confusion, metrics_out;
    metrics->add_option("--confusion", confusion, "Confusion matrix CSV")->required();
    metrics->add_option("-o,--output", metrics_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    spdlog::set_default_logger(
        std::make_shared<spdlog::logger>("signas", std::make_shared<spdlog::sinks::stderr_color_sink_st>()));
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (space_list_cmd->parsed()) {
            std::ofstream file;
            space_list(list_s_const, net, open_output(list_out, file));
            return exit_ok;
        }
        if (space_describe->parsed() || net_describe->parsed()) {
            const auto arch = parse_arch(space_describe->parsed() ? space_arch : net_arch);
            write_describe_csv(std::cout, build(arch, net));
            return exit_ok;
        }
        if (search->parsed()) {
            RunConfig cfg;
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw DomainError("cannot open config " + config_path);
                std::stringstream buf;
                buf << in.rdbuf();
                merge_config(cfg, buf.str());
            }
            if (!engine.empty()) cfg.engine = parse_engine(engine);
            if (alpha) cfg.alpha = *alpha;
            if (beta) cfg.beta = *beta;
            if (s_const) cfg.constraints.s_const = *s_const;
            if (q_const) cfg.constraints.q_const = *q_const;
            if (!metric.empty()) cfg.constraints.metric = parse_metric_choice(metric);
            if (seed) cfg.seed = *seed;
            if (!evaluator_spec.empty()) cfg.evaluator = parse_evaluator_spec(evaluator_spec, cfg.evaluator);
            if (!out_dir.empty()) cfg.out = out_dir;
            if (!task_id.empty()) {
                cfg.task_id = task_id;
                cfg.classes.clear();
            }
            if (population) cfg.ga.population_size = *population;
            if (generations) cfg.ga.generations = *generations;
            if (!mode.empty()) cfg.ga.mode = parse_ga_mode(mode);
            if (s_max_override) cfg.s_max = *s_max_override;
            if (record_timings) cfg.record_timings = true;
            if (persist_cache) cfg.evaluator.persist_cache = true;
            cfg.finalize();
            return run_search(cfg);
        }
        if (dataset->parsed()) return dataset_command(dargs);
        if (compress->parsed()) return compress_command(cargs, net);
        if (metrics->parsed()) return metrics_command(confusion, metrics_out);
    } catch (const CLI::ValidationError& e) {
        spdlog::error("{}", e.what());
        return exit_usage;
    } catch (const DomainError& e) {
        spdlog::error("{}", e.what());
        return exit_usage;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_failure;
    }
    return exit_usage;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("signas");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace signas::cli
