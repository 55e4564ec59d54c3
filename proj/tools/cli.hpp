#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "signas/evaluate.hpp"
#include "signas/netmodel.hpp"
#include "signas/search.hpp"

namespace signas::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_usage = 2,
    exit_empty_space = 3,
    exit_evaluator_failure = 4,
    exit_unsatisfiable = 5,
};

struct EvaluatorConfig {
    /// surrogate | table | external
    std::string backend = "surrogate";
    /// Table CSV path or trainer command.
    std::string endpoint;
    double timeout_seconds = 1800.0;
    std::size_t max_in_flight = 1;
    /// Persist the result cache as <out>/cache.csv.
    bool persist_cache = false;
};

struct RunConfig {
    std::string task_id = "DNN1";
    std::vector<std::string> classes;  ///< empty: the task preset's classes
    std::string dataset;
    Engine engine = Engine::nsga2;
    GaSettings ga;
    double alpha = 0.5;
    double beta = 0.5;
    std::optional<double> s_max;  ///< default: largest storage in the space
    Constraints constraints;
    EvaluatorConfig evaluator;
    NetConfig net;
    TrainerHyperparams hp;
    std::uint64_t seed = 1;
    std::string out = "signas-out";
    bool record_timings = false;

    /// Fills defaults that depend on other fields and checks every value.
    void finalize();
};

/// Applies the keys present in a JSON config document on top of `cfg`.
/// Unknown keys are rejected.
void merge_config(RunConfig& cfg, std::string_view json_text);
std::string config_json(const RunConfig& cfg);

/// `--evaluator` value: surrogate, table:<file> or external:<command>.
EvaluatorConfig parse_evaluator_spec(std::string_view spec, EvaluatorConfig base = {});

/// Runs the search command and writes its artifacts; returns the exit code.
int run_search(const RunConfig& cfg);

/// Full command-line entry point.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace signas::cli
