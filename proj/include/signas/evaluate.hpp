#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "signas/archspace.hpp"
#include "signas/metrics.hpp"
#include "signas/netmodel.hpp"

namespace signas {

// ---------------------------------------------------------------------------
// Request / response types shared with external trainers.
// ---------------------------------------------------------------------------

/// Trainer settings sent with every request. Defaults are the published
/// training setup: Adam(0.9, 0.999), dropout 0.2, batch 128, lr 1e-3,
/// He (variance-scaled) initialization, early stop when the loss stops
/// changing between two consecutive epochs.
struct TrainerHyperparams {
    double learning_rate = 0.001;
    int batch_size = 128;
    double dropout = 0.2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int max_epochs = 50;
    std::string init_scheme = "variance-scaled";

    std::uint64_t hash() const;
    bool operator==(const TrainerHyperparams&) const = default;
};

struct EvalTask {
    std::vector<std::string> classes;
    std::string dataset;

    std::uint64_t hash() const;
    bool operator==(const EvalTask&) const = default;
};

struct EvalRequest {
    std::uint64_t id = 0;
    ArchParams arch;
    EvalTask task;
    TrainerHyperparams hp;
    /// Pruning mask file for masked retraining; omitted from the wire when unset.
    std::optional<std::string> mask;
};

enum class EvalStatus { ok, failed };

struct EvalResponse {
    std::uint64_t id = 0;
    EvalStatus status = EvalStatus::ok;
    std::string reason;  ///< set when status == failed
    QualityReport quality;
};

/// One LF-terminated JSON line (no trailing newline in the returned string).
/// Field order: id, arch{B,x,z}, task{classes,dataset}, hp{lr,batch,dropout,beta1,beta2,max_epochs}.
std::string to_wire(const EvalRequest& req);
std::string to_wire(const EvalResponse& resp);
/// Throw std::invalid_argument describing the first problem found.
EvalRequest parse_request(std::string_view line);
EvalResponse parse_response(std::string_view line);

// ---------------------------------------------------------------------------
// Errors. Every evaluator error names the architecture it was working on.
// ---------------------------------------------------------------------------

class EvaluatorError : public std::runtime_error {
public:
    EvaluatorError(const ArchParams& arch, const std::string& what)
        : std::runtime_error(to_string(arch) + ": " + what), arch_(arch) {}
    const ArchParams& arch() const noexcept { return arch_; }

private:
    ArchParams arch_;
};

class EvaluatorTimeout : public EvaluatorError {
public:
    using EvaluatorError::EvaluatorError;
};

/// Malformed line, unknown request id, or the trainer closed its stream.
class ProtocolError : public EvaluatorError {
public:
    using EvaluatorError::EvaluatorError;
};

/// The trainer answered status=failed.
class TrainerFailure : public EvaluatorError {
public:
    using EvaluatorError::EvaluatorError;
};

/// Table lookup for an architecture that was never recorded.
class TableMiss : public EvaluatorError {
public:
    using EvaluatorError::EvaluatorError;
};

// ---------------------------------------------------------------------------
// Quality scalar selection.
// ---------------------------------------------------------------------------

enum class QualityMetric { accuracy, precision, recall, f1 };

std::string_view to_string(QualityMetric m);
QualityMetric parse_quality_metric(std::string_view name);

/// Which number of a QualityReport feeds the cost function and Q_Const.
struct MetricChoice {
    QualityMetric metric = QualityMetric::accuracy;
    /// Class label (or numeric index) for per-class metrics.
    std::string target_class;

    double extract(const QualityReport& report) const;
    std::string describe() const;
};

/// "accuracy" or "<precision|recall|f1>:<class>", the form describe() prints.
MetricChoice parse_metric_choice(std::string_view text);

// ---------------------------------------------------------------------------
// Evaluators.
// ---------------------------------------------------------------------------

/// Receives (index into the batch, report) as each result becomes available.
using ResultSink = std::function<void(std::size_t, const QualityReport&)>;

class Evaluator {
public:
    virtual ~Evaluator() = default;

    virtual QualityReport evaluate(const ArchParams& arch) = 0;

    /// Evaluates every member, reporting through `sink` in completion order.
    /// Results delivered before an exception stay delivered. Backends that
    /// can overlap work override this; the default is sequential.
    virtual void evaluate_batch(std::span<const ArchParams> archs, const ResultSink& sink);

    /// Convenience wrapper returning results in input order.
    std::vector<QualityReport> evaluate_all(std::span<const ArchParams> archs);

    virtual std::string name() const = 0;
};

/// Runs a thread-safe evaluator's evaluate() on a fixed number of worker
/// threads. Sink calls are serialized.
class ParallelEvaluator final : public Evaluator {
public:
    ParallelEvaluator(Evaluator& inner, std::size_t workers);

    QualityReport evaluate(const ArchParams& arch) override { return inner_.evaluate(arch); }
    void evaluate_batch(std::span<const ArchParams> archs, const ResultSink& sink) override;
    std::string name() const override { return inner_.name(); }

private:
    Evaluator& inner_;
    std::size_t workers_;
};

/// Closed-form stand-in for training:
/// q = 0.80 + 0.15 * (1 - exp(-params / 1e6)) + u, u in [-0.01, 0.01)
/// drawn from a hash of (seed, genome). Every metric of the report equals q.
class SurrogateEvaluator final : public Evaluator {
public:
    explicit SurrogateEvaluator(NetConfig cfg = {}, std::uint64_t seed = 0,
                                std::vector<std::string> labels = {});

    static double quality(const ArchParams& arch, const NetConfig& cfg, std::uint64_t seed);

    QualityReport evaluate(const ArchParams& arch) override;
    std::string name() const override { return "surrogate"; }

private:
    NetConfig cfg_;
    std::uint64_t seed_;
    std::vector<std::string> labels_;
};

/// Replays recorded results keyed by architecture.
class TableEvaluator final : public Evaluator {
public:
    TableEvaluator() = default;

    /// Accepts any CSV with B, x, z columns and a `quality` or `accuracy`
    /// column (e.g. a search run's evaluated.csv). Optional per-class columns
    /// are named precision:<label>, recall:<label>, f1:<label>; a metric
    /// without its column, or every metric when there are no per-class
    /// columns at all, replays the scalar.
    static TableEvaluator from_csv(std::istream& in);
    static TableEvaluator from_file(const std::filesystem::path& path);

    void insert(const ArchParams& arch, QualityReport report);
    std::size_t size() const noexcept { return rows_.size(); }

    QualityReport evaluate(const ArchParams& arch) override;  ///< TableMiss when absent
    std::string name() const override { return "table"; }

private:
    std::map<ArchParams, QualityReport> rows_;
};

struct ExternalOptions {
    std::chrono::milliseconds timeout{std::chrono::minutes(30)};
    std::size_t max_in_flight = 1;
};

/// Talks to a trainer process over its standard streams, one JSON object per
/// line. The process (`/bin/sh -c command`) starts on first use and is
/// restarted after a timeout or protocol failure.
class ExternalEvaluator final : public Evaluator {
public:
    ExternalEvaluator(std::string command, EvalTask task, TrainerHyperparams hp,
                      ExternalOptions options = {});
    ~ExternalEvaluator() override;

    ExternalEvaluator(const ExternalEvaluator&) = delete;
    ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

    QualityReport evaluate(const ArchParams& arch) override;
    /// Keeps up to max_in_flight requests outstanding and matches replies by id.
    void evaluate_batch(std::span<const ArchParams> archs, const ResultSink& sink) override;
    std::string name() const override { return "external"; }

    std::uint64_t requests_sent() const noexcept { return next_id_ - 1; }

private:
    class Process;

    std::string command_;
    EvalTask task_;
    TrainerHyperparams hp_;
    ExternalOptions options_;
    std::unique_ptr<Process> process_;
    std::uint64_t next_id_ = 1;
};

/// Memoizes any evaluator by (arch, task hash, hyperparameter hash). With a
/// file path the cache is persisted append-only, one CSV row per result with
/// a trailing FNV-1a checksum, and reloaded on construction so interrupted
/// searches resume without retraining. Rows that fail their checksum are
/// skipped with a warning.
class CachedEvaluator final : public Evaluator {
public:
    CachedEvaluator(Evaluator& inner, std::uint64_t task_hash = 0, std::uint64_t hp_hash = 0,
                    std::optional<std::filesystem::path> file = std::nullopt);

    QualityReport evaluate(const ArchParams& arch) override;
    void evaluate_batch(std::span<const ArchParams> archs, const ResultSink& sink) override;
    std::string name() const override { return inner_.name(); }

    std::uint64_t hits() const noexcept { return hits_; }
    std::uint64_t backend_calls() const noexcept { return backend_calls_; }
    std::size_t size() const;
    std::size_t skipped_lines() const noexcept { return skipped_lines_; }

    /// Serialized cache row (without newline) and its parser; exposed for tests.
    static std::string format_row(const ArchParams& arch, std::uint64_t task_hash,
                                  std::uint64_t hp_hash, const QualityReport& report);
    struct Row {
        ArchParams arch;
        std::uint64_t task_hash;
        std::uint64_t hp_hash;
        QualityReport report;
    };
    static std::optional<Row> parse_row(std::string_view line);

private:
    struct Key {
        ArchParams arch;
        std::uint64_t task_hash;
        std::uint64_t hp_hash;
        auto operator<=>(const Key&) const = default;
    };

    std::optional<QualityReport> lookup(const Key& key) const;
    void store(const Key& key, const QualityReport& report);

    Evaluator& inner_;
    std::uint64_t task_hash_;
    std::uint64_t hp_hash_;
    std::optional<std::filesystem::path> file_;

    mutable std::shared_mutex map_mutex_;
    std::mutex file_mutex_;
    std::map<Key, QualityReport> entries_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> backend_calls_{0};
    std::size_t skipped_lines_ = 0;
};

}  // namespace signas
