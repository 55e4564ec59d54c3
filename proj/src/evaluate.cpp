#include "signas/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "signas/error.hpp"
#include "signas/rng.hpp"
#include "subprocess.hpp"
#include "text.hpp"

namespace signas {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Hashes
// ---------------------------------------------------------------------------

std::uint64_t TrainerHyperparams::hash() const {
    std::string canon = text::number(learning_rate) + '|' + std::to_string(batch_size) + '|' +
                        text::number(dropout) + '|' + text::number(beta1) + '|' +
                        text::number(beta2) + '|' + std::to_string(max_epochs) + '|' + init_scheme;
    return text::fnv1a64(canon);
}

std::uint64_t EvalTask::hash() const {
    std::string canon = dataset;
    for (const auto& c : classes) {
        canon += '\x1f';
        canon += c;
    }
    return text::fnv1a64(canon);
}

// ---------------------------------------------------------------------------
// Wire protocol
// ---------------------------------------------------------------------------

namespace {

ordered_json report_to_json(const QualityReport& q) {
    ordered_json per_class = ordered_json::array();
    for (const auto& m : q.per_class) {
        per_class.push_back(ordered_json{{"label", m.label},
                                         {"precision", m.precision},
                                         {"recall", m.recall},
                                         {"f1", m.f1}});
    }
    return ordered_json{{"accuracy", q.accuracy}, {"per_class", std::move(per_class)}};
}

double unit_interval(const ordered_json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw std::invalid_argument(std::string("missing numeric field '") + key + "'");
    }
    const double v = j.at(key).get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string("field '") + key + "' outside [0,1]");
    }
    return v;
}

QualityReport report_from_json(const ordered_json& j) {
    if (!j.is_object()) throw std::invalid_argument("metrics must be an object");
    QualityReport q;
    q.accuracy = unit_interval(j, "accuracy");
    if (!j.contains("per_class") || !j.at("per_class").is_array()) {
        throw std::invalid_argument("missing array field 'per_class'");
    }
    for (const auto& row : j.at("per_class")) {
        ClassMetrics m;
        if (!row.contains("label")) throw std::invalid_argument("per_class entry without label");
        m.label = row.at("label").is_string() ? row.at("label").get<std::string>()
                                              : row.at("label").dump();
        m.precision = unit_interval(row, "precision");
        m.recall = unit_interval(row, "recall");
        m.f1 = unit_interval(row, "f1");
        q.per_class.push_back(std::move(m));
    }
    return q;
}

ordered_json parse_object(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("not JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("message is not an object");
    return j;
}

std::uint64_t parse_id(const ordered_json& j) {
    if (!j.contains("id") || !j.at("id").is_number_unsigned()) {
        throw std::invalid_argument("missing unsigned integer field 'id'");
    }
    return j.at("id").get<std::uint64_t>();
}

}  // namespace

std::string to_wire(const EvalRequest& req) {
    ordered_json j;
    j["id"] = req.id;
    j["arch"] = ordered_json{{"B", req.arch.blocks},
                             {"x", req.arch.filter_interval},
                             {"z", req.arch.lstm_exp}};
    j["task"] = ordered_json{{"classes", req.task.classes}, {"dataset", req.task.dataset}};
    j["hp"] = ordered_json{{"lr", req.hp.learning_rate},      {"batch", req.hp.batch_size},
                           {"dropout", req.hp.dropout},       {"beta1", req.hp.beta1},
                           {"beta2", req.hp.beta2},           {"max_epochs", req.hp.max_epochs}};
    if (req.mask) j["mask"] = *req.mask;
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string to_wire(const EvalResponse& resp) {
    ordered_json j;
    j["id"] = resp.id;
    if (resp.status == EvalStatus::ok) {
        j["status"] = "ok";
        j["metrics"] = report_to_json(resp.quality);
    } else {
        j["status"] = "failed";
        j["reason"] = resp.reason;
    }
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

EvalRequest parse_request(std::string_view line) {
    const auto j = parse_object(line);
    EvalRequest req;
    req.id = parse_id(j);
    try {
        const auto& a = j.at("arch");
        req.arch = {a.at("B").get<int>(), a.at("x").get<int>(), a.at("z").get<int>()};
        const auto& t = j.at("task");
        req.task.classes = t.at("classes").get<std::vector<std::string>>();
        req.task.dataset = t.at("dataset").get<std::string>();
        const auto& hp = j.at("hp");
        req.hp.learning_rate = hp.at("lr").get<double>();
        req.hp.batch_size = hp.at("batch").get<int>();
        req.hp.dropout = hp.at("dropout").get<double>();
        req.hp.beta1 = hp.at("beta1").get<double>();
        req.hp.beta2 = hp.at("beta2").get<double>();
        req.hp.max_epochs = hp.at("max_epochs").get<int>();
        if (j.contains("mask")) req.mask = j.at("mask").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad request field: ") + e.what());
    }
    if (!req.arch.valid()) throw std::invalid_argument("architecture out of range");
    return req;
}

EvalResponse parse_response(std::string_view line) {
    const auto j = parse_object(line);
    EvalResponse resp;
    resp.id = parse_id(j);
    if (!j.contains("status") || !j.at("status").is_string()) {
        throw std::invalid_argument("missing string field 'status'");
    }
    const auto status = j.at("status").get<std::string>();
    if (status == "ok") {
        if (!j.contains("metrics")) throw std::invalid_argument("ok response without metrics");
        resp.quality = report_from_json(j.at("metrics"));
    } else if (status == "failed") {
        resp.status = EvalStatus::failed;
        if (j.contains("reason") && j.at("reason").is_string()) {
            resp.reason = j.at("reason").get<std::string>();
        }
    } else {
        throw std::invalid_argument("unknown status '" + status + "'");
    }
    return resp;
}

// ---------------------------------------------------------------------------
// Metric choice
// ---------------------------------------------------------------------------

std::string_view to_string(QualityMetric m) {
    switch (m) {
        case QualityMetric::accuracy: return "accuracy";
        case QualityMetric::precision: return "precision";
        case QualityMetric::recall: return "recall";
        case QualityMetric::f1: return "f1";
    }
    return "?";
}

QualityMetric parse_quality_metric(std::string_view name) {
    if (name == "accuracy") return QualityMetric::accuracy;
    if (name == "precision") return QualityMetric::precision;
    if (name == "recall") return QualityMetric::recall;
    if (name == "f1") return QualityMetric::f1;
    throw DomainError("unknown quality metric '" + std::string(name) +
                      "' (expected accuracy, precision, recall or f1)");
}

double MetricChoice::extract(const QualityReport& report) const {
    if (metric == QualityMetric::accuracy) return report.accuracy;

    const ClassMetrics* found = nullptr;
    for (const auto& m : report.per_class) {
        if (m.label == target_class || m.label == "*") {
            found = &m;
            break;
        }
    }
    if (!found) {
        std::size_t index = 0;
        if (text::parse(target_class, index) && index < report.per_class.size()) {
            found = &report.per_class[index];
        }
    }
    if (!found) throw DomainError("quality report has no class '" + target_class + "'");
    switch (metric) {
        case QualityMetric::precision: return found->precision;
        case QualityMetric::recall: return found->recall;
        default: return found->f1;
    }
}

std::string MetricChoice::describe() const {
    if (metric == QualityMetric::accuracy) return "accuracy";
    return std::string(to_string(metric)) + ":" + target_class;
}

MetricChoice parse_metric_choice(std::string_view text) {
    MetricChoice choice;
    const auto colon = text.find(':');
    choice.metric = parse_quality_metric(text.substr(0, colon));
    if (colon != std::string_view::npos) choice.target_class = std::string(text.substr(colon + 1));
    if (choice.metric != QualityMetric::accuracy && choice.target_class.empty()) {
        throw DomainError("metric '" + std::string(text) + "' needs a class, e.g. f1:PVC");
    }
    if (choice.metric == QualityMetric::accuracy && colon != std::string_view::npos) {
        throw DomainError("accuracy takes no class");
    }
    return choice;
}

// ---------------------------------------------------------------------------
// Evaluator base and parallel wrapper
// ---------------------------------------------------------------------------

void Evaluator::evaluate_batch(std::span<const ArchParams> archs, const ResultSink& sink) {
    for (std::size_t i = 0; i < archs.size(); ++i) sink(i, evaluate(archs[i]));
}

std::vector<QualityReport> Evaluator::evaluate_all(std::span<const ArchParams> archs) {
    std::vector<QualityReport> out(archs.size());
    evaluate_batch(archs, [&](std::size_t i, const QualityReport& q) { out[i] = q; });
    return out;
}

ParallelEvaluator::ParallelEvaluator(Evaluator& inner, std::size_t workers)
    : inner_(inner), workers_(std::max<std::size_t>(workers, 1)) {}

void ParallelEvaluator::evaluate_batch(std::span<const ArchParams> archs, const ResultSink& sink) {
    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= archs.size()) return;
            {
                std::lock_guard lock(error_mutex);
                if (first_error) return;
            }
            try {
                auto q = inner_.evaluate(archs[i]);
                std::lock_guard lock(sink_mutex);
                sink(i, q);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t n = std::min(workers_, archs.size());
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
    }
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Surrogate
// ---------------------------------------------------------------------------

SurrogateEvaluator::SurrogateEvaluator(NetConfig cfg, std::uint64_t seed,
                                       std::vector<std::string> labels)
    : cfg_(cfg), seed_(seed), labels_(std::move(labels)) {
    cfg_.validate();
    if (labels_.empty()) {
        for (std::int64_t c = 0; c < cfg_.num_classes; ++c) labels_.push_back(std::to_string(c));
    }
}

double SurrogateEvaluator::quality(const ArchParams& arch, const NetConfig& cfg,
                                   std::uint64_t seed) {
    constexpr double kScale = 1e6;
    const auto params = static_cast<double>(build(arch, cfg).param_count);
    const std::uint64_t key = splitmix64(seed ^ splitmix64(encode(arch).bits()));
    const double u = static_cast<double>(key >> 11) * 0x1.0p-53;
    return 0.80 + 0.15 * (1.0 - std::exp(-params / kScale)) + (0.02 * u - 0.01);
}

QualityReport SurrogateEvaluator::evaluate(const ArchParams& arch) {
    const double q = quality(arch, cfg_, seed_);
    QualityReport report;
    report.accuracy = q;
    for (const auto& label : labels_) report.per_class.push_back({label, q, q, q, false});
    return report;
}

// ---------------------------------------------------------------------------
// Table
// ---------------------------------------------------------------------------

TableEvaluator TableEvaluator::from_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        ++lineno;
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        for (auto f : text::split(t, ',')) header.emplace_back(text::trim(f));
    }
    if (header.empty()) throw FormatError("table CSV has no header");

    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    };
    const auto cb = column("B");
    const auto cx = column("x");
    const auto cz = column("z");
    auto cq = column("accuracy");
    if (!cq) cq = column("quality");
    if (!cb || !cx || !cz || !cq) {
        throw FormatError("table CSV needs B, x, z and accuracy (or quality) columns");
    }

    // A class is declared by any of its metric columns; missing ones replay
    // the row's scalar quality.
    struct PerClassColumn {
        std::string label;
        std::optional<std::size_t> precision, recall, f1;
    };
    std::vector<PerClassColumn> per_class;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto colon = header[i].find(':');
        if (colon == std::string::npos) continue;
        const std::string metric = header[i].substr(0, colon);
        if (metric != "precision" && metric != "recall" && metric != "f1") continue;
        const std::string label = header[i].substr(colon + 1);
        if (std::any_of(per_class.begin(), per_class.end(), [&](const auto& pc) { return pc.label == label; })) {
            continue;
        }
        per_class.push_back({label, column("precision:" + label), column("recall:" + label), column("f1:" + label)});
    }

    TableEvaluator table;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto fields = text::split(t, ',');
        if (fields.size() != header.size()) throw ParseError(lineno, "column count mismatch");
        ArchParams arch;
        QualityReport report;
        if (!text::parse(fields[*cb], arch.blocks) || !text::parse(fields[*cx], arch.filter_interval) ||
            !text::parse(fields[*cz], arch.lstm_exp) || !text::parse(fields[*cq], report.accuracy)) {
            throw ParseError(lineno, "non-numeric architecture or quality");
        }
        if (!arch.valid()) throw ParseError(lineno, "architecture out of range: " + to_string(arch));
        if (per_class.empty()) {
            const double q = report.accuracy;
            report.per_class.push_back({"*", q, q, q, false});
        }
        for (const auto& pc : per_class) {
            ClassMetrics m;
            m.label = pc.label;
            auto value = [&](const std::optional<std::size_t>& col, double& out) {
                if (!col) {
                    out = report.accuracy;
                    return true;
                }
                return text::parse(fields[*col], out);
            };
            if (!value(pc.precision, m.precision) || !value(pc.recall, m.recall) || !value(pc.f1, m.f1)) {
                throw ParseError(lineno, "non-numeric per-class metric");
            }
            report.per_class.push_back(std::move(m));
        }
        table.insert(arch, std::move(report));
    }
    return table;
}

TableEvaluator TableEvaluator::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open table " + path.string());
    return from_csv(in);
}

void TableEvaluator::insert(const ArchParams& arch, QualityReport report) {
    rows_[arch] = std::move(report);
}

QualityReport TableEvaluator::evaluate(const ArchParams& arch) {
    auto it = rows_.find(arch);
    if (it == rows_.end()) throw TableMiss(arch, "architecture not present in result table");
    return it->second;
}

// ---------------------------------------------------------------------------
// External trainer
// ---------------------------------------------------------------------------

class ExternalEvaluator::Process : public Subprocess {
public:
    using Subprocess::Subprocess;
};

ExternalEvaluator::ExternalEvaluator(std::string command, EvalTask task, TrainerHyperparams hp,
                                     ExternalOptions options)
    : command_(std::move(command)), task_(std::move(task)), hp_(std::move(hp)), options_(options) {
    if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

ExternalEvaluator::~ExternalEvaluator() = default;

QualityReport ExternalEvaluator::evaluate(const ArchParams& arch) {
    QualityReport out;
    evaluate_batch(std::span(&arch, 1), [&](std::size_t, const QualityReport& q) { out = q; });
    return out;
}

void ExternalEvaluator::evaluate_batch(std::span<const ArchParams> archs, const ResultSink& sink) {
    std::map<std::uint64_t, std::size_t> pending;
    std::size_t next = 0;
    std::size_t done = 0;

    auto oldest_arch = [&]() -> ArchParams {
        return pending.empty() ? archs[std::min(next, archs.size() - 1)]
                               : archs[pending.begin()->second];
    };
    // Drops the process so in-flight replies from a confused trainer cannot
    // leak into the next batch.
    auto fail = [&]<typename E>(E error) {
        process_.reset();
        throw error;
    };

    while (done < archs.size()) {
        while (pending.size() < options_.max_in_flight && next < archs.size()) {
            if (!process_) {
                try {
                    process_ = std::make_unique<Process>(command_);
                } catch (const std::exception& e) {
                    throw ProtocolError(archs[next], std::string("cannot start trainer: ") + e.what());
                }
            }
            EvalRequest req{next_id_++, archs[next], task_, hp_, std::nullopt};
            if (!process_->write_line(to_wire(req))) {
                fail(ProtocolError(archs[next], "trainer closed its input stream"));
            }
            pending.emplace(req.id, next);
            ++next;
        }

        std::string line;
        switch (process_->read_line(line, options_.timeout)) {
            case Subprocess::ReadStatus::timeout:
                fail(EvaluatorTimeout(oldest_arch(), "no response within " +
                                                         std::to_string(options_.timeout.count()) +
                                                         " ms"));
                break;
            case Subprocess::ReadStatus::eof:
                fail(ProtocolError(oldest_arch(), "trainer exited before responding"));
                break;
            case Subprocess::ReadStatus::line:
                break;
        }

        EvalResponse resp;
        try {
            resp = parse_response(line);
        } catch (const std::invalid_argument& e) {
            fail(ProtocolError(oldest_arch(), std::string("malformed response: ") + e.what()));
        }
        auto it = pending.find(resp.id);
        if (it == pending.end()) {
            fail(ProtocolError(oldest_arch(),
                               "response for unknown request id " + std::to_string(resp.id)));
        }
        const std::size_t index = it->second;
        pending.erase(it);
        if (resp.status == EvalStatus::failed) {
            fail(TrainerFailure(archs[index], "trainer reported failure: " + resp.reason));
        }
        sink(index, resp.quality);
        ++done;
    }
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kCacheHeader = "# signas-cache v1";

std::string escape_label(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == ',' || c == ';' || c == ':' || c == '%' || c == '\n' || c == '\r') {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
            out += buf;
        } else {
            out += c;
        }
    }
    return out;
}

std::optional<std::string> unescape_label(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '%') {
            out += s[i];
            continue;
        }
        if (i + 2 >= s.size()) return std::nullopt;
        unsigned value = 0;
        auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, value, 16);
        if (ec != std::errc{} || p != s.data() + i + 3) return std::nullopt;
        out += static_cast<char>(value);
        i += 2;
    }
    return out;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string hex32(std::uint32_t v) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

}  // namespace

std::string CachedEvaluator::format_row(const ArchParams& arch, std::uint64_t task_hash,
                                        std::uint64_t hp_hash, const QualityReport& report) {
    std::string row = std::to_string(arch.blocks) + ',' + std::to_string(arch.filter_interval) +
                      ',' + std::to_string(arch.lstm_exp) + ',' + hex64(task_hash) + ',' +
                      hex64(hp_hash) + ',' + text::number(report.accuracy) + ',';
    for (std::size_t i = 0; i < report.per_class.size(); ++i) {
        const auto& m = report.per_class[i];
        if (i) row += ';';
        row += escape_label(m.label) + ':' + text::number(m.precision) + ':' +
               text::number(m.recall) + ':' + text::number(m.f1) + ':' + (m.degenerate ? '1' : '0');
    }
    row += ',' + hex32(text::fnv1a(row));
    return row;
}

std::optional<CachedEvaluator::Row> CachedEvaluator::parse_row(std::string_view line) {
    line = text::trim(line);
    const auto last = line.rfind(',');
    if (last == std::string_view::npos) return std::nullopt;
    std::uint32_t checksum = 0;
    {
        auto digits = line.substr(last + 1);
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), checksum, 16);
        if (digits.size() != 8 || ec != std::errc{} || p != digits.data() + digits.size()) {
            return std::nullopt;
        }
    }
    const auto body = line.substr(0, last);
    if (text::fnv1a(body) != checksum) return std::nullopt;

    auto fields = text::split(line.substr(0, last), ',');
    if (fields.size() != 7) return std::nullopt;
    Row row{};
    if (!text::parse(fields[0], row.arch.blocks) || !text::parse(fields[1], row.arch.filter_interval) ||
        !text::parse(fields[2], row.arch.lstm_exp) || !row.arch.valid()) {
        return std::nullopt;
    }
    auto parse_hex = [](std::string_view s, std::uint64_t& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, 16);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    if (!parse_hex(fields[3], row.task_hash) || !parse_hex(fields[4], row.hp_hash)) return std::nullopt;
    if (!text::parse(fields[5], row.report.accuracy)) return std::nullopt;
    if (!fields[6].empty()) {
        for (auto entry : text::split(fields[6], ';')) {
            auto parts = text::split(entry, ':');
            if (parts.size() != 5) return std::nullopt;
            auto label = unescape_label(parts[0]);
            ClassMetrics m;
            if (!label || !text::parse(parts[1], m.precision) || !text::parse(parts[2], m.recall) ||
                !text::parse(parts[3], m.f1) || (parts[4] != "0" && parts[4] != "1")) {
                return std::nullopt;
            }
            m.label = *label;
            m.degenerate = parts[4] == "1";
            row.report.per_class.push_back(std::move(m));
        }
    }
    return row;
}

CachedEvaluator::CachedEvaluator(Evaluator& inner, std::uint64_t task_hash, std::uint64_t hp_hash,
                                 std::optional<std::filesystem::path> file)
    : inner_(inner), task_hash_(task_hash), hp_hash_(hp_hash), file_(std::move(file)) {
    if (!file_) return;
    std::ifstream in(*file_);
    if (!in) return;  // first run: nothing to resume
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        auto row = parse_row(line);
        if (!row) {
            ++skipped_lines_;
            spdlog::warn("cache {}:{}: corrupt row skipped", file_->string(), lineno);
            continue;
        }
        entries_[Key{row->arch, row->task_hash, row->hp_hash}] = std::move(row->report);
    }
}

std::size_t CachedEvaluator::size() const {
    std::shared_lock lock(map_mutex_);
    return entries_.size();
}

std::optional<QualityReport> CachedEvaluator::lookup(const Key& key) const {
    std::shared_lock lock(map_mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void CachedEvaluator::store(const Key& key, const QualityReport& report) {
    {
        std::unique_lock lock(map_mutex_);
        entries_[key] = report;
    }
    if (!file_) return;
    std::lock_guard lock(file_mutex_);
    const bool fresh = !std::filesystem::exists(*file_) || std::filesystem::file_size(*file_) == 0;
    std::ofstream out(*file_, std::ios::app);
    if (!out) {
        spdlog::warn("cannot append to cache file {}", file_->string());
        return;
    }
    if (fresh) out << kCacheHeader << '\n';
    out << format_row(key.arch, key.task_hash, key.hp_hash, report) << '\n';
    out.flush();
}

QualityReport CachedEvaluator::evaluate(const ArchParams& arch) {
    const Key key{arch, task_hash_, hp_hash_};
    if (auto hit = lookup(key)) {
        ++hits_;
        return *hit;
    }
    auto report = inner_.evaluate(arch);
    ++backend_calls_;
    store(key, report);
    return report;
}

void CachedEvaluator::evaluate_batch(std::span<const ArchParams> archs, const ResultSink& sink) {
    std::vector<ArchParams> misses;
    std::vector<std::vector<std::size_t>> miss_targets;
    std::map<ArchParams, std::size_t> miss_index;
    for (std::size_t i = 0; i < archs.size(); ++i) {
        if (auto hit = lookup(Key{archs[i], task_hash_, hp_hash_})) {
            ++hits_;
            sink(i, *hit);
            continue;
        }
        auto [it, inserted] = miss_index.emplace(archs[i], misses.size());
        if (inserted) {
            misses.push_back(archs[i]);
            miss_targets.emplace_back();
        } else {
            ++hits_;
        }
        miss_targets[it->second].push_back(i);
    }
    if (misses.empty()) return;
    inner_.evaluate_batch(misses, [&](std::size_t m, const QualityReport& q) {
        ++backend_calls_;
        store(Key{misses[m], task_hash_, hp_hash_}, q);
        for (std::size_t target : miss_targets[m]) sink(target, q);
    });
}

}  // namespace signas
