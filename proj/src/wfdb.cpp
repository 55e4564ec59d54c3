#include "signas/wfdb.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <iterator>
#include <numeric>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include <spdlog/spdlog.h>

#include "bytes.hpp"
#include "signas/compress.hpp"
#include "signas/rng.hpp"
#include "text.hpp"

namespace signas::wfdb {

// ---------------------------------------------------------------------------
// Header
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
T field(std::string_view s, std::size_t line, const char* what) {
    T v{};
    if (!text::parse(s, v)) throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
    return v;
}

// Leading integer of a field such as "212x2:1+0".
int leading_int(std::string_view s, std::size_t line, const char* what) {
    std::size_t end = 0;
    while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || (end == 0 && s[end] == '-'))) ++end;
    return field<int>(s.substr(0, end), line, what);
}

}  // namespace

Record parse_header(std::string_view content) {
    Record rec;
    std::size_t line_no = 0;
    std::size_t declared = 0;
    bool have_record_line = false;
    std::istringstream in{std::string(content)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto f = fields_of(line);

        if (!have_record_line) {
            if (f.size() < 2) throw ParseError(line_no, "record line needs name and signal count");
            if (f[0].find('/') != std::string_view::npos) {
                throw UnsupportedFormatError("multi-segment records are not supported");
            }
            rec.name = std::string(f[0]);
            const int nsig = field<int>(f[1], line_no, "signal count");
            if (nsig <= 0) throw ParseError(line_no, "record declares no signals");
            declared = static_cast<std::size_t>(nsig);
            if (f.size() > 2) {
                const auto rate = f[2].substr(0, f[2].find_first_of("/("));
                rec.sampling_rate = field<double>(rate, line_no, "sampling frequency");
                if (!(rec.sampling_rate > 0.0)) throw ParseError(line_no, "sampling frequency must be positive");
            }
            if (f.size() > 3) rec.num_samples = field<std::int64_t>(f[3], line_no, "sample count");
            if (rec.num_samples < 0) throw ParseError(line_no, "negative sample count");
            have_record_line = true;
            continue;
        }

        if (rec.signals.size() == declared) break;
        if (f.size() < 2) throw ParseError(line_no, "signal line needs file name and format");
        SignalSpec sig;
        sig.file = std::string(f[0]);
        sig.format = leading_int(f[1], line_no, "format");
        if (sig.format != 212) {
            throw UnsupportedFormatError("signal format " + std::to_string(sig.format) + " on line " +
                                         std::to_string(line_no) + " is not supported (212 only)");
        }
        if (f.size() > 2) {
            auto g = f[2];
            const auto slash = g.find('/');
            if (slash != std::string_view::npos) g = g.substr(0, slash);
            const auto paren = g.find('(');
            std::optional<int> baseline;
            if (paren != std::string_view::npos) {
                const auto close = g.find(')', paren);
                if (close == std::string_view::npos) throw ParseError(line_no, "unterminated baseline");
                baseline = field<int>(g.substr(paren + 1, close - paren - 1), line_no, "baseline");
                g = g.substr(0, paren);
            }
            sig.gain = field<double>(g, line_no, "gain");
            if (sig.gain == 0.0) sig.gain = 200.0;
            if (f.size() > 3) sig.adc_resolution = field<int>(f[3], line_no, "ADC resolution");
            if (f.size() > 4) sig.adc_zero = field<int>(f[4], line_no, "ADC zero");
            if (f.size() > 5) sig.initial_value = field<int>(f[5], line_no, "initial value");
            sig.baseline = baseline.value_or(sig.adc_zero);
        }
        if (f.size() > 8) {
            // Description is everything after the block-size field.
            const auto pos = line.find(f[8], static_cast<std::size_t>(f[7].data() - line.data()) + f[7].size());
            sig.description = std::string(line.substr(pos));
        }
        rec.signals.push_back(std::move(sig));
    }
    if (!have_record_line) throw ParseError(line_no, "missing record line");
    if (rec.signals.size() != declared) {
        throw ParseError(line_no, "expected " + std::to_string(declared) + " signal lines, found " +
                                      std::to_string(rec.signals.size()));
    }
    return rec;
}

std::string format_header(const Record& record) {
    std::ostringstream out;
    out << record.name << ' ' << record.signals.size() << ' ' << text::number(record.sampling_rate) << ' '
        << record.num_samples << '\n';
    for (const auto& s : record.signals) {
        out << s.file << ' ' << s.format << ' ' << text::number(s.gain) << '(' << s.baseline << ") "
            << s.adc_resolution << ' ' << s.adc_zero << ' ' << s.initial_value << " 0 0";
        if (!s.description.empty()) out << ' ' << s.description;
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Format 212
// ---------------------------------------------------------------------------

namespace {

std::int16_t sign_extend_12(unsigned v) {
    return static_cast<std::int16_t>(v & 0x800 ? static_cast<int>(v) - 0x1000 : static_cast<int>(v));
}

}  // namespace

std::vector<std::int16_t> decode_212(std::span<const std::uint8_t> data) {
    const std::size_t rem = data.size() % 3;
    if (rem == 1) throw FormatError("format 212: stray trailing byte");
    return decode_212(data, data.size() / 3 * 2 + (rem == 2 ? 1 : 0));
}

std::vector<std::int16_t> decode_212(std::span<const std::uint8_t> data, std::size_t count) {
    const std::size_t needed = count / 2 * 3 + (count % 2 ? 2 : 0);
    if (data.size() < needed) {
        throw FormatError("format 212: " + std::to_string(count) + " samples need " + std::to_string(needed) +
                          " bytes, found " + std::to_string(data.size()));
    }
    std::vector<std::int16_t> out;
    out.reserve(count);
    for (std::size_t i = 0; out.size() < count; i += 3) {
        const unsigned b0 = data[i];
        const unsigned b1 = data[i + 1];
        out.push_back(sign_extend_12(((b1 & 0x0F) << 8) | b0));
        if (out.size() == count) break;
        const unsigned b2 = data[i + 2];
        out.push_back(sign_extend_12(((b1 & 0xF0) << 4) | b2));
    }
    return out;
}

std::vector<std::uint8_t> encode_212(std::span<const std::int16_t> samples) {
    std::vector<std::uint8_t> out;
    out.reserve(samples.size() / 2 * 3 + 2);
    for (std::size_t i = 0; i < samples.size(); i += 2) {
        for (std::size_t j = i; j < std::min(i + 2, samples.size()); ++j) {
            if (samples[j] < -2048 || samples[j] > 2047) {
                throw DomainError("sample " + std::to_string(samples[j]) + " outside the 12-bit range");
            }
        }
        const unsigned s0 = static_cast<unsigned>(samples[i]) & 0xFFF;
        const unsigned s1 = i + 1 < samples.size() ? static_cast<unsigned>(samples[i + 1]) & 0xFFF : 0;
        out.push_back(static_cast<std::uint8_t>(s0 & 0xFF));
        out.push_back(static_cast<std::uint8_t>(((s0 >> 8) & 0x0F) | ((s1 >> 4) & 0xF0)));
        if (i + 1 < samples.size()) out.push_back(static_cast<std::uint8_t>(s1 & 0xFF));
    }
    return out;
}

void load_signals(Record& record, std::span<const std::uint8_t> dat) {
    const std::size_t nsig = record.signals.size();
    if (nsig == 0) throw DomainError("record has no signals");
    for (const auto& s : record.signals) {
        if (s.file != record.signals.front().file) {
            throw UnsupportedFormatError("signals split across several files are not supported");
        }
    }
    std::vector<std::int16_t> stream;
    if (record.num_samples > 0) {
        stream = decode_212(dat, static_cast<std::size_t>(record.num_samples) * nsig);
    } else {
        stream = decode_212(dat);
        stream.resize(stream.size() / nsig * nsig);
        record.num_samples = static_cast<std::int64_t>(stream.size() / nsig);
    }
    record.samples.assign(nsig, {});
    for (auto& ch : record.samples) ch.reserve(static_cast<std::size_t>(record.num_samples));
    for (std::size_t i = 0; i < stream.size(); ++i) record.samples[i % nsig].push_back(stream[i]);
}

// ---------------------------------------------------------------------------
// Annotations
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<const char*, 42> kSymbols = {
    "",  "N", "L", "R", "a", "V", "F", "J", "A", "S", "E", "j", "/", "Q", "~", "",  "|", "",  "s", "T", "*",
    "D", "\"", "=", "p", "B", "^", "t", "+", "u", "?", "!", "[", "]", "e", "n", "@", "x", "f", "(", ")", "r",
};

constexpr std::array<std::string_view, 19> kBeats = {"N", "L", "R", "a", "V", "F", "J", "A", "S", "E",
                                                      "j", "/", "Q", "B", "?", "e", "n", "f", "r"};

}  // namespace

std::string symbol_for_code(int c) {
    if (c > 0 && c < static_cast<int>(kSymbols.size()) && kSymbols[static_cast<std::size_t>(c)][0] != '\0') {
        return kSymbols[static_cast<std::size_t>(c)];
    }
    return "#" + std::to_string(c);
}

int code_for_symbol(std::string_view symbol) {
    for (std::size_t c = 1; c < kSymbols.size(); ++c) {
        if (symbol == kSymbols[c] && !symbol.empty()) return static_cast<int>(c);
    }
    if (symbol.size() > 1 && symbol.front() == '#') {
        int c = 0;
        if (text::parse(symbol.substr(1), c) && c > 0 && c < code::skip) return c;
    }
    return 0;
}

bool is_beat(std::string_view symbol) {
    return std::find(kBeats.begin(), kBeats.end(), symbol) != kBeats.end();
}

std::vector<Annotation> parse_annotations(std::span<const std::uint8_t> data) {
    bytes::Reader r(data, "annotation stream");
    std::vector<Annotation> out;
    std::int64_t sample = 0;
    int chan = 0;
    int num = 0;
    auto last = [&](const char* what) -> Annotation& {
        if (out.empty()) throw FormatError(std::string(what) + " modifier before any annotation");
        return out.back();
    };
    while (true) {
        if (r.remaining() < 2) throw FormatError("annotation stream: missing terminator");
        const std::uint16_t word = r.u16();
        const int c = word >> 10;
        const int delta = word & 0x3FF;
        if (c == 0 && delta == 0) break;
        switch (c) {
            case code::skip: {
                const std::uint32_t high = r.u16();
                const std::uint32_t low = r.u16();
                sample += static_cast<std::int32_t>((high << 16) | low);
                break;
            }
            case code::num:
                num = delta;
                last("NUM").num = num;
                break;
            case code::sub:
                last("SUB").subtype = delta;
                break;
            case code::chn:
                chan = delta;
                last("CHN").chan = chan;
                break;
            case code::aux: {
                auto& a = last("AUX");
                a.aux = r.str(static_cast<std::size_t>(delta));
                if (delta % 2) r.u8();
                break;
            }
            default: {
                sample += delta;
                Annotation a;
                a.sample = sample;
                a.code = c;
                a.symbol = symbol_for_code(c);
                a.chan = chan;
                a.num = num;
                out.push_back(std::move(a));
                break;
            }
        }
    }
    return out;
}

std::vector<std::uint8_t> serialize_annotations(std::span<const Annotation> annotations) {
    bytes::Writer w;
    auto word = [&](int c, int delta) { w.u16(static_cast<std::uint16_t>((c << 10) | delta)); };
    std::int64_t sample = 0;
    int chan = 0;
    int num = 0;
    for (const auto& a : annotations) {
        if (a.code <= 0 || a.code >= code::skip) throw DomainError("annotation code " + std::to_string(a.code) + " cannot be written");
        if (a.sample < sample) throw DomainError("annotation samples must be non-decreasing");
        for (int v : {a.subtype, a.chan, a.num}) {
            if (v < 0 || v > 0x3FF) throw DomainError("annotation modifier outside [0,1023]");
        }
        if (a.aux && a.aux->size() > 0x3FF) throw DomainError("annotation aux longer than 1023 bytes");

        const std::int64_t delta = a.sample - sample;
        if (delta > 0x3FF) {
            if (delta > INT32_MAX) throw DomainError("annotation gap too large");
            word(code::skip, 0);
            const auto d = static_cast<std::uint32_t>(delta);
            w.u16(static_cast<std::uint16_t>(d >> 16));
            w.u16(static_cast<std::uint16_t>(d & 0xFFFF));
            word(a.code, 0);
        } else {
            word(a.code, static_cast<int>(delta));
        }
        sample = a.sample;
        if (a.subtype != 0) word(code::sub, a.subtype);
        if (a.chan != chan) {
            chan = a.chan;
            word(code::chn, chan);
        }
        if (a.num != num) {
            num = a.num;
            word(code::num, num);
        }
        if (a.aux) {
            word(code::aux, static_cast<int>(a.aux->size()));
            w.raw(*a.aux);
            if (a.aux->size() % 2) w.u8(0);
        }
    }
    word(0, 0);
    return std::move(w.data());
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

std::string_view to_string(UnmappedPolicy p) {
    switch (p) {
        case UnmappedPolicy::ignore: return "ignore";
        case UnmappedPolicy::drop_window: return "drop";
        case UnmappedPolicy::other: return "other";
    }
    return "?";
}

UnmappedPolicy parse_unmapped_policy(std::string_view name) {
    if (name == "ignore") return UnmappedPolicy::ignore;
    if (name == "drop") return UnmappedPolicy::drop_window;
    if (name == "other") return UnmappedPolicy::other;
    throw DomainError("unknown unmapped-symbol policy '" + std::string(name) + "'");
}

int TaskSpec::class_index(std::string_view name) const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] == name) return static_cast<int>(i);
    }
    return -1;
}

void TaskSpec::validate() const {
    if (classes.size() < 2) throw DomainError("task " + task_id + " needs at least two classes");
    for (std::size_t i = 0; i < classes.size(); ++i) {
        for (std::size_t j = i + 1; j < classes.size(); ++j) {
            if (classes[i] == classes[j]) throw DomainError("duplicate class '" + classes[i] + "'");
        }
    }
    for (const auto& [symbol, cls] : symbol_map) {
        if (class_index(cls) < 0) throw DomainError("symbol '" + symbol + "' maps to unknown class '" + cls + "'");
    }
    if (class_index(fallback_class) < 0) throw DomainError("fallback class '" + fallback_class + "' is not a task class");
}

TaskSpec TaskSpec::preset(std::string_view id) {
    TaskSpec t;
    t.task_id = std::string(id);
    auto map = [&](std::initializer_list<const char*> symbols, const char* cls) {
        for (const char* s : symbols) t.symbol_map[s] = cls;
    };
    if (id == "DNN1") {
        t.classes = {"Normal", "Anomaly"};
        t.fallback_class = "Anomaly";
    } else if (id == "DNN2") {
        t.classes = {"Normal", "PVC", "Other"};
        map({"V"}, "PVC");
    } else if (id == "DNN3") {
        t.classes = {"Normal", "BBB", "Other"};
        map({"L", "R"}, "BBB");
    } else if (id == "DNN4") {
        t.classes = {"Normal", "Atrial", "Ventricular", "Other"};
        map({"A", "a", "J", "S"}, "Atrial");
        map({"V", "E"}, "Ventricular");
    } else if (id == "DNN5") {
        t.classes = {"Normal", "VFib", "Other"};
        map({"[", "!", "]"}, "VFib");
    } else {
        throw DomainError("unknown task '" + std::string(id) + "' (expected DNN1..DNN5)");
    }
    if (t.fallback_class.empty()) t.fallback_class = "Other";
    map({"N"}, "Normal");
    return t;
}

int label_priority(const TaskSpec& task, int class_index) {
    if (class_index == 0) return 0;
    if (class_index == task.class_index(task.fallback_class)) return 1;
    return 2;
}

Split WindowedDataset::split_of(std::size_t i) const {
    if (std::binary_search(val.begin(), val.end(), i)) return Split::val;
    if (std::binary_search(test.begin(), test.end(), i)) return Split::test;
    return Split::train;
}

// ---------------------------------------------------------------------------
// Dataset construction
// ---------------------------------------------------------------------------

namespace {

// -1: no label, -2: drop the window.
int label_window(const TaskSpec& task, std::span<const Annotation> inside) {
    int best = -1;
    int best_priority = -1;
    for (const auto& a : inside) {
        int cls;
        if (auto it = task.symbol_map.find(a.symbol); it != task.symbol_map.end()) {
            cls = task.class_index(it->second);
        } else if (is_beat(a.symbol) || task.unmapped == UnmappedPolicy::other) {
            cls = task.class_index(task.fallback_class);
        } else if (task.unmapped == UnmappedPolicy::drop_window) {
            return -2;
        } else {
            continue;
        }
        const int p = label_priority(task, cls);
        if (p > best_priority) {
            best = cls;
            best_priority = p;
        }
    }
    return best;
}

}  // namespace

WindowedDataset build_dataset(std::span<const RecordData> records, const TaskSpec& task, std::uint64_t seed,
                              const DatasetOptions& options) {
    task.validate();
    if (options.window == 0) throw DomainError("window length must be positive");
    if (!(options.train_fraction >= 0.0 && options.val_fraction >= 0.0 &&
          options.train_fraction + options.val_fraction <= 1.0)) {
        throw DomainError("split fractions must be non-negative and sum to at most 1");
    }
    if (records.empty()) throw EmptyDatasetError("no records given");

    WindowedDataset ds;
    ds.task_id = task.task_id;
    ds.classes = task.classes;
    ds.seed = seed;
    ds.window = options.window;
    ds.channels = records.front().record.samples.size();

    for (std::size_t ri = 0; ri < records.size(); ++ri) {
        const auto& rec = records[ri].record;
        if (rec.samples.size() != ds.channels || ds.channels == 0) {
            throw DomainError("record " + rec.name + " has " + std::to_string(rec.samples.size()) +
                              " loaded channels, expected " + std::to_string(ds.channels));
        }
        if (rec.sampling_rate != records.front().record.sampling_rate) {
            spdlog::warn("record {} is sampled at {} Hz, {} at {} Hz; no resampling is done", rec.name,
                         rec.sampling_rate, records.front().record.name, records.front().record.sampling_rate);
        }
        const std::size_t length = rec.samples.front().size();
        for (const auto& ch : rec.samples) {
            if (ch.size() != length) throw DomainError("record " + rec.name + " has channels of unequal length");
        }

        const auto& anns = records[ri].annotations;
        auto cursor = anns.begin();
        for (std::size_t start = 0; start + options.window <= length; start += options.window) {
            const auto end = static_cast<std::int64_t>(start + options.window);
            while (cursor != anns.end() && cursor->sample < static_cast<std::int64_t>(start)) ++cursor;
            auto stop = cursor;
            while (stop != anns.end() && stop->sample < end) ++stop;
            const int label = label_window(task, std::span<const Annotation>(cursor, stop));
            cursor = stop;
            if (label < 0) continue;

            Window w;
            w.label = label;
            w.record = ri;
            w.start = static_cast<std::int64_t>(start);
            w.samples.reserve(ds.channels * options.window);
            for (const auto& ch : rec.samples) {
                for (std::size_t i = start; i < start + options.window; ++i) {
                    w.samples.push_back(static_cast<std::int16_t>(ch[i]));
                }
            }
            ds.windows.push_back(std::move(w));
        }
    }
    if (ds.windows.empty()) throw EmptyDatasetError("no labeled " + std::to_string(options.window) + "-sample window");

    const std::size_t n = ds.windows.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng::stream(seed, 0xDA7A).shuffle(std::span<std::size_t>(order));
    const auto n_train = static_cast<std::size_t>(std::llround(options.train_fraction * static_cast<double>(n)));
    const auto n_val = std::min(n - n_train,
                                static_cast<std::size_t>(std::llround(options.val_fraction * static_cast<double>(n))));
    ds.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                  order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    ds.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    for (auto* s : {&ds.train, &ds.val, &ds.test}) std::sort(s->begin(), s->end());
    return ds;
}

RecordData load_record(const std::filesystem::path& stem, std::string_view annotator) {
    auto with_ext = [&](std::string_view ext) {
        auto p = stem;
        p += ".";
        p += std::string(ext);
        return p;
    };
    const auto header_bytes = read_file(with_ext("hea").string());
    RecordData data;
    data.record = parse_header(std::string_view(reinterpret_cast<const char*>(header_bytes.data()), header_bytes.size()));
    const auto dat = read_file((stem.parent_path() / data.record.signals.front().file).string());
    load_signals(data.record, dat);
    if (!annotator.empty()) {
        const auto atr = with_ext(annotator);
        if (std::filesystem::exists(atr)) {
            data.annotations = parse_annotations(read_file(atr.string()));
        } else {
            spdlog::warn("record {} has no {} annotations", data.record.name, annotator);
        }
    }
    return data;
}

// ---------------------------------------------------------------------------
// Dataset file
// ---------------------------------------------------------------------------

void write_dataset(std::ostream& out, const WindowedDataset& ds) {
    nlohmann::ordered_json header;
    header["format"] = "signas-dataset";
    header["version"] = 1;
    header["task_id"] = ds.task_id;
    header["classes"] = ds.classes;
    header["channels"] = ds.channels;
    header["window"] = ds.window;
    header["seed"] = ds.seed;
    header["windows"] = ds.windows.size();
    header["counts"] = {{"train", ds.train.size()}, {"val", ds.val.size()}, {"test", ds.test.size()}};
    out << header.dump() << '\n';

    bytes::Writer w;
    for (std::size_t i = 0; i < ds.windows.size(); ++i) {
        const auto& win = ds.windows[i];
        w.u8(static_cast<std::uint8_t>(ds.split_of(i)));
        w.u8(static_cast<std::uint8_t>(win.label));
        for (auto s : win.samples) w.i16(s);
    }
    const auto& body = w.data();
    out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
}

WindowedDataset read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("dataset: missing header line");
    WindowedDataset ds;
    std::size_t count = 0;
    try {
        const auto header = nlohmann::json::parse(line);
        if (header.at("format") != "signas-dataset" || header.at("version") != 1) {
            throw FormatError("dataset: unsupported header");
        }
        ds.task_id = header.at("task_id").get<std::string>();
        ds.classes = header.at("classes").get<std::vector<std::string>>();
        ds.channels = header.at("channels").get<std::size_t>();
        ds.window = header.at("window").get<std::size_t>();
        ds.seed = header.at("seed").get<std::uint64_t>();
        count = header.at("windows").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("dataset header: ") + e.what());
    }
    const std::vector<std::uint8_t> body{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    bytes::Reader r(body, "dataset");
    for (std::size_t i = 0; i < count; ++i) {
        const auto split = r.u8();
        Window w;
        w.label = r.u8();
        if (split > 2) throw FormatError("dataset: bad split tag " + std::to_string(split));
        if (static_cast<std::size_t>(w.label) >= ds.classes.size()) throw FormatError("dataset: label out of range");
        w.samples.resize(ds.channels * ds.window);
        for (auto& s : w.samples) s = r.i16();
        (split == 0 ? ds.train : split == 1 ? ds.val : ds.test).push_back(i);
        ds.windows.push_back(std::move(w));
    }
    r.expect_end();
    return ds;
}

}  // namespace signas::wfdb
