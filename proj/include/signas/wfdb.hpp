#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signas/error.hpp"

namespace signas::wfdb {

struct SignalSpec {
    std::string file;
    int format = 212;
    double gain = 200.0;  ///< ADC units per physical unit
    int baseline = 0;
    int adc_resolution = 12;
    int adc_zero = 0;
    int initial_value = 0;
    std::string description;
};

struct Record {
    std::string name;
    double sampling_rate = 250.0;
    std::int64_t num_samples = 0;  ///< per channel
    std::vector<SignalSpec> signals;
    std::vector<std::vector<int>> samples;  ///< per channel, filled by load_signals
};

/// Parses a single-segment `.hea` file. Comment and blank lines are skipped.
/// Malformed lines raise ParseError; a format other than 212 raises
/// UnsupportedFormatError.
Record parse_header(std::string_view text);

/// Inverse of parse_header for the fields Record keeps.
std::string format_header(const Record& record);

/// Unpacks format-212 bytes into the interleaved sample stream. Two trailing
/// bytes hold one final sample; a single stray byte is a FormatError.
std::vector<std::int16_t> decode_212(std::span<const std::uint8_t> bytes);

/// As above but for exactly `count` samples; fewer bytes than needed is a
/// FormatError and any extra bytes are ignored.
std::vector<std::int16_t> decode_212(std::span<const std::uint8_t> bytes, std::size_t count);

/// Packs samples in [-2048, 2047]; an odd count ends with a two-byte group.
std::vector<std::uint8_t> encode_212(std::span<const std::int16_t> samples);

/// De-interleaves frame-ordered 212 data into record.samples. When the header
/// gives no sample count it is taken from the data.
void load_signals(Record& record, std::span<const std::uint8_t> dat);

// --- annotations ---------------------------------------------------------------

namespace code {
inline constexpr int skip = 59;
inline constexpr int num = 60;
inline constexpr int sub = 61;
inline constexpr int chn = 62;
inline constexpr int aux = 63;
}  // namespace code

struct Annotation {
    std::int64_t sample = 0;
    int code = 1;
    std::string symbol = "N";
    int subtype = 0;
    int chan = 0;
    int num = 0;
    std::optional<std::string> aux;

    bool operator==(const Annotation&) const = default;
};

/// Mnemonic of an annotation code, or "#<code>" for codes outside the table.
std::string symbol_for_code(int code);
/// 0 when `symbol` is not in the table.
int code_for_symbol(std::string_view symbol);
/// True for the beat annotations (N, L, R, a, V, F, J, A, S, E, j, /, Q, ...).
bool is_beat(std::string_view symbol);

/// Reads an MIT-format annotation stream. NUM and CHN values carry forward
/// to later annotations as in the reference library. Throws FormatError when
/// the terminator is missing or a modifier has nothing to modify.
std::vector<Annotation> parse_annotations(std::span<const std::uint8_t> bytes);

/// Writes the stream parse_annotations reads. Gaps over 1023 samples use
/// SKIP; NUM and CHN are emitted only when they change.
std::vector<std::uint8_t> serialize_annotations(std::span<const Annotation> annotations);

// --- tasks and datasets --------------------------------------------------------

/// What to do with a non-beat annotation missing from the symbol map.
enum class UnmappedPolicy { ignore, drop_window, other };

std::string_view to_string(UnmappedPolicy p);
UnmappedPolicy parse_unmapped_policy(std::string_view name);

struct TaskSpec {
    std::string task_id;
    std::vector<std::string> classes;  ///< classes[0] is the normal class
    std::map<std::string, std::string> symbol_map;
    /// Class for beat symbols absent from symbol_map.
    std::string fallback_class;
    UnmappedPolicy unmapped = UnmappedPolicy::ignore;

    void validate() const;
    int class_index(std::string_view name) const;

    /// DNN1 .. DNN5 with the default symbol maps.
    static TaskSpec preset(std::string_view task_id);
};

/// Labeling priority: the normal class lowest, the fallback class next,
/// every other class highest.
int label_priority(const TaskSpec& task, int class_index);

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

struct Window {
    std::vector<std::int16_t> samples;  ///< channel-major, `window` samples per channel
    int label = 0;
    std::size_t record = 0;             ///< index into the input records
    std::int64_t start = 0;
};

struct WindowedDataset {
    std::string task_id;
    std::vector<std::string> classes;
    std::uint64_t seed = 0;
    std::size_t channels = 0;
    std::size_t window = 256;
    std::vector<Window> windows;
    std::vector<std::size_t> train, val, test;  ///< ascending window indices

    Split split_of(std::size_t window_index) const;
};

struct RecordData {
    Record record;
    std::vector<Annotation> annotations;
};

struct DatasetOptions {
    std::size_t window = 256;
    double train_fraction = 0.7;
    double val_fraction = 0.1;
};

class EmptyDatasetError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Tiles each record into non-overlapping windows from sample 0, labels each
/// from the annotations inside it (highest priority, earliest first), drops
/// unlabeled windows, shuffles with the seed and splits by count.
WindowedDataset build_dataset(std::span<const RecordData> records, const TaskSpec& task,
                              std::uint64_t seed, const DatasetOptions& options = {});

/// Reads `<stem>.hea`, the 212 signal file it names and `<stem>.<annotator>`.
RecordData load_record(const std::filesystem::path& stem, std::string_view annotator = "atr");

/// JSON header line, then per window: u8 split, u8 label, int16 LE samples.
void write_dataset(std::ostream& out, const WindowedDataset& ds);
WindowedDataset read_dataset(std::istream& in);

}  // namespace signas::wfdb
