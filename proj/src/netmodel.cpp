#include "signas/netmodel.hpp"

#include <algorithm>
#include <ostream>

#include "signas/error.hpp"

namespace signas {

void NetConfig::validate() const {
    if (input_len <= 0) throw DomainError("input_len must be positive");
    if (input_channels <= 0) throw DomainError("input_channels must be positive");
    if (kernel <= 0) throw DomainError("kernel must be positive");
    if (base_filters <= 0) throw DomainError("base_filters must be positive");
    if (num_classes < 2) throw DomainError("num_classes must be at least 2");
    if (bytes_per_param <= 0) throw DomainError("bytes_per_param must be positive");
}

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv1d: return "conv1d";
        case LayerKind::batchnorm: return "batchnorm";
        case LayerKind::relu: return "relu";
        case LayerKind::dropout: return "dropout";
        case LayerKind::add_skip: return "add-skip";
        case LayerKind::lstm: return "lstm";
        case LayerKind::dense: return "dense";
        case LayerKind::softmax: return "softmax";
    }
    return "?";
}

std::vector<std::int64_t> filter_schedule(const ArchParams& arch, std::int64_t base_filters) {
    std::vector<std::int64_t> filters;
    filters.reserve(static_cast<std::size_t>(std::max(arch.blocks, 0)));
    for (int i = 1; i <= arch.blocks; ++i) {
        filters.push_back(base_filters << ((i - 1) / arch.filter_interval));
    }
    return filters;
}

namespace {

class StackBuilder {
public:
    explicit StackBuilder(const NetConfig& cfg) : cfg_(cfg), channels_(cfg.input_channels) {}

    void conv(std::int64_t out, std::int64_t k) {
        const std::int64_t len = cfg_.input_len;
        push({LayerKind::conv1d, channels_, out, len, k * channels_ * out + out,
              2 * k * channels_ * out * len + out * len, k});
        channels_ = out;
    }
    /// 1x1 conv on the skip path; does not advance the main-path channels.
    void projection(std::int64_t in, std::int64_t out) {
        const std::int64_t len = cfg_.input_len;
        LayerSpec layer{LayerKind::conv1d, in, out, len, in * out + out, 2 * in * out * len + out * len, 1};
        layer.shortcut = true;
        push(layer);
    }
    void batchnorm() {
        const std::int64_t len = cfg_.input_len;
        push({LayerKind::batchnorm, channels_, channels_, len, 4 * channels_, 2 * channels_ * len});
    }
    void relu() {
        push({LayerKind::relu, channels_, channels_, cfg_.input_len, 0, channels_ * cfg_.input_len});
    }
    void dropout() { push({LayerKind::dropout, channels_, channels_, cfg_.input_len, 0, 0}); }
    void add_skip() {
        push({LayerKind::add_skip, channels_, channels_, cfg_.input_len, 0,
              channels_ * cfg_.input_len});
    }
    void lstm(std::int64_t hidden) {
        const std::int64_t din = channels_;
        const std::int64_t steps = cfg_.input_len;
        push({LayerKind::lstm, din, hidden, 1, 4 * (din * hidden + hidden * hidden + hidden),
              8 * (din * hidden + hidden * hidden) * steps + 5 * hidden * steps});
        channels_ = hidden;
    }
    void dense(std::int64_t out) {
        push({LayerKind::dense, channels_, out, 1, channels_ * out + out, 2 * channels_ * out});
        channels_ = out;
    }
    void softmax() { push({LayerKind::softmax, channels_, channels_, 1, 0, 3 * channels_}); }

    std::int64_t channels() const { return channels_; }

    NetworkSummary finish() && {
        summary_.storage_bytes = summary_.param_count * cfg_.bytes_per_param;
        return std::move(summary_);
    }

private:
    void push(LayerSpec layer) {
        summary_.param_count += layer.params;
        summary_.flops += layer.flops;
        summary_.layers.push_back(layer);
    }

    const NetConfig& cfg_;
    std::int64_t channels_;
    NetworkSummary summary_;
};

}  // namespace

NetworkSummary build(const ArchParams& arch, const NetConfig& cfg) {
    if (!arch.valid()) throw DomainError("invalid architecture " + to_string(arch));
    cfg.validate();

    StackBuilder net(cfg);
    net.conv(cfg.base_filters, cfg.kernel);
    net.batchnorm();
    net.relu();
    for (std::int64_t filters : filter_schedule(arch, cfg.base_filters)) {
        const std::int64_t block_in = net.channels();
        net.conv(filters, cfg.kernel);
        net.batchnorm();
        net.relu();
        net.dropout();
        net.conv(filters, cfg.kernel);
        net.batchnorm();
        if (block_in != filters) net.projection(block_in, filters);
        net.add_skip();
        net.relu();
    }
    net.lstm(arch.lstm_cells());
    net.dense(cfg.num_classes);
    net.softmax();
    return std::move(net).finish();
}

std::int64_t s_max(const ArchitectureSpace& space, const NetConfig& cfg) {
    if (space.empty()) throw DomainError("s_max of an empty architecture space");
    std::int64_t best = 0;
    for (const auto& arch : space) best = std::max(best, build(arch, cfg).storage_bytes);
    return best;
}

std::vector<WeightShape> weight_shapes(const ArchParams& arch, const NetConfig& cfg) {
    if (!arch.valid()) throw DomainError("invalid architecture " + to_string(arch));
    cfg.validate();
    auto u32 = [](std::int64_t v) { return static_cast<std::uint32_t>(v); };

    std::vector<WeightShape> out;
    auto conv = [&](const std::string& prefix, std::int64_t cin, std::int64_t cout, std::int64_t k) {
        out.push_back({prefix + ".weight", {u32(cout), u32(cin), u32(k)}});
        out.push_back({prefix + ".bias", {u32(cout)}});
    };
    auto bn = [&](const std::string& prefix, std::int64_t c) {
        for (const char* field : {".gamma", ".beta", ".running_mean", ".running_var"}) {
            out.push_back({prefix + field, {u32(c)}});
        }
    };

    std::int64_t channels = cfg.base_filters;
    conv("stem.conv", cfg.input_channels, channels, cfg.kernel);
    bn("stem.bn", channels);
    int index = 1;
    for (std::int64_t filters : filter_schedule(arch, cfg.base_filters)) {
        const std::string p = "block" + std::to_string(index++);
        conv(p + ".conv1", channels, filters, cfg.kernel);
        bn(p + ".bn1", filters);
        conv(p + ".conv2", filters, filters, cfg.kernel);
        bn(p + ".bn2", filters);
        if (channels != filters) conv(p + ".proj", channels, filters, 1);
        channels = filters;
    }
    const std::int64_t h = arch.lstm_cells();
    out.push_back({"lstm.kernel", {u32(channels), u32(4 * h)}});
    out.push_back({"lstm.recurrent", {u32(h), u32(4 * h)}});
    out.push_back({"lstm.bias", {u32(4 * h)}});
    out.push_back({"dense.weight", {u32(h), u32(cfg.num_classes)}});
    out.push_back({"dense.bias", {u32(cfg.num_classes)}});
    return out;
}

void write_describe_csv(std::ostream& out, const NetworkSummary& summary) {
    out << "kind,in_ch,out_ch,out_len,params,flops\n";
    for (const auto& layer : summary.layers) {
        out << to_string(layer.kind) << ',' << layer.in_channels << ',' << layer.out_channels << ','
            << layer.output_len << ',' << layer.params << ',' << layer.flops << '\n';
    }
    out << "total,,,," << summary.param_count << ',' << summary.flops << '\n';
}

}  // namespace signas
