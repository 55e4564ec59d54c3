#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "signas/archspace.hpp"

namespace signas {

struct NetConfig {
    std::int64_t input_len = 256;
    std::int64_t input_channels = 1;
    std::int64_t kernel = 16;
    std::int64_t base_filters = 32;
    std::int64_t num_classes = 2;
    std::int64_t bytes_per_param = 4;

    /// Throws DomainError on non-positive sizes or fewer than two classes.
    void validate() const;
};

enum class LayerKind { conv1d, batchnorm, relu, dropout, add_skip, lstm, dense, softmax };

std::string_view to_string(LayerKind kind);

struct LayerSpec {
    LayerKind kind;
    std::int64_t in_channels = 0;
    std::int64_t out_channels = 0;
    std::int64_t output_len = 0;  ///< sequence length; 1 after the LSTM
    std::int64_t params = 0;
    std::int64_t flops = 0;
    std::int64_t kernel = 0;      ///< conv width, 0 for other kinds
    bool shortcut = false;        ///< on the skip path: consumes the block input
};

struct NetworkSummary {
    std::vector<LayerSpec> layers;
    std::int64_t param_count = 0;
    std::int64_t storage_bytes = 0;  ///< S_DNN
    std::int64_t flops = 0;          ///< F_DNN, one inference
};

/// Filters of each ResNet block: 32 * 2^floor((i-1)/x) for block i (1-based).
std::vector<std::int64_t> filter_schedule(const ArchParams& arch, std::int64_t base_filters = 32);

/// Expands the canonical stack
///
///   conv1d(k, base) -> batchnorm -> relu
///   -> B x [conv1d -> batchnorm -> relu -> dropout -> conv1d -> batchnorm
///           (-> 1x1 conv1d projection when channels change) -> add_skip -> relu]
///   -> lstm(2^z, final hidden state) -> dense(C) -> softmax
///
/// and accumulates per-layer costs. Convolutions are stride 1 with "same"
/// padding, so every layer before the LSTM keeps input_len samples.
///
/// Parameters: conv k*Cin*Cout + Cout; batchnorm 4*C (gamma, beta, running
/// mean and variance); lstm 4*(din*h + h*h + h); dense h*C + C.
///
/// FLOPs (one multiply-accumulate = 2): conv 2*k*Cin*Cout*L + Cout*L;
/// batchnorm 2*C*L; relu C*L; add_skip C*L; dropout 0 at inference;
/// lstm 8*(din*h + h*h)*T + 5*h*T; dense 2*h*C; softmax 3*C.
NetworkSummary build(const ArchParams& arch, const NetConfig& cfg = {});

/// Largest storage_bytes over the space. Empty space throws DomainError.
std::int64_t s_max(const ArchitectureSpace& space, const NetConfig& cfg = {});

/// One named weight tensor of a built network.
struct WeightShape {
    std::string name;
    std::vector<std::uint32_t> shape;
};

/// Tensor names and shapes matching build()'s parameter accounting, in stack
/// order. Used to generate synthetic weight stores for compression runs.
std::vector<WeightShape> weight_shapes(const ArchParams& arch, const NetConfig& cfg = {});

/// CSV: kind,in_ch,out_ch,out_len,params,flops per layer, then a totals row.
void write_describe_csv(std::ostream& out, const NetworkSummary& summary);

}  // namespace signas
