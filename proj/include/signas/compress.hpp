#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signas/netmodel.hpp"

namespace signas {

struct Tensor {
    std::string name;
    std::vector<std::uint32_t> shape;
    std::vector<float> values;  ///< row-major

    std::size_t size() const noexcept { return values.size(); }
    bool operator==(const Tensor&) const = default;
};

/// Ordered named weight tensors. Names are unique and every tensor holds
/// exactly product(shape) finite values.
class TensorStore {
public:
    /// Throws DomainError on a duplicate name, a shape/size mismatch or a
    /// non-finite value.
    void add(Tensor tensor);

    const std::vector<Tensor>& tensors() const noexcept { return tensors_; }
    std::vector<Tensor>& tensors() noexcept { return tensors_; }
    std::size_t size() const noexcept { return tensors_.size(); }
    std::size_t total_elements() const noexcept;
    const Tensor* find(std::string_view name) const noexcept;

    bool operator==(const TensorStore&) const = default;

private:
    std::vector<Tensor> tensors_;
};

std::size_t element_count(std::span<const std::uint32_t> shape);

enum class PruneMode { layer_wise, class_blind };

std::string_view to_string(PruneMode m);
PruneMode parse_prune_mode(std::string_view name);

struct PruneSpec {
    double fraction = 0.0;
    PruneMode mode = PruneMode::class_blind;
    /// Rank-1 tensors (biases, batch-norm parameters) are left alone unless set.
    bool prune_vectors = false;

    void validate() const;
};

struct PruneResult {
    TensorStore store;
    /// Per tensor, true where the element was zeroed by this call.
    std::vector<std::vector<bool>> mask;
    std::size_t pruned = 0;
};

/// Zeroes the floor(fraction * n) smallest-magnitude entries of each scope:
/// every prunable tensor (layer-wise) or all prunable tensors together
/// (class-blind). Ties go to the earlier tensor, then the lower index.
PruneResult prune(const TensorStore& store, const PruneSpec& spec);

bool is_prunable(const Tensor& t, const PruneSpec& spec) noexcept;

enum class CodebookMode {
    /// 2^q values equally spaced from the tensor's min to max nonzero weight;
    /// clusters (by ascending centroid) take the grid slots.
    equally_spaced,
    /// Codebook entries are the cluster centroids.
    centroid,
};

std::string_view to_string(CodebookMode m);
CodebookMode parse_codebook_mode(std::string_view name);

struct QuantSpec {
    int bits = 4;
    CodebookMode codebook = CodebookMode::equally_spaced;
    std::uint64_t seed = 1;

    void validate() const;
};

struct CompressedTensor {
    std::string name;
    std::vector<std::uint32_t> shape;
    int bits = 0;
    std::vector<bool> nonzero;        ///< one flag per element
    std::vector<float> codebook;      ///< 2^bits entries, empty when nothing survives
    std::vector<std::uint8_t> codes;  ///< one per nonzero element, in element order

    std::size_t size() const noexcept { return nonzero.size(); }
    std::size_t nnz() const noexcept { return codes.size(); }
    bool operator==(const CompressedTensor&) const = default;
};

struct CompressedStore {
    std::vector<CompressedTensor> tensors;

    bool operator==(const CompressedStore&) const = default;
};

/// k-means (k-means++ seeding, at most 100 Lloyd iterations) over the
/// nonzero values of each tensor with k = min(2^bits, distinct values).
/// Each tensor draws from its own RNG stream, so tensors are independent.
CompressedStore quantize(const TensorStore& store, const QuantSpec& spec);

TensorStore decompress(const CompressedStore& cs);

/// Exact size of the BNXC encoding of `cs`.
std::size_t storage_bytes(const CompressedStore& cs);

/// Size of the tensors as raw 32-bit floats.
std::size_t dense_bytes(const TensorStore& store) noexcept;

/// dense_bytes / storage_bytes
double compression_ratio(const TensorStore& original, const CompressedStore& cs);

/// 1-D k-means result: ascending centroids and the cluster of each value.
struct KMeans1D {
    std::vector<double> centroids;
    std::vector<std::size_t> assignment;
    int iterations = 0;
};

KMeans1D kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed);

// --- containers ------------------------------------------------------------

std::vector<std::uint8_t> serialize(const CompressedStore& cs);
/// Throws FormatError on bad magic, version, truncation or trailing bytes.
CompressedStore deserialize_compressed(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize(const TensorStore& store);
TensorStore deserialize_tensors(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

/// JSON listing of pruned element indices per tensor, handed to a trainer for
/// masked retraining.
void write_mask_json(std::ostream& out, const TensorStore& store,
                     const std::vector<std::vector<bool>>& mask);

// --- synthetic stores --------------------------------------------------------

/// Weights uniform in [-1, 1) for every tensor of `arch`.
TensorStore synthetic_store(const ArchParams& arch, const NetConfig& net, std::uint64_t seed);

/// `count` weights split as evenly as possible across `tensors` 2-D tensors.
TensorStore random_store(std::size_t count, std::size_t tensors, std::uint64_t seed);

}  // namespace signas
