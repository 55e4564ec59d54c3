#include "signas/compress.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <tuple>

#include "json.hpp"

#include "bytes.hpp"
#include "signas/error.hpp"
#include "signas/rng.hpp"

namespace signas {

namespace {

constexpr std::string_view kCompressedMagic = "BNXC";
constexpr std::string_view kDenseMagic = "BNXW";
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 2 + 4;

}  // namespace

std::size_t element_count(std::span<const std::uint32_t> shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

void TensorStore::add(Tensor tensor) {
    if (find(tensor.name)) throw DomainError("duplicate tensor name '" + tensor.name + "'");
    if (tensor.name.size() > 0xFFFF) throw DomainError("tensor name too long");
    if (tensor.shape.size() > 0xFF) throw DomainError("tensor rank too large");
    if (element_count(tensor.shape) != tensor.values.size()) {
        throw DomainError("tensor '" + tensor.name + "' has " + std::to_string(tensor.values.size()) +
                          " values for shape of " + std::to_string(element_count(tensor.shape)));
    }
    for (float v : tensor.values) {
        if (!std::isfinite(v)) throw DomainError("tensor '" + tensor.name + "' holds a non-finite value");
    }
    tensors_.push_back(std::move(tensor));
}

std::size_t TensorStore::total_elements() const noexcept {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.size();
    return n;
}

const Tensor* TensorStore::find(std::string_view name) const noexcept {
    for (const auto& t : tensors_) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Pruning
// ---------------------------------------------------------------------------

std::string_view to_string(PruneMode m) { return m == PruneMode::layer_wise ? "layer-wise" : "class-blind"; }

PruneMode parse_prune_mode(std::string_view name) {
    if (name == "layer-wise" || name == "layer_wise") return PruneMode::layer_wise;
    if (name == "class-blind" || name == "class_blind") return PruneMode::class_blind;
    throw DomainError("unknown prune mode '" + std::string(name) + "'");
}

void PruneSpec::validate() const {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw DomainError("prune fraction must lie in [0,1]");
}

bool is_prunable(const Tensor& t, const PruneSpec& spec) noexcept {
    return spec.prune_vectors || t.shape.size() >= 2;
}

namespace {

struct Candidate {
    float magnitude;
    std::uint32_t tensor;
    std::uint32_t index;

    bool operator<(const Candidate& o) const {
        return std::tie(magnitude, tensor, index) < std::tie(o.magnitude, o.tensor, o.index);
    }
};

std::size_t prune_count(double fraction, std::size_t n) {
    // The small offset keeps products such as 0.9 * 10 from flooring to 8.
    const auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
    return std::min(m, n);
}

void zero_smallest(std::vector<Candidate>& candidates, PruneResult& result) {
    auto& tensors = result.store.tensors();
    for (const auto& c : candidates) {
        tensors[c.tensor].values[c.index] = 0.0f;
        result.mask[c.tensor][c.index] = true;
        ++result.pruned;
    }
}

void select_smallest(std::vector<Candidate>& candidates, std::size_t m) {
    if (m < candidates.size()) {
        std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(m),
                         candidates.end());
    }
    candidates.resize(m);
}

}  // namespace

PruneResult prune(const TensorStore& store, const PruneSpec& spec) {
    spec.validate();
    PruneResult result;
    result.store = store;
    for (const auto& t : store.tensors()) result.mask.emplace_back(t.size(), false);

    const auto& tensors = store.tensors();
    auto gather = [&](std::size_t ti, std::vector<Candidate>& out) {
        const auto& values = tensors[ti].values;
        for (std::size_t i = 0; i < values.size(); ++i) {
            out.push_back({std::fabs(values[i]), static_cast<std::uint32_t>(ti), static_cast<std::uint32_t>(i)});
        }
    };

    if (spec.mode == PruneMode::layer_wise) {
        for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
            if (!is_prunable(tensors[ti], spec)) continue;
            std::vector<Candidate> candidates;
            gather(ti, candidates);
            select_smallest(candidates, prune_count(spec.fraction, candidates.size()));
            zero_smallest(candidates, result);
        }
    } else {
        std::vector<Candidate> candidates;
        for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
            if (is_prunable(tensors[ti], spec)) gather(ti, candidates);
        }
        select_smallest(candidates, prune_count(spec.fraction, candidates.size()));
        zero_smallest(candidates, result);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Quantization
// ---------------------------------------------------------------------------

std::string_view to_string(CodebookMode m) {
    return m == CodebookMode::centroid ? "centroid" : "equally-spaced";
}

CodebookMode parse_codebook_mode(std::string_view name) {
    if (name == "equally-spaced" || name == "equally_spaced") return CodebookMode::equally_spaced;
    if (name == "centroid" || name == "centroid-codebook") return CodebookMode::centroid;
    throw DomainError("unknown codebook mode '" + std::string(name) + "'");
}

void QuantSpec::validate() const {
    if (bits < 1 || bits > 8) throw DomainError("quantization bits must lie in [1,8]");
}

KMeans1D kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed) {
    KMeans1D out;
    const std::size_t n = values.size();
    out.assignment.assign(n, 0);
    if (n == 0 || k == 0) return out;

    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    std::size_t distinct = 1;
    for (std::size_t i = 1; i < n; ++i) distinct += v[i] != v[i - 1] ? 1 : 0;
    k = std::min(k, distinct);

    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];

    // k-means++ seeding over the sorted values.
    Rng rng(seed);
    std::vector<double>& c = out.centroids;
    c.push_back(v[rng.below(n)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = (v[i] - c[0]) * (v[i] - c[0]);
    std::vector<double> cumulative(n);
    while (c.size() < k) {
        std::partial_sum(d2.begin(), d2.end(), cumulative.begin());
        const double total = cumulative.back();
        std::size_t pick = 0;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            pick = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), r) -
                                            cumulative.begin());
            pick = std::min(pick, n - 1);
            // Zero-weight points can only be reached through rounding; step to a new value.
            while (d2[pick] == 0.0 && pick + 1 < n) ++pick;
            while (d2[pick] == 0.0 && pick > 0) --pick;
        }
        const double centre = v[pick];
        c.push_back(centre);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], (v[i] - centre) * (v[i] - centre));
    }

    // Lloyd iterations. With sorted centroids each cluster is a contiguous
    // run of the sorted values, so a step costs O(k log n).
    std::vector<double> next(k);
    for (int it = 1; it <= 100; ++it) {
        std::sort(c.begin(), c.end());
        double movement = 0.0;
        std::size_t start = 0;
        for (std::size_t j = 0; j < k; ++j) {
            std::size_t end = n;
            if (j + 1 < k) {
                const double mid = 0.5 * (c[j] + c[j + 1]);
                end = static_cast<std::size_t>(std::upper_bound(v.begin() + static_cast<std::ptrdiff_t>(start),
                                                                v.end(), mid) - v.begin());
            }
            next[j] = end > start ? (prefix[end] - prefix[start]) / static_cast<double>(end - start) : c[j];
            movement = std::max(movement, std::fabs(next[j] - c[j]));
            start = end;
        }
        c = next;
        out.iterations = it;
        if (movement < 1e-9) break;
    }
    std::sort(c.begin(), c.end());

    std::vector<double> mids;
    for (std::size_t j = 0; j + 1 < k; ++j) mids.push_back(0.5 * (c[j] + c[j + 1]));
    for (std::size_t i = 0; i < n; ++i) {
        out.assignment[i] = static_cast<std::size_t>(std::lower_bound(mids.begin(), mids.end(), values[i]) -
                                                     mids.begin());
    }
    return out;
}

namespace {

CompressedTensor quantize_tensor(const Tensor& t, std::size_t index, const QuantSpec& spec) {
    CompressedTensor out;
    out.name = t.name;
    out.shape = t.shape;
    out.bits = spec.bits;
    out.nonzero.assign(t.size(), false);

    std::vector<double> nz;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t.values[i] != 0.0f) {
            out.nonzero[i] = true;
            nz.push_back(t.values[i]);
        }
    }
    if (nz.empty()) return out;

    const std::size_t slots = std::size_t{1} << spec.bits;
    const auto km = kmeans_1d(nz, slots, Rng::stream(spec.seed, index).next());
    const std::size_t k = km.centroids.size();

    std::vector<std::uint8_t> slot_of(k);
    out.codebook.resize(slots);
    if (spec.codebook == CodebookMode::centroid) {
        for (std::size_t s = 0; s < slots; ++s) out.codebook[s] = static_cast<float>(km.centroids[std::min(s, k - 1)]);
        for (std::size_t j = 0; j < k; ++j) slot_of[j] = static_cast<std::uint8_t>(j);
    } else {
        const auto [lo_it, hi_it] = std::minmax_element(nz.begin(), nz.end());
        const double lo = *lo_it;
        const double hi = *hi_it;
        std::vector<double> grid(slots);
        for (std::size_t s = 0; s < slots; ++s) {
            grid[s] = slots == 1 ? lo : lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(slots - 1);
            out.codebook[s] = static_cast<float>(grid[s]);
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (k == slots) {
                slot_of[j] = static_cast<std::uint8_t>(j);
                continue;
            }
            std::size_t best = 0;
            for (std::size_t s = 1; s < slots; ++s) {
                if (std::fabs(grid[s] - km.centroids[j]) < std::fabs(grid[best] - km.centroids[j])) best = s;
            }
            slot_of[j] = static_cast<std::uint8_t>(best);
        }
    }
    out.codes.reserve(nz.size());
    for (std::size_t a : km.assignment) out.codes.push_back(slot_of[a]);
    return out;
}

}  // namespace

CompressedStore quantize(const TensorStore& store, const QuantSpec& spec) {
    spec.validate();
    CompressedStore cs;
    const auto& tensors = store.tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) cs.tensors.push_back(quantize_tensor(tensors[i], i, spec));
    return cs;
}

TensorStore decompress(const CompressedStore& cs) {
    TensorStore store;
    for (const auto& ct : cs.tensors) {
        Tensor t;
        t.name = ct.name;
        t.shape = ct.shape;
        t.values.assign(ct.size(), 0.0f);
        std::size_t next = 0;
        for (std::size_t i = 0; i < ct.size(); ++i) {
            if (!ct.nonzero[i]) continue;
            if (next >= ct.codes.size() || ct.codes[next] >= ct.codebook.size()) {
                throw FormatError("tensor '" + ct.name + "': codes do not match its bitmap");
            }
            t.values[i] = ct.codebook[ct.codes[next++]];
        }
        if (next != ct.codes.size()) throw FormatError("tensor '" + ct.name + "': surplus codes");
        store.add(std::move(t));
    }
    return store;
}

std::size_t storage_bytes(const CompressedStore& cs) {
    std::size_t total = kHeaderBytes;
    for (const auto& t : cs.tensors) {
        total += 2 + t.name.size() + 1 + 1 + 4 * t.shape.size();
        total += (t.size() + 7) / 8;
        total += 4 * t.codebook.size();
        total += (t.nnz() * static_cast<std::size_t>(t.bits) + 7) / 8;
    }
    return total;
}

std::size_t dense_bytes(const TensorStore& store) noexcept { return 4 * store.total_elements(); }

double compression_ratio(const TensorStore& original, const CompressedStore& cs) {
    return static_cast<double>(dense_bytes(original)) / static_cast<double>(storage_bytes(cs));
}

// ---------------------------------------------------------------------------
// Containers
// ---------------------------------------------------------------------------

namespace {

void write_name_and_shape(bytes::Writer& w, const std::string& name, const std::vector<std::uint32_t>& shape,
                          const int* bits) {
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.raw(name);
    if (bits) w.u8(static_cast<std::uint8_t>(*bits));
    w.u8(static_cast<std::uint8_t>(shape.size()));
    for (auto d : shape) w.u32(d);
}

void read_header(bytes::Reader& r, std::string_view magic) {
    if (r.str(4) != magic) throw FormatError("bad magic, expected " + std::string(magic));
    const auto version = r.u16();
    if (version != kVersion) throw FormatError("unsupported container version " + std::to_string(version));
}

std::vector<std::uint32_t> read_shape(bytes::Reader& r) {
    const auto rank = r.u8();
    std::vector<std::uint32_t> shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
        d = r.u32();
        n *= d;
        if (n > (std::size_t{1} << 34)) throw FormatError("tensor shape too large");
    }
    return shape;
}

}  // namespace

std::vector<std::uint8_t> serialize(const CompressedStore& cs) {
    bytes::Writer w;
    w.raw(kCompressedMagic);
    w.u16(kVersion);
    w.u32(static_cast<std::uint32_t>(cs.tensors.size()));
    for (const auto& t : cs.tensors) {
        write_name_and_shape(w, t.name, t.shape, &t.bits);
        std::vector<std::uint8_t> bitmap((t.size() + 7) / 8, 0);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t.nonzero[i]) bitmap[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
        }
        w.raw(bitmap);
        for (float c : t.codebook) w.f32(c);
        std::vector<std::uint8_t> packed((t.nnz() * static_cast<std::size_t>(t.bits) + 7) / 8, 0);
        std::size_t bit = 0;
        for (auto code : t.codes) {
            for (int b = 0; b < t.bits; ++b, ++bit) {
                if ((code >> b) & 1u) packed[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
            }
        }
        w.raw(packed);
    }
    return std::move(w.data());
}

CompressedStore deserialize_compressed(std::span<const std::uint8_t> data) {
    bytes::Reader r(data, "BNXC");
    read_header(r, kCompressedMagic);
    const auto count = r.u32();
    CompressedStore cs;
    for (std::uint32_t ti = 0; ti < count; ++ti) {
        CompressedTensor t;
        t.name = r.str(r.u16());
        t.bits = r.u8();
        if (t.bits < 1 || t.bits > 8) throw FormatError("tensor '" + t.name + "': bit width " + std::to_string(t.bits));
        t.shape = read_shape(r);
        const std::size_t n = element_count(t.shape);
        const auto bitmap = r.take((n + 7) / 8);
        t.nonzero.resize(n);
        std::size_t nnz = 0;
        for (std::size_t i = 0; i < n; ++i) {
            t.nonzero[i] = (bitmap[i / 8] >> (i % 8)) & 1u;
            nnz += t.nonzero[i] ? 1 : 0;
        }
        if (n % 8 != 0 && (bitmap.back() >> (n % 8)) != 0) {
            throw FormatError("tensor '" + t.name + "': padding bits set in bitmap");
        }
        if (nnz > 0) {
            t.codebook.resize(std::size_t{1} << t.bits);
            for (auto& c : t.codebook) c = r.f32();
        }
        const auto packed = r.take((nnz * static_cast<std::size_t>(t.bits) + 7) / 8);
        t.codes.resize(nnz);
        std::size_t bit = 0;
        for (auto& code : t.codes) {
            unsigned v = 0;
            for (int b = 0; b < t.bits; ++b, ++bit) v |= ((packed[bit / 8] >> (bit % 8)) & 1u) << b;
            code = static_cast<std::uint8_t>(v);
        }
        cs.tensors.push_back(std::move(t));
    }
    r.expect_end();
    return cs;
}

std::vector<std::uint8_t> serialize(const TensorStore& store) {
    bytes::Writer w;
    w.raw(kDenseMagic);
    w.u16(kVersion);
    w.u32(static_cast<std::uint32_t>(store.size()));
    for (const auto& t : store.tensors()) {
        write_name_and_shape(w, t.name, t.shape, nullptr);
        for (float v : t.values) w.f32(v);
    }
    return std::move(w.data());
}

TensorStore deserialize_tensors(std::span<const std::uint8_t> data) {
    bytes::Reader r(data, "BNXW");
    read_header(r, kDenseMagic);
    const auto count = r.u32();
    TensorStore store;
    for (std::uint32_t ti = 0; ti < count; ++ti) {
        Tensor t;
        t.name = r.str(r.u16());
        t.shape = read_shape(r);
        const std::size_t n = element_count(t.shape);
        if (r.remaining() / 4 < n) throw FormatError("BNXW: truncated values of '" + t.name + "'");
        t.values.resize(n);
        for (auto& v : t.values) v = r.f32();
        try {
            store.add(std::move(t));
        } catch (const DomainError& e) {
            throw FormatError(std::string("BNXW: ") + e.what());
        }
    }
    r.expect_end();
    return store;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

void write_mask_json(std::ostream& out, const TensorStore& store, const std::vector<std::vector<bool>>& mask) {
    nlohmann::ordered_json doc;
    doc["tensors"] = nlohmann::ordered_json::array();
    for (std::size_t ti = 0; ti < store.size(); ++ti) {
        const auto& t = store.tensors()[ti];
        nlohmann::ordered_json entry;
        entry["name"] = t.name;
        entry["shape"] = t.shape;
        std::vector<std::size_t> pruned;
        for (std::size_t i = 0; i < mask[ti].size(); ++i) {
            if (mask[ti][i]) pruned.push_back(i);
        }
        entry["pruned"] = pruned;
        doc["tensors"].push_back(std::move(entry));
    }
    out << doc.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic stores
// ---------------------------------------------------------------------------

TensorStore synthetic_store(const ArchParams& arch, const NetConfig& net, std::uint64_t seed) {
    TensorStore store;
    Rng rng = Rng::stream(seed, 0xB17C);
    for (const auto& ws : weight_shapes(arch, net)) {
        Tensor t{ws.name, ws.shape, {}};
        t.values.resize(element_count(ws.shape));
        for (auto& v : t.values) v = static_cast<float>(rng.uniform() * 2.0 - 1.0);
        store.add(std::move(t));
    }
    return store;
}

TensorStore random_store(std::size_t count, std::size_t tensors, std::uint64_t seed) {
    if (tensors == 0) throw DomainError("random_store needs at least one tensor");
    TensorStore store;
    Rng rng = Rng::stream(seed, 0xB17D);
    for (std::size_t i = 0; i < tensors; ++i) {
        const std::size_t n = count / tensors + (i < count % tensors ? 1 : 0);
        Tensor t{"layer" + std::to_string(i) + ".weight", {1, static_cast<std::uint32_t>(n)}, {}};
        t.values.resize(n);
        for (auto& v : t.values) v = static_cast<float>(rng.uniform() * 2.0 - 1.0);
        store.add(std::move(t));
    }
    return store;
}

}  // namespace signas
