#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace signas {

/// A point in the bounded ResNet + LSTM architecture family.
struct ArchParams {
    int blocks = 0;           ///< ResNet blocks, 0..15
    int filter_interval = 1;  ///< blocks between filter doublings, 1..4
    int lstm_exp = 4;         ///< LSTM cells = 2^lstm_exp, 4..8

    static constexpr int kMaxBlocks = 15;
    static constexpr int kMinInterval = 1;
    static constexpr int kMaxInterval = 4;
    static constexpr int kMinLstmExp = 4;
    static constexpr int kMaxLstmExp = 8;

    bool valid() const noexcept;
    int lstm_cells() const noexcept { return 1 << lstm_exp; }

    /// Position in canonical (lexicographic) order, 0..319. Requires valid().
    std::size_t index() const noexcept;

    auto operator<=>(const ArchParams&) const = default;
};

/// "B=<int>,x=<int>,z=<int>"
std::string to_string(const ArchParams& arch);
ArchParams parse_arch(std::string_view text);

/// 9-bit genome laid out as [blocks:4 | filter_interval:2 | lstm:3], most
/// significant gene first. Bit 8 of bits() is the first character of the
/// text form.
class Chromosome {
public:
    static constexpr int kLength = 9;
    static constexpr std::uint16_t kMask = (1u << kLength) - 1;

    constexpr Chromosome() = default;
    constexpr explicit Chromosome(std::uint16_t bits) : bits_(bits & kMask) {}

    /// Parses 9 characters of '0'/'1'. Wrong length or alphabet throws DomainError.
    static Chromosome from_string(std::string_view text);

    constexpr std::uint16_t bits() const noexcept { return bits_; }
    constexpr unsigned blocks_gene() const noexcept { return (bits_ >> 5) & 0xF; }
    constexpr unsigned filter_gene() const noexcept { return (bits_ >> 3) & 0x3; }
    constexpr unsigned lstm_gene() const noexcept { return bits_ & 0x7; }

    /// Bit at position i counted from the left of the text form (0 = MSB).
    constexpr bool bit(int i) const noexcept { return (bits_ >> (kLength - 1 - i)) & 1u; }
    constexpr Chromosome with_flipped(int i) const noexcept {
        return Chromosome(static_cast<std::uint16_t>(bits_ ^ (1u << (kLength - 1 - i))));
    }

    std::string to_string() const;

    auto operator<=>(const Chromosome&) const = default;

private:
    std::uint16_t bits_ = 0;
};

/// Throws DomainError naming the offending gene when a field is out of range.
Chromosome encode(const ArchParams& arch);

/// Inverse of encode. std::nullopt marks a genome outside the family
/// (lstm gene 5, 6 or 7).
std::optional<ArchParams> decode(Chromosome c);

/// Decode from text; a string that is not exactly 9 bits long throws DomainError.
std::optional<ArchParams> decode(std::string_view bits);

using ArchitectureSpace = std::vector<ArchParams>;

/// All 16 x 4 x 5 = 320 members in canonical order.
ArchitectureSpace enumerate();

}  // namespace signas
