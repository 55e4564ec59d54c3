#include "signas/archspace.hpp"

#include <charconv>

#include "signas/error.hpp"

namespace signas {

bool ArchParams::valid() const noexcept {
    return blocks >= 0 && blocks <= kMaxBlocks && filter_interval >= kMinInterval &&
           filter_interval <= kMaxInterval && lstm_exp >= kMinLstmExp && lstm_exp <= kMaxLstmExp;
}

std::size_t ArchParams::index() const noexcept {
    constexpr int intervals = kMaxInterval - kMinInterval + 1;
    constexpr int lstm_sizes = kMaxLstmExp - kMinLstmExp + 1;
    return static_cast<std::size_t>((blocks * intervals + (filter_interval - kMinInterval)) *
                                        lstm_sizes +
                                    (lstm_exp - kMinLstmExp));
}

std::string to_string(const ArchParams& arch) {
    return "B=" + std::to_string(arch.blocks) + ",x=" + std::to_string(arch.filter_interval) +
           ",z=" + std::to_string(arch.lstm_exp);
}

namespace {

int parse_field(std::string_view item, std::string_view key, std::string_view whole) {
    if (item.size() <= key.size() + 1 || item.substr(0, key.size()) != key ||
        item[key.size()] != '=') {
        throw DomainError("malformed architecture '" + std::string(whole) + "': expected " +
                          std::string(key) + "=<int>");
    }
    auto digits = item.substr(key.size() + 1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw DomainError("malformed architecture '" + std::string(whole) + "': bad integer for " +
                          std::string(key));
    }
    return value;
}

}  // namespace

ArchParams parse_arch(std::string_view text) {
    std::string_view rest = text;
    std::string_view parts[3];
    for (int i = 0; i < 3; ++i) {
        auto comma = rest.find(',');
        if ((comma == std::string_view::npos) != (i == 2)) {
            throw DomainError("malformed architecture '" + std::string(text) + "'");
        }
        parts[i] = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    ArchParams arch{parse_field(parts[0], "B", text), parse_field(parts[1], "x", text),
                    parse_field(parts[2], "z", text)};
    encode(arch);  // range check with gene-specific message
    return arch;
}

Chromosome Chromosome::from_string(std::string_view text) {
    if (text.size() != kLength) {
        throw DomainError("chromosome must be " + std::to_string(kLength) + " bits, got " +
                          std::to_string(text.size()));
    }
    std::uint16_t bits = 0;
    for (char ch : text) {
        if (ch != '0' && ch != '1') {
            throw DomainError("chromosome contains non-binary character '" + std::string(1, ch) +
                              "'");
        }
        bits = static_cast<std::uint16_t>((bits << 1) | (ch == '1'));
    }
    return Chromosome(bits);
}

std::string Chromosome::to_string() const {
    std::string out(kLength, '0');
    for (int i = 0; i < kLength; ++i) {
        if (bit(i)) out[i] = '1';
    }
    return out;
}

Chromosome encode(const ArchParams& arch) {
    if (arch.blocks < 0 || arch.blocks > ArchParams::kMaxBlocks) {
        throw DomainError("blocks gene out of range: B=" + std::to_string(arch.blocks) +
                          " (expected 0..15)");
    }
    if (arch.filter_interval < ArchParams::kMinInterval ||
        arch.filter_interval > ArchParams::kMaxInterval) {
        throw DomainError("filter_interval gene out of range: x=" +
                          std::to_string(arch.filter_interval) + " (expected 1..4)");
    }
    if (arch.lstm_exp < ArchParams::kMinLstmExp || arch.lstm_exp > ArchParams::kMaxLstmExp) {
        throw DomainError("lstm gene out of range: z=" + std::to_string(arch.lstm_exp) +
                          " (expected 4..8)");
    }
    const unsigned blocks = static_cast<unsigned>(arch.blocks);
    const unsigned interval = static_cast<unsigned>(arch.filter_interval - ArchParams::kMinInterval);
    const unsigned lstm = static_cast<unsigned>(arch.lstm_exp - ArchParams::kMinLstmExp);
    return Chromosome(static_cast<std::uint16_t>((blocks << 5) | (interval << 3) | lstm));
}

std::optional<ArchParams> decode(Chromosome c) {
    const auto lstm = static_cast<int>(c.lstm_gene());
    if (lstm > ArchParams::kMaxLstmExp - ArchParams::kMinLstmExp) return std::nullopt;
    return ArchParams{static_cast<int>(c.blocks_gene()),
                      static_cast<int>(c.filter_gene()) + ArchParams::kMinInterval,
                      lstm + ArchParams::kMinLstmExp};
}

std::optional<ArchParams> decode(std::string_view bits) {
    return decode(Chromosome::from_string(bits));
}

ArchitectureSpace enumerate() {
    ArchitectureSpace space;
    space.reserve(320);
    for (int b = 0; b <= ArchParams::kMaxBlocks; ++b) {
        for (int x = ArchParams::kMinInterval; x <= ArchParams::kMaxInterval; ++x) {
            for (int z = ArchParams::kMinLstmExp; z <= ArchParams::kMaxLstmExp; ++z) {
                space.push_back({b, x, z});
            }
        }
    }
    return space;
}

}  // namespace signas
