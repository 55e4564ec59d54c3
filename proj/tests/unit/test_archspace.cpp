#include <set>

#include "doctest.h"
#include "signas/archspace.hpp"
#include "signas/error.hpp"

using namespace signas;

TEST_SUITE("archspace") {

TEST_CASE("encode examples") {
    CHECK(encode({0, 1, 4}).to_string() == "000000000");
    CHECK(encode({15, 4, 8}).to_string() == "111111100");
    CHECK(encode({5, 2, 6}).to_string() == "010101010");
    CHECK(encode({5, 2, 6}).bits() == 0b0101'01'010);
}

TEST_CASE("encode rejects out-of-range genes by name") {
    auto message = [](ArchParams a) {
        try {
            encode(a);
        } catch (const DomainError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message({16, 1, 4}).find("B") != std::string::npos);
    CHECK(message({0, 5, 4}).find("x") != std::string::npos);
    CHECK(message({0, 1, 9}).find("z") != std::string::npos);
    CHECK(message({-1, 1, 4}) != "");
    CHECK(message({0, 0, 4}) != "");
    CHECK(message({0, 1, 3}) != "");
}

TEST_CASE("decode examples") {
    auto a = decode(Chromosome(0));
    REQUIRE(a);
    CHECK(*a == ArchParams{0, 1, 4});
    CHECK_FALSE(decode(std::string_view("000000111")));
    CHECK_FALSE(decode(std::string_view("000000101")));
    CHECK(decode(std::string_view("000000100")) == ArchParams{0, 1, 8});
    CHECK_THROWS_AS(decode(std::string_view("00000000")), DomainError);
    CHECK_THROWS_AS(decode(std::string_view("0000000000")), DomainError);
    CHECK_THROWS_AS(decode(std::string_view("00000000x")), DomainError);
}

TEST_CASE("roundtrip and invalid count") {
    for (const auto& a : enumerate()) CHECK(decode(encode(a)) == a);
    int invalid = 0;
    for (unsigned b = 0; b < 512; ++b) {
        auto a = decode(Chromosome(static_cast<std::uint16_t>(b)));
        if (!a) ++invalid;
        else CHECK(encode(*a).bits() == b);
    }
    CHECK(invalid == 192);
}

TEST_CASE("enumerate order and size") {
    auto space = enumerate();
    REQUIRE(space.size() == 320);
    CHECK(space.front() == ArchParams{0, 1, 4});
    CHECK(space.back() == ArchParams{15, 4, 8});
    std::set<ArchParams> unique(space.begin(), space.end());
    CHECK(unique.size() == 320);
    for (std::size_t i = 0; i < space.size(); ++i) {
        CHECK(space[i].index() == i);
        if (i > 0) CHECK(space[i - 1] < space[i]);
    }
}

TEST_CASE("text form") {
    CHECK(to_string(ArchParams{5, 2, 6}) == "B=5,x=2,z=6");
    CHECK(parse_arch("B=5,x=2,z=6") == ArchParams{5, 2, 6});
    CHECK_THROWS_AS(parse_arch("B=5,x=2"), DomainError);
    CHECK_THROWS_AS(parse_arch("B=16,x=2,z=6"), DomainError);
    CHECK(Chromosome::from_string("010101010").bits() == 0b010101010);
    CHECK(Chromosome(0b100000000).bit(0));
    CHECK(Chromosome(0).with_flipped(8).bits() == 1);
}

}
