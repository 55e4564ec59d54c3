#include <numeric>

#include "../oracles.hpp"
#include "doctest.h"
#include "signas/error.hpp"
#include "signas/netmodel.hpp"

using namespace signas;

TEST_SUITE("netmodel") {

TEST_CASE("filter schedule") {
    CHECK(filter_schedule({5, 2, 4}) == std::vector<std::int64_t>{32, 32, 64, 64, 128});
    CHECK(filter_schedule({0, 1, 4}).empty());
    CHECK(filter_schedule({4, 4, 4}) == std::vector<std::int64_t>{32, 32, 32, 32});
}

TEST_CASE("smallest member by hand") {
    auto s = build({0, 1, 4});
    CHECK(s.param_count == 3842);
    CHECK(s.storage_bytes == 15368);
    // stem conv 270336 + bn 16384 + relu 8192 + lstm 1593344 + dense 64 + softmax 6
    CHECK(s.flops == 1888326);
}

TEST_CASE("one block by hand") {
    // 672 stem + 2 * (16416 + 128) block + 3136 lstm + 34 dense
    CHECK(build({1, 1, 4}).param_count == 36930);
}

TEST_CASE("parameter count matches the longhand oracle over the space") {
    for (const auto& a : enumerate()) {
        auto s = build(a);
        CHECK(s.param_count == oracle::param_count(a.blocks, a.filter_interval, a.lstm_exp));
        CHECK(s.storage_bytes == 4 * s.param_count);
    }
    NetConfig cfg;
    cfg.num_classes = 5;
    cfg.input_channels = 2;
    for (const auto& a : enumerate()) {
        CHECK(build(a, cfg).param_count ==
              oracle::param_count(a.blocks, a.filter_interval, a.lstm_exp, 5, 2));
    }
}

TEST_CASE("weight shapes account for every parameter") {
    for (const auto& a : enumerate()) {
        std::int64_t total = 0;
        for (const auto& w : weight_shapes(a)) {
            total += std::accumulate(w.shape.begin(), w.shape.end(), std::int64_t{1},
                                     [](std::int64_t p, std::uint32_t d) { return p * d; });
        }
        CHECK(total == build(a).param_count);
    }
}

TEST_CASE("monotone in blocks and lstm size") {
    for (int x = 1; x <= 4; ++x) {
        for (int z = 4; z <= 8; ++z) {
            for (int b = 0; b < 15; ++b) {
                auto lo = build({b, x, z});
                auto hi = build({b + 1, x, z});
                CHECK(hi.param_count > lo.param_count);
                CHECK(hi.flops > lo.flops);
            }
        }
    }
    for (int b = 0; b <= 15; ++b) {
        for (int x = 1; x <= 4; ++x) {
            for (int z = 4; z < 8; ++z) {
                CHECK(build({b, x, z + 1}).param_count >= build({b, x, z}).param_count);
                CHECK(build({b, x, z + 1}).flops >= build({b, x, z}).flops);
            }
        }
    }
}

TEST_CASE("layer shapes chain") {
    for (const auto& a : enumerate()) {
        auto s = build(a);
        REQUIRE(!s.layers.empty());
        std::int64_t channels = 1;
        std::int64_t block_in = 0;
        LayerKind prev = LayerKind::relu;
        for (const auto& layer : s.layers) {
            if (layer.shortcut) {
                CHECK(layer.in_channels == block_in);
                CHECK(layer.out_channels == channels);
                continue;
            }
            CHECK(layer.in_channels == channels);
            if (layer.kind == LayerKind::conv1d && prev == LayerKind::relu) block_in = layer.in_channels;
            channels = layer.out_channels;
            prev = layer.kind;
        }
        CHECK(s.layers.back().kind == LayerKind::softmax);
        CHECK(channels == 2);
        CHECK(s.flops > 0);
    }
}

TEST_CASE("s_max") {
    auto space = enumerate();
    const auto top = s_max(space);
    CHECK(top == build({15, 1, 8}).storage_bytes);
    for (const auto& a : space) CHECK(build(a).storage_bytes <= top);
    CHECK(s_max({ArchParams{3, 2, 5}}) == build({3, 2, 5}).storage_bytes);
    CHECK_THROWS_AS(s_max({}), DomainError);
}

TEST_CASE("config validation") {
    NetConfig cfg;
    cfg.num_classes = 1;
    CHECK_THROWS_AS(build({0, 1, 4}, cfg), DomainError);
    CHECK_THROWS_AS(build({0, 1, 9}), DomainError);
}

}
