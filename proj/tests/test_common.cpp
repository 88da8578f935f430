// pfloc: precoder feedback localization simulator
// Copyright (C) 2026 The pfloc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "pfloc/common.hpp"

#include <doctest.h>

#include <atomic>
#include <set>
#include <vector>

using namespace pfloc;

TEST_CASE("derived streams are reproducible and label dependent")
{
    Rng a = derive_stream(7, "map", {1, 2});
    Rng b = derive_stream(7, "map", {1, 2});
    Rng c = derive_stream(7, "map", {2, 1});
    Rng d = derive_stream(7, "victim", {1, 2});
    Rng e = derive_stream(8, "map", {1, 2});
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
    CHECK(va != e());
}

TEST_CASE("uniform_in_disk stays inside and has mean radius 2R/3")
{
    Rng rng = derive_stream(1, "test");
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i)
    {
        const Vec2 p = uniform_in_disk(rng, 3.0);
        REQUIRE(norm(p) <= 3.0);
        sum += norm(p);
    }
    CHECK(sum / n == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("parallel_for visits every index once and rethrows")
{
    for (int threads : {1, 3, 8})
    {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
        for (auto &h : hits)
            CHECK(h.load() == 1);
    }
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [](std::size_t i)
                                 {
                                     if (i == 37)
                                         throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
    parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("hex rendering of bit strings")
{
    CHECK(bits_to_hex("") == "");
    CHECK(bits_to_hex("1") == "1");
    CHECK(bits_to_hex("10110") == "16");
    CHECK(bits_to_hex("11111111") == "ff");
    CHECK(hex_to_bits("16", 5) == "10110");
    CHECK_THROWS(hex_to_bits("36", 5));
    CHECK_THROWS(hex_to_bits("1", 5));
    CHECK_THROWS(bits_to_hex("012"));
    Rng rng = derive_stream(3, "bits");
    for (int t = 0; t < 200; ++t)
    {
        const std::size_t len = rng() % 70;
        std::string bits;
        for (std::size_t i = 0; i < len; ++i)
            bits.push_back((rng() & 1) ? '1' : '0');
        CHECK(hex_to_bits(bits_to_hex(bits), len) == bits);
    }
}

TEST_CASE("power of two helpers")
{
    CHECK(is_power_of_two(1));
    CHECK(is_power_of_two(64));
    CHECK_FALSE(is_power_of_two(0));
    CHECK_FALSE(is_power_of_two(48));
    CHECK(log2_exact(64) == 6);
    CHECK_THROWS(log2_exact(12));
}
