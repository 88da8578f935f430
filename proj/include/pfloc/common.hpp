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

#ifndef PFLOC_COMMON_HPP
#define PFLOC_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pfloc
{
    inline constexpr double speed_of_light = 299792458.0; // m/s
    inline constexpr double pi = std::numbers::pi;
    inline constexpr double two_pi = 2.0 * std::numbers::pi;

    inline double deg2rad(double deg) { return deg * pi / 180.0; }

    // 2D position in metres, gNB at the origin.
    struct Vec2
    {
        double x = 0.0;
        double y = 0.0;

        friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
        friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
        friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
        friend bool operator==(Vec2 a, Vec2 b) = default;
    };

    inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
    inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
    inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

    // Invalid user input (configuration, arguments). Maps to CLI exit code 2.
    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // A request that is well formed but exceeds a memory/time budget. Maps to CLI exit code 3.
    class BudgetError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    using Rng = std::mt19937_64;

    // Independent random stream derived from a master seed and a purpose label plus indices.
    // Streams with different labels or indices are statistically independent, so work can be
    // split across threads in any order without changing results.
    Rng derive_stream(std::uint64_t seed, std::string_view label, std::initializer_list<std::uint64_t> indices = {});

    inline double uniform(Rng &rng, double lo, double hi)
    {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }

    // Uniform point on the closed disk of the given radius.
    Vec2 uniform_in_disk(Rng &rng, double radius);

    // Runs body(i) for i in [0, count) on up to `threads` workers. Each index runs exactly once;
    // the first exception thrown by any worker is rethrown on the calling thread.
    void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &body);

    // Default worker count (hardware concurrency, at least 1).
    int default_threads();

    // Hex rendering of an MSB-first bit string; left-padded with zeros to whole nibbles.
    std::string bits_to_hex(const std::string &bits);
    std::string hex_to_bits(std::string_view hex, std::size_t bit_count);

    bool is_power_of_two(long long v);
    int log2_exact(long long v);

} // namespace pfloc

#endif
