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

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pfloc
{
    namespace
    {
        std::uint64_t splitmix64(std::uint64_t x)
        {
            x += 0x9E3779B97F4A7C15ULL;
            x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
            x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
            return x ^ (x >> 31);
        }
    } // namespace

    Rng derive_stream(std::uint64_t seed, std::string_view label, std::initializer_list<std::uint64_t> indices)
    {
        std::uint64_t h = splitmix64(seed);
        for (unsigned char c : label)
            h = splitmix64(h ^ c);
        h = splitmix64(h ^ 0xFFULL); // separates label from indices
        for (auto i : indices)
            h = splitmix64(h ^ splitmix64(i + 0x632BE59BD9B4E019ULL));
        std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                          static_cast<std::uint32_t>(splitmix64(h)), static_cast<std::uint32_t>(splitmix64(h) >> 32)};
        return Rng(seq);
    }

    Vec2 uniform_in_disk(Rng &rng, double radius)
    {
        const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0));
        const double a = uniform(rng, 0.0, two_pi);
        return {r * std::cos(a), r * std::sin(a)};
    }

    int default_threads()
    {
        return std::max(1u, std::thread::hardware_concurrency());
    }

    void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &body)
    {
        const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), count);
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < count; ++i)
                body(i);
            return;
        }

        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_lock;
        auto work = [&]
        {
            for (std::size_t i = next++; i < count; i = next++)
            {
                try
                {
                    body(i);
                }
                catch (...)
                {
                    std::lock_guard lock(failure_lock);
                    if (!failure)
                        failure = std::current_exception();
                    next = count;
                }
            }
        };
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 1; w < workers; ++w)
                pool.emplace_back(work);
            work();
        }
        if (failure)
            std::rethrow_exception(failure);
    }

    std::string bits_to_hex(const std::string &bits)
    {
        static constexpr char digits[] = "0123456789abcdef";
        const std::size_t pad = (4 - bits.size() % 4) % 4;
        const std::string padded = std::string(pad, '0') + bits;
        std::string hex;
        hex.reserve(padded.size() / 4);
        for (std::size_t i = 0; i < padded.size(); i += 4)
        {
            int v = 0;
            for (std::size_t j = 0; j < 4; ++j)
            {
                const char c = padded[i + j];
                if (c != '0' && c != '1')
                    throw std::invalid_argument("bit string may only contain '0' and '1'");
                v = 2 * v + (c - '0');
            }
            hex.push_back(digits[v]);
        }
        return hex;
    }

    std::string hex_to_bits(std::string_view hex, std::size_t bit_count)
    {
        if (hex.size() != (bit_count + 3) / 4)
            throw std::invalid_argument("hex payload has " + std::to_string(hex.size()) + " digits, expected " +
                                        std::to_string((bit_count + 3) / 4));
        std::string bits;
        for (char c : hex)
        {
            int v;
            if (c >= '0' && c <= '9')
                v = c - '0';
            else if (c >= 'a' && c <= 'f')
                v = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F')
                v = c - 'A' + 10;
            else
                throw std::invalid_argument(std::string("invalid hex digit '") + c + "'");
            for (int b = 3; b >= 0; --b)
                bits.push_back(((v >> b) & 1) ? '1' : '0');
        }
        const std::size_t pad = bits.size() - bit_count;
        if (bits.find('1') < pad)
            throw std::invalid_argument("hex payload exceeds the declared bit width");
        return bits.substr(pad);
    }

    bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

    int log2_exact(long long v)
    {
        if (!is_power_of_two(v))
            throw std::invalid_argument(std::to_string(v) + " is not a power of two");
        int r = 0;
        while ((1LL << r) < v)
            ++r;
        return r;
    }

} // namespace pfloc
