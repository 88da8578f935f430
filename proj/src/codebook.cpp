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

#include "pfloc/codebook.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

namespace pfloc
{
    FeedbackMode parse_feedback_mode(int mode)
    {
        if (mode < 1 || mode > 3)
            throw ConfigError("feedback mode must be 1, 2 or 3, got " + std::to_string(mode));
        return static_cast<FeedbackMode>(mode);
    }

    int to_int(FeedbackMode mode) { return static_cast<int>(mode); }

    std::complex<double> cophasing(int n)
    {
        // exact values, no rounding from polar()
        switch (n & 3)
        {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
        }
    }

    Precoder codebook_vector(int m, int n, int N, int O)
    {
        if (N < 1 || O < 1)
            throw std::invalid_argument("codebook_vector: N and O must be >= 1");
        if (m < 0 || m >= N * O)
            throw std::out_of_range("codebook_vector: beam index " + std::to_string(m) + " outside [0, NO)");
        if (n < 0 || n > 3)
            throw std::out_of_range("codebook_vector: co-phasing index " + std::to_string(n) + " outside [0, 4)");
        Precoder p{m, n, CVector(2 * N)};
        const double scale = 1.0 / std::sqrt(double(N));
        const auto psi = cophasing(n);
        for (int i = 0; i < N; ++i)
        {
            // reduce i*m modulo NO first to keep the phase argument small
            const auto v = std::polar(scale, two_pi * double((long long)i * m % (N * O)) / (N * O));
            p.w(i) = v;
            p.w(N + i) = psi * v;
        }
        return p;
    }

    Codebook::Codebook(int N, int O) : n_(N), o_(O), beams_(N, N * O)
    {
        if (N < 1 || O < 1)
            throw ConfigError("codebook needs N >= 1 and O >= 1");
        const int NO = N * O;
        for (int m = 0; m < NO; ++m)
            for (int i = 0; i < N; ++i)
                beams_(i, m) = std::polar(1.0, two_pi * double((long long)i * m % NO) / NO);
    }

    GainTable gain_table(const CMatrix &h, const Codebook &codebook)
    {
        const int N = codebook.antennas();
        if (h.cols() != 2 * N)
            throw std::invalid_argument("gain_table: channel has " + std::to_string(h.cols()) + " columns, expected 2N = " +
                                        std::to_string(2 * N));
        const CMatrix p1 = h.leftCols(N) * codebook.beam_matrix();
        const CMatrix p2 = h.rightCols(N) * codebook.beam_matrix();
        GainTable t;
        t.beams = codebook.beams();
        t.gain.resize(std::size_t(t.beams) * 4);
        for (int m = 0; m < t.beams; ++m)
        {
            const double a = p1.col(m).squaredNorm();
            const double b = p2.col(m).squaredNorm();
            const std::complex<double> c = p1.col(m).dot(p2.col(m)); // p1^H p2
            // ||p1 + psi p2||^2 = a + b + 2 Re(psi c), psi in {1, j, -1, -j}
            const double s = a + b;
            double *g = &t.gain[std::size_t(m) * 4];
            g[0] = std::max(0.0, (s + 2.0 * c.real()) / N);
            g[1] = std::max(0.0, (s - 2.0 * c.imag()) / N);
            g[2] = std::max(0.0, (s - 2.0 * c.real()) / N);
            g[3] = std::max(0.0, (s + 2.0 * c.imag()) / N);
        }
        return t;
    }

    double RateTable::best(int m, int *n_out) const
    {
        const double *r = &rate[std::size_t(m) * 4];
        int arg = 0;
        for (int n = 1; n < 4; ++n)
            if (r[n] > r[arg])
                arg = n;
        if (n_out)
            *n_out = arg;
        return r[arg];
    }

    RateTable rate_table(const GainTable &gains, double noise_std)
    {
        if (!(noise_std > 0.0))
            throw std::invalid_argument("rate_table: receiver noise std must be > 0");
        const double inv = 1.0 / (noise_std * noise_std);
        RateTable t;
        t.beams = gains.beams;
        t.rate.resize(gains.gain.size());
        for (std::size_t i = 0; i < gains.gain.size(); ++i)
            t.rate[i] = std::log2(1.0 + gains.gain[i] * inv);
        return t;
    }

    std::vector<RateTable> rate_tables(const SubbandChannels &h, const Codebook &codebook, double noise_std)
    {
        std::vector<RateTable> out;
        out.reserve(h.size());
        for (const auto &hk : h)
            out.push_back(rate_table(gain_table(hk, codebook), noise_std));
        return out;
    }

    namespace
    {
        void check_dims(const SubbandChannels &h, const std::vector<CVector> &w, double noise_std)
        {
            if (h.size() != w.size())
                throw std::invalid_argument("spectral efficiency: one precoder per subband expected");
            if (!(noise_std > 0.0))
                throw std::invalid_argument("spectral efficiency: receiver noise std must be > 0");
            for (std::size_t k = 0; k < h.size(); ++k)
                if (h[k].cols() != w[k].size())
                    throw std::invalid_argument("spectral efficiency: precoder length does not match the channel");
        }
    } // namespace

    double spectral_efficiency_det(const SubbandChannels &h, const std::vector<CVector> &w, double noise_std)
    {
        check_dims(h, w, noise_std);
        double total = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k)
        {
            const CVector hw = h[k] * w[k];
            const CMatrix m = CMatrix::Identity(hw.size(), hw.size()) + hw * hw.adjoint() / (noise_std * noise_std);
            // Hermitian positive definite: log det from the Cholesky factor
            const Eigen::LLT<CMatrix> llt(m);
            double logdet = 0.0;
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                logdet += 2.0 * std::log2(llt.matrixL()(i, i).real());
            total += logdet;
        }
        return total;
    }

    double spectral_efficiency(const SubbandChannels &h, const std::vector<CVector> &w, double noise_std)
    {
        check_dims(h, w, noise_std);
        double total = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k)
            total += std::log2(1.0 + (h[k] * w[k]).squaredNorm() / (noise_std * noise_std));
        return total;
    }

    namespace
    {
        void check_tables(const std::vector<RateTable> &rates)
        {
            if (rates.empty())
                throw std::invalid_argument("precoder selection needs at least one subband");
            for (const auto &t : rates)
                if (t.beams != rates.front().beams)
                    throw std::invalid_argument("precoder selection: rate tables of different codebooks");
        }

        // Mode-1 candidate for a fixed beam m.
        Selection mode1_for(const std::vector<RateTable> &rates, int m)
        {
            const int K = int(rates.size());
            Selection s;
            s.mode = FeedbackMode::mode1;
            s.m = m;
            s.n.resize(K);
            s.beam.assign(K, m);
            for (int k = 0; k < K; ++k)
                s.rate += rates[k].best(m, &s.n[k]);
            return s;
        }

        // Mode-2 candidate for a fixed beam group m: best (delta, n) per subband.
        Selection mode2_for(const std::vector<RateTable> &rates, int m)
        {
            const int K = int(rates.size());
            const int NO = rates.front().beams;
            Selection s;
            s.mode = FeedbackMode::mode2;
            s.m = m;
            s.delta.resize(K);
            s.n.resize(K);
            s.beam.resize(K);
            for (int k = 0; k < K; ++k)
            {
                double best = -1.0;
                for (int d = 0; d < 4; ++d)
                {
                    int n = 0;
                    const int beam = (2 * m + d) % NO;
                    const double r = rates[k].best(beam, &n);
                    if (r > best)
                    {
                        best = r;
                        s.delta[k] = d;
                        s.n[k] = n;
                        s.beam[k] = beam;
                    }
                }
                s.rate += best;
            }
            return s;
        }

        void require_mode2_codebook(int NO)
        {
            if (NO < 2 || NO % 2 != 0)
                throw ConfigError("feedback mode 2 needs an even number of beams NO >= 2");
        }
    } // namespace

    Selection select_mode1(const std::vector<RateTable> &rates)
    {
        check_tables(rates);
        Selection best;
        best.rate = -1.0;
        for (int m = 0; m < rates.front().beams; ++m)
        {
            auto s = mode1_for(rates, m);
            if (s.rate > best.rate)
                best = std::move(s);
        }
        return best;
    }

    Selection select_mode2(const std::vector<RateTable> &rates)
    {
        check_tables(rates);
        require_mode2_codebook(rates.front().beams);
        Selection best;
        best.rate = -1.0;
        for (int m = 0; m < rates.front().beams / 2; ++m)
        {
            auto s = mode2_for(rates, m);
            if (s.rate > best.rate)
                best = std::move(s);
        }
        return best;
    }

    Selection select_mode3(const std::vector<RateTable> &rates)
    {
        check_tables(rates);
        const int K = int(rates.size());
        Selection s;
        s.mode = FeedbackMode::mode3;
        s.n.resize(K);
        s.beam.resize(K);
        for (int k = 0; k < K; ++k)
        {
            double best = -1.0;
            for (int m = 0; m < rates[k].beams; ++m)
            {
                int n = 0;
                const double r = rates[k].best(m, &n);
                if (r > best)
                {
                    best = r;
                    s.beam[k] = m;
                    s.n[k] = n;
                }
            }
            s.rate += best;
        }
        return s;
    }

    Selection select(FeedbackMode mode, const std::vector<RateTable> &rates)
    {
        switch (mode)
        {
        case FeedbackMode::mode1: return select_mode1(rates);
        case FeedbackMode::mode2: return select_mode2(rates);
        default: return select_mode3(rates);
        }
    }

    double selection_rate(const Selection &s, const std::vector<RateTable> &rates)
    {
        if (s.beam.size() != rates.size() || s.n.size() != rates.size())
            throw std::invalid_argument("selection_rate: selection and rate tables disagree on K");
        double total = 0.0;
        for (std::size_t k = 0; k < rates.size(); ++k)
            total += rates[k](s.beam[k], s.n[k]);
        return total;
    }

    namespace
    {
        // Candidates ranked by rate (stable, so ties keep their order), keeping the first of each
        // distinct beam vector.
        std::vector<Selection> rank_groups(std::vector<Selection> cands, int U)
        {
            std::stable_sort(cands.begin(), cands.end(),
                             [](const Selection &a, const Selection &b) { return a.rate > b.rate; });
            std::vector<Selection> out;
            std::set<std::vector<int>> seen;
            for (auto &c : cands)
            {
                if (!seen.insert(c.beam).second)
                    continue;
                out.push_back(std::move(c));
                if (int(out.size()) == U)
                    break;
            }
            return out;
        }

        struct Choice
        {
            int beam = 0, n = 0, delta = 0;
            double value = 0.0;
        };

        // U best tuples (one choice per subband) of a sum of independent per-subband terms.
        // Each list in `choices` must be sorted by decreasing value. Best-first search over rank
        // vectors; among equal sums the lexicographically smallest rank vector comes first.
        std::vector<std::pair<double, std::vector<int>>> kbest_tuples(const std::vector<std::vector<Choice>> &choices,
                                                                      int U)
        {
            const int K = int(choices.size());
            auto total = [&](const std::vector<int> &idx)
            {
                double t = 0.0;
                for (int k = 0; k < K; ++k)
                    t += choices[k][idx[k]].value;
                return t;
            };
            using Item = std::pair<double, std::vector<int>>;
            auto cmp = [](const Item &a, const Item &b)
            { return a.first < b.first || (a.first == b.first && a.second > b.second); };
            std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
            std::set<std::vector<int>> pushed;
            std::vector<int> start(K, 0);
            heap.emplace(total(start), start);
            pushed.insert(start);
            std::vector<Item> out;
            while (!heap.empty() && int(out.size()) < U)
            {
                auto item = heap.top();
                heap.pop();
                for (int k = 0; k < K; ++k)
                    if (item.second[k] + 1 < int(choices[k].size()))
                    {
                        auto next = item.second;
                        ++next[k];
                        if (pushed.insert(next).second)
                            heap.emplace(total(next), std::move(next));
                    }
                out.push_back(std::move(item));
            }
            return out;
        }

        void sort_choices(std::vector<Choice> &c)
        {
            std::stable_sort(c.begin(), c.end(), [](const Choice &a, const Choice &b) { return a.value > b.value; });
        }

        Selection from_tuple(FeedbackMode mode, int m, const std::vector<std::vector<Choice>> &choices,
                             const std::pair<double, std::vector<int>> &t)
        {
            const int K = int(choices.size());
            Selection s;
            s.mode = mode;
            s.m = m;
            s.n.resize(K);
            s.beam.resize(K);
            if (mode == FeedbackMode::mode2)
                s.delta.resize(K);
            for (int k = 0; k < K; ++k)
            {
                const auto &c = choices[k][t.second[k]];
                s.beam[k] = c.beam;
                s.n[k] = c.n;
                if (mode == FeedbackMode::mode2)
                    s.delta[k] = c.delta;
            }
            s.rate = t.first;
            return s;
        }

        // Mode 3: per subband every beam with its best co-phasing.
        std::vector<Selection> kbest_mode3(const std::vector<RateTable> &rates, int U)
        {
            const int K = int(rates.size());
            const int NO = rates.front().beams;
            std::vector<std::vector<Choice>> choices(K);
            for (int k = 0; k < K; ++k)
            {
                for (int m = 0; m < NO; ++m)
                {
                    Choice c;
                    c.beam = m;
                    c.value = rates[k].best(m, &c.n);
                    choices[k].push_back(c);
                }
                sort_choices(choices[k]);
            }
            std::vector<Selection> out;
            for (const auto &t : kbest_tuples(choices, U))
                out.push_back(from_tuple(FeedbackMode::mode3, 0, choices, t));
            return out;
        }

        // Mode 2: for every beam group m the U best offset tuples, merged over m.
        std::vector<Selection> kbest_mode2(const std::vector<RateTable> &rates, int U)
        {
            const int K = int(rates.size());
            const int NO = rates.front().beams;
            std::vector<Selection> cands;
            for (int m = 0; m < NO / 2; ++m)
            {
                std::vector<std::vector<Choice>> choices(K);
                for (int k = 0; k < K; ++k)
                {
                    for (int d = 0; d < 4; ++d)
                    {
                        Choice c;
                        c.beam = (2 * m + d) % NO;
                        c.delta = d;
                        c.value = rates[k].best(c.beam, &c.n);
                        choices[k].push_back(c);
                    }
                    sort_choices(choices[k]);
                }
                for (const auto &t : kbest_tuples(choices, U))
                    cands.push_back(from_tuple(FeedbackMode::mode2, m, choices, t));
            }
            return rank_groups(std::move(cands), U);
        }
    } // namespace

    std::vector<Selection> top_selections(FeedbackMode mode, const std::vector<RateTable> &rates, int U)
    {
        check_tables(rates);
        if (U < 1)
            throw ConfigError("mitigation needs U >= 1");
        const int NO = rates.front().beams;
        std::vector<Selection> out;
        if (mode == FeedbackMode::mode3)
            out = kbest_mode3(rates, U);
        else
        {
            if (mode == FeedbackMode::mode1)
            {
                std::vector<Selection> cands;
                for (int m = 0; m < NO; ++m)
                    cands.push_back(mode1_for(rates, m));
                out = rank_groups(std::move(cands), U);
            }
            else
            {
                require_mode2_codebook(NO);
                out = kbest_mode2(rates, U);
            }
        }
        if (int(out.size()) < U)
            throw ConfigError("mitigation: only " + std::to_string(out.size()) +
                              " distinct precoder selections available, U = " + std::to_string(U));
        return out;
    }

    Selection select_mitigated(FeedbackMode mode, const std::vector<RateTable> &rates, int U, Rng &rng)
    {
        if (U == 1)
            return select(mode, rates);
        auto top = top_selections(mode, rates, U);
        const auto u = std::uniform_int_distribution<int>(0, U - 1)(rng);
        return std::move(top[u]);
    }

    int feedback_bits(FeedbackMode mode, int beams, int subbands)
    {
        const int lb = log2_exact(beams);
        switch (mode)
        {
        case FeedbackMode::mode1: return lb + 2 * subbands;
        case FeedbackMode::mode2: return lb - 1 + 4 * subbands;
        default: return subbands * (lb + 2);
        }
    }

    namespace
    {
        struct Layout
        {
            int i11_bits;
            int i2_bits;
        };

        Layout layout(FeedbackMode mode, int beams)
        {
            if (!is_power_of_two(beams))
                throw ConfigError("feedback encoding needs NO to be a power of two, got " + std::to_string(beams));
            const int lb = log2_exact(beams);
            switch (mode)
            {
            case FeedbackMode::mode1: return {lb, 2};
            case FeedbackMode::mode2:
                require_mode2_codebook(beams);
                return {lb - 1, 4};
            default: return {0, lb + 2};
            }
        }

        void append_bits(std::string &out, std::uint64_t v, int width)
        {
            for (int b = width - 1; b >= 0; --b)
                out.push_back(((v >> b) & 1u) ? '1' : '0');
        }

        std::uint64_t read_bits(const std::string &s, std::size_t &pos, int width)
        {
            std::uint64_t v = 0;
            for (int b = 0; b < width; ++b)
            {
                const char c = s[pos++];
                if (c != '0' && c != '1')
                    throw std::invalid_argument("feedback bit string contains '" + std::string(1, c) + "'");
                v = (v << 1) | std::uint64_t(c == '1');
            }
            return v;
        }
    } // namespace

    std::string Feedback::bits() const
    {
        std::string out;
        out.reserve(std::size_t(total_bits()));
        append_bits(out, i11, i11_bits);
        for (auto v : i2)
            append_bits(out, v, i2_bits);
        return out;
    }

    Feedback encode_feedback(const Selection &s, int beams)
    {
        const auto lay = layout(s.mode, beams);
        const int K = int(s.n.size());
        Feedback f;
        f.mode = s.mode;
        f.i11_bits = lay.i11_bits;
        f.i2_bits = lay.i2_bits;
        f.i2.resize(K);
        auto check = [](bool ok, const char *what)
        {
            if (!ok)
                throw std::invalid_argument(std::string("encode_feedback: ") + what);
        };
        for (int k = 0; k < K; ++k)
            check(s.n[k] >= 0 && s.n[k] < 4, "co-phasing index out of range");
        switch (s.mode)
        {
        case FeedbackMode::mode1:
            check(s.m >= 0 && s.m < beams, "beam index out of range");
            f.i11 = std::uint64_t(s.m);
            for (int k = 0; k < K; ++k)
                f.i2[k] = std::uint64_t(s.n[k]);
            break;
        case FeedbackMode::mode2:
            check(s.m >= 0 && s.m < beams / 2, "beam group out of range");
            check(int(s.delta.size()) == K, "one offset per subband expected");
            f.i11 = std::uint64_t(s.m);
            for (int k = 0; k < K; ++k)
            {
                check(s.delta[k] >= 0 && s.delta[k] < 4, "beam offset out of range");
                f.i2[k] = std::uint64_t(s.delta[k] << 2 | s.n[k]);
            }
            break;
        case FeedbackMode::mode3:
            check(int(s.beam.size()) == K, "one beam per subband expected");
            for (int k = 0; k < K; ++k)
            {
                check(s.beam[k] >= 0 && s.beam[k] < beams, "beam index out of range");
                f.i2[k] = std::uint64_t(s.beam[k]) << 2 | std::uint64_t(s.n[k]);
            }
            break;
        }
        return f;
    }

    Selection decode_feedback(const std::string &bits, FeedbackMode mode, int beams, int subbands)
    {
        const auto lay = layout(mode, beams);
        const std::size_t expected = std::size_t(lay.i11_bits + lay.i2_bits * subbands);
        if (bits.size() != expected)
            throw std::invalid_argument("decode_feedback: expected " + std::to_string(expected) + " bits, got " +
                                        std::to_string(bits.size()));
        std::size_t pos = 0;
        Selection s;
        s.mode = mode;
        s.m = int(read_bits(bits, pos, lay.i11_bits));
        s.n.resize(subbands);
        s.beam.resize(subbands);
        if (mode == FeedbackMode::mode2)
            s.delta.resize(subbands);
        for (int k = 0; k < subbands; ++k)
        {
            const auto v = read_bits(bits, pos, lay.i2_bits);
            s.n[k] = int(v & 3u);
            switch (mode)
            {
            case FeedbackMode::mode1: s.beam[k] = s.m; break;
            case FeedbackMode::mode2:
                s.delta[k] = int(v >> 2);
                s.beam[k] = (2 * s.m + s.delta[k]) % beams;
                break;
            case FeedbackMode::mode3: s.beam[k] = int(v >> 2); break;
            }
        }
        return s;
    }

    std::vector<int> localization_bits(const Feedback &f, int beams)
    {
        std::vector<int> b(f.i2.size());
        for (std::size_t k = 0; k < f.i2.size(); ++k)
        {
            switch (f.mode)
            {
            case FeedbackMode::mode1: b[k] = int(f.i11); break;
            case FeedbackMode::mode2: b[k] = int((2 * f.i11 + (f.i2[k] >> 2)) % std::uint64_t(beams)); break;
            case FeedbackMode::mode3: b[k] = int(f.i2[k] >> 2); break;
            }
        }
        return b;
    }

    std::vector<int> localization_bits(const Selection &s) { return s.beam; }

} // namespace pfloc
