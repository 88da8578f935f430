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

#ifndef PFLOC_CODEBOOK_HPP
#define PFLOC_CODEBOOK_HPP

#include "pfloc/channel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pfloc
{
    enum class FeedbackMode
    {
        mode1 = 1, // one beam for all subbands, co-phasing per subband
        mode2 = 2, // beam group 2m plus per-subband offset delta
        mode3 = 3  // beam and co-phasing per subband (non-standard)
    };

    FeedbackMode parse_feedback_mode(int mode);
    int to_int(FeedbackMode mode);

    struct Precoder
    {
        int m = 0;
        int n = 0;
        CVector w; // length 2N
    };

    // Type-I single-panel codebook entry w_{m,n}.
    Precoder codebook_vector(int m, int n, int N, int O);

    // psi_n = exp(j 2 pi n / 4)
    std::complex<double> cophasing(int n);

    class Codebook
    {
    public:
        Codebook(int N, int O);

        int antennas() const { return n_; }
        int oversampling() const { return o_; }
        int beams() const { return n_ * o_; }

        // N x NO matrix whose column m is w~_m (unit-modulus entries).
        const CMatrix &beam_matrix() const { return beams_; }

    private:
        int n_, o_;
        CMatrix beams_;
    };

    // ||H w_{m,n}||^2 for every (m, n) of one subband, stored [m * 4 + n].
    struct GainTable
    {
        int beams = 0;
        std::vector<double> gain;

        double operator()(int m, int n) const { return gain[std::size_t(m) * 4 + n]; }
    };

    GainTable gain_table(const CMatrix &h, const Codebook &codebook);

    // Per-subband rate log2(1 + ||H w||^2 / sigma_v^2) for every (m, n), stored like GainTable.
    struct RateTable
    {
        int beams = 0;
        std::vector<double> rate;

        double operator()(int m, int n) const { return rate[std::size_t(m) * 4 + n]; }
        // max over n for beam m, and the smallest n reaching it
        double best(int m, int *n_out = nullptr) const;
    };

    RateTable rate_table(const GainTable &gains, double noise_std);
    std::vector<RateTable> rate_tables(const SubbandChannels &h, const Codebook &codebook, double noise_std);

    // Spectral efficiency sum_k log2 det(I + H w w^H H^H / sigma_v^2) and the equivalent norm form.
    double spectral_efficiency_det(const SubbandChannels &h, const std::vector<CVector> &w, double noise_std);
    double spectral_efficiency(const SubbandChannels &h, const std::vector<CVector> &w, double noise_std);

    // Result of a precoder selection. beam[k] is the codebook beam used on subband k.
    struct Selection
    {
        FeedbackMode mode = FeedbackMode::mode3;
        int m = 0;              // i_{1,1} payload (modes 1 and 2)
        std::vector<int> delta; // mode 2 offsets
        std::vector<int> n;     // co-phasing per subband
        std::vector<int> beam;  // per-subband beam index in [0, NO)
        double rate = 0.0;      // achieved sum rate (bits/s/Hz)

        friend bool operator==(const Selection &, const Selection &) = default;
    };

    // Exact maximisers of the sum rate; ties go to the smallest indices.
    Selection select_mode1(const std::vector<RateTable> &rates);
    Selection select_mode2(const std::vector<RateTable> &rates);
    Selection select_mode3(const std::vector<RateTable> &rates);
    Selection select(FeedbackMode mode, const std::vector<RateTable> &rates);

    // Rate of a selection evaluated on a rate table set.
    double selection_rate(const Selection &s, const std::vector<RateTable> &rates);

    // The U best selections with pairwise distinct localization bits, by non-increasing rate.
    // Throws ConfigError when fewer than U distinct candidates exist.
    std::vector<Selection> top_selections(FeedbackMode mode, const std::vector<RateTable> &rates, int U);

    // Mitigated selection: one of the top U, uniformly at random. U = 1 returns select(mode, rates).
    Selection select_mitigated(FeedbackMode mode, const std::vector<RateTable> &rates, int U, Rng &rng);

    // Over-the-air feedback fields. Widths follow the mode's bit layout.
    struct Feedback
    {
        FeedbackMode mode = FeedbackMode::mode3;
        int i11_bits = 0;
        std::uint64_t i11 = 0;
        int i2_bits = 0;
        std::vector<std::uint64_t> i2;

        int total_bits() const { return i11_bits + i2_bits * static_cast<int>(i2.size()); }
        // MSB-first: i_{1,1} followed by i_2(0) ... i_2(K-1)
        std::string bits() const;
        std::string hex() const { return bits_to_hex(bits()); }
    };

    int feedback_bits(FeedbackMode mode, int beams, int subbands);

    Feedback encode_feedback(const Selection &s, int beams);
    // Inverse of encode_feedback on the bit string; rates are not carried and come back as 0.
    Selection decode_feedback(const std::string &bits, FeedbackMode mode, int beams, int subbands);

    // Position-relevant part of the feedback: the per-subband beam index, co-phasing dropped.
    std::vector<int> localization_bits(const Feedback &f, int beams);
    std::vector<int> localization_bits(const Selection &s);

} // namespace pfloc

#endif
