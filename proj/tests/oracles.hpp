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

// Reference implementations used by the unit and acceptance tests.

#ifndef PFLOC_TESTS_ORACLES_HPP
#define PFLOC_TESTS_ORACLES_HPP

#include "pfloc/codebook.hpp"

#include <random>
#include <vector>

namespace pfloc::oracle
{
    inline SubbandChannels random_channel(Rng &rng, int K, int nrx, int N)
    {
        std::normal_distribution<double> g(0.0, std::sqrt(0.5));
        SubbandChannels h(K, CMatrix(nrx, 2 * N));
        for (auto &m : h)
            for (Eigen::Index i = 0; i < m.size(); ++i)
                m(i) = {g(rng), g(rng)};
        return h;
    }

    // log2 det(I + H w w^H H^H / sigma^2), straight from the definition
    inline double oracle_rate(const CMatrix &h, const CVector &w, double sigma)
    {
        const CVector hw = h * w;
        const CMatrix m = CMatrix::Identity(h.rows(), h.rows()) + hw * hw.adjoint() / (sigma * sigma);
        return std::log2(m.determinant().real());
    }

    struct Best
    {
        double rate = -1.0;
        std::vector<int> beam, n;
        int m = 0;
    };

    // Exhaustive search over every feedback value of the mode.
    inline Best brute_force(FeedbackMode mode, const SubbandChannels &h, int N, int O)
    {
        const int K = int(h.size());
        const int NO = N * O;
        std::vector<std::vector<double>> r(K, std::vector<double>(std::size_t(NO) * 4));
        for (int k = 0; k < K; ++k)
            for (int m = 0; m < NO; ++m)
                for (int n = 0; n < 4; ++n)
                    r[k][m * 4 + n] = oracle_rate(h[k], codebook_vector(m, n, N, O).w, 1.0);

        Best best;
        auto consider = [&](int m, const std::vector<int> &beam, const std::vector<int> &n)
        {
            double t = 0.0;
            for (int k = 0; k < K; ++k)
                t += r[k][beam[k] * 4 + n[k]];
            if (t > best.rate * (1.0 + 1e-12) + 1e-300)
                best = {t, beam, n, m};
        };
        // odometer over per-subband choices
        auto each_tuple = [&](int choices, auto body)
        {
            std::vector<int> c(K, 0);
            while (true)
            {
                body(c);
                int k = 0;
                while (k < K && ++c[k] == choices)
                    c[k++] = 0;
                if (k == K)
                    break;
            }
        };
        if (mode == FeedbackMode::mode1)
        {
            for (int m = 0; m < NO; ++m)
                each_tuple(4, [&](const std::vector<int> &n) { consider(m, std::vector<int>(K, m), n); });
        }
        else if (mode == FeedbackMode::mode2)
        {
            for (int m = 0; m < NO / 2; ++m)
                each_tuple(16,
                           [&](const std::vector<int> &c)
                           {
                               std::vector<int> beam(K), n(K);
                               for (int k = 0; k < K; ++k)
                               {
                                   beam[k] = (2 * m + c[k] / 4) % NO;
                                   n[k] = c[k] % 4;
                               }
                               consider(m, beam, n);
                           });
        }
        else
        {
            each_tuple(NO * 4,
                       [&](const std::vector<int> &c)
                       {
                           std::vector<int> beam(K), n(K);
                           for (int k = 0; k < K; ++k)
                           {
                               beam[k] = c[k] / 4;
                               n[k] = c[k] % 4;
                           }
                           consider(0, beam, n);
                       });
        }
        return best;
    }

    // Beam with the largest array gain towards phi, straight from the codebook.
    inline int argmax_beam(double phi, int k, const Params &p)
    {
        const Codebook cb(p.n_tx, p.oversampling);
        const CVector a = gnb_steering(phi, k, p);
        int best = 0;
        double g = -1.0;
        for (int m = 0; m < cb.beams(); ++m)
        {
            const double v = std::norm(a.dot(cb.beam_matrix().col(m)));
            if (v > g * (1.0 + 1e-12))
            {
                g = v;
                best = m;
            }
        }
        return best;
    }

} // namespace pfloc::oracle

#endif
