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

#ifndef PFLOC_CHANNEL_HPP
#define PFLOC_CHANNEL_HPP

#include "pfloc/scenario.hpp"

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace pfloc
{
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;

    // One Nbar x 2N matrix per subband. Columns 0..N-1 are the first polarisation, N..2N-1 the second.
    using SubbandChannels = std::vector<CMatrix>;

    // Delay of the path gNB -> cluster q -> UE p (s).
    double path_delay(Vec2 p, Vec2 q);

    // Wavelength of subband k (0-based), centred on the carrier.
    double subband_wavelength(int k, const Params &params);

    // Complex gain gamma_l(p,k). Throws std::domain_error when the delay is zero.
    std::complex<double> cluster_gain(Vec2 p, const Cluster &cluster, int k, const Params &params);
    std::complex<double> cluster_gain(double delay, std::complex<double> g, int k, const Params &params);

    // Index of the cluster with the largest |g_l(k)|^2 / (|p - q_l| + |q_l|)^2 on subband k.
    // Ties go to the smallest index.
    int strongest_cluster(Vec2 p, const std::vector<Cluster> &clusters, int k);

    double departure_angle(Vec2 q, double alpha, const Params &params);
    double arrival_angle(Vec2 p, Vec2 q, double alpha_bar, double orientation, const Params &params);

    // Unit-norm uniform linear array responses at the gNB (length N) and UE (length Nbar).
    CVector gnb_steering(double phi, int k, const Params &params);
    CVector ue_steering(double phi_bar, int k, const Params &params);

    // Angle perturbations at one position, indexed [k * L + l].
    struct Perturbations
    {
        std::vector<double> departure;
        std::vector<double> arrival;
    };

    // Frozen-regime values read from the scenario's fields.
    Perturbations frozen_perturbations(const Scenario &scenario, Vec2 p);
    // Fresh independent U(-1,1) values (redraw regime).
    Perturbations draw_perturbations(const Params &params, Rng &rng);
    // Frozen or fresh depending on the scenario's regime.
    Perturbations perturbations_at(const Scenario &scenario, Vec2 p, Rng &rng);

    // Downlink channel of subband k: sum over clusters of gamma * abar * ((cos mu, sin mu) kron a)^H.
    CMatrix assemble_channel(Vec2 p, const Scenario &scenario, const Perturbations &alpha, double mu,
                             double orientation, int k);
    // Frozen-regime convenience overload.
    CMatrix assemble_channel(Vec2 p, const Scenario &scenario, double mu, double orientation, int k);

    // Per-position precomputation: cluster gains and gNB responses for every subband, so that many
    // realisations (co-phasing angle, orientation) at the same position are cheap.
    class SiteChannel
    {
    public:
        // only_cluster, when non-empty, holds one cluster index per subband and restricts the
        // channel of that subband to the single cluster.
        SiteChannel(const Scenario &scenario, Vec2 p, const Perturbations &alpha, std::span<const int> only_cluster = {});

        SubbandChannels realize(double mu, double orientation) const;
        int subbands() const { return static_cast<int>(bands_.size()); }

    private:
        struct Band
        {
            CMatrix weighted;                 // L' x N: gamma_l * a_l^H per row
            std::vector<double> arrival_base; // arrival angle without orientation, per kept cluster
            Eigen::RowVectorXcd single_rx;    // sum of rows, used when Nbar == 1
        };
        const Params *params_;
        std::vector<Band> bands_;
    };

    struct ChannelEstimate
    {
        SubbandChannels h_hat;
        double sigma = 0.0;
    };

    // H + V with V entries CN(0, sigma^2). sigma = 0 returns H unchanged.
    ChannelEstimate estimate_channel(const SubbandChannels &h, double sigma, Rng &rng);

    // Mean per-entry power E|H_ij|^2 at the cell border divided by noise_std^2, in dB, by Monte Carlo
    // over border positions, co-phasing angles and orientations.
    double border_snr_db(const Scenario &scenario, double noise_std, int samples, std::uint64_t stream_seed);

    // A_PL for which the border SNR (per-entry channel power over noise_std^2) equals target_snr_db.
    double calibrate_apl(const Scenario &scenario, double target_snr_db, double noise_std, int samples = 256);

} // namespace pfloc

#endif
