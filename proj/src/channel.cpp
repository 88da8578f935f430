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

#include "pfloc/channel.hpp"

#include <stdexcept>

namespace pfloc
{
    namespace
    {
        // Entries exp(j * 2 pi * spacing/lambda * (i - (n-1)/2) * sin(angle)) / sqrt(n), built as a
        // geometric progression.
        CVector ula_response(int n, double spacing_over_lambda, double angle)
        {
            const double step = two_pi * spacing_over_lambda * std::sin(angle);
            const std::complex<double> ratio = std::polar(1.0, step);
            std::complex<double> v = std::polar(1.0 / std::sqrt(double(n)), -step * (n - 1) / 2.0);
            CVector a(n);
            for (int i = 0; i < n; ++i)
            {
                a(i) = v;
                v *= ratio;
            }
            return a;
        }

        std::size_t flat(int k, int l, int clusters) { return std::size_t(k) * clusters + l; }
    } // namespace

    double path_delay(Vec2 p, Vec2 q)
    {
        return (distance(p, q) + norm(q)) / speed_of_light;
    }

    double subband_wavelength(int k, const Params &params)
    {
        if (k < 0 || k >= params.subbands)
            throw std::out_of_range("subband index " + std::to_string(k) + " outside [0, K)");
        return speed_of_light / (params.carrier_hz + params.subband_spacing_hz * (k - (params.subbands - 1) / 2.0));
    }

    std::complex<double> cluster_gain(double delay, std::complex<double> g, int k, const Params &params)
    {
        if (!(delay > 0.0))
            throw std::domain_error("cluster gain undefined for zero path delay (UE and cluster at the gNB)");
        const double phase = -two_pi * k * delay / (params.subbands * params.effective_sampling_period());
        return std::sqrt(double(params.n_tx)) * params.path_loss_norm * g / delay * std::polar(1.0, phase);
    }

    std::complex<double> cluster_gain(Vec2 p, const Cluster &cluster, int k, const Params &params)
    {
        return cluster_gain(path_delay(p, cluster.position), cluster.gains.at(k), k, params);
    }

    int strongest_cluster(Vec2 p, const std::vector<Cluster> &clusters, int k)
    {
        if (clusters.empty())
            throw std::invalid_argument("strongest_cluster: no clusters");
        int best = 0;
        double best_score = -1.0;
        for (std::size_t l = 0; l < clusters.size(); ++l)
        {
            const auto &c = clusters[l];
            const double path = distance(p, c.position) + norm(c.position);
            const double score = std::norm(c.gains.at(k)) / (path * path);
            if (score > best_score)
            {
                best_score = score;
                best = int(l);
            }
        }
        return best;
    }

    double departure_angle(Vec2 q, double alpha, const Params &params)
    {
        return std::atan2(q.y, q.x) + params.c_asd_rad * alpha;
    }

    double arrival_angle(Vec2 p, Vec2 q, double alpha_bar, double orientation, const Params &params)
    {
        return std::atan2(q.y - p.y, q.x - p.x) + params.c_asa_rad * alpha_bar + orientation;
    }

    CVector gnb_steering(double phi, int k, const Params &params)
    {
        return ula_response(params.n_tx, params.antenna_spacing_m() / subband_wavelength(k, params), phi);
    }

    CVector ue_steering(double phi_bar, int k, const Params &params)
    {
        return ula_response(params.n_rx, params.ue_antenna_spacing_m() / subband_wavelength(k, params), phi_bar);
    }

    Perturbations frozen_perturbations(const Scenario &scenario, Vec2 p)
    {
        const auto &prm = scenario.params();
        if (!scenario.fields())
            throw std::logic_error("scenario has no frozen perturbation fields (redraw regime)");
        const std::size_t n = std::size_t(prm.subbands) * prm.clusters;
        Perturbations out;
        out.departure.resize(n);
        if (prm.n_rx > 1)
            out.arrival.resize(n);
        scenario.fields()->evaluate(p, out.departure, out.arrival);
        if (prm.n_rx == 1)
            out.arrival.assign(n, 0.0);
        return out;
    }

    Perturbations draw_perturbations(const Params &params, Rng &rng)
    {
        const std::size_t n = std::size_t(params.subbands) * params.clusters;
        Perturbations out;
        out.departure.resize(n);
        out.arrival.resize(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            out.departure[i] = uniform(rng, -1.0, 1.0);
            out.arrival[i] = uniform(rng, -1.0, 1.0);
        }
        return out;
    }

    Perturbations perturbations_at(const Scenario &scenario, Vec2 p, Rng &rng)
    {
        if (scenario.params().alpha_regime == AlphaRegime::frozen)
            return frozen_perturbations(scenario, p);
        return draw_perturbations(scenario.params(), rng);
    }

    CMatrix assemble_channel(Vec2 p, const Scenario &scenario, const Perturbations &alpha, double mu,
                             double orientation, int k)
    {
        const auto &prm = scenario.params();
        const int N = prm.n_tx;
        CMatrix h = CMatrix::Zero(prm.n_rx, 2 * N);
        const CVector pol = (CVector(2) << std::cos(mu), std::sin(mu)).finished();
        for (int l = 0; l < prm.clusters; ++l)
        {
            const auto &c = scenario.clusters()[l];
            const auto i = flat(k, l, prm.clusters);
            const auto gamma = cluster_gain(p, c, k, prm);
            const CVector a = gnb_steering(departure_angle(c.position, alpha.departure[i], prm), k, prm);
            const CVector abar =
                ue_steering(arrival_angle(p, c.position, alpha.arrival[i], orientation, prm), k, prm);
            CVector stacked(2 * N);
            stacked << pol(0) * a, pol(1) * a;
            h += gamma * abar * stacked.adjoint();
        }
        return h;
    }

    CMatrix assemble_channel(Vec2 p, const Scenario &scenario, double mu, double orientation, int k)
    {
        return assemble_channel(p, scenario, frozen_perturbations(scenario, p), mu, orientation, k);
    }

    SiteChannel::SiteChannel(const Scenario &scenario, Vec2 p, const Perturbations &alpha,
                             std::span<const int> only_cluster)
        : params_(&scenario.params())
    {
        const auto &prm = *params_;
        if (!only_cluster.empty() && int(only_cluster.size()) != prm.subbands)
            throw std::invalid_argument("SiteChannel: one cluster index per subband expected");
        bands_.resize(prm.subbands);
        for (int k = 0; k < prm.subbands; ++k)
        {
            std::vector<int> kept;
            if (only_cluster.empty())
                for (int l = 0; l < prm.clusters; ++l)
                    kept.push_back(l);
            else
                kept.push_back(only_cluster[k]);

            auto &band = bands_[k];
            band.weighted.resize(kept.size(), prm.n_tx);
            band.arrival_base.resize(kept.size());
            for (std::size_t r = 0; r < kept.size(); ++r)
            {
                const int l = kept[r];
                const auto &c = scenario.clusters().at(l);
                const auto i = flat(k, l, prm.clusters);
                const auto gamma = cluster_gain(p, c, k, prm);
                const CVector a = gnb_steering(departure_angle(c.position, alpha.departure[i], prm), k, prm);
                band.weighted.row(r) = gamma * a.adjoint();
                band.arrival_base[r] = arrival_angle(p, c.position, alpha.arrival[i], 0.0, prm);
            }
            band.single_rx = band.weighted.colwise().sum();
        }
    }

    SubbandChannels SiteChannel::realize(double mu, double orientation) const
    {
        const auto &prm = *params_;
        const int N = prm.n_tx;
        const double cm = std::cos(mu), sm = std::sin(mu);
        SubbandChannels out(bands_.size());
        for (std::size_t k = 0; k < bands_.size(); ++k)
        {
            const auto &band = bands_[k];
            Eigen::MatrixXcd g;
            if (prm.n_rx == 1)
                g = band.single_rx; // the UE response of a single antenna is 1
            else
            {
                CMatrix abar(prm.n_rx, band.weighted.rows());
                for (Eigen::Index r = 0; r < band.weighted.rows(); ++r)
                    abar.col(r) = ue_steering(band.arrival_base[r] + orientation, int(k), prm);
                g = abar * band.weighted;
            }
            CMatrix h(prm.n_rx, 2 * N);
            h.leftCols(N) = cm * g;
            h.rightCols(N) = sm * g;
            out[k] = std::move(h);
        }
        return out;
    }

    ChannelEstimate estimate_channel(const SubbandChannels &h, double sigma, Rng &rng)
    {
        if (sigma < 0.0)
            throw std::invalid_argument("estimation noise std must be >= 0");
        ChannelEstimate est{h, sigma};
        if (sigma == 0.0)
            return est;
        std::normal_distribution<double> n(0.0, sigma / std::sqrt(2.0));
        for (auto &m : est.h_hat)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i)
                {
                    const double re = n(rng);
                    m(i, j) += std::complex<double>(re, n(rng));
                }
        return est;
    }

    double border_snr_db(const Scenario &scenario, double noise_std, int samples, std::uint64_t stream_seed)
    {
        const auto &prm = scenario.params();
        Rng rng = derive_stream(stream_seed, "border-snr");
        double power = 0.0;
        std::size_t entries = 0;
        for (int s = 0; s < samples; ++s)
        {
            const double angle = two_pi * (s + uniform(rng, 0.0, 1.0)) / samples;
            const Vec2 p{prm.radius_m * std::cos(angle), prm.radius_m * std::sin(angle)};
            const auto alpha = perturbations_at(scenario, p, rng);
            SiteChannel site(scenario, p, alpha);
            const auto h = site.realize(uniform(rng, 0.0, two_pi), uniform(rng, 0.0, two_pi));
            for (const auto &m : h)
            {
                power += m.squaredNorm();
                entries += m.size();
            }
        }
        return 10.0 * std::log10(power / double(entries) / (noise_std * noise_std));
    }

    double calibrate_apl(const Scenario &scenario, double target_snr_db, double noise_std, int samples)
    {
        if (!std::isfinite(target_snr_db))
            throw ConfigError("target SNR must be finite");
        if (!(noise_std > 0.0))
            throw ConfigError("SNR calibration needs a positive noise std");
        const Scenario unit = scenario.with_path_loss(1.0);
        const double snr_unit_db = border_snr_db(unit, noise_std, samples, scenario.params().seed);
        // power scales with A_PL^2
        return std::pow(10.0, (target_snr_db - snr_unit_db) / 20.0);
    }

} // namespace pfloc
