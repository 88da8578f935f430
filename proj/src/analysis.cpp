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

#include "pfloc/analysis.hpp"

#include "pfloc/channel.hpp"

#include <algorithm>
#include <map>

namespace pfloc
{
    LinkedCluster link_cluster(Vec2 p, const std::vector<Cluster> &clusters, int k)
    {
        const int l = strongest_cluster(p, clusters, k);
        const auto &c = clusters[l];
        const double path = distance(p, c.position) + norm(c.position);
        return {l, std::norm(c.gains.at(k)) / (path * path)};
    }

    int quantized_beam(double phi, int k, const Params &params)
    {
        const int NO = params.beams();
        const double u = params.antenna_spacing_m() / subband_wavelength(k, params) * std::sin(phi);
        const long long i = (long long)std::floor(NO * u + 0.5);
        return int(((i % NO) + NO) % NO);
    }

    std::vector<double> feedback_probabilities(double phi_prime, int k, const Params &params)
    {
        const int NO = params.beams();
        std::vector<double> x(std::size_t(NO), 0.0);
        const double c = params.c_asd_rad;
        if (c == 0.0)
        {
            x[std::size_t(quantized_beam(phi_prime, k, params))] = 1.0;
            return x;
        }
        const double ratio = subband_wavelength(k, params) / (params.antenna_spacing_m() * NO);
        auto clip = [](double v, double lo, double hi) { return std::min(std::max(v, lo), hi); };
        // wraps of the beam grid and arcsine branches that can be reached
        const int wraps = int(std::ceil(params.antenna_spacing_m() / subband_wavelength(k, params))) + 1;
        const int branches = int(std::ceil(0.5 + c / pi));
        for (int i = 0; i < NO; ++i)
        {
            double len = 0.0;
            for (int o = -wraps; o <= wraps; ++o)
            {
                const double a1 = std::asin(clip(ratio * (i - 0.5 - double(o) * NO), -1.0, 1.0));
                const double a2 = std::asin(clip(ratio * (i + 0.5 - double(o) * NO), -1.0, 1.0));
                for (int tau = -branches; tau <= branches; ++tau)
                {
                    const double sign = (tau % 2 == 0) ? 1.0 : -1.0;
                    const double t1 = clip((a1 - sign * phi_prime - tau * pi) / c, -1.0, 1.0);
                    const double t2 = clip((a2 - sign * phi_prime - tau * pi) / c, -1.0, 1.0);
                    len += std::max(0.0, t2 - t1);
                }
            }
            x[std::size_t(i)] = 0.5 * len;
        }
        double total = 0.0;
        for (double v : x)
            total += v;
        if (std::abs(total - 1.0) > 1e-6)
            throw std::logic_error("feedback_probabilities: probabilities sum to " + format_double(total));
        return x;
    }

    std::vector<double> feedback_probabilities(Vec2 p, const std::vector<Cluster> &clusters, int k,
                                               const Params &params)
    {
        const auto &q = clusters[link_cluster(p, clusters, k).index].position;
        return feedback_probabilities(std::atan2(q.y, q.x), k, params);
    }

    namespace
    {
        std::size_t pmf_size(int beams, int subbands, std::size_t max_entries)
        {
            double size = 1.0;
            for (int k = 0; k < subbands; ++k)
                size *= beams;
            if (size > double(max_entries))
            {
                char buf[256];
                std::snprintf(buf, sizeof buf,
                              "joint feedback PMF needs (NO)^K = %.0f entries (%.1f MiB per array), budget is %zu entries",
                              size, size * 8.0 / (1024.0 * 1024.0), max_entries);
                throw BudgetError(buf);
            }
            return std::size_t(size);
        }
    } // namespace

    std::vector<double> joint_pmf(const std::vector<std::vector<double>> &x, std::size_t max_entries)
    {
        if (x.empty())
            return {1.0};
        const int NO = int(x.front().size());
        for (const auto &v : x)
            if (int(v.size()) != NO)
                throw std::invalid_argument("joint_pmf: all subbands need the same number of beams");
        std::vector<double> y(pmf_size(NO, int(x.size()), max_entries));
        // B(b) = b_0 + NO b_1 + ..., filled as a Kronecker product from the last subband down
        y[0] = 1.0;
        std::size_t filled = 1;
        for (std::size_t k = x.size(); k-- > 0;)
        {
            for (std::size_t j = filled; j-- > 0;)
            {
                const double v = y[j];
                for (int i = NO - 1; i >= 0; --i)
                    y[j * NO + std::size_t(i)] = v * x[k][std::size_t(i)];
            }
            filled *= std::size_t(NO);
        }
        return y;
    }

    double conditional_mse(const std::vector<Cluster> &clusters, const Params &params, const QuadratureConfig &q)
    {
        const int K = params.subbands;
        const int NO = params.beams();
        const double R = params.radius_m;
        if (K == 0)
            return 0.5 * R * R;
        if (!(q.grid_spacing > 0.0))
            throw ConfigError("quadrature grid spacing must be > 0");

        // Group quadrature points by their tuple of linked clusters: the feedback PMF depends on
        // the position only through that tuple.
        struct Group
        {
            double w = 0.0, sx = 0.0, sy = 0.0;
        };
        std::map<std::vector<int>, Group> groups;
        double s2 = 0.0;
        std::size_t points = 0;
        const int n = int(std::ceil(R / q.grid_spacing));
        std::vector<int> link(K);
        for (int iy = -n; iy < n; ++iy)
            for (int ix = -n; ix < n; ++ix)
            {
                const Vec2 p{(ix + 0.5) * q.grid_spacing, (iy + 0.5) * q.grid_spacing};
                if (norm(p) > R)
                    continue;
                for (int k = 0; k < K; ++k)
                    link[k] = strongest_cluster(p, clusters, k);
                auto &g = groups[link];
                g.w += 1.0;
                g.sx += p.x;
                g.sy += p.y;
                s2 += dot(p, p);
                ++points;
            }
        if (points == 0)
            throw ConfigError("quadrature grid too coarse for the cell");

        // sparse X per (cluster, subband)
        std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> xs;
        auto sparse_x = [&](int l, int k) -> const std::vector<std::pair<int, double>> &
        {
            auto it = xs.find({l, k});
            if (it != xs.end())
                return it->second;
            const auto &c = clusters[l].position;
            const auto x = feedback_probabilities(std::atan2(c.y, c.x), k, params);
            std::vector<std::pair<int, double>> nz;
            for (int i = 0; i < NO; ++i)
                if (x[i] > 0.0)
                    nz.emplace_back(i, x[i]);
            return xs.emplace(std::make_pair(l, k), std::move(nz)).first->second;
        };

        const std::size_t size = pmf_size(NO, K, q.max_entries);
        std::vector<double> s0(size, 0.0), s1x(size, 0.0), s1y(size, 0.0);
        std::vector<std::size_t> stride(K);
        stride[0] = 1;
        for (int k = 1; k < K; ++k)
            stride[k] = stride[k - 1] * std::size_t(NO);

        std::vector<const std::vector<std::pair<int, double>> *> support(K);
        std::vector<std::size_t> pos(K);
        for (const auto &[tuple, g] : groups)
        {
            for (int k = 0; k < K; ++k)
                support[k] = &sparse_x(tuple[k], k);
            // odometer over the product of supports
            std::fill(pos.begin(), pos.end(), 0);
            while (true)
            {
                double y = 1.0;
                std::size_t b = 0;
                for (int k = 0; k < K; ++k)
                {
                    const auto &e = (*support[k])[pos[k]];
                    y *= e.second;
                    b += stride[k] * std::size_t(e.first);
                }
                s0[b] += y * g.w;
                s1x[b] += y * g.sx;
                s1y[b] += y * g.sy;
                int k = 0;
                while (k < K && ++pos[k] == support[k]->size())
                    pos[k++] = 0;
                if (k == K)
                    break;
            }
        }
        double explained = 0.0;
        for (std::size_t b = 0; b < size; ++b)
            if (s0[b] > 0.0)
                explained += (s1x[b] * s1x[b] + s1y[b] * s1y[b]) / s0[b];
        return std::max(0.0, (s2 - explained) / double(points));
    }

    AnalysisResult analytical_mse(const AnalysisConfig &config)
    {
        const auto &prm = config.params;
        AnalysisResult r;
        if (prm.subbands == 0)
        {
            r.mse = 0.5 * prm.radius_m * prm.radius_m;
            r.rmse = std::sqrt(r.mse);
            return r;
        }
        prm.validate();
        if (config.cluster_draws < 1)
            throw ConfigError("analysis needs at least one cluster draw");
        // fail early on the budget rather than inside a worker
        pmf_size(prm.beams(), prm.subbands, config.quadrature.max_entries);

        std::vector<double> mse(std::size_t(config.cluster_draws));
        parallel_for(mse.size(), config.threads,
                     [&](std::size_t d)
                     {
                         Rng rng = derive_stream(prm.seed, "analysis-clusters", {d});
                         const auto clusters = generate_clusters(rng, prm);
                         mse[d] = conditional_mse(clusters, prm, config.quadrature);
                     });
        const double n = double(mse.size());
        double mean = 0.0;
        for (double v : mse)
            mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : mse)
            var += (v - mean) * (v - mean);
        var = mse.size() > 1 ? var / (n - 1.0) : 0.0;
        r.mse = mean;
        r.rmse = std::sqrt(mean);
        r.mc_stderr = r.rmse > 0.0 ? std::sqrt(var / n) / (2.0 * r.rmse) : 0.0;
        r.draws = config.cluster_draws;
        return r;
    }

    double rmse_zero(double R)
    {
        if (!(R > 0.0))
            throw ConfigError("R must be > 0");
        return R / std::sqrt(2.0);
    }

    double rmse_infinity(double R, int L)
    {
        if (!(R > 0.0) || L < 1)
            throw ConfigError("rmse_infinity needs R > 0 and L >= 1");
        return R / std::sqrt(2.0 * L);
    }

    double rmse_fit(double R, int L, int N, int O, int K, double eta)
    {
        if (N < 1 || O < 1 || K < 0 || !(eta > 0.0))
            throw ConfigError("rmse_fit needs N, O >= 1, K >= 0 and eta > 0");
        return rmse_infinity(R, L) +
               (1.0 - 1.0 / std::sqrt(double(L))) * rmse_zero(R) * std::pow(double(N) * O, -double(K) / eta);
    }

} // namespace pfloc
