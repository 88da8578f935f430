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

#ifndef PFLOC_ANALYSIS_HPP
#define PFLOC_ANALYSIS_HPP

#include "pfloc/scenario.hpp"

#include <cstddef>
#include <vector>

namespace pfloc
{
    // Simplified feedback model: one receive antenna, mode 3, perfect estimation, fixed
    // co-phasing, independent perturbations per observation, and each subband determined by the
    // cluster with the largest gain over squared path length.

    struct LinkedCluster
    {
        int index = 0;
        double score = 0.0; // xi / (|p - q| + |q|)^2
    };

    LinkedCluster link_cluster(Vec2 p, const std::vector<Cluster> &clusters, int k);

    // Probability of each beam index on subband k for a UE linked to a cluster at azimuth
    // phi_prime (closed form over the uniform departure perturbation).
    std::vector<double> feedback_probabilities(double phi_prime, int k, const Params &params);
    std::vector<double> feedback_probabilities(Vec2 p, const std::vector<Cluster> &clusters, int k,
                                               const Params &params);

    // Beam index quantizing (d / lambda_k) sin(phi): round(NO u) mod NO.
    int quantized_beam(double phi, int k, const Params &params);

    // Default memory budget for dense arrays indexed by B(b), in entries.
    inline constexpr std::size_t default_pmf_budget = std::size_t(1) << 26;

    // Joint PMF over b with entry B(b) = sum_k (NO)^k b_k equal to prod_k X_k[b_k].
    // Throws BudgetError when (NO)^K exceeds max_entries.
    std::vector<double> joint_pmf(const std::vector<std::vector<double>> &x, std::size_t max_entries = default_pmf_budget);

    struct QuadratureConfig
    {
        double grid_spacing = 0.25; // m, midpoint rule over the disk
        std::size_t max_entries = default_pmf_budget;
    };

    // MSE of the ideal-map estimator for fixed cluster positions and gains (xi = |g|^2).
    double conditional_mse(const std::vector<Cluster> &clusters, const Params &params, const QuadratureConfig &q = {});

    struct AnalysisConfig
    {
        Params params;
        int cluster_draws = 200;
        QuadratureConfig quadrature;
        double eta = 9.0;
        int threads = 1;
    };

    struct AnalysisResult
    {
        double mse = 0.0;       // m^2
        double rmse = 0.0;      // m
        double mc_stderr = 0.0; // standard error of rmse from the cluster draws, m
        int draws = 0;
    };

    // Expectation of conditional_mse over cluster positions (uniform on the disk) and gains
    // (|CN(0,1)|^2), by Monte Carlo over cluster draws. K = 0 returns R^2/2 exactly.
    AnalysisResult analytical_mse(const AnalysisConfig &config);

    double rmse_zero(double R);
    double rmse_infinity(double R, int L);
    double rmse_fit(double R, int L, int N, int O, int K, double eta);

} // namespace pfloc

#endif
