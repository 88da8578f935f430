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

#ifndef PFLOC_RUNNER_HPP
#define PFLOC_RUNNER_HPP

#include "pfloc/analysis.hpp"
#include "pfloc/attack.hpp"
#include "pfloc/baselines.hpp"

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pfloc
{
    enum class ExperimentKind
    {
        map,
        rmse_vs_k,
        rmse_vs_r,
        ccdf,
        analysis,
        mitigation,
        baselines,
        all
    };

    ExperimentKind parse_experiment_kind(const std::string &s);
    std::string to_string(ExperimentKind k);
    const std::vector<std::string> &experiment_names();

    struct ExperimentConfig
    {
        ExperimentKind kind = ExperimentKind::rmse_vs_k;
        Params params;
        std::set<std::string> explicit_keys; // keys set by the config file or overrides
        KeyValueMap source;

        std::vector<int> modes;
        std::vector<int> n_values;
        std::vector<int> nbar_values;
        std::vector<int> k_values;
        std::vector<double> r_values;
        std::vector<double> snr_db;  // noisy sweep points, in dB
        bool include_noiseless = true;
        std::vector<int> u_values;
        bool attacker_aware = true; // map built by UEs that also apply the mitigation

        int trials = 2000;               // victims per scenario
        int samples_per_position = 10;   // T
        int scenarios = 1;               // independent scenario draws pooled per point
        VictimSampling victims = VictimSampling::lattice;
        VictimSampling baseline_victims = VictimSampling::continuous;
        int cluster_draws = 200;
        double eta = 9.0;
        double quadrature_spacing = 0.25;
        std::size_t pmf_budget = default_pmf_budget;
        double ccdf_step = 0.1; // m

        std::string out_dir = "out";
        int threads = 1;
    };

    // Defaults of each experiment kind, then the given keys. Unknown keys and malformed values
    // throw ConfigError naming the line.
    ExperimentConfig make_config(ExperimentKind kind, const KeyValueMap &values = {});

    // L = round(0.112 R^2), keeping the cluster density of a 70-cluster 25 m cell.
    int clusters_for_radius(double R);

    // Resolved configuration as key=value lines (written next to the results).
    void write_config(std::ostream &out, const ExperimentConfig &config);

    // Runs the experiment and writes its CSV files into config.out_dir. Returns the paths written.
    std::vector<std::string> run_experiment(const ExperimentConfig &config);

    // Shared row schema of the RMSE tables.
    struct RmseRow
    {
        std::string attack_kind = "pf";
        int mode = 0; // 0 when not applicable
        int N = 0, Nbar = 0, K = 0, L = 0;
        double R = 0.0;
        std::optional<double> snr_db; // empty: noiseless
        int U = 1;
        VictimSampling victims = VictimSampling::lattice;
        RmseReport report;
        bool has_rate = false;
    };

    void write_rmse_csv(std::ostream &out, const std::vector<RmseRow> &rows);

    // Concatenates the trials of several reports.
    RmseReport pool_reports(const std::vector<RmseReport> &reports);

    // PF attack at one configuration, pooled over config.scenarios scenario draws (seeds
    // params.seed, params.seed + 1, ...). An SNR calibrates A_PL so that the border SNR over
    // sigma = sigma_v matches it.
    RmseReport pf_attack_point(const Params &params, FeedbackMode mode, int U, std::optional<double> snr_db,
                               const ExperimentConfig &config);

} // namespace pfloc

#endif
