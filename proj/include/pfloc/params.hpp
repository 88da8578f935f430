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

#ifndef PFLOC_PARAMS_HPP
#define PFLOC_PARAMS_HPP

#include "pfloc/common.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pfloc
{
    // How the angle perturbations alpha_l(p,k) behave over time.
    enum class AlphaRegime
    {
        frozen, // one spatially correlated field per scenario
        redraw  // fresh independent value at every channel observation (no spatial correlation)
    };

    std::string to_string(AlphaRegime r);
    AlphaRegime parse_alpha_regime(const std::string &s);

    // Static system parameters. Defaults reproduce the reference scenario: 28 GHz carrier,
    // 5.76 MHz subbands, K = 4, L = 70 clusters in a 25 m cell, O = 4, 10 deg angular spreads,
    // 2 m correlation distance, 1 m probe lattice, half-wavelength arrays.
    struct Params
    {
        int n_tx = 16;                       // N, cross-polarized antenna pairs at the gNB (2N ports)
        int n_rx = 1;                        // UE antennas
        int oversampling = 4;                // O
        int subbands = 4;                    // K
        int clusters = 70;                   // L
        double radius_m = 25.0;              // R
        double carrier_hz = 28e9;            // f_c
        double subband_spacing_hz = 5.76e6;  // Delta_f
        double c_asd_rad = deg2rad(10.0);
        double c_asa_rad = deg2rad(10.0);
        double d_over_lambda = 0.5;          // gNB spacing, relative to the carrier wavelength
        double dbar_over_lambda = 0.5;       // UE spacing, relative to the carrier wavelength
        double corr_distance_m = 2.0;        // d_S
        double lattice_spacing_m = 1.0;      // L_S
        double estimation_noise_std = 0.0;   // sigma, channel-estimate noise
        double receiver_noise_std = 1.0;     // sigma_v
        double path_loss_norm = 1.0;         // A_PL
        double sampling_period_s = 0.0;      // T_S; 0 selects 1/(K Delta_f)
        int grid_x = 100;                    // field grid counts G_x, G_y
        int grid_y = 100;
        double grid_extent = 1.2;            // field grid covers grid_extent * R
        AlphaRegime alpha_regime = AlphaRegime::frozen;
        std::uint64_t seed = 1;

        int beams() const { return n_tx * oversampling; } // NO
        double effective_sampling_period() const
        {
            return sampling_period_s > 0.0 ? sampling_period_s : 1.0 / (subbands * subband_spacing_hz);
        }
        double antenna_spacing_m() const { return d_over_lambda * speed_of_light / carrier_hz; }
        double ue_antenna_spacing_m() const { return dbar_over_lambda * speed_of_light / carrier_hz; }

        // Throws ConfigError naming the first offending field.
        void validate() const;
    };

    // Sets one parameter from its textual key=value form. Angles are given in degrees
    // (keys c_asd_deg, c_asa_deg). Returns false if the key is not a Params key.
    bool apply_param(Params &p, const std::string &key, const std::string &value);

    // All parameter keys and their current values, in a stable order.
    std::vector<std::pair<std::string, std::string>> param_entries(const Params &p);

    // Flat key=value text. '#' starts a comment, blank lines are skipped. Duplicate keys
    // and malformed lines raise ConfigError with the line number.
    struct KeyValueEntry
    {
        std::string value;
        int line = 0;
    };
    using KeyValueMap = std::map<std::string, KeyValueEntry>;
    KeyValueMap parse_key_values(const std::string &text, const std::string &source_name = "config");
    KeyValueMap read_key_value_file(const std::string &path);

    // Numeric parsing with diagnostics naming the key.
    double parse_double(const std::string &key, const std::string &value);
    long long parse_int(const std::string &key, const std::string &value);
    std::vector<double> parse_double_list(const std::string &key, const std::string &value);
    std::vector<int> parse_int_list(const std::string &key, const std::string &value);

    std::string format_double(double v);

} // namespace pfloc

#endif
