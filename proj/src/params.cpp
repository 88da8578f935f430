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

#include "pfloc/params.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pfloc
{
    std::string to_string(AlphaRegime r)
    {
        return r == AlphaRegime::frozen ? "frozen" : "redraw";
    }

    AlphaRegime parse_alpha_regime(const std::string &s)
    {
        if (s == "frozen")
            return AlphaRegime::frozen;
        if (s == "redraw")
            return AlphaRegime::redraw;
        throw ConfigError("alpha_regime must be 'frozen' or 'redraw', got '" + s + "'");
    }

    void Params::validate() const
    {
        auto require = [](bool ok, const char *what)
        {
            if (!ok)
                throw ConfigError(std::string("invalid parameter: ") + what);
        };
        require(n_tx >= 1, "N must be >= 1");
        require(n_rx >= 1, "Nbar must be >= 1");
        require(oversampling >= 1, "O must be >= 1");
        require(subbands >= 1, "K must be >= 1");
        require(clusters >= 1, "L must be >= 1");
        require(radius_m > 0.0, "R must be > 0");
        require(carrier_hz > 0.0, "f_c must be > 0");
        require(subband_spacing_hz >= 0.0, "Delta_f must be >= 0");
        require(carrier_hz - subband_spacing_hz * (subbands - 1) / 2.0 > 0.0, "lowest subband frequency must be > 0");
        require(c_asd_rad >= 0.0 && c_asa_rad >= 0.0, "angular spreads must be >= 0");
        require(d_over_lambda > 0.0 && dbar_over_lambda > 0.0, "antenna spacings must be > 0");
        require(corr_distance_m >= 0.0, "d_S must be >= 0");
        require(lattice_spacing_m > 0.0, "L_S must be > 0");
        require(estimation_noise_std >= 0.0, "sigma must be >= 0");
        require(receiver_noise_std > 0.0, "sigma_v must be > 0");
        require(path_loss_norm > 0.0, "A_PL must be > 0");
        require(sampling_period_s >= 0.0, "T_S must be >= 0");
        require(grid_x >= 2 && grid_y >= 2, "field grid counts must be >= 2");
        require(grid_extent >= 1.0, "grid extent factor must be >= 1 so the grid covers the cell");
    }

    double parse_double(const std::string &key, const std::string &value)
    {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || ptr != value.data() + value.size())
            throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
        return v;
    }

    long long parse_int(const std::string &key, const std::string &value)
    {
        long long v = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || ptr != value.data() + value.size())
            throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
        return v;
    }

    namespace
    {
        std::vector<std::string> split_list(const std::string &value)
        {
            std::vector<std::string> out;
            std::string item;
            std::istringstream in(value);
            while (std::getline(in, item, ','))
            {
                const auto b = item.find_first_not_of(" \t");
                const auto e = item.find_last_not_of(" \t");
                if (b == std::string::npos)
                    continue;
                out.push_back(item.substr(b, e - b + 1));
            }
            return out;
        }

        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }
    } // namespace

    std::vector<double> parse_double_list(const std::string &key, const std::string &value)
    {
        std::vector<double> out;
        for (const auto &s : split_list(value))
            out.push_back(parse_double(key, s));
        if (out.empty())
            throw ConfigError("key '" + key + "': empty list");
        return out;
    }

    std::vector<int> parse_int_list(const std::string &key, const std::string &value)
    {
        std::vector<int> out;
        for (const auto &s : split_list(value))
            out.push_back(static_cast<int>(parse_int(key, s)));
        if (out.empty())
            throw ConfigError("key '" + key + "': empty list");
        return out;
    }

    std::string format_double(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    bool apply_param(Params &p, const std::string &key, const std::string &value)
    {
        auto as_int = [&] { return static_cast<int>(parse_int(key, value)); };
        auto as_double = [&] { return parse_double(key, value); };

        if (key == "N")
            p.n_tx = as_int();
        else if (key == "Nbar")
            p.n_rx = as_int();
        else if (key == "O")
            p.oversampling = as_int();
        else if (key == "K")
            p.subbands = as_int();
        else if (key == "L")
            p.clusters = as_int();
        else if (key == "R")
            p.radius_m = as_double();
        else if (key == "f_c")
            p.carrier_hz = as_double();
        else if (key == "delta_f")
            p.subband_spacing_hz = as_double();
        else if (key == "c_asd_deg")
            p.c_asd_rad = deg2rad(as_double());
        else if (key == "c_asa_deg")
            p.c_asa_rad = deg2rad(as_double());
        else if (key == "d_over_lambda")
            p.d_over_lambda = as_double();
        else if (key == "dbar_over_lambda")
            p.dbar_over_lambda = as_double();
        else if (key == "d_s")
            p.corr_distance_m = as_double();
        else if (key == "lattice_spacing")
            p.lattice_spacing_m = as_double();
        else if (key == "sigma")
            p.estimation_noise_std = as_double();
        else if (key == "sigma_v")
            p.receiver_noise_std = as_double();
        else if (key == "a_pl")
            p.path_loss_norm = as_double();
        else if (key == "t_s")
            p.sampling_period_s = as_double();
        else if (key == "grid_x")
            p.grid_x = as_int();
        else if (key == "grid_y")
            p.grid_y = as_int();
        else if (key == "grid_extent")
            p.grid_extent = as_double();
        else if (key == "alpha_regime")
            p.alpha_regime = parse_alpha_regime(value);
        else if (key == "seed")
            p.seed = static_cast<std::uint64_t>(parse_int(key, value));
        else
            return false;
        return true;
    }

    std::vector<std::pair<std::string, std::string>> param_entries(const Params &p)
    {
        return {
            {"N", std::to_string(p.n_tx)},
            {"Nbar", std::to_string(p.n_rx)},
            {"O", std::to_string(p.oversampling)},
            {"K", std::to_string(p.subbands)},
            {"L", std::to_string(p.clusters)},
            {"R", format_double(p.radius_m)},
            {"f_c", format_double(p.carrier_hz)},
            {"delta_f", format_double(p.subband_spacing_hz)},
            {"c_asd_deg", format_double(p.c_asd_rad * 180.0 / pi)},
            {"c_asa_deg", format_double(p.c_asa_rad * 180.0 / pi)},
            {"d_over_lambda", format_double(p.d_over_lambda)},
            {"dbar_over_lambda", format_double(p.dbar_over_lambda)},
            {"d_s", format_double(p.corr_distance_m)},
            {"lattice_spacing", format_double(p.lattice_spacing_m)},
            {"sigma", format_double(p.estimation_noise_std)},
            {"sigma_v", format_double(p.receiver_noise_std)},
            {"a_pl", format_double(p.path_loss_norm)},
            {"t_s", format_double(p.sampling_period_s)},
            {"grid_x", std::to_string(p.grid_x)},
            {"grid_y", std::to_string(p.grid_y)},
            {"grid_extent", format_double(p.grid_extent)},
            {"alpha_regime", to_string(p.alpha_regime)},
            {"seed", std::to_string(p.seed)},
        };
    }

    KeyValueMap parse_key_values(const std::string &text, const std::string &source_name)
    {
        KeyValueMap out;
        std::istringstream in(text);
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw))
        {
            ++line_no;
            const auto hash = raw.find('#');
            const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(source_name + ":" + std::to_string(line_no) + ": expected key=value, got '" + line + "'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(source_name + ":" + std::to_string(line_no) + ": empty key");
            if (out.count(key))
                throw ConfigError(source_name + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                                  "' (first set on line " + std::to_string(out[key].line) + ")");
            out[key] = {value, line_no};
        }
        return out;
    }

    KeyValueMap read_key_value_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_key_values(ss.str(), path);
    }

} // namespace pfloc
