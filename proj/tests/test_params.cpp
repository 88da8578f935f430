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

#include <doctest.h>

using namespace pfloc;

TEST_CASE("reference parameters")
{
    const Params p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.beams() == 64);
    CHECK(p.clusters == 70);
    CHECK(p.radius_m == 25.0);
    CHECK(p.subbands == 4);
    // T_S = 1/(K Delta_f)
    CHECK(p.effective_sampling_period() == doctest::Approx(1.0 / (4 * 5.76e6)));
    // half wavelength at 28 GHz
    CHECK(p.antenna_spacing_m() == doctest::Approx(speed_of_light / 28e9 / 2.0));
    CHECK(p.c_asd_rad == doctest::Approx(pi / 18.0));
}

TEST_CASE("validation names the offending field")
{
    auto fails_with = [](auto mutate, const char *needle)
    {
        Params p;
        mutate(p);
        try
        {
            p.validate();
            FAIL("expected ConfigError");
        }
        catch (const ConfigError &e)
        {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    fails_with([](Params &p) { p.n_tx = 0; }, "N");
    fails_with([](Params &p) { p.subbands = 0; }, "K");
    fails_with([](Params &p) { p.radius_m = -1.0; }, "R");
    fails_with([](Params &p) { p.receiver_noise_std = 0.0; }, "sigma_v");
    fails_with([](Params &p) { p.grid_x = 1; }, "grid");
    fails_with([](Params &p) { p.lattice_spacing_m = 0.0; }, "L_S");
}

TEST_CASE("apply_param and param_entries round trip")
{
    Params p;
    CHECK(apply_param(p, "N", "2"));
    CHECK(apply_param(p, "c_asd_deg", "20"));
    CHECK(apply_param(p, "alpha_regime", "redraw"));
    CHECK(apply_param(p, "seed", "99"));
    CHECK_FALSE(apply_param(p, "no_such_key", "1"));
    CHECK_THROWS_AS(apply_param(p, "N", "two"), ConfigError);
    CHECK_THROWS_AS(apply_param(p, "alpha_regime", "sometimes"), ConfigError);
    CHECK(p.n_tx == 2);
    CHECK(p.c_asd_rad == doctest::Approx(deg2rad(20.0)));
    CHECK(p.alpha_regime == AlphaRegime::redraw);

    Params q;
    for (const auto &[k, v] : param_entries(p))
        REQUIRE(apply_param(q, k, v));
    CHECK(param_entries(q) == param_entries(p));
}

TEST_CASE("key=value parsing")
{
    const auto kv = parse_key_values("# comment\n\nN = 2   # inline\nK=3\n", "cfg");
    CHECK(kv.size() == 2);
    CHECK(kv.at("N").value == "2");
    CHECK(kv.at("N").line == 3);
    CHECK(kv.at("K").line == 4);

    try
    {
        parse_key_values("N=2\nK\n", "cfg");
        FAIL("expected ConfigError");
    }
    catch (const ConfigError &e)
    {
        CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_key_values("N=2\nN=3\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_values("=3\n"), ConfigError);
    CHECK_THROWS_AS(read_key_value_file("/nonexistent/config.txt"), ConfigError);
}

TEST_CASE("list parsing")
{
    CHECK(parse_int_list("k", "1, 2,4") == std::vector<int>{1, 2, 4});
    CHECK(parse_double_list("r", "15,25.5") == std::vector<double>{15.0, 25.5});
    CHECK_THROWS_AS(parse_int_list("k", ""), ConfigError);
    CHECK_THROWS_AS(parse_int_list("k", "1,x"), ConfigError);
    CHECK_THROWS_AS(parse_double("x", "1.5abc"), ConfigError);
    CHECK(parse_int("x", "-3") == -3);
}
