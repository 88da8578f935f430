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

#include "oracles.hpp"

#include <doctest.h>

#include <map>
#include <numeric>

using namespace pfloc;
using pfloc::oracle::argmax_beam;

namespace
{
    // Midpoint quadrature points of the disk.
    std::vector<Vec2> grid(double R, double h)
    {
        std::vector<Vec2> out;
        const int n = int(std::ceil(R / h));
        for (int iy = -n; iy < n; ++iy)
            for (int ix = -n; ix < n; ++ix)
            {
                const Vec2 p{(ix + 0.5) * h, (iy + 0.5) * h};
                if (norm(p) <= R)
                    out.push_back(p);
            }
        return out;
    }
} // namespace

TEST_CASE("quantized beam is the codebook argmax")
{
    Params p;
    for (int N : {2, 16})
    {
        p.n_tx = N;
        Rng rng = derive_stream(N, "qb");
        for (int t = 0; t < 300; ++t)
        {
            const double phi = uniform(rng, -pi, pi);
            CHECK(quantized_beam(phi, t % p.subbands, p) == argmax_beam(phi, t % p.subbands, p));
        }
    }
}

TEST_CASE("feedback probabilities")
{
    Params p;
    p.n_tx = 2;
    for (double phi : {0.0, 0.3, -1.1, 1.5, 2.8})
    {
        const auto x = feedback_probabilities(phi, 1, p);
        REQUIRE(int(x.size()) == p.beams());
        CHECK(std::accumulate(x.begin(), x.end(), 0.0) == doctest::Approx(1.0));
        for (double v : x)
            CHECK(v >= 0.0);
        // mirror symmetry: phi -> -phi maps beam i to -i mod NO
        const auto y = feedback_probabilities(-phi, 1, p);
        for (int i = 0; i < p.beams(); ++i)
            CHECK(y[(p.beams() - i) % p.beams()] == doctest::Approx(x[i]));
    }
    p.c_asd_rad = 0.0;
    const auto x = feedback_probabilities(0.4, 0, p);
    CHECK(x[quantized_beam(0.4, 0, p)] == 1.0);
    CHECK(std::accumulate(x.begin(), x.end(), 0.0) == 1.0);
}

TEST_CASE("feedback probabilities match sampling of the perturbation")
{
    Params p;
    p.n_tx = 16;
    Rng rng = derive_stream(3, "fp");
    const double phi = 0.7;
    const auto x = feedback_probabilities(phi, 0, p);
    std::vector<double> h(p.beams(), 0.0);
    const int n = 40000;
    for (int t = 0; t < n; ++t)
        h[argmax_beam(phi + p.c_asd_rad * uniform(rng, -1.0, 1.0), 0, p)] += 1.0 / n;
    double tv = 0.0;
    for (int i = 0; i < p.beams(); ++i)
        tv += 0.5 * std::abs(h[i] - x[i]);
    CHECK(tv < 0.02);
}

TEST_CASE("joint PMF layout and budget")
{
    const std::vector<std::vector<double>> x{{0.5, 0.5, 0.0}, {0.1, 0.2, 0.7}};
    const auto y = joint_pmf(x);
    REQUIRE(y.size() == 9);
    for (int b0 = 0; b0 < 3; ++b0)
        for (int b1 = 0; b1 < 3; ++b1)
            CHECK(y[b0 + 3 * b1] == doctest::Approx(x[0][b0] * x[1][b1]));
    CHECK(std::accumulate(y.begin(), y.end(), 0.0) == doctest::Approx(1.0));
    CHECK(joint_pmf({}) == std::vector<double>{1.0});
    CHECK_THROWS_AS(joint_pmf(x, 8), BudgetError);
}

TEST_CASE("conditional MSE anchors")
{
    Params p;
    p.n_tx = 2;
    p.radius_m = 6.0;
    p.clusters = 1;
    p.subbands = 2;
    Rng rng = derive_stream(1, "cm");
    const auto clusters = generate_clusters(rng, p);
    const QuadratureConfig q{0.25, default_pmf_budget};
    // one cluster: the feedback carries no position information
    const auto pts = grid(p.radius_m, 0.25);
    double s2 = 0.0, sx = 0.0, sy = 0.0;
    for (auto v : pts)
    {
        s2 += dot(v, v);
        sx += v.x;
        sy += v.y;
    }
    const double n = double(pts.size());
    const double spread = s2 / n - (sx * sx + sy * sy) / (n * n);
    CHECK(conditional_mse(clusters, p, q) == doctest::Approx(spread).epsilon(1e-9));
    CHECK(spread == doctest::Approx(p.radius_m * p.radius_m / 2.0).epsilon(0.02));

    Params p0 = p;
    p0.subbands = 0;
    CHECK(conditional_mse(clusters, p0, q) == doctest::Approx(18.0));
}

TEST_CASE("conditional MSE equals the within-cell variance for deterministic feedback")
{
    Params p;
    p.n_tx = 2;
    p.radius_m = 10.0;
    p.clusters = 9;
    p.subbands = 2;
    p.c_asd_rad = 0.0;
    Rng rng = derive_stream(2, "cm");
    const auto clusters = generate_clusters(rng, p);
    const auto pts = grid(p.radius_m, 0.5);
    std::map<std::vector<int>, std::vector<Vec2>> cells;
    for (auto v : pts)
    {
        std::vector<int> b;
        for (int k = 0; k < p.subbands; ++k)
        {
            const auto &q = clusters[strongest_cluster(v, clusters, k)].position;
            b.push_back(argmax_beam(std::atan2(q.y, q.x), k, p));
        }
        cells[b].push_back(v);
    }
    double se = 0.0;
    for (const auto &[b, members] : cells)
    {
        Vec2 c{0.0, 0.0};
        for (auto v : members)
            c = c + v;
        c = (1.0 / members.size()) * c;
        for (auto v : members)
            se += dot(v - c, v - c);
    }
    CHECK(conditional_mse(clusters, p, {0.5, default_pmf_budget}) == doctest::Approx(se / pts.size()).epsilon(1e-9));
}

TEST_CASE("closed-form anchors")
{
    CHECK(rmse_zero(25.0) == doctest::Approx(17.67767).epsilon(1e-6));
    CHECK(rmse_infinity(25.0, 70) == doctest::Approx(2.1129).epsilon(1e-4));
    for (int N : {2, 16})
        CHECK(rmse_fit(25.0, 70, N, 4, 0, 9.0) == doctest::Approx(rmse_zero(25.0)).epsilon(0.02 / 17.7));
    // decreasing in K towards rmse_infinity
    CHECK(rmse_fit(25.0, 70, 16, 4, 50, 9.0) == doctest::Approx(rmse_infinity(25.0, 70)).epsilon(0.01));
    CHECK(rmse_fit(25.0, 70, 16, 4, 3, 9.0) < rmse_fit(25.0, 70, 16, 4, 2, 9.0));
    CHECK_THROWS_AS(rmse_infinity(25.0, 0), ConfigError);
}

TEST_CASE("analytical MSE")
{
    AnalysisConfig a;
    a.params.n_tx = 2;
    a.params.subbands = 0;
    CHECK(analytical_mse(a).rmse == doctest::Approx(rmse_zero(25.0)));
    a.params.subbands = 1;
    a.params.radius_m = 10.0;
    a.params.clusters = 11;
    a.cluster_draws = 6;
    a.quadrature.grid_spacing = 0.5;
    const auto r1 = analytical_mse(a);
    a.threads = 3;
    const auto r2 = analytical_mse(a);
    CHECK(r1.mse == r2.mse);
    CHECK(r1.rmse < rmse_zero(10.0));
    CHECK(r1.rmse > rmse_infinity(10.0, 11));
    CHECK(r1.mc_stderr > 0.0);

    a.params.n_tx = 16;
    a.params.subbands = 5;
    CHECK_THROWS_AS(analytical_mse(a), BudgetError);
}
