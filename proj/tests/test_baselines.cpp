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

#include "pfloc/baselines.hpp"

#include <doctest.h>

#include <random>

using namespace pfloc;

TEST_CASE("ToA least squares recovers the position from exact ranges")
{
    Rng rng = derive_stream(1, "toa");
    for (int t = 0; t < 100; ++t)
    {
        ToaSetup s;
        s.receivers = place_receivers(rng, 25.0);
        const Vec2 p = uniform_in_disk(rng, 25.0);
        for (int r = 0; r < 3; ++r)
            s.toa[r] = distance(p, s.receivers[r]) / speed_of_light;
        const Vec2 e = toa_localize(s, 25.0);
        CHECK(distance(e, p) < 1e-6);
    }
}

TEST_CASE("ToA estimate is clamped to the disk and degenerate layouts fall back to the centre")
{
    ToaSetup s;
    s.receivers = {Vec2{-1.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
    const Vec2 far{30.0, 0.0};
    for (int r = 0; r < 3; ++r)
        s.toa[r] = distance(far, s.receivers[r]) / speed_of_light;
    const Vec2 e = toa_localize(s, 25.0);
    CHECK(norm(e) == doctest::Approx(25.0));
    s.receivers = {Vec2{1.0, 1.0}, Vec2{1.0, 1.0}, Vec2{2.0, 0.0}};
    CHECK(toa_localize(s, 25.0) == Vec2{0.0, 0.0});
}

TEST_CASE("ToA measurement takes the shortest cluster path")
{
    std::vector<Cluster> c{{{3.0, 0.0}, {}}, {{0.0, 10.0}, {}}};
    const Receivers r{Vec2{0.0, 0.0}, Vec2{6.0, 0.0}, Vec2{0.0, 12.0}};
    const auto t = toa_measure({0.0, 4.0}, r, c);
    CHECK(t[0] * speed_of_light == doctest::Approx(5.0 + 3.0));
    CHECK(t[1] * speed_of_light == doctest::Approx(5.0 + 3.0));
    CHECK(t[2] * speed_of_light == doctest::Approx(6.0 + 2.0));
}

TEST_CASE("receiver placement")
{
    CHECK_FALSE(receivers_well_separated({Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{2.0, 0.0}}));
    CHECK(receivers_well_separated({Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}}));
    // nearly all uniform triples are accepted
    Rng rng = derive_stream(2, "rx");
    int ok = 0;
    for (int t = 0; t < 5000; ++t)
        ok += receivers_well_separated({uniform_in_disk(rng, 25.0), uniform_in_disk(rng, 25.0), uniform_in_disk(rng, 25.0)});
    CHECK(ok > 0.95 * 5000);
}

TEST_CASE("TRRS properties")
{
    Rng rng = derive_stream(3, "trrs");
    std::normal_distribution<double> g;
    auto random_matrix = [&](int rows, int cols)
    {
        CMatrix m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m(i) = {g(rng), g(rng)};
        return m;
    };
    const CMatrix a = random_matrix(2, 8), b = random_matrix(2, 8);
    CHECK(trrs(a, a) == doctest::Approx(1.0));
    const double s = trrs(a, b);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(trrs(b, a) == doctest::Approx(s));
    CHECK(trrs(std::complex<double>(0.0, 2.0) * a, b) == doctest::Approx(s));

    // one antenna: the 1 x 2N row is reshaped to 2 x N
    const CMatrix x = random_matrix(1, 8), y = random_matrix(1, 8);
    const CMatrix xr = (CMatrix(2, 4) << x.leftCols(4), x.rightCols(4)).finished();
    const CMatrix yr = (CMatrix(2, 4) << y.leftCols(4), y.rightCols(4)).finished();
    const double ref = (xr * yr.adjoint()).squaredNorm() / (xr.squaredNorm() * yr.squaredNorm());
    CHECK(trrs(x, y) == doctest::Approx(ref));
    CHECK_THROWS(trrs(a, x));
}

TEST_CASE("TRRS ignores the co-phasing angle of a channel")
{
    Params p;
    p.n_tx = 4;
    p.clusters = 8;
    p.subbands = 2;
    p.grid_x = p.grid_y = 40;
    const Scenario sc(p);
    const Vec2 pos{4.0, 7.0};
    const SiteChannel site(sc, pos, frozen_perturbations(sc, pos));
    CHECK(trrs(site.realize(0.0, 0.0), site.realize(1.3, 0.0)) == doctest::Approx(1.0));
}

TEST_CASE("fingerprint database finds noiseless probes")
{
    Params p;
    p.n_tx = 4;
    p.clusters = 12;
    p.subbands = 2;
    p.radius_m = 6.0;
    p.grid_x = p.grid_y = 40;
    const Scenario sc(p);
    const auto lat = probe_lattice(p);
    const FingerprintDb db(sc, lat);
    CHECK(db.size() == lat.points.size());
    for (std::size_t s = 0; s < lat.points.size(); s += 7)
    {
        const auto &pos = lat.points[s];
        const SiteChannel site(sc, pos, frozen_perturbations(sc, pos));
        const auto e = db.localize(site.realize(2.0, 0.0));
        CHECK(e.position == pos);
        CHECK(db.best_score(site.realize(2.0, 0.0)) == doctest::Approx(1.0));
    }
}

TEST_CASE("baseline runners")
{
    AttackRun run;
    run.trials = 20000;
    run.victims = VictimSampling::continuous;
    CHECK(run_cid(run, 25.0, {}).rmse == doctest::Approx(25.0 / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("TRRS of a multi-antenna channel with itself is one")
{
    Params p;
    p.n_tx = 4;
    p.n_rx = 2;
    p.clusters = 8;
    p.subbands = 1;
    p.grid_x = p.grid_y = 40;
    const Scenario sc(p);
    const Vec2 pos{-3.0, 2.0};
    const SiteChannel site(sc, pos, frozen_perturbations(sc, pos));
    const auto h = site.realize(0.4, 0.9);
    CHECK(trrs(h, h) == doctest::Approx(1.0));
    CHECK(trrs(h, site.realize(2.2, 0.9)) == doctest::Approx(1.0));
    CHECK(trrs(h, site.realize(0.4, 2.0)) < 1.0);
}
