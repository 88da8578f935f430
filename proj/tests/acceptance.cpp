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

// Acceptance suite: one PASS/FAIL line per criterion. Arguments select criteria by number;
// without arguments all run. Exit status is nonzero when any selected criterion fails.

#include "pfloc/runner.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdarg>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>

using namespace pfloc;

namespace
{
    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    std::string fmt(const char *f, ...) __attribute__((format(printf, 1, 2)));
    std::string fmt(const char *f, ...)
    {
        char buf[1024];
        va_list ap;
        va_start(ap, f);
        std::vsnprintf(buf, sizeof buf, f, ap);
        va_end(ap);
        return buf;
    }

    // Scenario draws pooled for the simulation criteria (seeds 1..4).
    constexpr int pooled_scenarios = 4;

    ExperimentConfig sim_config(int trials_per_scenario)
    {
        ExperimentConfig c;
        c.trials = trials_per_scenario;
        c.samples_per_position = 10;
        c.scenarios = pooled_scenarios;
        c.victims = VictimSampling::lattice;
        c.threads = default_threads();
        return c;
    }

    Outcome criterion1()
    {
        AttackRun run;
        run.trials = 100000;
        run.victims = VictimSampling::continuous;
        const auto r = run_cid(run, 25.0, {});
        const double target = 17.678;
        const double rel = std::abs(r.rmse - target) / target;
        return {rel < 0.01, fmt("CID RMSE %.4f m vs %.3f m, rel. dev %.4f (tol 0.01)", r.rmse, target, rel)};
    }

    Outcome criterion2()
    {
        const double inf = rmse_infinity(25.0, 70);
        bool ok = std::abs(inf - 2.1129) < 5e-5;
        double worst = 0.0;
        for (int N : {1, 2, 4, 8, 16, 32})
            worst = std::max(worst, std::abs(rmse_fit(25.0, 70, N, 4, 0, 9.0) - rmse_zero(25.0)));
        ok = ok && worst <= 0.02;
        return {ok, fmt("rmse_infinity(25,70) = %.6f m (expect 2.1129), max |fit(K=0) - rmse_zero| = %.2e m", inf, worst)};
    }

    Outcome criterion3()
    {
        double worst = 0.0;
        const int draws = 100000;
        for (int N : {2, 16})
        {
            Params p;
            p.n_tx = N;
            p.oversampling = 4;
            Rng rng = derive_stream(3, "acceptance-geometry", {std::uint64_t(N)});
            const Codebook cb(N, 4);
            for (int g = 0; g < 20; ++g)
            {
                const Vec2 q = uniform_in_disk(rng, p.radius_m);
                const int k = int(rng() % std::uint64_t(p.subbands));
                const double phi = std::atan2(q.y, q.x);
                const auto x = feedback_probabilities(phi, k, p);
                std::vector<double> hist(std::size_t(p.beams()), 0.0);
                for (int t = 0; t < draws; ++t)
                {
                    const double alpha = uniform(rng, -1.0, 1.0);
                    const CVector a = gnb_steering(departure_angle(q, alpha, p), k, p);
                    Eigen::Index m = 0;
                    (cb.beam_matrix().adjoint() * a).cwiseAbs2().maxCoeff(&m);
                    hist[std::size_t(m)] += 1.0 / draws;
                }
                double tv = 0.0;
                for (int i = 0; i < p.beams(); ++i)
                    tv += 0.5 * std::abs(hist[i] - x[i]);
                worst = std::max(worst, tv);
            }
        }
        return {worst < 0.01, fmt("max total variation %.4f over 40 geometries (tol 0.01)", worst)};
    }

    Outcome criterion4()
    {
        const int N = 2, O = 4;
        const Codebook cb(N, O);
        Rng rng = derive_stream(4, "acceptance-codebook");
        int mismatches = 0, roundtrip_failures = 0, coincidence_failures = 0;
        for (int t = 0; t < 100; ++t)
        {
            const int K = 1 + t % 3;
            const int nrx = 1 + (t / 3) % 2;
            const auto h = oracle::random_channel(rng, K, nrx, N);
            const auto rates = rate_tables(h, cb, 1.0);
            for (auto mode : {FeedbackMode::mode1, FeedbackMode::mode2, FeedbackMode::mode3})
            {
                auto s = select(mode, rates);
                const auto b = oracle::brute_force(mode, h, N, O);
                if (s.beam != b.beam || s.n != b.n || std::abs(s.rate - b.rate) > 1e-9 * b.rate ||
                    (mode != FeedbackMode::mode3 && s.m != b.m))
                    ++mismatches;
                const auto f = encode_feedback(s, cb.beams());
                s.rate = 0.0;
                if (!(decode_feedback(f.bits(), mode, cb.beams(), K) == s))
                    ++roundtrip_failures;
            }
            if (K == 1)
            {
                const auto a = select_mode1(rates), b = select_mode2(rates), c = select_mode3(rates);
                if (a.beam != c.beam || b.beam != c.beam)
                    ++coincidence_failures;
            }
        }
        double worst_norm = 0.0;
        for (int m = 0; m < N * O; ++m)
            for (int n = 0; n < 4; ++n)
                worst_norm = std::max(worst_norm, std::abs(codebook_vector(m, n, N, O).w.squaredNorm() - 2.0));
        const bool ok = mismatches == 0 && roundtrip_failures == 0 && coincidence_failures == 0 && worst_norm < 1e-12;
        return {ok, fmt("%d selection mismatches, %d round-trip failures, %d K=1 disagreements, max | ||w||^2 - 2 | = %.1e",
                        mismatches, roundtrip_failures, coincidence_failures, worst_norm)};
    }

    // Shared by criteria 5 to 7. Criterion 5 is a single scenario with 2000 victims.
    std::vector<RmseReport> rmse_vs_k(FeedbackMode mode, const std::vector<int> &ks, int scenarios)
    {
        auto c = sim_config(2000);
        c.scenarios = scenarios;
        std::vector<RmseReport> out;
        for (int K : ks)
        {
            Params p;
            p.n_tx = 16;
            p.n_rx = 1;
            p.subbands = K;
            out.push_back(pf_attack_point(p, mode, 1, std::nullopt, c));
        }
        return out;
    }

    std::string list(const std::vector<int> &ks, const std::vector<RmseReport> &r)
    {
        std::string s;
        for (std::size_t i = 0; i < ks.size(); ++i)
            s += fmt("%sK=%d %.3f+-%.3f", i ? ", " : "", ks[i], r[i].rmse, r[i].ci95);
        return s;
    }

    Outcome criterion5()
    {
        const std::vector<int> ks{1, 2, 4, 8};
        const auto r = rmse_vs_k(FeedbackMode::mode1, ks, 1);
        double mean = 0.0;
        for (const auto &x : r)
            mean += x.rmse / double(r.size());
        bool ok = true;
        double worst = 0.0;
        for (const auto &x : r)
        {
            worst = std::max(worst, std::abs(x.rmse - mean) / x.ci95);
            ok = ok && std::abs(x.rmse - mean) <= x.ci95;
        }
        return {ok, fmt("mode 1 RMSE %s m; mean %.3f m, max |dev|/CI = %.2f (tol 1)", list(ks, r).c_str(), mean, worst)};
    }

    std::vector<RmseReport> mode2_runs;
    const std::vector<int> mode2_ks{1, 2, 4, 8, 10};

    const std::vector<RmseReport> &mode2_sweep()
    {
        if (mode2_runs.empty())
            mode2_runs = rmse_vs_k(FeedbackMode::mode2, mode2_ks, pooled_scenarios);
        return mode2_runs;
    }

    Outcome criterion6()
    {
        const auto &r = mode2_sweep();
        bool decreasing = true;
        for (std::size_t i = 1; i < r.size(); ++i)
            decreasing = decreasing && r[i].rmse < r[i - 1].rmse;
        const bool separated = r.front().rmse - r.front().ci95 > r.back().rmse + r.back().ci95;
        const bool accurate = r.back().rmse < 1.0;
        return {decreasing && separated && accurate,
                fmt("mode 2 RMSE %s m; K=10 below 1 m: %s, strictly decreasing: %s, CI-separated endpoints: %s",
                    list(mode2_ks, r).c_str(), accurate ? "yes" : "no", decreasing ? "yes" : "no",
                    separated ? "yes" : "no")};
    }

    Outcome criterion7()
    {
        const auto &r = mode2_sweep();
        const auto &k4 = r[2];
        const double p = k4.ccdf(10.0);
        return {p < 0.20, fmt("P(error > 10 m) = %.4f at K=4 over %zu trials (tol < 0.20)", p, k4.trials)};
    }

    Outcome criterion8()
    {
        std::string detail;
        bool ok = true;
        // restricted simulator against the analysis on the same cluster draws
        for (int K : {1, 2, 3})
        {
            Params p;
            p.n_tx = 2;
            p.n_rx = 1;
            p.subbands = K;
            p.alpha_regime = AlphaRegime::redraw;
            p.corr_distance_m = 0.0;
            std::vector<RmseReport> sims;
            double mse = 0.0;
            for (int s = 0; s < pooled_scenarios; ++s)
            {
                Params ps = p;
                ps.seed = p.seed + std::uint64_t(s);
                const Scenario sc(ps);
                ObservationModel model;
                model.mode = FeedbackMode::mode3;
                model.fixed_mu = pi / 4.0;
                model.fixed_orientation = 0.0;
                model.single_cluster = true;
                const Observer obs(sc, model);
                const auto map = build_map(obs, probe_lattice(ps), 10, ps.seed, default_threads());
                AttackRun run;
                run.trials = 4000;
                run.seed = ps.seed;
                run.threads = default_threads();
                sims.push_back(run_attack(obs, map, run));
                mse += conditional_mse(sc.clusters(), ps) / pooled_scenarios;
            }
            const double sim = pool_reports(sims).rmse;
            const double ana = std::sqrt(mse);
            const double rel = std::abs(ana - sim) / sim;
            ok = ok && rel < 0.15;
            detail += fmt("N=2 K=%d analytic %.3f sim %.3f rel %.3f; ", K, ana, sim, rel);
        }
        // closed-form fit against the analysis averaged over cluster draws
        double worst = 0.0;
        for (int N : {2, 16})
            for (int K : {0, 1, 2, 3})
            {
                AnalysisConfig a;
                a.params.n_tx = N;
                a.params.subbands = K;
                a.cluster_draws = 200;
                a.threads = default_threads();
                const double ana = analytical_mse(a).rmse;
                const double fit = rmse_fit(25.0, 70, N, 4, K, 9.0);
                worst = std::max(worst, std::abs(fit - ana) / ana);
            }
        ok = ok && worst <= 0.25;
        detail += fmt("fit vs analysis max rel %.3f (tol 0.25)", worst);
        return {ok, detail};
    }

    Outcome criterion9()
    {
        Params p;
        const Scenario sc(p);
        const auto lattice = probe_lattice(p);
        AttackRun run;
        run.trials = 2000;
        run.victims = VictimSampling::continuous;
        run.threads = default_threads();
        const auto toa = run_toa(sc, run, lattice.points);

        Params p2 = p;
        p2.subbands = 2;
        const Scenario sc2(p2);
        const FingerprintDb db(sc2, lattice, default_threads());
        const auto rfpm = run_rfpm(sc2, db, run);

        Params p10 = p;
        p10.subbands = 10;
        auto c = sim_config(2000);
        c.scenarios = 1;
        const auto pf = pf_attack_point(p10, FeedbackMode::mode3, 1, std::nullopt, c);

        const bool ok = toa.rmse >= 1.0 && toa.rmse <= 10.0 && pf.rmse < toa.rmse && rfpm.rmse >= 0.3 && rfpm.rmse <= 3.0;
        return {ok, fmt("ToA %.3f m (in [1,10]), PF mode 3 K=10 %.3f m (< ToA), RFPM K=2 %.3f m (in [0.3,3])", toa.rmse,
                        pf.rmse, rfpm.rmse)};
    }

    Outcome criterion10()
    {
        const auto c = sim_config(2000);
        Params p;
        p.n_tx = 16;
        p.subbands = 4;
        std::vector<RmseReport> r;
        for (int U : {1, 2, 4})
            r.push_back(pf_attack_point(p, FeedbackMode::mode2, U, std::nullopt, c));
        const double ratio = r[1].rmse / r[0].rmse;
        const double rate2 = r[1].mean_rate / r[0].mean_rate, rate4 = r[2].mean_rate / r[0].mean_rate;
        const bool ok = ratio >= 1.5 && rate2 >= 0.95 && rate4 >= 0.95;
        return {ok, fmt("RMSE U=1/2/4 = %.3f/%.3f/%.3f m, RMSE(U=2)/RMSE(U=1) = %.3f (tol >= 1.5), rate ratios U=2 %.4f, "
                        "U=4 %.4f (tol >= 0.95)",
                        r[0].rmse, r[1].rmse, r[2].rmse, ratio, rate2, rate4)};
    }

    Outcome criterion11()
    {
        Params p;
        p.corr_distance_m = 2.0;
        Rng rng = derive_stream(11, "acceptance-field");
        std::vector<double> values;
        double sxy = 0.0, sxx = 0.0, syy = 0.0, sx = 0.0, sy = 0.0;
        int n = 0;
        for (int f = 0; f < 400; ++f)
        {
            const auto field = build_alpha_field(rng, p);
            for (int i = 0; i < 100; ++i)
            {
                const Vec2 a = uniform_in_disk(rng, p.radius_m - 2.0);
                const double ang = uniform(rng, 0.0, two_pi);
                const Vec2 b = a + Vec2{2.0 * std::cos(ang), 2.0 * std::sin(ang)};
                const double x = field(a), y = field(b);
                values.push_back(x);
                sx += x;
                sy += y;
                sxy += x * y;
                sxx += x * x;
                syy += y * y;
                ++n;
            }
        }
        std::sort(values.begin(), values.end());
        double ks = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            const double cdf = (values[i] + 1.0) / 2.0;
            ks = std::max({ks, std::abs(cdf - double(i) / values.size()), std::abs(cdf - double(i + 1) / values.size())});
        }
        const double cov = sxy / n - (sx / n) * (sy / n);
        const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
        const double target = std::exp(-0.5);
        const bool ok = ks < 0.05 && std::abs(corr - target) <= 0.1;
        return {ok, fmt("KS distance %.4f (tol 0.05), correlation at 2 m %.4f vs %.4f (tol 0.1)", ks, corr, target)};
    }

    struct Criterion
    {
        int id;
        double budget_s;
        std::function<Outcome()> run;
    };
} // namespace

int main(int argc, char **argv)
{
    const std::vector<Criterion> criteria{
        {1, 5.0, criterion1},      {2, 1.0, criterion2},      {3, 30.0, criterion3},   {4, 60.0, criterion4},
        {5, 600.0, criterion5},    {6, 1800.0, criterion6},   {7, 1800.0, criterion7}, {8, 1200.0, criterion8},
        {9, 1200.0, criterion9},   {10, 900.0, criterion10},  {11, 60.0, criterion11},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto &c : criteria)
    {
        if (!selected.empty() && !selected.count(c.id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        if (!pass)
            ++failed;
        std::printf("criterion %2d: %s  %s [%.1f s, budget %.0f s%s]\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(),
                    secs, c.budget_s, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
