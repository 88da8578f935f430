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

#include <limits>

namespace pfloc
{
    Vec2 cid_estimate() { return {0.0, 0.0}; }

    bool receivers_well_separated(const Receivers &r, double min_angle)
    {
        for (int i = 0; i < 3; ++i)
        {
            const Vec2 a = r[(i + 1) % 3] - r[i];
            const Vec2 b = r[(i + 2) % 3] - r[i];
            if (norm(a) == 0.0 || norm(b) == 0.0)
                return false;
            double diff = std::abs(std::atan2(a.y, a.x) - std::atan2(b.y, b.x));
            if (diff > pi)
                diff = two_pi - diff;
            if (diff < min_angle)
                return false;
        }
        return true;
    }

    Receivers place_receivers(Rng &rng, double radius, int max_tries)
    {
        for (int t = 0; t < max_tries; ++t)
        {
            Receivers r{uniform_in_disk(rng, radius), uniform_in_disk(rng, radius), uniform_in_disk(rng, radius)};
            if (receivers_well_separated(r))
                return r;
        }
        throw BudgetError("place_receivers: no well separated triple after " + std::to_string(max_tries) + " draws");
    }

    std::array<double, 3> toa_measure(Vec2 p, const Receivers &receivers, const std::vector<Cluster> &clusters)
    {
        if (clusters.empty())
            throw std::invalid_argument("toa_measure: no clusters");
        std::array<double, 3> out{};
        for (int r = 0; r < 3; ++r)
        {
            double best = std::numeric_limits<double>::infinity();
            for (const auto &c : clusters)
                best = std::min(best, distance(p, c.position) + distance(c.position, receivers[r]));
            out[r] = best / speed_of_light;
        }
        return out;
    }

    Vec2 toa_localize(const ToaSetup &setup, double radius)
    {
        const auto &r = setup.receivers;
        double d2[3];
        for (int i = 0; i < 3; ++i)
        {
            const double d = speed_of_light * setup.toa[i];
            d2[i] = d * d;
        }
        Eigen::Matrix2d a;
        Eigen::Vector2d rhs;
        for (int j = 1; j < 3; ++j)
        {
            a(j - 1, 0) = 2.0 * (r[j].x - r[0].x);
            a(j - 1, 1) = 2.0 * (r[j].y - r[0].y);
            rhs(j - 1) = d2[0] - d2[j] + dot(r[j], r[j]) - dot(r[0], r[0]);
        }
        const double scale = a.cwiseAbs().maxCoeff();
        if (!(scale > 0.0) || std::abs(a.determinant()) < 1e-12 * scale * scale)
            return cid_estimate();
        const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(rhs);
        Vec2 p{sol(0), sol(1)};
        const double n = norm(p);
        if (n > radius)
            p = (radius / n) * p;
        return p;
    }

    namespace
    {
        // Nbar x 2N -> 2Nbar x N with the two polarisation blocks stacked.
        CMatrix stack_polarisations(const CMatrix &h)
        {
            const Eigen::Index N = h.cols() / 2;
            CMatrix x(2 * h.rows(), N);
            x.topRows(h.rows()) = h.leftCols(N);
            x.bottomRows(h.rows()) = h.rightCols(N);
            return x;
        }

        // Squared nuclear norm of X Y^H. Rank one (a single UE antenna) reduces to the Frobenius norm.
        double resonance(const CMatrix &xyh, bool rank_one)
        {
            if (rank_one)
                return xyh.squaredNorm();
            const double s = Eigen::JacobiSVD<CMatrix>(xyh).singularValues().sum();
            return s * s;
        }
    } // namespace

    double trrs(const CMatrix &a, const CMatrix &b)
    {
        if (a.rows() != b.rows() || a.cols() != b.cols() || a.cols() % 2 != 0)
            throw std::invalid_argument("trrs: channel shapes differ");
        const CMatrix x = stack_polarisations(a);
        const CMatrix y = stack_polarisations(b);
        const double nx = x.squaredNorm(), ny = y.squaredNorm();
        if (nx == 0.0 || ny == 0.0)
            return 0.0;
        return std::min(1.0, resonance(x * y.adjoint(), a.rows() == 1) / (nx * ny));
    }

    double trrs(const SubbandChannels &a, const SubbandChannels &b)
    {
        if (a.size() != b.size() || a.empty())
            throw std::invalid_argument("trrs: subband counts differ");
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k)
            s += trrs(a[k], b[k]);
        return s / double(a.size());
    }

    FingerprintDb::FingerprintDb(const Scenario &scenario, const ProbeLattice &lattice, int threads)
        : points_(lattice.points), subbands_(scenario.params().subbands)
    {
        if (points_.empty())
            throw ConfigError("fingerprint database needs at least one probe position");
        reshaped_.resize(points_.size() * std::size_t(subbands_));
        parallel_for(points_.size(), threads,
                     [&](std::size_t s)
                     {
                         Rng rng = derive_stream(scenario.params().seed, "rfpm-db", {s});
                         const SiteChannel site(scenario, points_[s], perturbations_at(scenario, points_[s], rng));
                         const auto h = site.realize(0.0, 0.0);
                         for (int k = 0; k < subbands_; ++k)
                         {
                             CMatrix x = stack_polarisations(h[k]);
                             const double n = x.norm();
                             if (n > 0.0)
                                 x /= n;
                             reshaped_[s * subbands_ + k] = std::move(x);
                         }
                     });
    }

    double FingerprintDb::best_score(const SubbandChannels &observed, std::size_t *index) const
    {
        if (int(observed.size()) != subbands_)
            throw std::invalid_argument("FingerprintDb: observed channel has the wrong number of subbands");
        std::vector<CMatrix> obs(observed.size());
        for (std::size_t k = 0; k < observed.size(); ++k)
        {
            obs[k] = stack_polarisations(observed[k]);
            const double n = obs[k].norm();
            if (n > 0.0)
                obs[k] /= n;
        }
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t s = 0; s < points_.size(); ++s)
        {
            double score = 0.0;
            for (int k = 0; k < subbands_; ++k)
                score += resonance(obs[k] * reshaped_[s * subbands_ + k].adjoint(), observed[k].rows() == 1);
            if (score > best)
            {
                best = score;
                arg = s;
            }
        }
        if (index)
            *index = arg;
        return best / subbands_;
    }

    Estimate FingerprintDb::localize(const SubbandChannels &observed) const
    {
        std::size_t s = 0;
        best_score(observed, &s);
        return {points_[s], false};
    }

    RmseReport run_cid(const AttackRun &run, double radius, const std::vector<Vec2> &lattice)
    {
        return run_trials(run, radius, lattice, [](Vec2, Rng &) { return Estimate{cid_estimate(), false}; });
    }

    RmseReport run_toa(const Scenario &scenario, const AttackRun &run, const std::vector<Vec2> &lattice)
    {
        const double R = scenario.params().radius_m;
        return run_trials(run, R, lattice,
                          [&](Vec2 p, Rng &rng)
                          {
                              ToaSetup setup;
                              setup.receivers = place_receivers(rng, R);
                              setup.toa = toa_measure(p, setup.receivers, scenario.clusters());
                              return Estimate{toa_localize(setup, R), false};
                          });
    }

    RmseReport run_rfpm(const Scenario &scenario, const FingerprintDb &db, const AttackRun &run)
    {
        const auto &prm = scenario.params();
        return run_trials(run, prm.radius_m, db.points(),
                          [&](Vec2 p, Rng &rng)
                          {
                              const SiteChannel site(scenario, p, perturbations_at(scenario, p, rng));
                              const double mu = uniform(rng, 0.0, two_pi);
                              const double orient = uniform(rng, 0.0, two_pi);
                              const auto est = estimate_channel(site.realize(mu, orient), prm.estimation_noise_std, rng);
                              return db.localize(est.h_hat);
                          });
    }

} // namespace pfloc
