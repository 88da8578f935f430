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

#ifndef PFLOC_ATTACK_HPP
#define PFLOC_ATTACK_HPP

#include "pfloc/codebook.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace pfloc
{
    // How one feedback report is produced at a position.
    struct ObservationModel
    {
        FeedbackMode mode = FeedbackMode::mode2;
        int mitigation_u = 1;
        std::optional<double> fixed_mu;          // co-phasing angle, U[0, 2 pi) when empty
        std::optional<double> fixed_orientation; // UE orientation, U[0, 2 pi) when empty
        bool single_cluster = false;             // each subband sees only its strongest cluster
    };

    struct Observation
    {
        Selection selection;
        double rate = 0.0; // rate of the selection on the true channel
    };

    // Produces feedback reports at arbitrary positions of a scenario.
    class Observer
    {
    public:
        Observer(const Scenario &scenario, ObservationModel model);

        Observation observe(Vec2 p, Rng &rng) const;

        const Scenario &scenario() const { return *scenario_; }
        const ObservationModel &model() const { return model_; }
        const Codebook &codebook() const { return codebook_; }

    private:
        const Scenario *scenario_;
        ObservationModel model_;
        Codebook codebook_;
    };

    // Map key for a localization bit vector: sum_k (NO)^k b_k when it fits 64 bits, otherwise the
    // raw byte sequence of b.
    struct FeedbackKey
    {
        std::uint64_t index = 0;
        std::string bytes;

        friend bool operator==(const FeedbackKey &, const FeedbackKey &) = default;
    };

    struct FeedbackKeyHash
    {
        std::size_t operator()(const FeedbackKey &k) const;
    };

    class FeedbackKeyer
    {
    public:
        FeedbackKeyer(int beams, int subbands);

        FeedbackKey key(const std::vector<int> &b) const;
        std::vector<int> bits(const FeedbackKey &key) const;
        bool integral() const { return integral_; }
        // b packed MSB-first with ceil(log2 NO) bits per subband, as hex
        std::string hex(const std::vector<int> &b) const;

    private:
        int beams_, subbands_;
        bool integral_;
    };

    struct Estimate
    {
        Vec2 position;
        bool miss = false;
    };

    // Probabilistic feedback-to-position map on a set of probe positions.
    class FeedbackMap
    {
    public:
        FeedbackMap(std::vector<Vec2> positions, int beams, int subbands);

        void add(std::size_t position, const std::vector<int> &b, int count = 1);

        // Count-weighted centroid of the positions where b was observed; (0,0) and miss when unseen.
        Estimate localize(const std::vector<int> &b) const;

        // Empirical p_map(b, s) and p(b).
        double probability(const std::vector<int> &b, std::size_t position) const;
        double probability(const std::vector<int> &b) const;

        std::size_t positions() const { return positions_.size(); }
        const std::vector<Vec2> &points() const { return positions_; }
        std::size_t distinct_vectors() const { return totals_.size(); }
        const FeedbackKeyer &keyer() const { return keyer_; }
        // All (key, count) pairs seen at one position.
        const std::vector<std::pair<FeedbackKey, int>> &histogram(std::size_t position) const { return hist_.at(position); }
        long long samples(std::size_t position) const { return samples_.at(position); }

        // CSV with columns x_m,y_m,b_hex,count, one row per (position, distinct b).
        void write_csv(std::ostream &out) const;

    private:
        struct Total
        {
            long long count = 0;
            double sx = 0.0, sy = 0.0;
        };
        std::vector<Vec2> positions_;
        FeedbackKeyer keyer_;
        std::vector<std::vector<std::pair<FeedbackKey, int>>> hist_;
        std::vector<long long> samples_;
        std::unordered_map<FeedbackKey, Total, FeedbackKeyHash> totals_;
        long long all_samples_ = 0;
    };

    // T reports at every lattice position, each position from its own random stream.
    FeedbackMap build_map(const Observer &observer, const ProbeLattice &lattice, int samples_per_position,
                          std::uint64_t seed, int threads = 1);

    enum class VictimSampling
    {
        lattice,   // uniform over the probe positions
        continuous // uniform on the disk
    };

    std::string to_string(VictimSampling v);
    VictimSampling parse_victim_sampling(const std::string &s);

    struct RmseReport
    {
        std::size_t trials = 0;
        double rmse = 0.0;      // m
        double ci95 = 0.0;      // half-width, m
        double miss_rate = 0.0; // fraction of victims whose feedback was not in the map
        double mean_rate = 0.0; // mean achieved rate, bits/s/Hz (0 when not applicable)
        std::vector<double> errors; // sorted ascending

        // Fraction of trials with error > a.
        double ccdf(double a) const;
    };

    // RMSE with a 95% interval from the sample variance of squared errors (delta method).
    RmseReport make_report(std::vector<double> errors, std::size_t misses = 0, double rate_sum = 0.0);

    struct AttackRun
    {
        int trials = 2000;
        VictimSampling victims = VictimSampling::lattice;
        std::uint64_t seed = 1;
        int threads = 1;
    };

    // Victims drawn per AttackRun, each with a fresh report, localized on the map.
    RmseReport run_attack(const Observer &observer, const FeedbackMap &map, const AttackRun &run);

    // Generic trial loop used by the baselines: estimate(p, rng) for victims uniform on the disk
    // or on the lattice.
    RmseReport run_trials(const AttackRun &run, double radius, const std::vector<Vec2> &lattice,
                          const std::function<Estimate(Vec2, Rng &)> &estimate);

} // namespace pfloc

#endif
