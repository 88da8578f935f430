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

#include "pfloc/attack.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

namespace pfloc
{
    Observer::Observer(const Scenario &scenario, ObservationModel model)
        : scenario_(&scenario), model_(model), codebook_(scenario.params().n_tx, scenario.params().oversampling)
    {
        if (model_.mitigation_u < 1)
            throw ConfigError("mitigation U must be >= 1");
        if (model_.mode == FeedbackMode::mode2 && codebook_.beams() % 2 != 0)
            throw ConfigError("feedback mode 2 needs an even number of beams NO");
    }

    Observation Observer::observe(Vec2 p, Rng &rng) const
    {
        const auto &sc = *scenario_;
        const auto &prm = sc.params();
        const auto alpha = perturbations_at(sc, p, rng);

        std::vector<int> only;
        if (model_.single_cluster)
            for (int k = 0; k < prm.subbands; ++k)
                only.push_back(strongest_cluster(p, sc.clusters(), k));

        const double mu = model_.fixed_mu ? *model_.fixed_mu : uniform(rng, 0.0, two_pi);
        const double orient = model_.fixed_orientation ? *model_.fixed_orientation : uniform(rng, 0.0, two_pi);
        const SiteChannel site(sc, p, alpha, only);
        const auto h = site.realize(mu, orient);

        Observation obs;
        if (prm.estimation_noise_std > 0.0)
        {
            const auto est = estimate_channel(h, prm.estimation_noise_std, rng);
            const auto rates_hat = rate_tables(est.h_hat, codebook_, prm.receiver_noise_std);
            obs.selection = select_mitigated(model_.mode, rates_hat, model_.mitigation_u, rng);
            obs.rate = selection_rate(obs.selection, rate_tables(h, codebook_, prm.receiver_noise_std));
        }
        else
        {
            const auto rates = rate_tables(h, codebook_, prm.receiver_noise_std);
            obs.selection = select_mitigated(model_.mode, rates, model_.mitigation_u, rng);
            obs.rate = selection_rate(obs.selection, rates);
        }
        return obs;
    }

    std::size_t FeedbackKeyHash::operator()(const FeedbackKey &k) const
    {
        if (k.bytes.empty())
            return std::hash<std::uint64_t>()(k.index);
        return std::hash<std::string>()(k.bytes);
    }

    FeedbackKeyer::FeedbackKeyer(int beams, int subbands) : beams_(beams), subbands_(subbands), integral_(true)
    {
        if (beams < 1 || subbands < 0)
            throw std::invalid_argument("FeedbackKeyer: invalid codebook size or subband count");
        // (NO)^K must fit in 64 bits
        unsigned __int128 v = 1;
        for (int k = 0; k < subbands && integral_; ++k)
        {
            v *= unsigned(beams);
            if (v > std::numeric_limits<std::uint64_t>::max())
                integral_ = false;
        }
    }

    FeedbackKey FeedbackKeyer::key(const std::vector<int> &b) const
    {
        if (int(b.size()) != subbands_)
            throw std::invalid_argument("feedback vector has " + std::to_string(b.size()) + " entries, expected " +
                                        std::to_string(subbands_));
        FeedbackKey key;
        if (integral_)
        {
            std::uint64_t scale = 1;
            for (int k = 0; k < subbands_; ++k)
            {
                key.index += scale * std::uint64_t(b[k]);
                if (k + 1 < subbands_)
                    scale *= std::uint64_t(beams_);
            }
        }
        else
        {
            // two bytes per entry, little endian, keeps keys distinct for any NO < 65536
            key.bytes.reserve(2 * b.size());
            for (int v : b)
            {
                key.bytes.push_back(char(v & 0xff));
                key.bytes.push_back(char((v >> 8) & 0xff));
            }
        }
        return key;
    }

    std::vector<int> FeedbackKeyer::bits(const FeedbackKey &key) const
    {
        std::vector<int> b(subbands_);
        if (integral_)
        {
            std::uint64_t v = key.index;
            for (int k = 0; k < subbands_; ++k)
            {
                b[k] = int(v % std::uint64_t(beams_));
                v /= std::uint64_t(beams_);
            }
        }
        else
            for (int k = 0; k < subbands_; ++k)
                b[k] = int((unsigned char)key.bytes[2 * k]) | int((unsigned char)key.bytes[2 * k + 1]) << 8;
        return b;
    }

    std::string FeedbackKeyer::hex(const std::vector<int> &b) const
    {
        int width = 0;
        while ((1LL << width) < beams_)
            ++width;
        std::string bits;
        for (int v : b)
            for (int i = width - 1; i >= 0; --i)
                bits.push_back(((v >> i) & 1) ? '1' : '0');
        if (bits.empty())
            return "0";
        return bits_to_hex(bits);
    }

    FeedbackMap::FeedbackMap(std::vector<Vec2> positions, int beams, int subbands)
        : positions_(std::move(positions)), keyer_(beams, subbands), hist_(positions_.size()),
          samples_(positions_.size(), 0)
    {
    }

    void FeedbackMap::add(std::size_t position, const std::vector<int> &b, int count)
    {
        if (position >= positions_.size())
            throw std::out_of_range("FeedbackMap::add: position index out of range");
        if (count < 1)
            throw std::invalid_argument("FeedbackMap::add: count must be >= 1");
        const auto key = keyer_.key(b);
        auto &h = hist_[position];
        auto it = std::find_if(h.begin(), h.end(), [&](const auto &e) { return e.first == key; });
        if (it == h.end())
            h.emplace_back(key, count);
        else
            it->second += count;
        samples_[position] += count;
        all_samples_ += count;
        auto &t = totals_[key];
        t.count += count;
        t.sx += count * positions_[position].x;
        t.sy += count * positions_[position].y;
    }

    Estimate FeedbackMap::localize(const std::vector<int> &b) const
    {
        if (positions_.empty())
            throw std::logic_error("localize: empty map");
        const auto it = totals_.find(keyer_.key(b));
        if (it == totals_.end())
            return {{0.0, 0.0}, true};
        const auto &t = it->second;
        return {{t.sx / double(t.count), t.sy / double(t.count)}, false};
    }

    double FeedbackMap::probability(const std::vector<int> &b, std::size_t position) const
    {
        const auto key = keyer_.key(b);
        const auto &h = hist_.at(position);
        if (samples_[position] == 0)
            return 0.0;
        for (const auto &e : h)
            if (e.first == key)
                return double(e.second) / double(samples_[position]);
        return 0.0;
    }

    double FeedbackMap::probability(const std::vector<int> &b) const
    {
        // mean over positions of p_map(b, s); positions without samples count as zero
        double sum = 0.0;
        for (std::size_t s = 0; s < positions_.size(); ++s)
            sum += probability(b, s);
        return positions_.empty() ? 0.0 : sum / double(positions_.size());
    }

    void FeedbackMap::write_csv(std::ostream &out) const
    {
        out << "x_m,y_m,b_hex,count\n";
        for (std::size_t s = 0; s < positions_.size(); ++s)
            for (const auto &[key, count] : hist_[s])
                out << format_double(positions_[s].x) << ',' << format_double(positions_[s].y) << ','
                    << keyer_.hex(keyer_.bits(key)) << ',' << count << '\n';
    }

    FeedbackMap build_map(const Observer &observer, const ProbeLattice &lattice, int samples_per_position,
                          std::uint64_t seed, int threads)
    {
        if (samples_per_position < 1)
            throw ConfigError("samples per map position must be >= 1");
        const auto &prm = observer.scenario().params();
        FeedbackMap map(lattice.points, prm.beams(), prm.subbands);
        std::vector<std::vector<std::vector<int>>> reports(lattice.points.size());
        parallel_for(lattice.points.size(), threads,
                     [&](std::size_t s)
                     {
                         auto &out = reports[s];
                         out.reserve(std::size_t(samples_per_position));
                         for (int t = 0; t < samples_per_position; ++t)
                         {
                             Rng rng = derive_stream(seed, "map", {s, std::uint64_t(t)});
                             out.push_back(localization_bits(observer.observe(lattice.points[s], rng).selection));
                         }
                     });
        // single-threaded fill keeps the map contents independent of scheduling
        for (std::size_t s = 0; s < reports.size(); ++s)
            for (const auto &b : reports[s])
                map.add(s, b);
        return map;
    }

    std::string to_string(VictimSampling v) { return v == VictimSampling::lattice ? "lattice" : "continuous"; }

    VictimSampling parse_victim_sampling(const std::string &s)
    {
        if (s == "lattice")
            return VictimSampling::lattice;
        if (s == "continuous")
            return VictimSampling::continuous;
        throw ConfigError("victims must be 'lattice' or 'continuous', got '" + s + "'");
    }

    double RmseReport::ccdf(double a) const
    {
        if (errors.empty())
            return 0.0;
        const auto it = std::upper_bound(errors.begin(), errors.end(), a);
        return double(errors.end() - it) / double(errors.size());
    }

    RmseReport make_report(std::vector<double> errors, std::size_t misses, double rate_sum)
    {
        RmseReport r;
        r.trials = errors.size();
        if (errors.empty())
            return r;
        const double n = double(errors.size());
        double mean = 0.0;
        for (double e : errors)
            mean += e * e;
        mean /= n;
        double var = 0.0;
        for (double e : errors)
            var += (e * e - mean) * (e * e - mean);
        var = errors.size() > 1 ? var / (n - 1.0) : 0.0;
        r.rmse = std::sqrt(mean);
        // d sqrt(x) = dx / (2 sqrt(x))
        r.ci95 = r.rmse > 0.0 ? 1.959963984540054 * std::sqrt(var / n) / (2.0 * r.rmse) : 0.0;
        r.miss_rate = double(misses) / n;
        r.mean_rate = rate_sum / n;
        std::sort(errors.begin(), errors.end());
        r.errors = std::move(errors);
        return r;
    }

    namespace
    {
        Vec2 draw_victim(const AttackRun &run, double radius, const std::vector<Vec2> &lattice, Rng &rng)
        {
            if (run.victims == VictimSampling::continuous)
                return uniform_in_disk(rng, radius);
            if (lattice.empty())
                throw std::logic_error("lattice victims requested without probe positions");
            return lattice[std::uniform_int_distribution<std::size_t>(0, lattice.size() - 1)(rng)];
        }
    } // namespace

    RmseReport run_trials(const AttackRun &run, double radius, const std::vector<Vec2> &lattice,
                          const std::function<Estimate(Vec2, Rng &)> &estimate)
    {
        if (run.trials < 1)
            throw ConfigError("trials must be >= 1");
        std::vector<double> errors(std::size_t(run.trials));
        std::vector<char> missed(std::size_t(run.trials), 0);
        parallel_for(errors.size(), run.threads,
                     [&](std::size_t i)
                     {
                         Rng rng = derive_stream(run.seed, "victim", {i});
                         const Vec2 p = draw_victim(run, radius, lattice, rng);
                         const auto est = estimate(p, rng);
                         errors[i] = distance(p, est.position);
                         missed[i] = est.miss;
                     });
        return make_report(std::move(errors), std::size_t(std::count(missed.begin(), missed.end(), 1)));
    }

    RmseReport run_attack(const Observer &observer, const FeedbackMap &map, const AttackRun &run)
    {
        if (run.trials < 1)
            throw ConfigError("trials must be >= 1");
        const double radius = observer.scenario().params().radius_m;
        std::vector<double> errors(std::size_t(run.trials)), rates(std::size_t(run.trials));
        std::vector<char> missed(std::size_t(run.trials), 0);
        parallel_for(errors.size(), run.threads,
                     [&](std::size_t i)
                     {
                         Rng rng = derive_stream(run.seed, "victim", {i});
                         const Vec2 p = draw_victim(run, radius, map.points(), rng);
                         const auto obs = observer.observe(p, rng);
                         const auto est = map.localize(localization_bits(obs.selection));
                         errors[i] = distance(p, est.position);
                         missed[i] = est.miss;
                         rates[i] = obs.rate;
                     });
        double rate_sum = 0.0;
        for (double r : rates)
            rate_sum += r;
        return make_report(std::move(errors), std::size_t(std::count(missed.begin(), missed.end(), 1)), rate_sum);
    }

} // namespace pfloc
