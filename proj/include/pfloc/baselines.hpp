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

#ifndef PFLOC_BASELINES_HPP
#define PFLOC_BASELINES_HPP

#include "pfloc/attack.hpp"

#include <array>

namespace pfloc
{
    // Cell identification: the cell centre, whatever the victim.
    Vec2 cid_estimate();

    using Receivers = std::array<Vec2, 3>;

    struct ToaSetup
    {
        Receivers receivers;
        std::array<double, 3> toa{}; // s
    };

    // For every receiver, the angle between the directions to the other two (folded to [0, pi])
    // must be at least min_angle.
    bool receivers_well_separated(const Receivers &r, double min_angle = 0.01 * pi);

    // Three receivers uniform on the disk, redrawn until well separated. Throws BudgetError after
    // max_tries rejected triples.
    Receivers place_receivers(Rng &rng, double radius, int max_tries = 100000);

    // Per receiver, the delay of the shortest path UE -> cluster -> receiver.
    std::array<double, 3> toa_measure(Vec2 p, const Receivers &receivers, const std::vector<Cluster> &clusters);

    // Range-difference linear least squares with receiver 0 as reference, clamped to the disk.
    // A singular system returns the cell centre.
    Vec2 toa_localize(const ToaSetup &setup, double radius);

    // Time-reversal resonating strength of two channel matrices of one subband. Each Nbar x 2N
    // matrix is reshaped to 2Nbar x N (polarisations stacked) and the score is
    // ||X Y^H||_*^2 / (||X||_F^2 ||Y||_F^2) (nuclear norm), in [0, 1], equal to 1 for X = Y, and
    // invariant to the co-phasing angle and to a global phase. For one receive antenna X Y^H has
    // rank one and the nuclear norm equals the Frobenius norm.
    double trrs(const CMatrix &a, const CMatrix &b);
    // Mean over subbands.
    double trrs(const SubbandChannels &a, const SubbandChannels &b);

    // Noiseless channels at the probe positions.
    class FingerprintDb
    {
    public:
        FingerprintDb(const Scenario &scenario, const ProbeLattice &lattice, int threads = 1);

        // Position with the largest mean TRRS, smallest index on ties.
        Estimate localize(const SubbandChannels &observed) const;
        double best_score(const SubbandChannels &observed, std::size_t *index = nullptr) const;

        std::size_t size() const { return points_.size(); }
        const std::vector<Vec2> &points() const { return points_; }

    private:
        std::vector<Vec2> points_;
        int subbands_ = 0;
        std::vector<CMatrix> reshaped_; // [s * K + k], 2Nbar x N, unit Frobenius norm
    };

    RmseReport run_cid(const AttackRun &run, double radius, const std::vector<Vec2> &lattice);
    // Fresh receiver placement per victim.
    RmseReport run_toa(const Scenario &scenario, const AttackRun &run, const std::vector<Vec2> &lattice);
    // Victim channel with random co-phasing and orientation plus estimation noise.
    RmseReport run_rfpm(const Scenario &scenario, const FingerprintDb &db, const AttackRun &run);

} // namespace pfloc

#endif
