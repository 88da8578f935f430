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

#ifndef PFLOC_SCENARIO_HPP
#define PFLOC_SCENARIO_HPP

#include "pfloc/common.hpp"
#include "pfloc/params.hpp"

#include <complex>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace pfloc
{
    // Static scatterer. One complex gain per subband, CN(0,1), independent across clusters and subbands.
    struct Cluster
    {
        Vec2 position;
        std::vector<std::complex<double>> gains;
    };

    // L clusters uniform on the disk of radius R with L*K independent gains. Positions come from
    // one stream and each gain from its own (cluster, subband) stream, so growing K keeps the
    // gains of existing subbands.
    std::vector<Cluster> generate_clusters(const Params &params);

    // Same, from an explicit stream (used for independent cluster draws in Monte Carlo loops).
    std::vector<Cluster> generate_clusters(Rng &rng, const Params &params);

    // Raster geometry shared by all fields of a scenario: node spacing, the stored window around
    // the cell and the exact embedded correlation of neighbouring nodes (for interpolation).
    struct FieldGeometry
    {
        double dx = 0.0, dy = 0.0;   // node spacing (m)
        int half_x = 0, half_y = 0;  // stored nodes span [-half, half] on each axis
        int torus_x = 0, torus_y = 0;
        // correlation of the Gaussian field between nodes offset by (1,0), (0,1), (1,1), (1,-1)
        double c10 = 0.0, c01 = 0.0, c11 = 0.0, c1m1 = 0.0;

        int width() const { return 2 * half_x + 1; }
        int height() const { return 2 * half_y + 1; }
    };

    // Bilinear stencil of a position into the raster, with the variance normalisation that keeps
    // the interpolated Gaussian value exactly N(0,1).
    struct FieldStencil
    {
        std::size_t index[4];
        double weight[4];
    };

    // One realisation of a spatially correlated perturbation field alpha(p) in [-1,1].
    // The underlying Gaussian field Z has correlation 2 sin(pi/6 * exp(-d / (2 d_S))), so that
    // alpha = 2 (1 - Q(Z)) - 1 is U(-1,1) with correlation exp(-d / (2 d_S)).
    class AlphaField
    {
    public:
        AlphaField(std::shared_ptr<const FieldGeometry> geometry, std::vector<float> gaussian);

        double operator()(Vec2 p) const;
        double gaussian(Vec2 p) const;
        double at(const FieldStencil &s) const;

        FieldStencil stencil(Vec2 p) const;
        const FieldGeometry &geometry() const { return *geometry_; }

    private:
        std::shared_ptr<const FieldGeometry> geometry_;
        std::vector<float> values_; // row-major, normalised Gaussian values on the stored window
    };

    FieldStencil make_stencil(const FieldGeometry &g, Vec2 p);

    // Draws correlated fields on a periodic grid by spectral filtering of white noise
    // (circulant embedding). Each draw yields two independent fields.
    class FieldGenerator
    {
    public:
        explicit FieldGenerator(const Params &params);
        ~FieldGenerator();
        FieldGenerator(const FieldGenerator &) = delete;
        FieldGenerator &operator=(const FieldGenerator &) = delete;

        std::pair<AlphaField, AlphaField> draw(Rng &rng) const;
        const std::shared_ptr<const FieldGeometry> &geometry() const { return geometry_; }

    private:
        struct Impl;
        std::unique_ptr<Impl> impl_;
        std::shared_ptr<const FieldGeometry> geometry_;
    };

    // Single field from the given stream. Rejects degenerate grids (G_x or G_y < 2) and d_S <= 0.
    AlphaField build_alpha_field(Rng &rng, const Params &params);

    // Correlation of alpha between two points at distance d.
    double alpha_correlation(double d, double corr_distance);
    // Correlation of the underlying Gaussian field between two points at distance d.
    double gaussian_correlation(double d, double corr_distance);

    // All perturbation fields of a scenario: alpha_l(p,k) and, when the UE has more than one
    // antenna, alpha_bar_l(p,k). Values are indexed [k * L + l].
    class AlphaFieldBank
    {
    public:
        AlphaFieldBank(const Params &params, bool with_arrival, int threads = 1);

        void evaluate(Vec2 p, std::span<double> departure, std::span<double> arrival) const;
        bool has_arrival() const { return with_arrival_; }

    private:
        Params params_;
        bool with_arrival_;
        bool white_;
        std::vector<AlphaField> departure_;
        std::vector<AlphaField> arrival_;
    };

    // Probe positions of the map: square lattice of spacing L_S inside the closed disk,
    // ordered row-major by n_y then n_x.
    struct ProbeLattice
    {
        std::vector<Vec2> points;
        double spacing = 0.0;
    };

    ProbeLattice probe_lattice(const Params &params);
    ProbeLattice probe_lattice(double radius, double spacing);

    // Immutable after construction; safe to share between threads.
    class Scenario
    {
    public:
        // Draws clusters and (frozen regime) the perturbation fields from params.seed.
        explicit Scenario(Params params, int threads = 1);
        Scenario(Params params, std::vector<Cluster> clusters, int threads = 1);

        const Params &params() const { return params_; }
        const std::vector<Cluster> &clusters() const { return clusters_; }
        const AlphaFieldBank *fields() const { return fields_.get(); }

        // Copy sharing clusters and fields but with a different A_PL or estimation noise.
        Scenario with_path_loss(double a_pl) const;
        Scenario with_estimation_noise(double sigma) const;

        // Key=value header followed by a cluster table; the fields are regenerated from the seed.
        void save(std::ostream &out) const;
        static Scenario load(std::istream &in, int threads = 1);

    private:
        Params params_;
        std::vector<Cluster> clusters_;
        std::shared_ptr<const AlphaFieldBank> fields_;
    };

} // namespace pfloc

#endif
