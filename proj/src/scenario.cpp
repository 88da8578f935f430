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

#include "pfloc/scenario.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

namespace pfloc
{
    namespace
    {
        std::mutex &fftw_planner_lock()
        {
            static std::mutex m;
            return m;
        }

        // Smallest 2^a 3^b 5^c >= n.
        int nice_fft_size(int n)
        {
            for (int m = std::max(n, 2);; ++m)
            {
                int r = m;
                for (int f : {2, 3, 5})
                    while (r % f == 0)
                        r /= f;
                if (r == 1)
                    return m;
            }
        }

        std::complex<double> complex_normal(Rng &rng)
        {
            std::normal_distribution<double> n(0.0, std::sqrt(0.5));
            const double re = n(rng);
            return {re, n(rng)};
        }

        double hashed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, Vec2 p)
        {
            std::uint64_t xb, yb;
            std::memcpy(&xb, &p.x, sizeof xb);
            std::memcpy(&yb, &p.y, sizeof yb);
            Rng rng = derive_stream(seed, "alpha-white", {a, b, xb, yb});
            return uniform(rng, -1.0, 1.0);
        }
    } // namespace

    std::vector<Cluster> generate_clusters(const Params &params)
    {
        Rng pos = derive_stream(params.seed, "cluster-positions");
        std::vector<Cluster> out(params.clusters);
        for (int l = 0; l < params.clusters; ++l)
        {
            out[l].position = uniform_in_disk(pos, params.radius_m);
            out[l].gains.resize(params.subbands);
            for (int k = 0; k < params.subbands; ++k)
            {
                Rng g = derive_stream(params.seed, "cluster-gains", {std::uint64_t(l), std::uint64_t(k)});
                out[l].gains[k] = complex_normal(g);
            }
        }
        return out;
    }

    std::vector<Cluster> generate_clusters(Rng &rng, const Params &params)
    {
        std::vector<Cluster> out(params.clusters);
        for (auto &c : out)
        {
            c.position = uniform_in_disk(rng, params.radius_m);
            c.gains.resize(params.subbands);
            for (auto &g : c.gains)
                g = complex_normal(rng);
        }
        return out;
    }

    double alpha_correlation(double d, double corr_distance)
    {
        if (corr_distance <= 0.0)
            return d == 0.0 ? 1.0 : 0.0;
        return std::exp(-d / (2.0 * corr_distance));
    }

    double gaussian_correlation(double d, double corr_distance)
    {
        // Gaussian correlation rho maps to correlation (6/pi) asin(rho/2) after the
        // uniformising transform; this is its inverse.
        return 2.0 * std::sin(pi / 6.0 * alpha_correlation(d, corr_distance));
    }

    // ---------------------------------------------------------------- AlphaField

    AlphaField::AlphaField(std::shared_ptr<const FieldGeometry> geometry, std::vector<float> gaussian)
        : geometry_(std::move(geometry)), values_(std::move(gaussian))
    {
        if (values_.size() != std::size_t(geometry_->width()) * geometry_->height())
            throw std::invalid_argument("AlphaField: raster size does not match geometry");
    }

    FieldStencil make_stencil(const FieldGeometry &g, Vec2 p)
    {
        const double fx = p.x / g.dx + g.half_x;
        const double fy = p.y / g.dy + g.half_y;
        int ix = static_cast<int>(std::floor(fx));
        int iy = static_cast<int>(std::floor(fy));
        if (ix < 0 || iy < 0 || ix + 1 >= g.width() || iy + 1 >= g.height())
            throw std::out_of_range("position (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                    ") lies outside the perturbation field");
        const double tx = fx - ix, ty = fy - iy;
        const double w00 = (1 - tx) * (1 - ty), w10 = tx * (1 - ty), w01 = (1 - tx) * ty, w11 = tx * ty;
        const double var = w00 * w00 + w10 * w10 + w01 * w01 + w11 * w11 +
                           2.0 * ((w00 * w10 + w01 * w11) * g.c10 + (w00 * w01 + w10 * w11) * g.c01 +
                                  w00 * w11 * g.c11 + w10 * w01 * g.c1m1);
        const double s = 1.0 / std::sqrt(var);
        const std::size_t base = std::size_t(iy) * g.width() + ix;
        return {{base, base + 1, base + g.width(), base + g.width() + 1}, {s * w00, s * w10, s * w01, s * w11}};
    }

    FieldStencil AlphaField::stencil(Vec2 p) const { return make_stencil(*geometry_, p); }

    double AlphaField::at(const FieldStencil &s) const
    {
        double z = 0.0;
        for (int i = 0; i < 4; ++i)
            z += s.weight[i] * values_[s.index[i]];
        return std::erf(z / std::sqrt(2.0));
    }

    double AlphaField::gaussian(Vec2 p) const
    {
        const auto s = stencil(p);
        double z = 0.0;
        for (int i = 0; i < 4; ++i)
            z += s.weight[i] * values_[s.index[i]];
        return z;
    }

    double AlphaField::operator()(Vec2 p) const { return at(stencil(p)); }

    // ---------------------------------------------------------------- FieldGenerator

    struct FieldGenerator::Impl
    {
        int mx = 0, my = 0;
        std::vector<double> amplitude; // sqrt(eigenvalue / (mx*my)) / sqrt(c(0))
        fftw_plan plan = nullptr;

        ~Impl()
        {
            std::lock_guard lock(fftw_planner_lock());
            if (plan)
                fftw_destroy_plan(plan);
        }
    };

    FieldGenerator::FieldGenerator(const Params &params) : impl_(std::make_unique<Impl>())
    {
        if (params.grid_x < 2 || params.grid_y < 2)
            throw ConfigError("perturbation field grid needs at least 2 points per axis");
        if (params.corr_distance_m <= 0.0)
            throw ConfigError("spatially correlated fields need d_S > 0");
        if (params.grid_extent < 1.0)
            throw ConfigError("perturbation field grid must cover the cell (extent factor >= 1)");

        auto geo = std::make_shared<FieldGeometry>();
        const double R = params.radius_m;
        geo->dx = params.grid_extent * R / params.grid_x;
        geo->dy = params.grid_extent * R / params.grid_y;
        geo->half_x = static_cast<int>(std::ceil(R / geo->dx)) + 1;
        geo->half_y = static_cast<int>(std::ceil(R / geo->dy)) + 1;

        // The torus must be large enough that correlation across the wrap is negligible for
        // any pair of points in the cell.
        const double span = 2.0 * R + 12.0 * params.corr_distance_m;
        auto &im = *impl_;
        im.mx = nice_fft_size(std::max(static_cast<int>(std::ceil(span / geo->dx)), geo->width() + 1));
        im.my = nice_fft_size(std::max(static_cast<int>(std::ceil(span / geo->dy)), geo->height() + 1));
        geo->torus_x = im.mx;
        geo->torus_y = im.my;
        const std::size_t n = std::size_t(im.mx) * im.my;

        fftw_complex *buf = fftw_alloc_complex(n);
        {
            std::lock_guard lock(fftw_planner_lock());
            im.plan = fftw_plan_dft_2d(im.my, im.mx, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        }

        for (int j = 0; j < im.my; ++j)
        {
            const double oy = std::min(j, im.my - j) * geo->dy;
            for (int i = 0; i < im.mx; ++i)
            {
                const double ox = std::min(i, im.mx - i) * geo->dx;
                auto &c = buf[std::size_t(j) * im.mx + i];
                c[0] = gaussian_correlation(std::hypot(ox, oy), params.corr_distance_m);
                c[1] = 0.0;
            }
        }
        fftw_execute_dft(im.plan, buf, buf);

        // Clip the (tiny) negative eigenvalues of the embedding, then recover the correlation
        // actually realised at the neighbour offsets used by interpolation.
        std::vector<double> lambda(n);
        for (std::size_t i = 0; i < n; ++i)
            lambda[i] = std::max(buf[i][0], 0.0);
        auto realised = [&](int ox, int oy)
        {
            double s = 0.0;
            for (int j = 0; j < im.my; ++j)
                for (int i = 0; i < im.mx; ++i)
                    s += lambda[std::size_t(j) * im.mx + i] *
                         std::cos(two_pi * (double(i) * ox / im.mx + double(j) * oy / im.my));
            return s / double(n);
        };
        const double c0 = realised(0, 0);
        geo->c10 = realised(1, 0) / c0;
        geo->c01 = realised(0, 1) / c0;
        geo->c11 = realised(1, 1) / c0;
        geo->c1m1 = realised(1, -1) / c0;

        im.amplitude.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            im.amplitude[i] = std::sqrt(lambda[i] / double(n) / c0);
        fftw_free(buf);
        geometry_ = std::move(geo);
    }

    FieldGenerator::~FieldGenerator() = default;

    std::pair<AlphaField, AlphaField> FieldGenerator::draw(Rng &rng) const
    {
        const auto &im = *impl_;
        const auto &g = *geometry_;
        const std::size_t n = std::size_t(im.mx) * im.my;
        std::normal_distribution<double> normal;

        fftw_complex *buf = fftw_alloc_complex(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            buf[i][0] = im.amplitude[i] * normal(rng);
            buf[i][1] = im.amplitude[i] * normal(rng);
        }
        fftw_execute_dft(im.plan, buf, buf);

        // Stored window: node (ix, iy) in [-half, half] maps to torus index (ix mod m, iy mod m).
        std::vector<float> re(std::size_t(g.width()) * g.height()), imag(re.size());
        for (int y = 0; y < g.height(); ++y)
        {
            const int ty = ((y - g.half_y) % im.my + im.my) % im.my;
            for (int x = 0; x < g.width(); ++x)
            {
                const int tx = ((x - g.half_x) % im.mx + im.mx) % im.mx;
                const auto &v = buf[std::size_t(ty) * im.mx + tx];
                re[std::size_t(y) * g.width() + x] = static_cast<float>(v[0]);
                imag[std::size_t(y) * g.width() + x] = static_cast<float>(v[1]);
            }
        }
        fftw_free(buf);
        return {AlphaField(geometry_, std::move(re)), AlphaField(geometry_, std::move(imag))};
    }

    AlphaField build_alpha_field(Rng &rng, const Params &params)
    {
        FieldGenerator gen(params);
        return gen.draw(rng).first;
    }

    // ---------------------------------------------------------------- AlphaFieldBank

    AlphaFieldBank::AlphaFieldBank(const Params &params, bool with_arrival, int threads)
        : params_(params), with_arrival_(with_arrival), white_(params.corr_distance_m <= 0.0)
    {
        if (white_)
            return;
        FieldGenerator gen(params);
        const std::size_t count = std::size_t(params.subbands) * params.clusters;
        std::vector<std::optional<std::pair<AlphaField, AlphaField>>> drawn(count);
        parallel_for(count, threads,
                     [&](std::size_t i)
                     {
                         const std::uint64_t k = i / params.clusters, l = i % params.clusters;
                         Rng rng = derive_stream(params.seed, "alpha-field", {l, k});
                         drawn[i].emplace(gen.draw(rng));
                     });
        departure_.reserve(count);
        if (with_arrival_)
            arrival_.reserve(count);
        for (auto &d : drawn)
        {
            departure_.push_back(std::move(d->first));
            if (with_arrival_)
                arrival_.push_back(std::move(d->second));
        }
    }

    void AlphaFieldBank::evaluate(Vec2 p, std::span<double> departure, std::span<double> arrival) const
    {
        const std::size_t count = std::size_t(params_.subbands) * params_.clusters;
        if (departure.size() != count || (!arrival.empty() && arrival.size() != count))
            throw std::invalid_argument("AlphaFieldBank::evaluate: output size mismatch");
        if (white_)
        {
            for (std::size_t i = 0; i < count; ++i)
            {
                departure[i] = hashed_uniform(params_.seed, 0, i, p);
                if (!arrival.empty())
                    arrival[i] = hashed_uniform(params_.seed, 1, i, p);
            }
            return;
        }
        const FieldStencil s = departure_.front().stencil(p);
        for (std::size_t i = 0; i < count; ++i)
            departure[i] = departure_[i].at(s);
        if (!arrival.empty())
        {
            if (!with_arrival_)
                throw std::logic_error("AlphaFieldBank was built without arrival-angle fields");
            for (std::size_t i = 0; i < count; ++i)
                arrival[i] = arrival_[i].at(s);
        }
    }

    // ---------------------------------------------------------------- lattice

    ProbeLattice probe_lattice(double radius, double spacing)
    {
        if (!(spacing > 0.0))
            throw ConfigError("lattice spacing must be > 0");
        ProbeLattice out;
        out.spacing = spacing;
        const int n = static_cast<int>(std::floor(radius / spacing + 1e-9));
        const double r2 = radius * radius * (1.0 + 1e-12);
        for (int ny = -n; ny <= n; ++ny)
            for (int nx = -n; nx <= n; ++nx)
            {
                const Vec2 s{spacing * nx, spacing * ny};
                if (s.x * s.x + s.y * s.y <= r2)
                    out.points.push_back(s);
            }
        return out;
    }

    ProbeLattice probe_lattice(const Params &params)
    {
        return probe_lattice(params.radius_m, params.lattice_spacing_m);
    }

    // ---------------------------------------------------------------- Scenario

    Scenario::Scenario(Params params, int threads) : Scenario(params, generate_clusters(params), threads) {}

    Scenario::Scenario(Params params, std::vector<Cluster> clusters, int threads)
        : params_(std::move(params)), clusters_(std::move(clusters))
    {
        params_.validate();
        if (int(clusters_.size()) != params_.clusters)
            throw ConfigError("scenario has " + std::to_string(clusters_.size()) + " clusters, params say " +
                              std::to_string(params_.clusters));
        for (const auto &c : clusters_)
            if (int(c.gains.size()) != params_.subbands)
                throw ConfigError("cluster gain count does not match K");
        if (params_.alpha_regime == AlphaRegime::frozen)
            fields_ = std::make_shared<AlphaFieldBank>(params_, params_.n_rx > 1, threads);
    }

    Scenario Scenario::with_path_loss(double a_pl) const
    {
        Scenario s = *this;
        s.params_.path_loss_norm = a_pl;
        s.params_.validate();
        return s;
    }

    Scenario Scenario::with_estimation_noise(double sigma) const
    {
        Scenario s = *this;
        s.params_.estimation_noise_std = sigma;
        s.params_.validate();
        return s;
    }

    void Scenario::save(std::ostream &out) const
    {
        out << "# pfloc scenario\n";
        for (const auto &[k, v] : param_entries(params_))
            out << k << "=" << v << "\n";
        out << "[clusters]\n";
        out << "# index x_m y_m then (re im) per subband\n";
        for (std::size_t l = 0; l < clusters_.size(); ++l)
        {
            const auto &c = clusters_[l];
            out << l << " " << format_double(c.position.x) << " " << format_double(c.position.y);
            for (const auto &g : c.gains)
                out << " " << format_double(g.real()) << " " << format_double(g.imag());
            out << "\n";
        }
    }

    Scenario Scenario::load(std::istream &in, int threads)
    {
        std::string line, header;
        bool in_table = false;
        Params params;
        std::vector<Cluster> clusters;
        int line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty() || line[0] == '#')
                continue;
            if (line == "[clusters]")
            {
                const auto kv = parse_key_values(header, "scenario");
                for (const auto &[k, v] : kv)
                    if (!apply_param(params, k, v.value))
                        throw ConfigError("scenario:" + std::to_string(v.line) + ": unknown key '" + k + "'");
                in_table = true;
                continue;
            }
            if (!in_table)
            {
                header += line + "\n";
                continue;
            }
            std::istringstream row(line);
            std::size_t index;
            Cluster c;
            if (!(row >> index >> c.position.x >> c.position.y) || index != clusters.size())
                throw ConfigError("scenario:" + std::to_string(line_no) + ": malformed cluster row");
            double re, im;
            while (row >> re >> im)
                c.gains.emplace_back(re, im);
            clusters.push_back(std::move(c));
        }
        if (!in_table)
            throw ConfigError("scenario: missing [clusters] section");
        return Scenario(params, std::move(clusters), threads);
    }

} // namespace pfloc
