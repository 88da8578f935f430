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

#include "pfloc/runner.hpp"

#include "pfloc/channel.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <ostream>

namespace pfloc
{
    namespace
    {
        struct KindName
        {
            ExperimentKind kind;
            const char *name;
        };

        constexpr KindName kind_names[] = {
            {ExperimentKind::map, "map"},
            {ExperimentKind::rmse_vs_k, "rmse-vs-k"},
            {ExperimentKind::rmse_vs_r, "rmse-vs-r"},
            {ExperimentKind::ccdf, "ccdf"},
            {ExperimentKind::analysis, "analysis"},
            {ExperimentKind::mitigation, "mitigation"},
            {ExperimentKind::baselines, "baselines"},
            {ExperimentKind::all, "all"},
        };

        std::string fmt(double v, int digits = 6)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.*f", digits, v);
            return buf;
        }

        template <class T>
        std::string join(const std::vector<T> &v)
        {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i)
            {
                if (i)
                    s += ',';
                if constexpr (std::is_same_v<T, double>)
                    s += format_double(v[i]);
                else
                    s += std::to_string(v[i]);
            }
            return s;
        }

        bool parse_bool(const std::string &key, const std::string &value)
        {
            if (value == "true" || value == "1" || value == "yes")
                return true;
            if (value == "false" || value == "0" || value == "no")
                return false;
            throw ConfigError("key '" + key + "': expected true or false, got '" + value + "'");
        }

        int positive_int(const std::string &key, const std::string &value, int min = 1)
        {
            const long long v = parse_int(key, value);
            if (v < min || v > 1000000000LL)
                throw ConfigError("key '" + key + "': value " + value + " out of range");
            return int(v);
        }

        void set_defaults(ExperimentConfig &c)
        {
            c.modes = {2};
            c.n_values = {2, 16};
            c.nbar_values = {1};
            c.k_values = {1, 2, 4, 8};
            c.r_values = {c.params.radius_m};
            c.snr_db = {};
            c.u_values = {1};
            switch (c.kind)
            {
            case ExperimentKind::map:
                c.modes = {1, 2};
                c.k_values = {c.params.subbands};
                break;
            case ExperimentKind::rmse_vs_k:
                c.modes = {1, 2, 3};
                break;
            case ExperimentKind::rmse_vs_r:
                c.modes = {2, 3};
                c.n_values = {16};
                c.k_values = {c.params.subbands};
                c.r_values = {15.0, 25.0, 35.0};
                break;
            case ExperimentKind::ccdf:
                c.k_values = {c.params.subbands};
                break;
            case ExperimentKind::analysis:
                c.k_values = {0, 1, 2, 3};
                break;
            case ExperimentKind::mitigation:
                c.n_values = {16};
                c.u_values = {1, 2, 4};
                break;
            case ExperimentKind::baselines:
                c.modes = {2, 3};
                c.n_values = {16};
                c.snr_db = {5.0, 10.0, 15.0};
                break;
            case ExperimentKind::all:
                break;
            }
        }

        // Applies one runner key. Returns false when the key is not a runner key.
        bool apply_runner_key(ExperimentConfig &c, const std::string &key, const std::string &value)
        {
            if (key == "modes")
            {
                c.modes = parse_int_list(key, value);
                for (int m : c.modes)
                    parse_feedback_mode(m);
            }
            else if (key == "n_values")
                c.n_values = parse_int_list(key, value);
            else if (key == "nbar_values")
                c.nbar_values = parse_int_list(key, value);
            else if (key == "k_values")
                c.k_values = parse_int_list(key, value);
            else if (key == "r_values")
                c.r_values = parse_double_list(key, value);
            else if (key == "snr_db")
                c.snr_db = value == "none" ? std::vector<double>{} : parse_double_list(key, value);
            else if (key == "include_noiseless")
                c.include_noiseless = parse_bool(key, value);
            else if (key == "attacker_aware")
                c.attacker_aware = parse_bool(key, value);
            else if (key == "u_values")
                c.u_values = parse_int_list(key, value);
            else if (key == "trials")
                c.trials = positive_int(key, value);
            else if (key == "samples_per_position")
                c.samples_per_position = positive_int(key, value);
            else if (key == "scenarios")
                c.scenarios = positive_int(key, value);
            else if (key == "victims")
                c.victims = parse_victim_sampling(value);
            else if (key == "baseline_victims")
                c.baseline_victims = parse_victim_sampling(value);
            else if (key == "cluster_draws")
                c.cluster_draws = positive_int(key, value);
            else if (key == "eta")
                c.eta = parse_double(key, value);
            else if (key == "quadrature_spacing")
                c.quadrature_spacing = parse_double(key, value);
            else if (key == "pmf_budget")
                c.pmf_budget = std::size_t(positive_int(key, value));
            else if (key == "ccdf_step")
                c.ccdf_step = parse_double(key, value);
            else if (key == "out_dir")
                c.out_dir = value;
            else if (key == "threads")
                c.threads = positive_int(key, value);
            else
                return false;
            return true;
        }

        void validate(const ExperimentConfig &c)
        {
            auto require = [](bool ok, const std::string &what)
            {
                if (!ok)
                    throw ConfigError(what);
            };
            require(!c.n_values.empty() && !c.nbar_values.empty() && !c.k_values.empty() && !c.r_values.empty(),
                    "sweep lists must not be empty");
            for (int n : c.n_values)
                require(n >= 1, "n_values entries must be >= 1");
            for (int n : c.nbar_values)
                require(n >= 1, "nbar_values entries must be >= 1");
            for (int k : c.k_values)
                require(k >= 0, "k_values entries must be >= 0");
            if (c.kind != ExperimentKind::analysis)
                for (int k : c.k_values)
                    require(k >= 1, "k_values entries must be >= 1 for simulation experiments");
            for (double r : c.r_values)
                require(r > 0.0, "r_values entries must be > 0");
            for (int u : c.u_values)
                require(u >= 1, "u_values entries must be >= 1");
            for (double s : c.snr_db)
                require(std::isfinite(s), "snr_db entries must be finite");
            require(c.eta > 0.0, "eta must be > 0");
            require(c.quadrature_spacing > 0.0, "quadrature_spacing must be > 0");
            require(c.ccdf_step > 0.0, "ccdf_step must be > 0");
            require(c.threads >= 1, "threads must be >= 1");
            c.params.validate();
        }

        Params point_params(const ExperimentConfig &c, int N, int Nbar, int K, double R)
        {
            Params p = c.params;
            p.n_tx = N;
            p.n_rx = Nbar;
            p.subbands = K;
            p.radius_m = R;
            if (R != c.params.radius_m && !c.explicit_keys.count("L"))
                p.clusters = clusters_for_radius(R);
            return p;
        }

        std::string noise_label(const std::optional<double> &snr) { return snr ? fmt(*snr, 2) : "inf"; }

        std::vector<std::optional<double>> snr_points(const ExperimentConfig &c)
        {
            std::vector<std::optional<double>> out;
            if (c.include_noiseless)
                out.emplace_back();
            for (double s : c.snr_db)
                out.emplace_back(s);
            if (out.empty())
                throw ConfigError("no noise points: set snr_db or include_noiseless=true");
            return out;
        }

        Scenario noisy(const Scenario &base, std::optional<double> snr)
        {
            if (!snr)
                return base;
            const double sigma = base.params().receiver_noise_std;
            return base.with_path_loss(calibrate_apl(base, *snr, sigma)).with_estimation_noise(sigma);
        }

        std::string output_path(const ExperimentConfig &c, const std::string &name)
        {
            return (std::filesystem::path(c.out_dir) / name).string();
        }

        std::ofstream open_output(const std::string &path)
        {
            std::ofstream out(path, std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot write " + path);
            return out;
        }

        RmseRow pf_row(const Params &p, int mode, int U, std::optional<double> snr, const ExperimentConfig &c)
        {
            RmseRow row;
            row.attack_kind = "pf";
            row.mode = mode;
            row.N = p.n_tx;
            row.Nbar = p.n_rx;
            row.K = p.subbands;
            row.L = p.clusters;
            row.R = p.radius_m;
            row.snr_db = snr;
            row.U = U;
            row.victims = c.victims;
            row.report = pf_attack_point(p, parse_feedback_mode(mode), U, snr, c);
            row.has_rate = true;
            return row;
        }

        std::string write_rows(const ExperimentConfig &c, const std::string &name, const std::vector<RmseRow> &rows)
        {
            const auto path = output_path(c, name);
            auto out = open_output(path);
            write_rmse_csv(out, rows);
            return path;
        }

        std::vector<std::string> run_map(const ExperimentConfig &c)
        {
            std::vector<std::string> files;
            for (int mode : c.modes)
                for (int N : c.n_values)
                    for (int Nbar : c.nbar_values)
                        for (int K : c.k_values)
                        {
                            const Params p = point_params(c, N, Nbar, K, c.params.radius_m);
                            const Scenario sc(p, c.threads);
                            ObservationModel model;
                            model.mode = parse_feedback_mode(mode);
                            const Observer obs(sc, model);
                            const auto lattice = probe_lattice(p);
                            const auto map = build_map(obs, lattice, c.samples_per_position, p.seed, c.threads);
                            char name[128];
                            std::snprintf(name, sizeof name, "map_mode%d_N%d_Nbar%d_K%d.csv", mode, N, Nbar, K);
                            const auto path = output_path(c, name);
                            auto out = open_output(path);
                            map.write_csv(out);
                            files.push_back(path);
                        }
            return files;
        }

        std::vector<std::string> run_rmse_vs_k(const ExperimentConfig &c)
        {
            std::vector<RmseRow> rows;
            for (int mode : c.modes)
                for (int N : c.n_values)
                    for (int Nbar : c.nbar_values)
                        for (int K : c.k_values)
                            rows.push_back(pf_row(point_params(c, N, Nbar, K, c.params.radius_m), mode, 1,
                                                  std::nullopt, c));
            return {write_rows(c, "rmse_vs_k.csv", rows)};
        }

        std::vector<std::string> run_rmse_vs_r(const ExperimentConfig &c)
        {
            std::vector<RmseRow> rows;
            for (int mode : c.modes)
                for (int N : c.n_values)
                    for (int Nbar : c.nbar_values)
                        for (int K : c.k_values)
                            for (double R : c.r_values)
                                rows.push_back(pf_row(point_params(c, N, Nbar, K, R), mode, 1, std::nullopt, c));
            return {write_rows(c, "rmse_vs_r.csv", rows)};
        }

        std::vector<std::string> run_ccdf(const ExperimentConfig &c)
        {
            const auto path = output_path(c, "ccdf.csv");
            auto out = open_output(path);
            out << "mode,N,Nbar,K,L,R,error_m,ccdf\n";
            for (int mode : c.modes)
                for (int N : c.n_values)
                    for (int Nbar : c.nbar_values)
                        for (int K : c.k_values)
                        {
                            const Params p = point_params(c, N, Nbar, K, c.params.radius_m);
                            const auto r = pf_attack_point(p, parse_feedback_mode(mode), 1, std::nullopt, c);
                            const int steps = int(std::ceil(2.0 * p.radius_m / c.ccdf_step));
                            for (int i = 0; i <= steps; ++i)
                            {
                                const double a = i * c.ccdf_step;
                                out << mode << ',' << N << ',' << Nbar << ',' << K << ',' << p.clusters << ','
                                    << fmt(p.radius_m, 3) << ',' << fmt(a, 4) << ',' << fmt(r.ccdf(a), 6) << '\n';
                            }
                        }
            return {path};
        }

        std::vector<std::string> run_analysis(const ExperimentConfig &c)
        {
            std::vector<std::string> files;
            const auto path = output_path(c, "analysis_rmse.csv");
            {
                auto out = open_output(path);
                out << "N,O,K,L,R,rmse_analytic_m,rmse_fit_m,mc_stderr\n";
                for (int N : c.n_values)
                    for (int K : c.k_values)
                    {
                        AnalysisConfig a;
                        a.params = point_params(c, N, 1, std::max(K, 1), c.params.radius_m);
                        a.params.subbands = K;
                        a.cluster_draws = c.cluster_draws;
                        a.quadrature.grid_spacing = c.quadrature_spacing;
                        a.quadrature.max_entries = c.pmf_budget;
                        a.eta = c.eta;
                        a.threads = c.threads;
                        const auto r = analytical_mse(a);
                        const auto &p = a.params;
                        out << N << ',' << p.oversampling << ',' << K << ',' << p.clusters << ','
                            << fmt(p.radius_m, 3) << ',' << fmt(r.rmse) << ','
                            << fmt(rmse_fit(p.radius_m, p.clusters, N, p.oversampling, K, c.eta)) << ','
                            << fmt(r.mc_stderr) << '\n';
                    }
            }
            files.push_back(path);

            // general-model simulation (mode 3) at the same points, for comparison
            std::vector<RmseRow> rows;
            for (int N : c.n_values)
                for (int K : c.k_values)
                    if (K >= 1)
                        rows.push_back(pf_row(point_params(c, N, 1, K, c.params.radius_m), 3, 1, std::nullopt, c));
            files.push_back(write_rows(c, "analysis_sim.csv", rows));
            return files;
        }

        std::vector<std::string> run_mitigation(const ExperimentConfig &c)
        {
            std::vector<RmseRow> rows;
            for (int mode : c.modes)
                for (int N : c.n_values)
                    for (int Nbar : c.nbar_values)
                        for (int K : c.k_values)
                            for (const auto &snr : snr_points(c))
                                for (int U : c.u_values)
                                    rows.push_back(pf_row(point_params(c, N, Nbar, K, c.params.radius_m), mode, U,
                                                          snr, c));
            return {write_rows(c, "mitigation.csv", rows)};
        }

        std::vector<std::string> run_baselines(const ExperimentConfig &c)
        {
            std::vector<RmseRow> rows;
            const auto noise = snr_points(c);
            for (int N : c.n_values)
                for (int Nbar : c.nbar_values)
                    for (int K : c.k_values)
                    {
                        const Params p = point_params(c, N, Nbar, K, c.params.radius_m);
                        for (const auto &snr : noise)
                        {
                            for (int mode : c.modes)
                                rows.push_back(pf_row(p, mode, 1, snr, c));

                            RmseRow base;
                            base.N = N;
                            base.Nbar = Nbar;
                            base.K = K;
                            base.L = p.clusters;
                            base.R = p.radius_m;
                            base.snr_db = snr;
                            base.victims = c.baseline_victims;
                            std::vector<RmseReport> cid, toa, rfpm;
                            for (int s = 0; s < c.scenarios; ++s)
                            {
                                Params ps = p;
                                ps.seed = p.seed + std::uint64_t(s);
                                const Scenario sc = noisy(Scenario(ps, c.threads), snr);
                                const auto lattice = probe_lattice(ps);
                                AttackRun run;
                                run.trials = c.trials;
                                run.victims = c.baseline_victims;
                                run.seed = ps.seed;
                                run.threads = c.threads;
                                cid.push_back(run_cid(run, ps.radius_m, lattice.points));
                                toa.push_back(run_toa(sc, run, lattice.points));
                                const FingerprintDb db(sc, lattice, c.threads);
                                rfpm.push_back(run_rfpm(sc, db, run));
                            }
                            for (auto [kind, reports] : {std::pair{"cid", &cid}, {"toa", &toa}, {"rfpm", &rfpm}})
                            {
                                RmseRow row = base;
                                row.attack_kind = kind;
                                row.report = pool_reports(*reports);
                                rows.push_back(row);
                            }
                        }
                    }
            return {write_rows(c, "baselines.csv", rows)};
        }

    } // namespace

    ExperimentKind parse_experiment_kind(const std::string &s)
    {
        for (const auto &k : kind_names)
            if (s == k.name)
                return k.kind;
        std::string all;
        for (const auto &k : kind_names)
            all += std::string(all.empty() ? "" : ", ") + k.name;
        throw ConfigError("unknown experiment '" + s + "' (expected one of " + all + ")");
    }

    std::string to_string(ExperimentKind k)
    {
        for (const auto &e : kind_names)
            if (e.kind == k)
                return e.name;
        return "?";
    }

    const std::vector<std::string> &experiment_names()
    {
        static const std::vector<std::string> names = []
        {
            std::vector<std::string> v;
            for (const auto &k : kind_names)
                v.emplace_back(k.name);
            return v;
        }();
        return names;
    }

    int clusters_for_radius(double R)
    {
        if (!(R > 0.0))
            throw ConfigError("R must be > 0");
        return std::max(1, int(std::lround(0.112 * R * R)));
    }

    ExperimentConfig make_config(ExperimentKind kind, const KeyValueMap &values)
    {
        ExperimentConfig c;
        c.kind = kind;
        c.source = values;
        // parameters first: the sweep defaults depend on them
        for (const auto &[key, e] : values)
        {
            try
            {
                if (apply_param(c.params, key, e.value))
                    c.explicit_keys.insert(key);
            }
            catch (const ConfigError &err)
            {
                throw ConfigError("line " + std::to_string(e.line) + ": " + err.what());
            }
        }
        set_defaults(c);
        if (c.explicit_keys.count("N"))
            c.n_values = {c.params.n_tx};
        if (c.explicit_keys.count("Nbar"))
            c.nbar_values = {c.params.n_rx};
        if (c.explicit_keys.count("K"))
            c.k_values = {c.params.subbands};
        if (c.explicit_keys.count("R"))
            c.r_values = {c.params.radius_m};
        for (const auto &[key, e] : values)
        {
            if (c.explicit_keys.count(key))
                continue;
            try
            {
                if (!apply_runner_key(c, key, e.value))
                    throw ConfigError("unknown key '" + key + "'");
                c.explicit_keys.insert(key);
            }
            catch (const ConfigError &err)
            {
                throw ConfigError("line " + std::to_string(e.line) + ": " + err.what());
            }
        }
        validate(c);
        return c;
    }

    void write_config(std::ostream &out, const ExperimentConfig &c)
    {
        out << "# experiment " << to_string(c.kind) << '\n';
        for (const auto &[k, v] : param_entries(c.params))
            out << k << '=' << v << '\n';
        out << "modes=" << join(c.modes) << '\n';
        out << "n_values=" << join(c.n_values) << '\n';
        out << "nbar_values=" << join(c.nbar_values) << '\n';
        out << "k_values=" << join(c.k_values) << '\n';
        out << "r_values=" << join(c.r_values) << '\n';
        out << "snr_db=" << (c.snr_db.empty() ? std::string("none") : join(c.snr_db)) << '\n';
        out << "include_noiseless=" << (c.include_noiseless ? "true" : "false") << '\n';
        out << "u_values=" << join(c.u_values) << '\n';
        out << "attacker_aware=" << (c.attacker_aware ? "true" : "false") << '\n';
        out << "trials=" << c.trials << '\n';
        out << "samples_per_position=" << c.samples_per_position << '\n';
        out << "scenarios=" << c.scenarios << '\n';
        out << "victims=" << to_string(c.victims) << '\n';
        out << "baseline_victims=" << to_string(c.baseline_victims) << '\n';
        out << "cluster_draws=" << c.cluster_draws << '\n';
        out << "eta=" << format_double(c.eta) << '\n';
        out << "quadrature_spacing=" << format_double(c.quadrature_spacing) << '\n';
        out << "pmf_budget=" << c.pmf_budget << '\n';
        out << "ccdf_step=" << format_double(c.ccdf_step) << '\n';
    }

    void write_rmse_csv(std::ostream &out, const std::vector<RmseRow> &rows)
    {
        out << "attack_kind,mode,N,Nbar,K,L,R,snr_db,U,victims,trials,rmse_m,ci95_m,miss_rate,rate_bps_hz\n";
        for (const auto &r : rows)
        {
            out << r.attack_kind << ',' << (r.mode ? std::to_string(r.mode) : std::string()) << ',' << r.N << ','
                << r.Nbar << ',' << r.K << ',' << r.L << ',' << fmt(r.R, 3) << ',' << noise_label(r.snr_db) << ','
                << r.U << ',' << to_string(r.victims) << ',' << r.report.trials << ',' << fmt(r.report.rmse) << ','
                << fmt(r.report.ci95) << ',' << fmt(r.report.miss_rate) << ','
                << (r.has_rate ? fmt(r.report.mean_rate) : std::string()) << '\n';
        }
    }

    RmseReport pool_reports(const std::vector<RmseReport> &reports)
    {
        std::vector<double> errors;
        double misses = 0.0, rate_sum = 0.0;
        for (const auto &r : reports)
        {
            errors.insert(errors.end(), r.errors.begin(), r.errors.end());
            misses += r.miss_rate * double(r.trials);
            rate_sum += r.mean_rate * double(r.trials);
        }
        return make_report(std::move(errors), std::size_t(std::llround(misses)), rate_sum);
    }

    RmseReport pf_attack_point(const Params &params, FeedbackMode mode, int U, std::optional<double> snr_db,
                               const ExperimentConfig &config)
    {
        std::vector<RmseReport> reports;
        for (int s = 0; s < config.scenarios; ++s)
        {
            Params p = params;
            p.seed = params.seed + std::uint64_t(s);
            const Scenario sc = noisy(Scenario(p, config.threads), snr_db);
            ObservationModel model;
            model.mode = mode;
            model.mitigation_u = U;
            const Observer obs(sc, model);
            ObservationModel map_model = model;
            if (!config.attacker_aware)
                map_model.mitigation_u = 1;
            const Observer map_obs(sc, map_model);
            const auto lattice = probe_lattice(p);
            const auto map = build_map(map_obs, lattice, config.samples_per_position, p.seed, config.threads);
            AttackRun run;
            run.trials = config.trials;
            run.victims = config.victims;
            run.seed = p.seed;
            run.threads = config.threads;
            reports.push_back(run_attack(obs, map, run));
        }
        return pool_reports(reports);
    }

    std::vector<std::string> run_experiment(const ExperimentConfig &config)
    {
        std::error_code ec;
        std::filesystem::create_directories(config.out_dir, ec);
        if (ec)
            throw std::runtime_error("cannot create output directory " + config.out_dir + ": " + ec.message());

        std::vector<std::string> files;
        if (config.kind == ExperimentKind::all)
        {
            for (const auto &k : kind_names)
            {
                if (k.kind == ExperimentKind::all)
                    continue;
                // re-resolve so that each experiment gets its own sweep defaults
                ExperimentConfig sub = make_config(k.kind, config.source);
                sub.out_dir = config.out_dir;
                sub.threads = config.threads;
                const auto part = run_experiment(sub);
                files.insert(files.end(), part.begin(), part.end());
            }
            return files;
        }

        {
            const auto path = output_path(config, to_string(config.kind) + "_config.txt");
            auto out = open_output(path);
            write_config(out, config);
            files.push_back(path);
        }
        std::vector<std::string> part;
        switch (config.kind)
        {
        case ExperimentKind::map: part = run_map(config); break;
        case ExperimentKind::rmse_vs_k: part = run_rmse_vs_k(config); break;
        case ExperimentKind::rmse_vs_r: part = run_rmse_vs_r(config); break;
        case ExperimentKind::ccdf: part = run_ccdf(config); break;
        case ExperimentKind::analysis: part = run_analysis(config); break;
        case ExperimentKind::mitigation: part = run_mitigation(config); break;
        case ExperimentKind::baselines: part = run_baselines(config); break;
        case ExperimentKind::all: break;
        }
        files.insert(files.end(), part.begin(), part.end());
        return files;
    }

} // namespace pfloc
