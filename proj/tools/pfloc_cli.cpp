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

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
    using namespace pfloc;

    CLI::App app{"Precoder feedback localization simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    int threads = default_threads();
    std::vector<std::string> overrides;

    for (const auto &name : experiment_names())
    {
        auto *sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config,-c", config_path, "key=value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--out,-o", out_dir, "output directory")->capture_default_str();
        sub->add_option("--threads,-j", threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--set", overrides, "extra key=value setting, repeatable");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        const std::string name = app.get_subcommands().front()->get_name();
        KeyValueMap values;
        if (!config_path.empty())
            values = read_key_value_file(config_path);
        for (const auto &o : overrides)
        {
            const auto eq = o.find('=');
            if (eq == std::string::npos || eq == 0)
                throw ConfigError("--set expects key=value, got '" + o + "'");
            values[o.substr(0, eq)] = {o.substr(eq + 1), 0};
        }
        if (seed)
            values["seed"] = {std::to_string(*seed), 0};
        values["out_dir"] = {out_dir, 0};
        values["threads"] = {std::to_string(threads), 0};

        const auto config = make_config(parse_experiment_kind(name), values);
        for (const auto &f : run_experiment(config))
            std::cout << f << '\n';
        return 0;
    }
    catch (const ConfigError &e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const BudgetError &e)
    {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 3;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
