/*
 Copyright 2026 The slidoc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef SLIDOC_CONFIG_HPP
#define SLIDOC_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slidoc/integrator.hpp"
#include "slidoc/optimizer.hpp"
#include "slidoc/problems.hpp"

namespace slidoc
{

    /// Effective run settings: built-in problem, overrides, tolerances and
    /// optimizer parameters. Unset overrides keep the problem's own values.
    struct RunConfig
    {
        std::string problem;
        ProblemParams params;
        std::optional<std::vector<double>> x0;
        std::optional<double> t0;
        std::optional<double> tf;
        std::optional<int> N;
        std::optional<std::vector<double>> u_lo;
        std::optional<std::vector<double>> u_hi;
        /// Initial control: one value per component (broadcast) or m N values, interval-major.
        std::optional<std::vector<double>> u0;
        std::string tableau = "radau-iia-3";

        int steps_per_interval = 8;
        double newton_tol = 1e-12;
        int max_newton_iters = 25;
        double event_tol = 1e-10;
        double surface_tol = 1e-9;
        double denominator_tol = 1e-12;
        double tangential_tol = 1e-10;
        int max_transitions_per_interval = 100;

        double c0 = 1.0;
        double kappa = 2.0;
        double gamma = 0.1;
        double eta = 0.5;
        double epsilon = 1e-8;
        int max_iters = 200;
        double h_scale = 1.0;
    };

    /// Reads and validates a JSON config. ParseError names the offending field
    /// path (or the line and column of a syntax error); ValidationError names
    /// the offending value.
    RunConfig parse_config(const std::string &path);
    RunConfig parse_config_text(const std::string &text, const std::string &origin = "<config>");

    /// Range checks shared by file and flag inputs.
    void validate_config(const RunConfig &cfg);

    /// Canonical JSON of every effective setting (used for the config hash).
    nlohmann::ordered_json config_to_json(const RunConfig &cfg);

    /// 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
    std::string config_hash(const RunConfig &cfg);

    /// Problem from the registry with the overrides applied and validated.
    ProblemInstance build_problem(const RunConfig &cfg);

    IntegratorOptions integrator_options(const RunConfig &cfg);
    PenaltyConfig penalty_config(const RunConfig &cfg, int dim);

    /// Control grid from u0 or the problem default, projected onto the box.
    ControlGrid initial_control(const RunConfig &cfg, const ProblemInstance &inst);

    /// "radau-iia-3", "radau-ia-3", or a path to {"name", "A", "b", "c"}.
    ButcherTableau load_tableau(const std::string &name);
    ButcherTableau tableau_from_json(const nlohmann::json &j, const std::string &origin);

} // namespace slidoc

#endif // SLIDOC_CONFIG_HPP
