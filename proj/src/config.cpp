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

#include "slidoc/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace slidoc
{

    namespace
    {
        using nlohmann::json;

        [[noreturn]] void parse_error(const std::string &field, const std::string &what)
        {
            fail(ErrorCode::ParseError, "config." + field + ": " + what);
        }

        [[noreturn]] void invalid(const std::string &field, const std::string &what)
        {
            fail(ErrorCode::ValidationError, "config." + field + ": " + what);
        }

        double number(const json &j, const std::string &field)
        {
            if (!j.is_number())
            {
                parse_error(field, "expected a number, got " + std::string(j.type_name()));
            }
            return j.get<double>();
        }

        int integer(const json &j, const std::string &field)
        {
            if (!j.is_number_integer())
            {
                parse_error(field, "expected an integer, got " + j.dump());
            }
            return j.get<int>();
        }

        std::vector<double> numbers(const json &j, const std::string &field)
        {
            if (j.is_number())
            {
                return {j.get<double>()};
            }
            if (!j.is_array())
            {
                parse_error(field, "expected a number or an array of numbers");
            }
            std::vector<double> out;
            for (std::size_t i = 0; i < j.size(); ++i)
            {
                out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
            }
            return out;
        }

        Vector to_vector(const std::vector<double> &v)
        {
            return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        }

        /// Scalar broadcast to length m, or an exact-length array.
        Vector sized(const std::vector<double> &v, int m, const std::string &field)
        {
            if (v.size() == 1)
            {
                return Vector::Constant(m, v[0]);
            }
            if (static_cast<int>(v.size()) != m)
            {
                invalid(field, "expected " + std::to_string(m) + " values, got " + std::to_string(v.size()));
            }
            return to_vector(v);
        }

        void positive(double v, const std::string &field)
        {
            if (!(v > 0.0) || !std::isfinite(v))
            {
                std::ostringstream os;
                os << "must be positive and finite, got " << v;
                invalid(field, os.str());
            }
        }

        void open_unit(double v, const std::string &field)
        {
            if (!(v > 0.0 && v < 1.0))
            {
                std::ostringstream os;
                os << "must lie in (0, 1), got " << v;
                invalid(field, os.str());
            }
        }

        json vec_json(const std::optional<std::vector<double>> &v)
        {
            return v ? json(*v) : json(nullptr);
        }
    } // namespace

    RunConfig parse_config_text(const std::string &text, const std::string &origin)
    {
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            fail(ErrorCode::ParseError, origin + ": " + e.what());
        }
        if (!j.is_object())
        {
            fail(ErrorCode::ParseError, origin + ": top level must be a JSON object");
        }

        static const std::set<std::string> known = {
            "problem", "params", "x0", "t0", "tf", "N", "u_lo", "u_hi", "u0", "tableau",
            "steps_per_interval", "newton_tol", "max_newton_iters", "event_tol", "surface_tol",
            "denominator_tol", "tangential_tol", "max_transitions_per_interval",
            "c0", "kappa", "gamma", "eta", "epsilon", "max_iters", "h_scale"};
        for (const auto &[key, value] : j.items())
        {
            if (!known.count(key))
            {
                parse_error(key, "unknown field");
            }
        }

        RunConfig cfg;
        if (j.contains("problem"))
        {
            if (!j["problem"].is_string())
                parse_error("problem", "expected a string");
            cfg.problem = j["problem"].get<std::string>();
        }
        if (j.contains("params"))
        {
            if (!j["params"].is_object())
                parse_error("params", "expected an object");
            for (const auto &[key, value] : j["params"].items())
            {
                cfg.params[key] = number(value, "params." + key);
            }
        }
        if (j.contains("tableau"))
        {
            if (!j["tableau"].is_string())
                parse_error("tableau", "expected a built-in name or a file path");
            cfg.tableau = j["tableau"].get<std::string>();
        }
        // null leaves an override unset, so echoed configs parse back
        auto given = [&](const char *key) { return j.contains(key) && !j[key].is_null(); };
        if (given("x0"))
            cfg.x0 = numbers(j["x0"], "x0");
        if (given("u_lo"))
            cfg.u_lo = numbers(j["u_lo"], "u_lo");
        if (given("u_hi"))
            cfg.u_hi = numbers(j["u_hi"], "u_hi");
        if (given("u0"))
            cfg.u0 = numbers(j["u0"], "u0");
        if (given("t0"))
            cfg.t0 = number(j["t0"], "t0");
        if (given("tf"))
            cfg.tf = number(j["tf"], "tf");
        if (given("N"))
            cfg.N = integer(j["N"], "N");

        auto num = [&](const char *key, double &dst) {
            if (j.contains(key))
                dst = number(j[key], key);
        };
        auto intg = [&](const char *key, int &dst) {
            if (j.contains(key))
                dst = integer(j[key], key);
        };
        intg("steps_per_interval", cfg.steps_per_interval);
        num("newton_tol", cfg.newton_tol);
        intg("max_newton_iters", cfg.max_newton_iters);
        num("event_tol", cfg.event_tol);
        num("surface_tol", cfg.surface_tol);
        num("denominator_tol", cfg.denominator_tol);
        num("tangential_tol", cfg.tangential_tol);
        intg("max_transitions_per_interval", cfg.max_transitions_per_interval);
        num("c0", cfg.c0);
        num("kappa", cfg.kappa);
        num("gamma", cfg.gamma);
        num("eta", cfg.eta);
        num("epsilon", cfg.epsilon);
        intg("max_iters", cfg.max_iters);
        num("h_scale", cfg.h_scale);

        validate_config(cfg);
        return cfg;
    }

    RunConfig parse_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            fail(ErrorCode::IoError, "cannot open config file '" + path + "'");
        }
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_config_text(buf.str(), path);
    }

    void validate_config(const RunConfig &cfg)
    {
        if (cfg.N && *cfg.N < 1)
            invalid("N", "must be >= 1, got " + std::to_string(*cfg.N));
        if (cfg.steps_per_interval < 1)
            invalid("steps_per_interval", "must be >= 1, got " + std::to_string(cfg.steps_per_interval));
        if (cfg.max_newton_iters < 1)
            invalid("max_newton_iters", "must be >= 1");
        if (cfg.max_transitions_per_interval < 1)
            invalid("max_transitions_per_interval", "must be >= 1");
        if (cfg.max_iters < 0)
            invalid("max_iters", "must be >= 0");
        positive(cfg.newton_tol, "newton_tol");
        positive(cfg.event_tol, "event_tol");
        positive(cfg.surface_tol, "surface_tol");
        positive(cfg.denominator_tol, "denominator_tol");
        positive(cfg.tangential_tol, "tangential_tol");
        positive(cfg.c0, "c0");
        positive(cfg.epsilon, "epsilon");
        positive(cfg.h_scale, "h_scale");
        if (!(cfg.kappa > 1.0) || !std::isfinite(cfg.kappa))
            invalid("kappa", "must exceed 1");
        open_unit(cfg.gamma, "gamma");
        open_unit(cfg.eta, "eta");
        if (cfg.t0 && cfg.tf && !(*cfg.tf > *cfg.t0))
            invalid("tf", "must exceed t0");
    }

    nlohmann::ordered_json config_to_json(const RunConfig &cfg)
    {
        nlohmann::ordered_json j;
        j["problem"] = cfg.problem;
        j["params"] = cfg.params;
        j["x0"] = vec_json(cfg.x0);
        j["t0"] = cfg.t0 ? json(*cfg.t0) : json(nullptr);
        j["tf"] = cfg.tf ? json(*cfg.tf) : json(nullptr);
        j["N"] = cfg.N ? json(*cfg.N) : json(nullptr);
        j["u_lo"] = vec_json(cfg.u_lo);
        j["u_hi"] = vec_json(cfg.u_hi);
        j["u0"] = vec_json(cfg.u0);
        j["tableau"] = cfg.tableau;
        j["steps_per_interval"] = cfg.steps_per_interval;
        j["newton_tol"] = cfg.newton_tol;
        j["max_newton_iters"] = cfg.max_newton_iters;
        j["event_tol"] = cfg.event_tol;
        j["surface_tol"] = cfg.surface_tol;
        j["denominator_tol"] = cfg.denominator_tol;
        j["tangential_tol"] = cfg.tangential_tol;
        j["max_transitions_per_interval"] = cfg.max_transitions_per_interval;
        j["c0"] = cfg.c0;
        j["kappa"] = cfg.kappa;
        j["gamma"] = cfg.gamma;
        j["eta"] = cfg.eta;
        j["epsilon"] = cfg.epsilon;
        j["max_iters"] = cfg.max_iters;
        j["h_scale"] = cfg.h_scale;
        return j;
    }

    std::string config_hash(const RunConfig &cfg)
    {
        const std::string text = config_to_json(cfg).dump();
        std::uint64_t h = 14695981039346656037ull;
        for (unsigned char ch : text)
        {
            h ^= ch;
            h *= 1099511628211ull;
        }
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << h;
        return os.str();
    }

    ProblemInstance build_problem(const RunConfig &cfg)
    {
        if (cfg.problem.empty())
        {
            fail(ErrorCode::ValidationError, "config.problem: no problem selected");
        }
        ProblemInstance inst = make_problem(cfg.problem, cfg.params);
        HybridOCP &ocp = inst.ocp;
        if (cfg.x0)
            ocp.x0 = sized(*cfg.x0, ocp.n, "x0");
        if (cfg.t0)
            ocp.t0 = *cfg.t0;
        if (cfg.tf)
            ocp.tf = *cfg.tf;
        if (cfg.N)
            ocp.N = *cfg.N;
        if (cfg.u_lo)
            ocp.u_lo = sized(*cfg.u_lo, ocp.m, "u_lo");
        if (cfg.u_hi)
            ocp.u_hi = sized(*cfg.u_hi, ocp.m, "u_hi");
        ocp.tolerances.denominator = cfg.denominator_tol;
        ocp.tolerances.tangential = cfg.tangential_tol;
        try
        {
            ocp.validate();
        }
        catch (const Error &e)
        {
            fail(ErrorCode::ValidationError, std::string("config: ") + e.what());
        }
        return inst;
    }

    IntegratorOptions integrator_options(const RunConfig &cfg)
    {
        IntegratorOptions o;
        o.steps_per_interval = cfg.steps_per_interval;
        o.newton.tol = cfg.newton_tol;
        o.newton.max_iters = cfg.max_newton_iters;
        o.event.tol = cfg.event_tol;
        o.surface_tol = cfg.surface_tol;
        o.max_transitions_per_interval = cfg.max_transitions_per_interval;
        return o;
    }

    PenaltyConfig penalty_config(const RunConfig &cfg, int dim)
    {
        PenaltyConfig p;
        p.c0 = cfg.c0;
        p.kappa = cfg.kappa;
        p.gamma = cfg.gamma;
        p.eta = cfg.eta;
        p.epsilon = cfg.epsilon;
        p.max_iters = cfg.max_iters;
        p.H = cfg.h_scale * Matrix::Identity(dim, dim);
        p.validate(dim);
        return p;
    }

    ControlGrid initial_control(const RunConfig &cfg, const ProblemInstance &inst)
    {
        const HybridOCP &ocp = inst.ocp;
        ControlGrid grid(ocp.m, ocp.N);
        if (!cfg.u0)
        {
            for (int n = 0; n < ocp.N; ++n)
                for (int j = 0; j < ocp.m; ++j)
                    grid(j, n) = inst.default_control(j);
        }
        else if (cfg.u0->size() == 1 || static_cast<int>(cfg.u0->size()) == ocp.m)
        {
            const Vector v = sized(*cfg.u0, ocp.m, "u0");
            for (int n = 0; n < ocp.N; ++n)
                for (int j = 0; j < ocp.m; ++j)
                    grid(j, n) = v(j);
        }
        else if (static_cast<int>(cfg.u0->size()) == ocp.m * ocp.N)
        {
            grid = ControlGrid::from_flat(to_vector(*cfg.u0), ocp.m);
        }
        else
        {
            invalid("u0", "expected 1, m or m*N values");
        }
        return grid.projected(ocp.u_lo, ocp.u_hi);
    }

    ButcherTableau tableau_from_json(const nlohmann::json &j, const std::string &origin)
    {
        auto bad = [&](const std::string &what) { fail(ErrorCode::ParseError, origin + ": " + what); };
        if (!j.is_object() || !j.contains("A") || !j.contains("b") || !j.contains("c"))
            bad("a tableau needs fields A, b and c");
        const auto b = numbers(j["b"], "b");
        const auto c = numbers(j["c"], "c");
        const auto s = static_cast<Eigen::Index>(b.size());
        if (!j["A"].is_array() || static_cast<Eigen::Index>(j["A"].size()) != s)
            bad("A must have one row per stage");
        Matrix a(s, s);
        for (Eigen::Index i = 0; i < s; ++i)
        {
            const auto row = numbers(j["A"][i], "A[" + std::to_string(i) + "]");
            if (static_cast<Eigen::Index>(row.size()) != s)
                bad("row " + std::to_string(i) + " of A has the wrong length");
            for (Eigen::Index k = 0; k < s; ++k)
                a(i, k) = row[k];
        }
        const std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : origin;
        return ButcherTableau(name, a, to_vector(b), to_vector(c));
    }

    ButcherTableau load_tableau(const std::string &name)
    {
        if (name == "radau-iia-3")
            return radau_iia_3();
        if (name == "radau-ia-3")
            return radau_ia_3();
        std::ifstream in(name);
        if (!in)
        {
            fail(ErrorCode::IoError, "tableau: '" + name + "' is neither a built-in name nor a readable file");
        }
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(in);
        }
        catch (const nlohmann::json::parse_error &e)
        {
            fail(ErrorCode::ParseError, name + ": " + e.what());
        }
        return tableau_from_json(j, name);
    }

} // namespace slidoc
