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

#include "slidoc/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "slidoc/config.hpp"
#include "slidoc/gradient.hpp"
#include "slidoc/verify.hpp"

namespace slidoc
{

    namespace
    {
        using ojson = nlohmann::ordered_json;
        constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

        struct Options
        {
            std::string problem;
            std::string config;
            std::string out;
            int steps_per_interval = 0;
            std::string functional = "phi";
            double eps = 1e-6;
            std::string history_csv;
            std::string quantity;
            std::vector<double> h = {0.1, 0.05, 0.025, 0.0125};
            std::string tableau;
            int max_order = 5;
        };

        std::string num(double v)
        {
            if (std::isnan(v))
            {
                return "nan";
            }
            std::ostringstream os;
            os << std::setprecision(17) << v;
            return os.str();
        }

        ojson vec(const Vector &v) { return ojson(std::vector<double>(v.data(), v.data() + v.size())); }

        ojson grid_json(const Vector &flat, int m)
        {
            ojson rows = ojson::array();
            for (Eigen::Index n = 0; n < flat.size() / m; ++n)
            {
                rows.push_back(vec(flat.segment(n * m, m)));
            }
            return rows;
        }

        ojson meta(const RunConfig &cfg)
        {
            ojson m;
            m["tool"] = "slidoc";
            m["version"] = kVersion;
            m["config_hash"] = config_hash(cfg);
            m["tolerances"] = {{"newton_tol", cfg.newton_tol},
                               {"event_tol", cfg.event_tol},
                               {"surface_tol", cfg.surface_tol},
                               {"denominator_tol", cfg.denominator_tol},
                               {"tangential_tol", cfg.tangential_tol}};
            return m;
        }

        void write_text(const std::string &path, const std::string &text, std::ostream &out)
        {
            if (path.empty())
            {
                out << text;
                return;
            }
            std::ofstream file(path, std::ios::binary);
            if (!file)
            {
                fail(ErrorCode::IoError, "cannot write '" + path + "'");
            }
            file << text;
            if (!file)
            {
                fail(ErrorCode::IoError, "write to '" + path + "' failed");
            }
        }

        void write_json(const std::string &path, const ojson &j, std::ostream &out)
        {
            write_text(path, j.dump(2) + "\n", out);
        }

        RunConfig load_config(const Options &o)
        {
            RunConfig cfg = o.config.empty() ? RunConfig{} : parse_config(o.config);
            if (!o.problem.empty())
            {
                cfg.problem = o.problem;
            }
            if (o.steps_per_interval != 0)
            {
                cfg.steps_per_interval = o.steps_per_interval;
            }
            validate_config(cfg);
            return cfg;
        }

        int cmd_simulate(const Options &o, std::ostream &out)
        {
            const RunConfig cfg = load_config(o);
            const auto inst = build_problem(cfg);
            const HybridOCP &ocp = inst.ocp;
            const auto tab = load_tableau(cfg.tableau);
            const auto traj = integrate(ocp, initial_control(cfg, inst), tab, integrator_options(cfg));

            std::ostringstream csv;
            csv << "k,t,mode";
            for (int i = 0; i < ocp.n; ++i)
                csv << ",x" << i;
            csv << ",z,g,alpha\n";
            for (int k = 0; k <= traj.K(); ++k)
            {
                const bool last = k == traj.K();
                const Mode mode = last ? traj.final_mode() : traj.steps[k].mode;
                const Vector &u = last ? traj.steps.back().u : traj.steps[k].u;
                double a = kNaN;
                try
                {
                    a = alpha(ocp, traj.x[k], u);
                }
                catch (const Error &)
                {
                    // no Filippov coefficient where the fields are parallel to the surface
                }
                csv << k << "," << num(traj.t[k]) << "," << to_string(mode);
                for (int i = 0; i < ocp.n; ++i)
                    csv << "," << num(traj.x[k](i));
                csv << "," << num(traj.z[k]) << "," << num(ocp.surface.value(traj.x[k])) << "," << num(a) << "\n";
            }
            write_text(o.out, csv.str(), out);

            ojson side;
            side["meta"] = meta(cfg);
            side["problem"] = ocp.name;
            side["steps"] = traj.K();
            ojson trs = ojson::array();
            for (const auto &tr : traj.transitions)
            {
                trs.push_back({{"t_t", tr.t},
                               {"kind", std::string(to_string(tr.kind))},
                               {"k_t", tr.k},
                               {"x_minus", vec(tr.x_minus)},
                               {"x_plus", vec(tr.x_plus)}});
            }
            side["transitions"] = trs;
            write_json(o.out + ".json", side, out);
            return 0;
        }

        int cmd_adjoint(const Options &o, std::ostream &out)
        {
            const RunConfig cfg = load_config(o);
            const auto inst = build_problem(cfg);
            const HybridOCP &ocp = inst.ocp;
            const auto tab = load_tableau(cfg.tableau);
            const auto id = FunctionalId::parse(o.functional);
            ocp.functional(id);
            const auto traj = integrate(ocp, initial_control(cfg, inst), tab, integrator_options(cfg));
            const auto adj = run_adjoint(ocp, tab, traj, id);

            std::ostringstream csv;
            csv << "k,t";
            for (int i = 0; i < ocp.n; ++i)
                csv << ",lambda" << i;
            csv << ",lambda_g\n";
            for (int k = 0; k <= traj.K(); ++k)
            {
                csv << k << "," << num(traj.t[k]);
                for (int i = 0; i < ocp.n; ++i)
                    csv << "," << num(adj.lambda[k](i));
                csv << "," << num(adj.lambda_g[k]) << "\n";
            }
            write_text(o.out, csv.str(), out);

            ojson side;
            side["meta"] = meta(cfg);
            side["problem"] = ocp.name;
            side["functional"] = id.label();
            side["sliding_terminal"] = adj.sliding_terminal;
            side["nu1"] = adj.nu1;
            side["lambda_g_tf"] = adj.sliding_terminal ? ojson(adj.lambda_g_tf) : ojson(nullptr);
            ojson jumps = ojson::array();
            for (const auto &j : adj.jumps)
            {
                jumps.push_back({{"t_t", j.t},
                                 {"k_t", j.k},
                                 {"kind", std::string(to_string(j.kind))},
                                 {"pi", j.pi},
                                 {"residual", j.residual},
                                 {"lambda_minus", vec(j.lambda_minus)},
                                 {"lambda_plus", vec(j.lambda_plus)}});
            }
            side["jumps"] = jumps;
            write_json(o.out + ".json", side, out);
            return 0;
        }

        int cmd_gradient(const Options &o, std::ostream &out)
        {
            const RunConfig cfg = load_config(o);
            const auto inst = build_problem(cfg);
            const HybridOCP &ocp = inst.ocp;
            const auto tab = load_tableau(cfg.tableau);
            const auto id = FunctionalId::parse(o.functional);
            ocp.functional(id);
            const auto traj = integrate(ocp, initial_control(cfg, inst), tab, integrator_options(cfg));
            const auto grad = reduced_gradient(ocp, tab, traj, run_adjoint(ocp, tab, traj, id));

            ojson j;
            j["meta"] = meta(cfg);
            j["problem"] = ocp.name;
            j["functional"] = id.label();
            j["grad"] = grid_json(grad, ocp.m);
            write_json(o.out, j, out);
            return 0;
        }

        int cmd_check_gradient(const Options &o, std::ostream &out)
        {
            const RunConfig cfg = load_config(o);
            const auto inst = build_problem(cfg);
            const HybridOCP &ocp = inst.ocp;
            const auto tab = load_tableau(cfg.tableau);
            const auto checks = check_gradient(ocp, tab, initial_control(cfg, inst), o.eps, integrator_options(cfg));

            ojson j;
            j["meta"] = meta(cfg);
            j["problem"] = ocp.name;
            j["eps"] = o.eps;
            ojson arr = ojson::array();
            for (const auto &c : checks)
            {
                ojson entries = ojson::array();
                for (const auto &e : c.entries)
                {
                    entries.push_back({{"interval", e.interval},
                                       {"component", e.component},
                                       {"adjoint", e.adjoint},
                                       {"fd", e.fd},
                                       {"rel_error", e.rel_error},
                                       {"structure_change", e.structure_change}});
                }
                arr.push_back({{"functional", c.functional.label()},
                               {"max_rel_error", c.max_rel_error},
                               {"excluded", c.excluded},
                               {"entries", entries}});
            }
            j["checks"] = arr;
            write_json(o.out, j, out);
            return 0;
        }

        int cmd_optimize(const Options &o, std::ostream &out, std::ostream &err)
        {
            const RunConfig cfg = load_config(o);
            const auto inst = build_problem(cfg);
            const HybridOCP &ocp = inst.ocp;
            const auto tab = load_tableau(cfg.tableau);
            HybridNlp nlp(ocp, tab, integrator_options(cfg));
            const auto pcfg = penalty_config(cfg, nlp.dimension());
            const auto res = optimize(nlp, initial_control(cfg, inst).flat(), pcfg);

            ojson j;
            j["meta"] = meta(cfg);
            j["problem"] = ocp.name;
            j["converged"] = res.converged;
            j["iterations"] = static_cast<int>(res.history.size()) - 1;
            j["H_bounds"] = {pcfg.nu1_bound, pcfg.nu2_bound};
            j["u_final"] = grid_json(res.u, ocp.m);
            ojson hist = ojson::array();
            std::ostringstream csv;
            csv << "k,F0,M,c,sigma,alpha\n";
            for (const auto &r : res.history)
            {
                hist.push_back({{"k", r.k},
                                {"u", grid_json(r.u, ocp.m)},
                                {"c", r.c},
                                {"d", vec(r.d)},
                                {"beta", r.beta},
                                {"sigma", r.sigma},
                                {"t_c", r.t_c},
                                {"alpha", r.alpha},
                                {"F0", r.f0},
                                {"M", r.violation},
                                {"penalty", r.penalty},
                                {"penalty_next", r.penalty_next},
                                {"kkt_residual", r.kkt_residual}});
                csv << r.k << "," << num(r.f0) << "," << num(r.violation) << "," << num(r.c) << "," << num(r.sigma)
                    << "," << num(r.alpha) << "\n";
            }
            j["history"] = hist;
            write_json(o.out, j, out);
            if (!o.history_csv.empty())
            {
                write_text(o.history_csv, csv.str(), out);
            }
            if (!res.converged)
            {
                ojson e = {{"error", std::string(to_string(ErrorCode::MaxIters))},
                           {"message", "optimize: |sigma| above epsilon after " + std::to_string(cfg.max_iters) +
                                           " iterations"}};
                err << e.dump() << "\n";
                return 1;
            }
            return 0;
        }

        int cmd_verify_orders(const Options &o, std::ostream &out)
        {
            const RunConfig cfg = load_config(o);
            const auto inst = build_problem(cfg);
            const HybridOCP &ocp = inst.ocp;
            const auto tab = load_tableau(cfg.tableau);
            const auto q = parse_order_quantity(o.quantity);
            const auto rep = order_study(ocp, tab, initial_control(cfg, inst), q, o.h, integrator_options(cfg));

            ojson j;
            j["meta"] = meta(cfg);
            j["problem"] = ocp.name;
            j["quantity"] = std::string(to_string(q));
            j["h"] = rep.h;
            j["errors"] = rep.errors;
            j["pairwise_orders"] = rep.pairwise_orders;
            j["slope"] = rep.slope;
            j["h_ref"] = rep.h_ref;
            j["reference_gap"] = rep.reference_gap;
            write_json(o.out, j, out);
            return 0;
        }

        ojson tableau_json(const ButcherTableau &t, int max_order)
        {
            const auto rep = check_conditions(t, max_order);
            ojson a = ojson::array();
            for (int i = 0; i < t.stages(); ++i)
            {
                a.push_back(vec(t.a().row(i).transpose()));
            }
            return {{"name", t.name()},
                    {"stages", t.stages()},
                    {"A", a},
                    {"b", vec(t.b())},
                    {"c", vec(t.c())},
                    {"p", rep.p},
                    {"q", rep.q},
                    {"r", rep.r},
                    {"B_residuals", rep.b_residuals},
                    {"C_residuals", rep.c_residuals},
                    {"D_residuals", rep.d_residuals},
                    {"stiffly_accurate", t.stiffly_accurate()}};
        }

        int cmd_tableau_check(const Options &o, std::ostream &out)
        {
            RunConfig cfg = o.config.empty() ? RunConfig{} : parse_config(o.config);
            if (!o.tableau.empty())
            {
                cfg.tableau = o.tableau;
            }
            const auto tab = load_tableau(cfg.tableau);
            const auto adj = adjoint_tableau(tab);

            ojson j;
            j["meta"] = meta(cfg);
            j["max_order"] = o.max_order;
            j["tableau"] = tableau_json(tab, o.max_order);
            j["adjoint"] = tableau_json(adj, o.max_order);
            if (cfg.tableau == "radau-iia-3")
            {
                j["adjoint_vs_radau_ia"] = max_entry_difference(adj, radau_ia_3());
            }
            write_json(o.out, j, out);
            return 0;
        }

        void report(std::ostream &err, std::string_view code, const std::string &message)
        {
            ojson e = {{"error", std::string(code)}, {"message", message}};
            err << e.dump() << "\n";
        }
    } // namespace

    int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
    {
        Options o;
        CLI::App app{"slidoc: sliding-mode optimal control with discrete adjoints", "slidoc"};
        app.set_help_flag("--help", "print this help");
        app.require_subcommand(1);
        app.set_version_flag("--version", kVersion);

        auto common = [&](CLI::App *sub, bool out_required) {
            sub->add_option("--problem", o.problem, "built-in problem name");
            sub->add_option("--config", o.config, "JSON config file");
            auto *opt = sub->add_option("--out", o.out, "output file");
            if (out_required)
            {
                opt->required();
            }
            sub->add_option("--steps-per-interval", o.steps_per_interval, "integration steps per control interval");
        };

        auto *simulate = app.add_subcommand("simulate", "integrate the hybrid system (CSV + transitions sidecar)");
        common(simulate, true);
        auto *adjoint = app.add_subcommand("adjoint", "discrete adjoint of one functional (CSV + sidecar)");
        common(adjoint, true);
        adjoint->add_option("--functional", o.functional, "phi, g1:i or g2:j");
        auto *gradient = app.add_subcommand("gradient", "reduced gradient of one functional");
        common(gradient, false);
        gradient->add_option("--functional", o.functional, "phi, g1:i or g2:j");
        auto *check = app.add_subcommand("check-gradient", "adjoint gradients against central differences");
        common(check, false);
        check->add_option("--eps", o.eps, "finite-difference step");
        auto *opt = app.add_subcommand("optimize", "exact penalty descent");
        common(opt, false);
        opt->add_option("--history-csv", o.history_csv, "per-iteration CSV");
        auto *orders = app.add_subcommand("verify-orders", "self-convergence order study");
        common(orders, false);
        orders->add_option("--quantity", o.quantity, "state_endpoint|state_stage|adjoint_endpoint|adjoint_stage|gradient")
            ->required();
        orders->add_option("--h", o.h, "step sizes")->delimiter(',');
        auto *tcheck = app.add_subcommand("tableau-check", "simplifying conditions of a tableau and its adjoint");
        tcheck->add_option("--config", o.config, "JSON config file");
        tcheck->add_option("--tableau", o.tableau, "built-in name or JSON file");
        tcheck->add_option("--max-order", o.max_order, "highest order checked");
        tcheck->add_option("--out", o.out, "output file");

        std::vector<const char *> argv;
        for (const auto &a : args)
        {
            argv.push_back(a.c_str());
        }
        try
        {
            app.parse(static_cast<int>(argv.size()), argv.data());
        }
        catch (const CLI::CallForHelp &)
        {
            out << app.help();
            return 0;
        }
        catch (const CLI::CallForVersion &)
        {
            out << kVersion << "\n";
            return 0;
        }
        catch (const CLI::ParseError &e)
        {
            report(err, to_string(ErrorCode::UsageError), e.what());
            return 2;
        }

        try
        {
            if (*simulate)
                return cmd_simulate(o, out);
            if (*adjoint)
                return cmd_adjoint(o, out);
            if (*gradient)
                return cmd_gradient(o, out);
            if (*check)
                return cmd_check_gradient(o, out);
            if (*opt)
                return cmd_optimize(o, out, err);
            if (*orders)
                return cmd_verify_orders(o, out);
            if (*tcheck)
                return cmd_tableau_check(o, out);
        }
        catch (const Error &e)
        {
            report(err, to_string(e.code()), e.what());
            return e.code() == ErrorCode::UsageError ? 2 : 1;
        }
        catch (const std::exception &e)
        {
            report(err, "InternalError", e.what());
            return 1;
        }
        report(err, to_string(ErrorCode::UsageError), "no subcommand given");
        return 2;
    }

} // namespace slidoc
