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

#include "slidoc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slidoc/parallel.hpp"

namespace slidoc
{

    namespace
    {
        struct Run
        {
            Trajectory traj;
            AdjointTrajectory adj;
            GradientVector grad;
        };

        bool needs_adjoint(OrderQuantity q) { return q != OrderQuantity::StateEndpoint && q != OrderQuantity::StateStage; }

        bool is_stage(OrderQuantity q) { return q == OrderQuantity::StateStage || q == OrderQuantity::AdjointStage; }

        Run run_at(const HybridOCP &ocp, const ButcherTableau &tab, const ControlGrid &u, OrderQuantity q, int spi,
                   IntegratorOptions opts, const std::vector<double> &extra)
        {
            opts.steps_per_interval = spi;
            opts.extra_nodes = extra;
            Run r;
            r.traj = integrate(ocp, u, tab, opts);
            if (needs_adjoint(q))
            {
                r.adj = run_adjoint(ocp, tab, r.traj, FunctionalId{});
            }
            if (q == OrderQuantity::Gradient)
            {
                r.grad = reduced_gradient(ocp, tab, r.traj, r.adj);
            }
            return r;
        }

        int steps_for(const HybridOCP &ocp, double h)
        {
            const double exact = (ocp.tf - ocp.t0) / (ocp.N * h);
            const double spi = std::round(exact);
            if (!(h > 0.0) || spi < 1.0 || std::abs(spi - exact) > 1e-9 * exact)
            {
                std::ostringstream os;
                os << "order_study: h = " << h << " does not divide the control interval length "
                   << (ocp.tf - ocp.t0) / ocp.N;
                fail(ErrorCode::ValidationError, os.str());
            }
            return static_cast<int>(spi);
        }

        /// Stage times t(k) + c_i h of a run, step-major.
        std::vector<double> stage_times(const Trajectory &traj, const ButcherTableau &tab)
        {
            std::vector<double> times;
            for (const auto &st : traj.steps)
            {
                for (int i = 0; i < tab.stages(); ++i)
                {
                    times.push_back(st.t + tab.c(i) * st.h);
                }
            }
            return times;
        }

        /// Quantity sampled on the run's own mesh.
        Vector own_values(OrderQuantity q, const Run &r)
        {
            const int n = r.traj.n;
            const int s = r.traj.s;
            switch (q)
            {
            case OrderQuantity::StateEndpoint:
                return r.traj.x.back();
            case OrderQuantity::AdjointEndpoint:
                return r.adj.lambda.front();
            case OrderQuantity::Gradient:
                return r.grad;
            case OrderQuantity::StateStage:
            case OrderQuantity::AdjointStage:
            {
                Vector out(r.traj.K() * s * n);
                for (int k = 0; k < r.traj.K(); ++k)
                {
                    const Matrix &src = q == OrderQuantity::StateStage ? r.traj.steps[k].stages : r.adj.stage_lambda[k];
                    for (int i = 0; i < s; ++i)
                    {
                        out.segment((k * s + i) * n, n) = src.col(i);
                    }
                }
                return out;
            }
            }
            return {};
        }

        int node_at(const Trajectory &traj, double t)
        {
            const auto it = std::lower_bound(traj.t.begin(), traj.t.end(), t);
            int best = -1;
            double gap = 1e300;
            for (auto cand : {it, it == traj.t.begin() ? it : it - 1})
            {
                if (cand != traj.t.end() && std::abs(*cand - t) < gap)
                {
                    gap = std::abs(*cand - t);
                    best = static_cast<int>(cand - traj.t.begin());
                }
            }
            if (best < 0 || gap > 1e-12 * (traj.t.back() - traj.t.front()))
            {
                fail(ErrorCode::MeshMismatch, "order_study: reference mesh lacks a node at a stage time");
            }
            return best;
        }

        /// Reference quantity matching own_values of a coarse run with the given stage times.
        Vector reference_values(OrderQuantity q, const Run &ref, const std::vector<double> &times)
        {
            if (!is_stage(q))
            {
                return own_values(q, ref);
            }
            const int n = ref.traj.n;
            Vector out(static_cast<Eigen::Index>(times.size()) * n);
            for (std::size_t j = 0; j < times.size(); ++j)
            {
                const int k = node_at(ref.traj, times[j]);
                out.segment(static_cast<Eigen::Index>(j) * n, n) =
                    q == OrderQuantity::StateStage ? ref.traj.x[k] : ref.adj.lambda[k];
            }
            return out;
        }
    } // namespace

    double central_difference(const std::function<double(double)> &w, double x, double eps)
    {
        if (!(eps > 0.0))
        {
            fail(ErrorCode::ValidationError, "central_difference: step must be positive");
        }
        return (w(x + eps) - w(x - eps)) / (2.0 * eps);
    }

    FdGradient fd_gradient(const HybridOCP &ocp, const ButcherTableau &tab, const ControlGrid &u,
                           const std::vector<FunctionalId> &functionals, double eps, const IntegratorOptions &opts)
    {
        if (!(eps > 0.0))
        {
            fail(ErrorCode::ValidationError, "fd_gradient: step must be positive");
        }
        const Vector base = u.flat();
        const auto dim = base.size();
        const auto base_kinds = integrate(ocp, u, tab, opts).transition_kinds();

        FdGradient out;
        out.functionals = functionals;
        out.gradients.assign(functionals.size(), Vector::Zero(dim));
        out.structure_change.assign(static_cast<std::size_t>(dim), false);
        out.steps.assign(static_cast<std::size_t>(dim), 0.0);

        auto evaluate = [&](const Vector &flat, std::vector<TransitionKind> &kinds) {
            const auto traj = integrate(ocp, ControlGrid::from_flat(flat, ocp.m), tab, opts);
            kinds = traj.transition_kinds();
            Vector w(static_cast<Eigen::Index>(functionals.size()));
            for (std::size_t f = 0; f < functionals.size(); ++f)
            {
                w(static_cast<Eigen::Index>(f)) = ocp.functional(functionals[f]).value(traj.x.back());
            }
            return w;
        };

        std::vector<Vector> diffs(static_cast<std::size_t>(dim));
        parallel_for(static_cast<std::size_t>(dim), [&](std::size_t e) {
            const double step = eps * std::max(1.0, std::abs(base(static_cast<Eigen::Index>(e))));
            Vector up = base;
            Vector down = base;
            up(static_cast<Eigen::Index>(e)) += step;
            down(static_cast<Eigen::Index>(e)) -= step;
            std::vector<TransitionKind> k_up;
            std::vector<TransitionKind> k_down;
            const Vector w_up = evaluate(up, k_up);
            const Vector w_down = evaluate(down, k_down);
            diffs[e] = (w_up - w_down) / (2.0 * step);
            out.structure_change[e] = k_up != base_kinds || k_down != base_kinds;
            out.steps[e] = step;
        });
        for (Eigen::Index e = 0; e < dim; ++e)
        {
            for (std::size_t f = 0; f < functionals.size(); ++f)
            {
                out.gradients[f](e) = diffs[static_cast<std::size_t>(e)](static_cast<Eigen::Index>(f));
            }
        }
        return out;
    }

    std::vector<GradientCheck> check_gradient(const HybridOCP &ocp, const ButcherTableau &tab, const ControlGrid &u,
                                              double eps, const IntegratorOptions &opts)
    {
        const auto ids = ocp.functionals();
        const auto traj = integrate(ocp, u, tab, opts);
        const auto adjs = run_all_adjoints(ocp, tab, traj);
        const auto fd = fd_gradient(ocp, tab, u, ids, eps, opts);

        std::vector<GradientCheck> out;
        for (std::size_t f = 0; f < ids.size(); ++f)
        {
            const GradientVector grad = reduced_gradient(ocp, tab, traj, adjs[f]);
            const Vector &oracle = fd.gradients[f];
            const double scale = std::max(oracle.cwiseAbs().maxCoeff(), 1e-300);
            GradientCheck check;
            check.functional = ids[f];
            for (Eigen::Index e = 0; e < grad.size(); ++e)
            {
                GradientCheckEntry entry;
                entry.interval = static_cast<int>(e / ocp.m);
                entry.component = static_cast<int>(e % ocp.m);
                entry.adjoint = grad(e);
                entry.fd = oracle(e);
                entry.rel_error = std::abs(grad(e) - oracle(e)) / scale;
                entry.structure_change = fd.structure_change[static_cast<std::size_t>(e)];
                if (entry.structure_change)
                {
                    ++check.excluded;
                }
                else
                {
                    check.max_rel_error = std::max(check.max_rel_error, entry.rel_error);
                }
                check.entries.push_back(entry);
            }
            out.push_back(std::move(check));
        }
        return out;
    }

    std::string_view to_string(OrderQuantity q)
    {
        switch (q)
        {
        case OrderQuantity::StateEndpoint:
            return "state_endpoint";
        case OrderQuantity::StateStage:
            return "state_stage";
        case OrderQuantity::AdjointEndpoint:
            return "adjoint_endpoint";
        case OrderQuantity::AdjointStage:
            return "adjoint_stage";
        case OrderQuantity::Gradient:
            return "gradient";
        }
        return "?";
    }

    OrderQuantity parse_order_quantity(std::string_view text)
    {
        for (auto q : {OrderQuantity::StateEndpoint, OrderQuantity::StateStage, OrderQuantity::AdjointEndpoint,
                       OrderQuantity::AdjointStage, OrderQuantity::Gradient})
        {
            if (to_string(q) == text)
            {
                return q;
            }
        }
        fail(ErrorCode::UsageError, "unknown quantity '" + std::string(text) + "'");
    }

    double fitted_slope(const std::vector<double> &h, const std::vector<double> &errors)
    {
        const auto count = static_cast<double>(h.size());
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i)
        {
            const double lx = std::log(h[i]);
            const double ly = std::log(errors[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        return (count * sxy - sx * sy) / (count * sxx - sx * sx);
    }

    OrderReport order_study(const HybridOCP &ocp, const ButcherTableau &tab, const ControlGrid &u,
                            OrderQuantity quantity, const std::vector<double> &h, const IntegratorOptions &opts)
    {
        if (h.size() < 2)
        {
            fail(ErrorCode::ValidationError, "order_study: at least two step sizes are needed");
        }
        for (std::size_t i = 1; i < h.size(); ++i)
        {
            if (!(h[i] < h[i - 1]))
            {
                fail(ErrorCode::ValidationError, "order_study: h must be strictly decreasing");
            }
        }
        OrderReport report;
        report.quantity = quantity;
        report.h = h;

        std::vector<Run> runs(h.size());
        std::vector<int> spi(h.size());
        for (std::size_t i = 0; i < h.size(); ++i)
        {
            spi[i] = steps_for(ocp, h[i]);
        }
        parallel_for(h.size(), [&](std::size_t i) { runs[i] = run_at(ocp, tab, u, quantity, spi[i], opts, {}); });

        std::vector<std::vector<double>> times(h.size());
        std::vector<double> extra;
        if (is_stage(quantity))
        {
            for (std::size_t i = 0; i < h.size(); ++i)
            {
                times[i] = stage_times(runs[i].traj, tab);
                extra.insert(extra.end(), times[i].begin(), times[i].end());
            }
        }

        report.h_ref = h.back() / 8.0;
        const int spi_ref = spi.back() * 8;
        std::vector<Run> refs(2);
        parallel_for(2, [&](std::size_t j) {
            refs[j] = run_at(ocp, tab, u, quantity, spi_ref * (j == 0 ? 1 : 2), opts, extra);
        });

        for (std::size_t i = 0; i < h.size(); ++i)
        {
            const Vector fine = reference_values(quantity, refs[0], times[i]);
            const Vector finer = reference_values(quantity, refs[1], times[i]);
            const double gap = (fine - finer).cwiseAbs().maxCoeff();
            report.reference_gap = std::max(report.reference_gap, gap);
            if (gap > 1e-12 * std::max(1.0, fine.cwiseAbs().maxCoeff()))
            {
                std::ostringstream os;
                os << "order_study: references at h = " << report.h_ref << " and " << report.h_ref / 2
                   << " differ by " << gap;
                fail(ErrorCode::ReferenceUnconverged, os.str());
            }
            const Vector own = own_values(quantity, runs[i]);
            if (own.size() != finer.size())
            {
                fail(ErrorCode::MeshMismatch, "order_study: quantity sizes differ between run and reference");
            }
            const double err = (own - finer).cwiseAbs().maxCoeff();
            if (!(err > 0.0))
            {
                fail(ErrorCode::ValidationError, "order_study: zero error at h = " + std::to_string(h[i]) +
                                                     ", the quantity is reproduced exactly");
            }
            report.errors.push_back(err);
        }
        for (std::size_t i = 0; i + 1 < h.size(); ++i)
        {
            report.pairwise_orders.push_back(std::log(report.errors[i] / report.errors[i + 1]) /
                                             std::log(h[i] / h[i + 1]));
        }
        report.slope = fitted_slope(report.h, report.errors);
        return report;
    }

} // namespace slidoc
