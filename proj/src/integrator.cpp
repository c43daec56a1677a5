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

#include "slidoc/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace slidoc
{

    namespace
    {
        constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

        /// Newton iteration on y with a final polishing correction from the last
        /// factorization. Returns the number of Jacobian factorizations.
        template <class Residual, class Jacobian>
        int newton_solve(Vector &y, double scale, Residual &&residual, Jacobian &&jacobian, const NewtonOptions &opts,
                         const char *what)
        {
            const double tol = opts.tol * std::max(1.0, scale);
            std::optional<CheckedLU> lu;
            for (int it = 0; it <= opts.max_iters; ++it)
            {
                Vector r = residual(y);
                const double norm = r.cwiseAbs().maxCoeff();
                if (!std::isfinite(norm))
                {
                    break;
                }
                if (norm <= tol)
                {
                    if (lu && norm > 1e-15 * std::max(1.0, scale))
                    {
                        Vector polished = y + lu->solve(Vector(-r));
                        if (residual(polished).cwiseAbs().maxCoeff() < norm)
                        {
                            y = std::move(polished);
                        }
                    }
                    return it;
                }
                if (it == opts.max_iters)
                {
                    break;
                }
                lu.emplace(jacobian(y), ErrorCode::SingularIteration, what);
                y -= lu->solve(r);
            }
            std::ostringstream os;
            os << what << ": Newton iteration did not reach residual " << tol << " in " << opts.max_iters
               << " iterations";
            fail(ErrorCode::NewtonDivergence, os.str());
        }

        double sign(double v) { return (v > 0.0) - (v < 0.0); }
    } // namespace

    OdeRhs region_rhs(const HybridOCP &ocp, Mode mode, const Vector &u)
    {
        if (mode == Mode::Sliding)
        {
            return {
                [&ocp, u](const Vector &x) { return filippov_field(ocp, x, u).value; },
                [&ocp, u](const Vector &x) { return filippov_dx(ocp, x, u); },
            };
        }
        const VectorField &f = ocp.field(mode);
        return {
            [&f, u](const Vector &x) { return f.value(x, u); },
            [&f, u](const Vector &x) { return f.dx(x, u); },
        };
    }

    OdeStepResult step_ode(const OdeRhs &f, const Vector &x, double h, const ButcherTableau &tab,
                           const NewtonOptions &opts)
    {
        if (!(h > 0.0))
        {
            fail(ErrorCode::ValidationError, "step_ode: step size must be positive");
        }
        const int s = tab.stages();
        const auto n = x.size();
        const Matrix &a = tab.a();

        Vector y(s * n);
        for (int i = 0; i < s; ++i)
        {
            y.segment(i * n, n) = x;
        }

        auto residual = [&](const Vector &yy) {
            Matrix fv(n, s);
            for (int j = 0; j < s; ++j)
            {
                fv.col(j) = f.value(yy.segment(j * n, n));
            }
            Vector r(s * n);
            for (int i = 0; i < s; ++i)
            {
                r.segment(i * n, n) = yy.segment(i * n, n) - x - h * (fv * a.row(i).transpose());
            }
            return r;
        };
        auto jacobian = [&](const Vector &yy) {
            Matrix jac = Matrix::Identity(s * n, s * n);
            for (int j = 0; j < s; ++j)
            {
                const Matrix fx = f.jacobian(yy.segment(j * n, n));
                for (int i = 0; i < s; ++i)
                {
                    jac.block(i * n, j * n, n, n) -= h * a(i, j) * fx;
                }
            }
            return jac;
        };

        OdeStepResult out;
        out.newton_iterations = newton_solve(y, x.cwiseAbs().maxCoeff(), residual, jacobian, opts, "step_ode");
        out.stages.resize(n, s);
        Vector incr = Vector::Zero(n);
        for (int i = 0; i < s; ++i)
        {
            out.stages.col(i) = y.segment(i * n, n);
            incr += tab.b(i) * f.value(out.stages.col(i));
        }
        out.x_plus = x + h * incr;
        return out;
    }

    OdeStepResult step_ode(const HybridOCP &ocp, Mode field, const Vector &x, const Vector &u, double h,
                           const ButcherTableau &tab, const NewtonOptions &opts)
    {
        return step_ode(region_rhs(ocp, field, u), x, h, tab, opts);
    }

    DaeStepResult step_dae_sliding(const HybridOCP &ocp, const Vector &x, const Vector &u, double h,
                                   const ButcherTableau &tab, const NewtonOptions &opts, double z_guess)
    {
        if (!(h > 0.0))
        {
            fail(ErrorCode::ValidationError, "step_dae_sliding: step size must be positive");
        }
        if (!tab.stiffly_accurate())
        {
            fail(ErrorCode::InvalidTableau, "step_dae_sliding: tableau '" + tab.name() + "' is not stiffly accurate");
        }
        const int s = tab.stages();
        const auto n = x.size();
        const Matrix &a = tab.a();
        const auto xs = s * n; // offset of the multiplier block

        Vector y(s * (n + 1));
        for (int i = 0; i < s; ++i)
        {
            y.segment(i * n, n) = x;
            y(xs + i) = z_guess;
        }

        auto residual = [&](const Vector &yy) {
            Matrix rhs(n, s);
            for (int j = 0; j < s; ++j)
            {
                const Vector xj = yy.segment(j * n, n);
                rhs.col(j) = filippov_field(ocp, xj, u).value + ocp.surface.gradient(xj) * yy(xs + j);
            }
            Vector r(s * (n + 1));
            for (int i = 0; i < s; ++i)
            {
                r.segment(i * n, n) = yy.segment(i * n, n) - x - h * (rhs * a.row(i).transpose());
                r(xs + i) = ocp.surface.value(yy.segment(i * n, n));
            }
            return r;
        };
        auto jacobian = [&](const Vector &yy) {
            Matrix jac = Matrix::Zero(s * (n + 1), s * (n + 1));
            jac.topLeftCorner(xs, xs).setIdentity();
            for (int j = 0; j < s; ++j)
            {
                const Vector xj = yy.segment(j * n, n);
                const double zj = yy(xs + j);
                const Vector gx = ocp.surface.gradient(xj);
                const Matrix dfx = filippov_dx(ocp, xj, u) + zj * ocp.surface.hessian(xj);
                for (int i = 0; i < s; ++i)
                {
                    jac.block(i * n, j * n, n, n) -= h * a(i, j) * dfx;
                    jac.block(i * n, xs + j, n, 1) = -h * a(i, j) * gx;
                }
                jac.block(xs + j, j * n, 1, n) = gx.transpose();
            }
            return jac;
        };

        DaeStepResult out;
        out.newton_iterations =
            newton_solve(y, x.cwiseAbs().maxCoeff(), residual, jacobian, opts, "step_dae_sliding");
        out.stages.resize(n, s);
        out.z_stages.resize(s);
        for (int i = 0; i < s; ++i)
        {
            out.stages.col(i) = y.segment(i * n, n);
            out.z_stages(i) = y(xs + i);
        }
        out.x_plus = out.stages.col(s - 1);
        out.z_plus = out.z_stages(s - 1);
        return out;
    }

    double locate_event(const std::function<double(double)> &e, double lo, double hi, const EventOptions &opts)
    {
        double f_lo = e(lo);
        double f_hi = e(hi);
        if (f_lo == 0.0)
        {
            return lo;
        }
        if (f_hi == 0.0)
        {
            return hi;
        }
        if (sign(f_lo) == sign(f_hi) || !std::isfinite(f_lo) || !std::isfinite(f_hi))
        {
            std::ostringstream os;
            os << "locate_event: no sign change on [" << lo << ", " << hi << "] (e = " << f_lo << ", " << f_hi << ")";
            fail(ErrorCode::NoBracket, os.str());
        }

        // Iterate well past opts.tol: downstream finite differences resolve the
        // event time to roughly eps/step.
        const double tight = 1e-3 * opts.tol;
        int side = 0;
        double width_prev = hi - lo;
        for (int it = 0; it < opts.max_iters; ++it)
        {
            const double width = hi - lo;
            if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(lo), std::abs(hi), 1e-300}))
            {
                break;
            }
            double t = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            // bisect when regula falsi stalls or leaves the bracket
            if (!(t > lo && t < hi) || (it > 1 && width > 0.5 * width_prev))
            {
                t = 0.5 * (lo + hi);
                side = 0;
            }
            width_prev = width;
            const double ft = e(t);
            if (ft == 0.0 || std::abs(ft) <= tight)
            {
                return t;
            }
            if (sign(ft) == sign(f_hi))
            {
                hi = t;
                f_hi = ft;
                if (side == 1)
                {
                    f_lo *= 0.5;
                }
                side = 1;
            }
            else
            {
                lo = t;
                f_lo = ft;
                if (side == -1)
                {
                    f_hi *= 0.5;
                }
                side = -1;
            }
        }
        const double e_lo = std::abs(e(lo));
        const double e_hi = std::abs(e(hi));
        const double best = e_lo <= e_hi ? lo : hi;
        if (std::min(e_lo, e_hi) <= opts.tol)
        {
            return best;
        }
        std::ostringstream os;
        os << "locate_event: |e| = " << std::min(e_lo, e_hi) << " above tolerance " << opts.tol << " after "
           << opts.max_iters << " iterations";
        fail(ErrorCode::EventLocationFailure, os.str());
    }

    Mode Trajectory::final_mode() const
    {
        return steps.empty() ? Mode::Below : steps.back().mode;
    }

    std::vector<TransitionKind> Trajectory::transition_kinds() const
    {
        std::vector<TransitionKind> kinds;
        kinds.reserve(transitions.size());
        for (const auto &tr : transitions)
        {
            kinds.push_back(tr.kind);
        }
        return kinds;
    }

    double Trajectory::max_step() const
    {
        double h = 0.0;
        for (const auto &st : steps)
        {
            h = std::max(h, st.h);
        }
        return h;
    }

    namespace
    {
        struct StepAttempt
        {
            Matrix stages;
            Vector z_stages;
            Vector x_plus;
            double z_plus = kNaN;
        };

        /// Mesh nodes of each control interval: the uniform sub-grid plus any
        /// extra nodes that fall strictly inside the interval.
        std::vector<std::vector<double>> build_nodes(const std::vector<double> &bp, int spi,
                                                     const std::vector<double> &extra)
        {
            const int n_int = static_cast<int>(bp.size()) - 1;
            std::vector<std::vector<double>> nodes(n_int);
            const double span = bp.back() - bp.front();
            const double merge_tol = 1e-13 * span;
            for (int n = 0; n < n_int; ++n)
            {
                auto &v = nodes[n];
                for (int j = 1; j < spi; ++j)
                {
                    v.push_back(bp[n] + j * (bp[n + 1] - bp[n]) / spi);
                }
                for (double te : extra)
                {
                    if (te > bp[n] + merge_tol && te < bp[n + 1] - merge_tol)
                    {
                        v.push_back(te);
                    }
                }
                std::sort(v.begin(), v.end());
                std::vector<double> merged;
                for (double te : v)
                {
                    if (merged.empty() || te - merged.back() > merge_tol)
                    {
                        merged.push_back(te);
                    }
                }
                v = std::move(merged);
                v.push_back(bp[n + 1]);
            }
            return nodes;
        }

        class Integration
        {
        public:
            Integration(const HybridOCP &ocp, const ControlGrid &u, const ButcherTableau &tab,
                        const IntegratorOptions &opts)
                : ocp_(ocp), controls_(u), tab_(tab), opts_(opts)
            {
            }

            Trajectory run()
            {
                ocp_.validate();
                if (opts_.steps_per_interval < 1)
                {
                    fail(ErrorCode::ValidationError, "integrate: steps_per_interval must be >= 1");
                }
                if (controls_.m() != ocp_.m || controls_.intervals() != ocp_.N)
                {
                    fail(ErrorCode::DimensionMismatch, "integrate: control grid shape does not match the problem");
                }
                const auto bp = ocp_.breakpoints();
                const auto nodes = build_nodes(bp, opts_.steps_per_interval, opts_.extra_nodes);
                min_step_ = 1e-13 * (ocp_.tf - ocp_.t0);

                traj_.n = ocp_.n;
                traj_.s = tab_.stages();
                t_ = ocp_.t0;
                x_ = ocp_.x0;
                z_ = kNaN;
                init_mode(controls_.value(0));
                push_node();
                traj_.breakpoint_nodes.push_back(0);

                for (int n = 0; n < ocp_.N; ++n)
                {
                    interval_ = n;
                    u_ = controls_.value(n);
                    transitions_in_interval_ = 0;
                    if (mode_ == Mode::Sliding)
                    {
                        check_exit_at_node();
                    }
                    for (double target : nodes[n])
                    {
                        advance_to(target);
                    }
                    traj_.breakpoint_nodes.push_back(traj_.K());
                }
                return std::move(traj_);
            }

        private:
            void init_mode(const Vector &u)
            {
                const double g = ocp_.surface.value(x_);
                if (g < -opts_.surface_tol)
                {
                    mode_ = Mode::Below;
                }
                else if (g > opts_.surface_tol)
                {
                    mode_ = Mode::Above;
                }
                else
                {
                    mode_ = classify_on_surface(ocp_, x_, u);
                    if (mode_ == Mode::Sliding)
                    {
                        project_onto_surface();
                        z_ = 0.0;
                    }
                }
            }

            void push_node()
            {
                traj_.t.push_back(t_);
                traj_.x.push_back(x_);
                traj_.z.push_back(mode_ == Mode::Sliding ? z_ : kNaN);
            }

            void project_onto_surface()
            {
                const double g = ocp_.surface.value(x_);
                if (std::abs(g) > opts_.newton.tol)
                {
                    const Vector gx = ocp_.surface.gradient(x_);
                    x_ -= g * gx / gx.squaredNorm();
                }
            }

            StepAttempt attempt(double h) const
            {
                StepAttempt out;
                if (mode_ == Mode::Sliding)
                {
                    auto r = step_dae_sliding(ocp_, x_, u_, h, tab_, opts_.newton, std::isnan(z_) ? 0.0 : z_);
                    out.stages = std::move(r.stages);
                    out.z_stages = std::move(r.z_stages);
                    out.x_plus = std::move(r.x_plus);
                    out.z_plus = r.z_plus;
                }
                else
                {
                    auto r = step_ode(ocp_, mode_, x_, u_, h, tab_, opts_.newton);
                    out.stages = std::move(r.stages);
                    out.x_plus = std::move(r.x_plus);
                }
                return out;
            }

            /// Value of the event function at the end of a step; its sign change
            /// (relative to the start of the step) signals a transition.
            double event_value(const Vector &x) const
            {
                if (mode_ == Mode::Sliding)
                {
                    const double a = alpha(ocp_, x, u_);
                    return exit_side_ == 1 ? a - 1.0 : a;
                }
                return ocp_.surface.value(x);
            }

            bool triggered(const Vector &x_plus)
            {
                if (mode_ == Mode::Below)
                {
                    return ocp_.surface.value(x_plus) > 0.0;
                }
                if (mode_ == Mode::Above)
                {
                    return ocp_.surface.value(x_plus) < 0.0;
                }
                const double a = alpha(ocp_, x_plus, u_);
                exit_side_ = a > 1.0 ? 1 : 0;
                return a < 0.0 || a > 1.0;
            }

            void commit(double h, StepAttempt &&st, bool to_target, double target)
            {
                TrajectoryStep rec;
                rec.mode = mode_;
                rec.interval = interval_;
                rec.t = t_;
                rec.h = h;
                rec.u = u_;
                rec.x_start = x_;
                rec.stages = std::move(st.stages);
                rec.z_stages = std::move(st.z_stages);
                rec.x_end = st.x_plus;
                traj_.steps.push_back(std::move(rec));
                t_ = to_target ? target : t_ + h;
                x_ = std::move(st.x_plus);
                z_ = st.z_plus;
                push_node();
            }

            void advance_to(double target)
            {
                while (t_ < target)
                {
                    double h = target - t_;
                    StepAttempt st;
                    for (int halvings = 0;; ++halvings)
                    {
                        try
                        {
                            st = attempt(h);
                            break;
                        }
                        catch (const Error &err)
                        {
                            if (err.code() != ErrorCode::NewtonDivergence || halvings >= opts_.max_step_halvings)
                            {
                                throw;
                            }
                            h *= 0.5;
                        }
                    }
                    const bool full = (h == target - t_);
                    if (!triggered(st.x_plus))
                    {
                        commit(h, std::move(st), full, target);
                        continue;
                    }

                    const double e0 = event_value(x_);
                    double tau = 0.0;
                    if (sign(e0) == sign(event_value(st.x_plus)) && std::abs(e0) <= opts_.surface_tol)
                    {
                        tau = 0.0; // already on the surface, fields push across it
                    }
                    else
                    {
                        tau = locate_event([&](double tt) { return tt <= 0.0 ? e0 : event_value(attempt(tt).x_plus); },
                                           0.0, h, opts_.event);
                    }

                    if (tau >= min_step_)
                    {
                        if (h - tau < min_step_)
                        {
                            commit(h, std::move(st), full, target);
                        }
                        else
                        {
                            commit(tau, attempt(tau), false, target);
                        }
                    }
                    transition();
                }
            }

            void record(TransitionKind kind, const Vector &x_minus)
            {
                TransitionRecord tr;
                tr.t = t_;
                tr.kind = kind;
                tr.x_minus = x_minus;
                tr.x_plus = x_;
                tr.k = traj_.K();
                traj_.transitions.push_back(std::move(tr));
                if (++transitions_in_interval_ > opts_.max_transitions_per_interval)
                {
                    std::ostringstream os;
                    os << "integrate: more than " << opts_.max_transitions_per_interval
                       << " transitions in control interval " << interval_ << " (chattering)";
                    fail(ErrorCode::ChatteringLimit, os.str());
                }
                // the node state and multiplier reflect the post-transition side
                traj_.x.back() = x_;
                traj_.z.back() = mode_ == Mode::Sliding ? z_ : kNaN;
            }

            void transition()
            {
                const Vector x_minus = x_;
                if (mode_ == Mode::Sliding)
                {
                    const auto kind = exit_test(ocp_, x_, u_, 10.0 * opts_.event.tol);
                    if (!kind)
                    {
                        fail(ErrorCode::EventLocationFailure, "integrate: located exit point is not on the sliding boundary");
                    }
                    mode_ = *kind == TransitionKind::ExitToF1 ? Mode::Below : Mode::Above;
                    z_ = kNaN;
                    record(*kind, x_minus);
                    return;
                }
                const auto kind = entry_test(ocp_, x_, u_, mode_);
                switch (kind)
                {
                case TransitionKind::Cross12:
                    mode_ = Mode::Above;
                    break;
                case TransitionKind::Cross21:
                    mode_ = Mode::Below;
                    break;
                default:
                    mode_ = Mode::Sliding;
                    project_onto_surface();
                    z_ = 0.0;
                    break;
                }
                record(kind, x_minus);
            }

            void check_exit_at_node()
            {
                const auto kind = exit_test(ocp_, x_, u_, 0.0);
                if (!kind)
                {
                    return;
                }
                mode_ = *kind == TransitionKind::ExitToF1 ? Mode::Below : Mode::Above;
                z_ = kNaN;
                record(*kind, x_);
            }

            const HybridOCP &ocp_;
            const ControlGrid &controls_;
            const ButcherTableau &tab_;
            const IntegratorOptions &opts_;

            Trajectory traj_;
            double t_ = 0.0;
            Vector x_;
            double z_ = kNaN;
            Vector u_;
            Mode mode_ = Mode::Below;
            int interval_ = 0;
            int transitions_in_interval_ = 0;
            int exit_side_ = 0;
            double min_step_ = 0.0;
        };
    } // namespace

    Trajectory integrate(const HybridOCP &ocp, const ControlGrid &u, const ButcherTableau &tab,
                         const IntegratorOptions &opts)
    {
        return Integration(ocp, u, tab, opts).run();
    }

} // namespace slidoc
