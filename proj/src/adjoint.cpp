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

#include "slidoc/adjoint.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "slidoc/parallel.hpp"

namespace slidoc
{

    namespace
    {
        constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

        DiscreteStateMap ode_map(const HybridOCP &ocp, const ButcherTableau &tab, const TrajectoryStep &st)
        {
            const int s = tab.stages();
            const int n = ocp.n;
            const int m = ocp.m;
            const double h = st.h;
            const VectorField &f = ocp.field(st.mode);
            const auto dim = (s + 1) * n;

            DiscreteStateMap map;
            map.mode = st.mode;
            map.F_Xplus = Matrix::Identity(dim, dim);
            map.F_X = Matrix::Zero(dim, dim);
            map.F_u = Matrix::Zero(dim, m);
            map.residual = Vector::Zero(dim);

            Matrix fv(n, s);
            Vector incr = Vector::Zero(n);
            for (int j = 0; j < s; ++j)
            {
                const Vector xj = st.stages.col(j);
                fv.col(j) = f.value(xj, st.u);
                const Matrix fx = f.dx(xj, st.u);
                const Matrix fu = f.du(xj, st.u);
                for (int i = 0; i < s; ++i)
                {
                    map.F_Xplus.block(i * n, j * n, n, n) -= h * tab.a(i, j) * fx;
                    map.F_u.block(i * n, 0, n, m) -= h * tab.a(i, j) * fu;
                }
                map.F_Xplus.block(s * n, j * n, n, n) = -h * tab.b(j) * fx;
                map.F_u.block(s * n, 0, n, m) -= h * tab.b(j) * fu;
                incr += tab.b(j) * fv.col(j);
            }
            for (int i = 0; i <= s; ++i)
            {
                map.F_X.block(i * n, s * n, n, n) = -Matrix::Identity(n, n);
            }
            map.F_x = map.F_X.rightCols(n);
            for (int i = 0; i < s; ++i)
            {
                map.residual.segment(i * n, n) =
                    st.stages.col(i) - st.x_start - h * (fv * tab.a().row(i).transpose());
            }
            map.residual.segment(s * n, n) = st.x_end - st.x_start - h * incr;
            return map;
        }

        DiscreteStateMap sliding_map(const HybridOCP &ocp, const ButcherTableau &tab, const TrajectoryStep &st)
        {
            const int s = tab.stages();
            const int n = ocp.n;
            const int m = ocp.m;
            const double h = st.h;
            const int zs = s * n;      // first multiplier column
            const int xe = s * n + s;  // first endpoint column
            const int dim = xe + n;

            DiscreteStateMap map;
            map.mode = Mode::Sliding;
            map.F_Xplus = Matrix::Zero(dim, dim);
            map.F_X = Matrix::Zero(dim, dim);
            map.F_u = Matrix::Zero(dim, m);
            map.residual = Vector::Zero(dim);

            map.F_Xplus.topLeftCorner(zs, zs).setIdentity();
            Matrix rhs(n, s);
            for (int j = 0; j < s; ++j)
            {
                const Vector xj = st.stages.col(j);
                const double zj = st.z_stages(j);
                const Vector gx = ocp.surface.gradient(xj);
                rhs.col(j) = filippov_field(ocp, xj, st.u).value + gx * zj;
                const Matrix dfx = filippov_dx(ocp, xj, st.u) + zj * ocp.surface.hessian(xj);
                const Matrix dfu = filippov_du(ocp, xj, st.u);
                for (int i = 0; i < s; ++i)
                {
                    map.F_Xplus.block(i * n, j * n, n, n) -= h * tab.a(i, j) * dfx;
                    map.F_Xplus.block(i * n, zs + j, n, 1) = -h * tab.a(i, j) * gx;
                    map.F_u.block(i * n, 0, n, m) -= h * tab.a(i, j) * dfu;
                }
                map.F_Xplus.block(zs + j, j * n, 1, n) = gx.transpose();
                map.F_X.block(j * n, xe, n, n) = -Matrix::Identity(n, n);
                map.residual(zs + j) = ocp.surface.value(xj);
            }
            map.F_Xplus.block(xe, xe, n, n).setIdentity();
            map.F_Xplus.block(xe, (s - 1) * n, n, n) -= Matrix::Identity(n, n);
            map.F_x = map.F_X.rightCols(n);
            for (int i = 0; i < s; ++i)
            {
                map.residual.segment(i * n, n) =
                    st.stages.col(i) - st.x_start - h * (rhs * tab.a().row(i).transpose());
            }
            map.residual.segment(xe, n) = st.x_end - st.stages.col(s - 1);
            return map;
        }

        Vector endpoint_lambda(const DiscreteStateMap &map, const Vector &lambda_plus)
        {
            Vector Lambda = Vector::Zero(map.F_Xplus.rows());
            Lambda.tail(lambda_plus.size()) = lambda_plus;
            return Lambda;
        }

        /// Field on the far side of a transition, including g_x^T z when sliding.
        Vector side_field(const HybridOCP &ocp, Mode mode, const Vector &x, const Vector &u, double z)
        {
            if (mode == Mode::Sliding)
            {
                Vector v = filippov_field(ocp, x, u).value;
                if (!std::isnan(z))
                {
                    v += ocp.surface.gradient(x) * z;
                }
                return v;
            }
            return ocp.field(mode).value(x, u);
        }
    } // namespace

    DiscreteStateMap discrete_state_map(const HybridOCP &ocp, const ButcherTableau &tab, const TrajectoryStep &step)
    {
        return step.mode == Mode::Sliding ? sliding_map(ocp, tab, step) : ode_map(ocp, tab, step);
    }

    MatrixStepResult adjoint_step_matrix(const DiscreteStateMap &map, const Vector &Lambda_plus)
    {
        if (Lambda_plus.size() != map.F_Xplus.rows())
        {
            fail(ErrorCode::DimensionMismatch, "adjoint_step_matrix: Lambda+ has the wrong length");
        }
        MatrixStepResult out;
        out.R = CheckedLU(map.F_Xplus.transpose(), ErrorCode::SingularSystem, "adjoint_step_matrix").solve(Lambda_plus);
        out.Lambda = -(map.F_X.transpose() * out.R);
        return out;
    }

    MatrixStepResult adjoint_step_matrix(const HybridOCP &ocp, const ButcherTableau &tab, const TrajectoryStep &step,
                                         const Vector &lambda_plus)
    {
        const auto map = discrete_state_map(ocp, tab, step);
        return adjoint_step_matrix(map, endpoint_lambda(map, lambda_plus));
    }

    TransformedStepResult adjoint_step_transformed(const HybridOCP &ocp, const ButcherTableau &tab,
                                                   const TrajectoryStep &step, const Vector &lambda_plus)
    {
        if (step.mode == Mode::Sliding)
        {
            fail(ErrorCode::ValidationError, "adjoint_step_transformed: sliding steps use the DAE map");
        }
        const int s = tab.stages();
        const int n = ocp.n;
        const double h = step.h;
        const VectorField &f = ocp.field(step.mode);

        std::vector<Matrix> fxT(s);
        for (int j = 0; j < s; ++j)
        {
            fxT[j] = f.dx(step.stages.col(j), step.u).transpose();
        }
        Matrix sys = Matrix::Identity(s * n, s * n);
        Vector rhs(s * n);
        for (int i = 0; i < s; ++i)
        {
            rhs.segment(i * n, n) = lambda_plus;
            for (int j = 0; j < s; ++j)
            {
                const double abar = tab.a(j, i) * tab.b(j) / tab.b(i);
                sys.block(i * n, j * n, n, n) -= h * abar * fxT[j];
            }
        }
        const Vector y = CheckedLU(sys, ErrorCode::SingularSystem, "adjoint_step_transformed").solve(rhs);

        TransformedStepResult out;
        out.stage_lambda.resize(n, s);
        out.lambda = lambda_plus;
        for (int i = 0; i < s; ++i)
        {
            out.stage_lambda.col(i) = y.segment(i * n, n);
            out.lambda += h * tab.b(i) * (fxT[i] * out.stage_lambda.col(i));
        }
        return out;
    }

    SlidingStepResult adjoint_step_sliding(const HybridOCP &ocp, const ButcherTableau &tab, const TrajectoryStep &step,
                                           const Vector &lambda_plus)
    {
        if (step.mode != Mode::Sliding)
        {
            fail(ErrorCode::ValidationError, "adjoint_step_sliding: step is not a sliding step");
        }
        const int s = tab.stages();
        const int n = ocp.n;
        const auto map = sliding_map(ocp, tab, step);
        auto res = adjoint_step_matrix(map, endpoint_lambda(map, lambda_plus));

        SlidingStepResult out;
        out.lambda = res.Lambda.tail(n);
        out.stage_lambda.resize(n, s);
        out.stage_lambda_g.resize(s);
        for (int i = 0; i < s; ++i)
        {
            out.stage_lambda.col(i) = res.R.segment(i * n, n) / (step.h * tab.b(i));
            out.stage_lambda_g(i) = res.R(s * n + i) / (step.h * tab.b(i));
        }
        out.R = std::move(res.R);
        return out;
    }

    TerminalConditions terminal_conditions(const HybridOCP &ocp, const Trajectory &traj, const EndpointFunction &w)
    {
        const int n = ocp.n;
        const Vector &xK = traj.x.back();
        TerminalConditions out;
        const Vector wx = w.gradient(xK);
        if (traj.steps.empty() || traj.final_mode() != Mode::Sliding)
        {
            out.lambda = wx;
            return out;
        }

        const Vector &u = traj.steps.back().u;
        const double z = std::isnan(traj.z.back()) ? 0.0 : traj.z.back();
        const Vector gx = ocp.surface.gradient(xK);
        const Matrix gxx = ocp.surface.hessian(xK);
        const Vector xdot = filippov_field(ocp, xK, u).value + gx * z;
        const Vector hidden = gxx * xdot - filippov_dx(ocp, xK, u) * gx - z * (gxx * gx);

        Matrix sys = Matrix::Zero(n + 2, n + 2);
        Vector rhs = Vector::Zero(n + 2);
        sys.topLeftCorner(n, n).setIdentity();
        sys.block(0, n, n, 1) = gx;
        rhs.head(n) = wx;
        sys.block(n, 0, 1, n) = gx.transpose();
        sys.block(n + 1, 0, 1, n) = hidden.transpose();
        sys(n + 1, n + 1) = gx.squaredNorm();
        const Vector sol = CheckedLU(sys, ErrorCode::SingularTerminalSystem, "terminal_conditions").solve(rhs);

        out.sliding = true;
        out.lambda = sol.head(n);
        out.nu1 = sol(n);
        out.lambda_g = sol(n + 1);
        return out;
    }

    JumpRecord transition_jump(const HybridOCP &ocp, const Trajectory &traj, const TransitionRecord &record,
                               const Vector &lambda_plus, double lambda_g_plus)
    {
        JumpRecord out;
        out.t = record.t;
        out.k = record.k;
        out.kind = record.kind;
        out.lambda_plus = lambda_plus;
        out.lambda_minus = lambda_plus;
        const int k = record.k;
        if (k <= 0 || k >= traj.K())
        {
            return out;
        }
        const TrajectoryStep &before = traj.steps[k - 1];
        const TrajectoryStep &after = traj.steps[k];
        const Vector f_minus = side_field(ocp, before.mode, record.x_minus, before.u, traj.z[k - 1]);
        const Vector f_plus = side_field(ocp, after.mode, record.x_plus, after.u, traj.z[k]);
        const double g_plus = ocp.surface.value(record.x_plus);
        const double lg = std::isnan(lambda_g_plus) ? 0.0 : lambda_g_plus;
        const double h_plus = lambda_plus.dot(f_plus) - lg * g_plus;

        if (record.kind == TransitionKind::ExitToF1 || record.kind == TransitionKind::ExitToF2)
        {
            out.residual = std::abs(lambda_plus.dot(f_minus) - h_plus);
            return out;
        }

        const Vector gx = ocp.surface.gradient(record.x_minus);
        const double coeff = gx.dot(f_minus);
        if (std::abs(coeff) <= ocp.tolerances.tangential)
        {
            std::ostringstream os;
            os << "transition_jump: g_x f- = " << coeff << " at t = " << record.t << " is below the tangential floor";
            fail(ErrorCode::SingularJumpSystem, os.str());
        }
        out.pi = (lambda_plus.dot(f_minus) - h_plus) / coeff;
        out.lambda_minus = lambda_plus - out.pi * gx;
        out.residual = std::abs(out.lambda_minus.dot(f_minus) - h_plus);
        return out;
    }

    AdjointTrajectory run_adjoint(const HybridOCP &ocp, const ButcherTableau &tab, const Trajectory &traj,
                                  const EndpointFunction &w, const AdjointOptions &opts)
    {
        const int K = traj.K();
        const int n = ocp.n;
        AdjointTrajectory adj;
        adj.lambda.assign(K + 1, Vector());
        adj.stage_lambda.assign(K, Matrix());
        adj.R.assign(K, Vector());
        adj.lambda_g.assign(K + 1, kNaN);

        const auto term = terminal_conditions(ocp, traj, w);
        adj.sliding_terminal = term.sliding;
        adj.nu1 = term.nu1;
        adj.lambda_g_tf = term.sliding ? term.lambda_g : kNaN;
        if (term.sliding)
        {
            adj.lambda_g[K] = term.lambda_g;
        }
        adj.lambda[K] = term.lambda;

        // transitions grouped by node, latest first
        auto next_transition = static_cast<int>(traj.transitions.size()) - 1;
        Vector lambda = term.lambda;
        for (int k = K; k >= 0; --k)
        {
            adj.lambda[k] = lambda;
            while (next_transition >= 0 && traj.transitions[next_transition].k == k)
            {
                auto jump = transition_jump(ocp, traj, traj.transitions[next_transition], lambda, adj.lambda_g[k]);
                lambda = jump.lambda_minus;
                adj.jumps.push_back(std::move(jump));
                --next_transition;
            }
            if (k == 0)
            {
                break;
            }
            const TrajectoryStep &st = traj.steps[k - 1];
            if (st.mode == Mode::Sliding)
            {
                auto res = adjoint_step_sliding(ocp, tab, st, lambda);
                lambda = res.lambda;
                adj.stage_lambda[k - 1] = std::move(res.stage_lambda);
                adj.R[k - 1] = std::move(res.R);
                if (std::isnan(adj.lambda_g[k]))
                {
                    adj.lambda_g[k] = res.stage_lambda_g(tab.stages() - 1);
                }
                if (k == 1 || traj.steps[k - 2].mode != Mode::Sliding)
                {
                    adj.lambda_g[k - 1] = res.stage_lambda_g(0); // segment start
                }
            }
            else if (opts.matrix_form)
            {
                const auto map = ode_map(ocp, tab, st);
                auto res = adjoint_step_matrix(map, endpoint_lambda(map, lambda));
                lambda = res.Lambda.tail(n);
                Matrix stages(n, tab.stages());
                for (int i = 0; i < tab.stages(); ++i)
                {
                    // lambda_i = lambda+ + sum_j (a_ji / b_i) r_j
                    Vector acc = res.R.tail(n);
                    for (int j = 0; j < tab.stages(); ++j)
                    {
                        acc += tab.a(j, i) / tab.b(i) * res.R.segment(j * n, n);
                    }
                    stages.col(i) = acc;
                }
                adj.stage_lambda[k - 1] = std::move(stages);
                adj.R[k - 1] = std::move(res.R);
            }
            else
            {
                auto res = adjoint_step_transformed(ocp, tab, st, lambda);
                lambda = res.lambda;
                adj.stage_lambda[k - 1] = std::move(res.stage_lambda);
            }
        }
        return adj;
    }

    AdjointTrajectory run_adjoint(const HybridOCP &ocp, const ButcherTableau &tab, const Trajectory &traj,
                                  const FunctionalId &functional, const AdjointOptions &opts)
    {
        auto adj = run_adjoint(ocp, tab, traj, ocp.functional(functional), opts);
        adj.functional = functional;
        return adj;
    }

    std::vector<AdjointTrajectory> run_all_adjoints(const HybridOCP &ocp, const ButcherTableau &tab,
                                                    const Trajectory &traj, const AdjointOptions &opts)
    {
        const auto ids = ocp.functionals();
        std::vector<AdjointTrajectory> out(ids.size());
        parallel_for(ids.size(), [&](std::size_t i) { out[i] = run_adjoint(ocp, tab, traj, ids[i], opts); });
        return out;
    }

} // namespace slidoc
