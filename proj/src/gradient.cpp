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

#include "slidoc/gradient.hpp"

namespace slidoc
{

    namespace
    {
        void check_mesh(const HybridOCP &ocp, const ButcherTableau &tab, const Trajectory &traj,
                        const AdjointTrajectory &adj)
        {
            const auto K = static_cast<std::size_t>(traj.K());
            if (adj.lambda.size() != K + 1 || adj.stage_lambda.size() != K || adj.R.size() != K)
            {
                fail(ErrorCode::MeshMismatch, "reduced_gradient: adjoint and forward meshes differ in length");
            }
            for (std::size_t k = 0; k < K; ++k)
            {
                if (adj.stage_lambda[k].rows() != ocp.n || adj.stage_lambda[k].cols() != tab.stages())
                {
                    fail(ErrorCode::MeshMismatch, "reduced_gradient: stage adjoint shape mismatch at step " +
                                                      std::to_string(k));
                }
            }
        }

        Vector minus_FuT_R(const HybridOCP &ocp, const ButcherTableau &tab, const TrajectoryStep &st,
                           const Vector &R)
        {
            const auto map = discrete_state_map(ocp, tab, st);
            if (R.size() != map.F_u.rows())
            {
                fail(ErrorCode::MeshMismatch, "reduced_gradient: step R has the wrong layout");
            }
            return -(map.F_u.transpose() * R);
        }
    } // namespace

    GradientVector reduced_gradient(const HybridOCP &ocp, const ButcherTableau &tab, const Trajectory &traj,
                                    const AdjointTrajectory &adj)
    {
        check_mesh(ocp, tab, traj, adj);
        const int m = ocp.m;
        GradientVector grad = Vector::Zero(m * ocp.N);
        for (int k = 0; k < traj.K(); ++k)
        {
            const TrajectoryStep &st = traj.steps[k];
            auto slot = grad.segment(st.interval * m, m);
            if (st.mode == Mode::Sliding)
            {
                slot += minus_FuT_R(ocp, tab, st, adj.R[k]);
                continue;
            }
            const VectorField &f = ocp.field(st.mode);
            for (int i = 0; i < tab.stages(); ++i)
            {
                slot += st.h * tab.b(i) * (f.du(st.stages.col(i), st.u).transpose() * adj.stage_lambda[k].col(i));
            }
        }
        return grad;
    }

    GradientVector reduced_gradient_matrix_form(const HybridOCP &ocp, const ButcherTableau &tab,
                                                const Trajectory &traj, const AdjointTrajectory &adj)
    {
        check_mesh(ocp, tab, traj, adj);
        const int m = ocp.m;
        GradientVector grad = Vector::Zero(m * ocp.N);
        for (int k = 0; k < traj.K(); ++k)
        {
            const TrajectoryStep &st = traj.steps[k];
            grad.segment(st.interval * m, m) += minus_FuT_R(ocp, tab, st, adj.R[k]);
        }
        return grad;
    }

    double directional_derivative(const GradientVector &grad, const Vector &d)
    {
        if (grad.size() != d.size())
        {
            fail(ErrorCode::DimensionMismatch, "directional_derivative: direction has length " +
                                                   std::to_string(d.size()) + ", gradient has " +
                                                   std::to_string(grad.size()));
        }
        return grad.dot(d);
    }

} // namespace slidoc
