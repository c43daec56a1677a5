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

#ifndef SLIDOC_ADJOINT_HPP
#define SLIDOC_ADJOINT_HPP

/**
 * @file
 * @brief Discrete adjoint sweep of the implicit step map F(X+, X, u) = 0.
 *
 * Sign convention: lambda(K) = +w_x(x(K))^T and dw/du = -F_u^T R, so the
 * adjoint carries the derivative of the endpoint functional with respect to
 * the state at each mesh node.
 */

#include <vector>

#include "slidoc/integrator.hpp"

namespace slidoc
{

    /// Linearization of one step. The augmented unknown X+ is
    ///   ODE step:     (x_1, .., x_s, x+)                 size (s + 1) n
    ///   sliding step: (x_1, .., x_s, z_1, .., z_s, x+)   size s n + s + n
    /// F depends on the previous augmented state only through x(k), so F_X is
    /// stored in the same layout with every column block but the last zero.
    struct DiscreteStateMap
    {
        Mode mode = Mode::Below;
        Matrix F_Xplus;
        Matrix F_X;
        Matrix F_x; ///< the x(k) column block of F_X
        Matrix F_u;
        Vector residual; ///< F at the stored step
    };

    DiscreteStateMap discrete_state_map(const HybridOCP &ocp, const ButcherTableau &tab, const TrajectoryStep &step);

    struct MatrixStepResult
    {
        Vector Lambda; ///< adjoint of X(k) in the step's own layout
        Vector R;
    };

    /// Solve F_X+^T R = Lambda+ and return Lambda = -F_X^T R.
    MatrixStepResult adjoint_step_matrix(const DiscreteStateMap &map, const Vector &Lambda_plus);

    /// Convenience: Lambda+ = (0, .., 0, lambda+).
    MatrixStepResult adjoint_step_matrix(const HybridOCP &ocp, const ButcherTableau &tab, const TrajectoryStep &step,
                                         const Vector &lambda_plus);

    struct TransformedStepResult
    {
        Matrix stage_lambda; ///< n x s, column i is lambda_i(k)
        Vector lambda;
    };

    /// Stage system lambda_i = lambda+ + h sum_j (a_ji b_j / b_i) f_x(x_j)^T lambda_j,
    /// then lambda = lambda+ + h sum_i b_i f_x(x_i)^T lambda_i. ODE steps only.
    TransformedStepResult adjoint_step_transformed(const HybridOCP &ocp, const ButcherTableau &tab,
                                                   const TrajectoryStep &step, const Vector &lambda_plus);

    struct SlidingStepResult
    {
        Vector lambda;
        Vector R;
        Matrix stage_lambda; ///< n x s, r_i / (h b_i)
        Vector stage_lambda_g; ///< s, r_g,i / (h b_i)
    };

    SlidingStepResult adjoint_step_sliding(const HybridOCP &ocp, const ButcherTableau &tab, const TrajectoryStep &step,
                                           const Vector &lambda_plus);

    struct TerminalConditions
    {
        Vector lambda;
        bool sliding = false;
        double nu1 = 0.0;
        double lambda_g = 0.0;
    };

    /// ODE end: lambda(K) = w_x^T. Sliding end: the (n + 2) system
    ///   lambda + nu1 g_x^T = w_x^T,   g_x lambda = 0,
    ///   ((g_x)' - g_x (f_F)_x^T - z g_x g_xx) lambda + g_x g_x^T lambda_g = 0,
    /// with (g_x)' = (g_xx x')^T and x' = f_F + g_x^T z.
    TerminalConditions terminal_conditions(const HybridOCP &ocp, const Trajectory &traj, const EndpointFunction &w);

    struct JumpRecord
    {
        double t = 0.0;
        int k = 0;
        TransitionKind kind = TransitionKind::Cross12;
        double pi = 0.0;
        Vector lambda_minus;
        Vector lambda_plus;
        double residual = 0.0; ///< |H- - H+| after the jump
    };

    /// lambda- = lambda+ - pi g_x^T with pi from Hamiltonian continuity
    ///   lambda-^T f- = lambda+^T f+ - lambda_g g(x+),
    /// where f+ includes g_x^T z on the sliding side. Sliding exits carry no
    /// jump (f_F meets the exit field continuously, or the exit time is a
    /// fixed breakpoint).
    JumpRecord transition_jump(const HybridOCP &ocp, const Trajectory &traj, const TransitionRecord &record,
                               const Vector &lambda_plus, double lambda_g_plus);

    struct AdjointTrajectory
    {
        FunctionalId functional;
        std::vector<Vector> lambda;        ///< K + 1 nodes; right-hand value at transition nodes
        std::vector<Matrix> stage_lambda;  ///< K steps, n x s
        std::vector<Vector> R;             ///< K steps; filled on sliding steps (and all steps in matrix mode)
        std::vector<double> lambda_g;      ///< K + 1 nodes, NaN off sliding
        double nu1 = 0.0;
        double lambda_g_tf = 0.0;
        bool sliding_terminal = false;
        std::vector<JumpRecord> jumps;     ///< in backward (reverse time) order
    };

    struct AdjointOptions
    {
        /// Use the R-solve on ODE steps too (the transformed scheme is the default).
        bool matrix_form = false;
    };

    AdjointTrajectory run_adjoint(const HybridOCP &ocp, const ButcherTableau &tab, const Trajectory &traj,
                                  const FunctionalId &functional, const AdjointOptions &opts = {});

    /// Same sweep with an arbitrary terminal function; used for the linearity checks.
    AdjointTrajectory run_adjoint(const HybridOCP &ocp, const ButcherTableau &tab, const Trajectory &traj,
                                  const EndpointFunction &w, const AdjointOptions &opts = {});

    /// One sweep per functional (phi, g1:.., g2:..), run concurrently.
    std::vector<AdjointTrajectory> run_all_adjoints(const HybridOCP &ocp, const ButcherTableau &tab,
                                                    const Trajectory &traj, const AdjointOptions &opts = {});

} // namespace slidoc

#endif // SLIDOC_ADJOINT_HPP
