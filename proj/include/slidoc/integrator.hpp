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

#ifndef SLIDOC_INTEGRATOR_HPP
#define SLIDOC_INTEGRATOR_HPP

/**
 * @file
 * @brief Fixed-step implicit Runge-Kutta integration of the hybrid system.
 *
 * Region dynamics are integrated as ODEs. Sliding motion is integrated as the
 * index-2 DAE
 *
 *   x' = f_F(x, u) + g_x(x)^T z,   0 = g(x),
 *
 * with the algebraic constraint imposed at every stage. Steps never straddle a
 * control breakpoint or a located transition; both become mesh nodes.
 */

#include <functional>
#include <vector>

#include "slidoc/model.hpp"
#include "slidoc/tableau.hpp"

namespace slidoc
{

    struct NewtonOptions
    {
        double tol = 1e-12; ///< max-norm of the stage residual, relative to max(1, |x|)
        int max_iters = 25;
    };

    struct EventOptions
    {
        double tol = 1e-10; ///< |e(t_t)| bound on return
        int max_iters = 80;
    };

    struct IntegratorOptions
    {
        int steps_per_interval = 8;
        NewtonOptions newton;
        EventOptions event;
        double surface_tol = 1e-9;
        int max_transitions_per_interval = 100;
        int max_step_halvings = 8;
        /// Additional mesh nodes (inside (t0, tf)); used to sample reference
        /// solutions at off-grid times.
        std::vector<double> extra_nodes;
    };

    /// Autonomous right-hand side with its Jacobian; the control is frozen inside.
    struct OdeRhs
    {
        std::function<Vector(const Vector &)> value;
        std::function<Matrix(const Vector &)> jacobian;
    };

    /// f1 (Below), f2 (Above) or f_F treated as an ODE (Sliding) at fixed u.
    OdeRhs region_rhs(const HybridOCP &ocp, Mode mode, const Vector &u);

    struct OdeStepResult
    {
        Matrix stages; ///< n x s, column i is x_i(k+1)
        Vector x_plus;
        int newton_iterations = 0;
    };

    /// One step of the scheme: solve the stage system by Newton with the full
    /// (s n) Jacobian, then x+ = x + h sum_i b_i f(x_i).
    OdeStepResult step_ode(const OdeRhs &f, const Vector &x, double h, const ButcherTableau &tab,
                           const NewtonOptions &opts = {});

    OdeStepResult step_ode(const HybridOCP &ocp, Mode field, const Vector &x, const Vector &u, double h,
                           const ButcherTableau &tab, const NewtonOptions &opts = {});

    struct DaeStepResult
    {
        Matrix stages;  ///< n x s
        Vector z_stages; ///< s
        Vector x_plus;   ///< equals the last stage (stiffly accurate scheme)
        double z_plus = 0.0;
        int newton_iterations = 0;
    };

    /// One sliding step. Unknowns are the stage states and stage multipliers,
    /// s (n + 1) in total. Requires a stiffly accurate tableau.
    DaeStepResult step_dae_sliding(const HybridOCP &ocp, const Vector &x, const Vector &u, double h,
                                   const ButcherTableau &tab, const NewtonOptions &opts = {}, double z_guess = 0.0);

    /// Root of a scalar event function inside [lo, hi] by Illinois-type regula
    /// falsi with bisection fallback. Throws NoBracket without a sign change.
    double locate_event(const std::function<double(double)> &e, double lo, double hi, const EventOptions &opts = {});

    struct TransitionRecord
    {
        double t = 0.0;
        TransitionKind kind = TransitionKind::Cross12;
        Vector x_minus;
        Vector x_plus;
        int k = 0; ///< mesh node index of t
    };

    struct TrajectoryStep
    {
        Mode mode = Mode::Below;
        int interval = 0;
        double t = 0.0;
        double h = 0.0;
        Vector u;
        Vector x_start;  ///< state the stage equations were solved from
        Matrix stages;   ///< n x s
        Vector z_stages; ///< s entries on sliding steps, empty otherwise
        Vector x_end;    ///< the step's own x+ (node state may differ by a surface projection)
    };

    /// Forward solution on the final mesh. Node k sits at t[k]; step k joins
    /// nodes k and k+1.
    struct Trajectory
    {
        int n = 0;
        int s = 0;
        std::vector<double> t;
        std::vector<Vector> x;
        std::vector<double> z; ///< multiplier at sliding nodes, NaN elsewhere
        std::vector<TrajectoryStep> steps;
        std::vector<TransitionRecord> transitions;
        std::vector<int> breakpoint_nodes; ///< k_n for n = 0..N

        int K() const { return static_cast<int>(steps.size()); }
        Mode final_mode() const;
        std::vector<TransitionKind> transition_kinds() const;
        /// max_k h(k)
        double max_step() const;
    };

    Trajectory integrate(const HybridOCP &ocp, const ControlGrid &u, const ButcherTableau &tab,
                         const IntegratorOptions &opts = {});

} // namespace slidoc

#endif // SLIDOC_INTEGRATOR_HPP
