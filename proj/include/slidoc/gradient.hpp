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

#ifndef SLIDOC_GRADIENT_HPP
#define SLIDOC_GRADIENT_HPP

#include "slidoc/adjoint.hpp"

namespace slidoc
{

    /// dw/du_n for n = 0..N-1, interval-major (entry n*m + j), length m N.
    using GradientVector = Vector;

    /// Stage form h sum_i b_i f_u(x_i)^T lambda_i on ODE steps and -F_u^T R on
    /// sliding steps, summed over the steps of each control interval.
    GradientVector reduced_gradient(const HybridOCP &ocp, const ButcherTableau &tab, const Trajectory &traj,
                                    const AdjointTrajectory &adj);

    /// -F_u^T R on every step. Needs an adjoint computed with matrix_form = true.
    GradientVector reduced_gradient_matrix_form(const HybridOCP &ocp, const ButcherTableau &tab,
                                                const Trajectory &traj, const AdjointTrajectory &adj);

    /// sum_n d_n^T dw/du_n.
    double directional_derivative(const GradientVector &grad, const Vector &d);

} // namespace slidoc

#endif // SLIDOC_GRADIENT_HPP
