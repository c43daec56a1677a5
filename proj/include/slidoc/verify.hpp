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

#ifndef SLIDOC_VERIFY_HPP
#define SLIDOC_VERIFY_HPP

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "slidoc/gradient.hpp"

namespace slidoc
{

    /// (w(x + eps) - w(x - eps)) / (2 eps).
    double central_difference(const std::function<double(double)> &w, double x, double eps);

    struct FdGradient
    {
        std::vector<FunctionalId> functionals;
        std::vector<Vector> gradients;     ///< one per functional, length m N
        std::vector<bool> structure_change; ///< per entry: transition sequence differs from the base run
        std::vector<double> steps;          ///< per entry: eps max(1, |u_e|)
    };

    /// Central differences of every requested functional, each evaluation a full
    /// re-integration. Entries whose perturbed runs change the sequence of
    /// transition kinds are flagged rather than trusted.
    FdGradient fd_gradient(const HybridOCP &ocp, const ButcherTableau &tab, const ControlGrid &u,
                           const std::vector<FunctionalId> &functionals, double eps = 1e-6,
                           const IntegratorOptions &opts = {});

    struct GradientCheckEntry
    {
        int interval = 0;
        int component = 0;
        double adjoint = 0.0;
        double fd = 0.0;
        double rel_error = 0.0; ///< |adjoint - fd| / max(||fd||_inf, tiny)
        bool structure_change = false;
    };

    struct GradientCheck
    {
        FunctionalId functional;
        std::vector<GradientCheckEntry> entries;
        double max_rel_error = 0.0; ///< over entries without a structure change
        int excluded = 0;
    };

    /// Adjoint gradients against the oracle for every functional of the problem.
    std::vector<GradientCheck> check_gradient(const HybridOCP &ocp, const ButcherTableau &tab, const ControlGrid &u,
                                              double eps = 1e-6, const IntegratorOptions &opts = {});

    enum class OrderQuantity
    {
        StateEndpoint,
        StateStage,
        AdjointEndpoint,
        AdjointStage,
        Gradient
    };

    std::string_view to_string(OrderQuantity q);
    OrderQuantity parse_order_quantity(std::string_view text);

    struct OrderReport
    {
        OrderQuantity quantity = OrderQuantity::StateEndpoint;
        std::vector<double> h;
        std::vector<double> errors;
        std::vector<double> pairwise_orders;
        double slope = 0.0;
        double h_ref = 0.0;
        double reference_gap = 0.0; ///< max-norm difference of the two finest references
    };

    /// Least-squares slope of log e against log h.
    double fitted_slope(const std::vector<double> &h, const std::vector<double> &errors);

    /// Self-convergence study against references at min(h)/8 and min(h)/16. Every
    /// h must divide the control interval length. The adjoint quantities use phi.
    OrderReport order_study(const HybridOCP &ocp, const ButcherTableau &tab, const ControlGrid &u,
                            OrderQuantity quantity, const std::vector<double> &h, const IntegratorOptions &opts = {});

} // namespace slidoc

#endif // SLIDOC_VERIFY_HPP
