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

#ifndef SLIDOC_OPTIMIZER_HPP
#define SLIDOC_OPTIMIZER_HPP

/**
 * @file
 * @brief Exact penalty descent method for terminally constrained problems.
 *
 * Minimizes F0(u) subject to g1_i(u) = 0, g2_j(u) <= 0 and u in a box through
 * the penalty F_c = F0 + c M with M = max(0, |g1_i|, g2_j). Each iterate solves
 *
 *   min_{d, beta}  <grad F0, d> + c beta + d^T H d / 2
 *   s.t.           |g1_i + <grad g1_i, d>| <= beta,  g2_j + <grad g2_j, d> <= beta,
 *                  beta >= 0,  u + d in the box,
 *
 * raises c until t_c = sigma + M / c <= 0 and backtracks along d.
 */

#include <memory>
#include <string>
#include <vector>

#include "slidoc/integrator.hpp"

namespace slidoc
{

    /// Values (and optionally gradients) of the cost and constraints at one point.
    struct NlpEvaluation
    {
        double f0 = 0.0;
        Vector g1; ///< equality residuals
        Vector g2; ///< inequality values
        bool has_gradients = false;
        Vector grad_f0;
        Matrix jac_g1; ///< |E| x dim, row i is grad g1_i^T
        Matrix jac_g2; ///< |I| x dim
    };

    /// Finite-dimensional problem seen by the optimizer.
    class Nlp
    {
    public:
        virtual ~Nlp() = default;
        virtual int dimension() const = 0;
        virtual Vector lower() const = 0;
        virtual Vector upper() const = 0;
        virtual NlpEvaluation evaluate(const Vector &u, bool gradients) const = 0;
    };

    /// The discretized hybrid problem: one forward pass, then |E| + |I| + 1 adjoint sweeps.
    class HybridNlp : public Nlp
    {
    public:
        HybridNlp(const HybridOCP &ocp, ButcherTableau tab, IntegratorOptions opts);

        int dimension() const override { return ocp_.m * ocp_.N; }
        Vector lower() const override;
        Vector upper() const override;
        NlpEvaluation evaluate(const Vector &u, bool gradients) const override;

    private:
        const HybridOCP &ocp_;
        ButcherTableau tab_;
        IntegratorOptions opts_;
    };

    struct PenaltyConfig
    {
        double c0 = 1.0;
        double kappa = 2.0;
        double gamma = 0.1;
        double eta = 0.5;
        double epsilon = 1e-8;
        int max_iters = 200;
        int max_penalty_increases = 60;
        int max_line_search = 60;
        Matrix H; ///< empty means identity of the problem dimension
        double nu1_bound = 0.0; ///< filled by validate(): smallest eigenvalue of H
        double nu2_bound = 0.0; ///< largest eigenvalue of H

        /// Checks parameter ranges and the spectral bounds of H (dim sets the identity default).
        void validate(int dim);
    };

    double constraint_violation(const NlpEvaluation &ev);

    inline double penalty_value(double f0, double violation, double c) { return f0 + c * violation; }

    double penalty_value(const NlpEvaluation &ev, double c);

    struct Direction
    {
        Vector d;
        double beta = 0.0;
        double kkt_residual = 0.0;
        int iterations = 0;
    };

    /// Primal active-set solve of the direction subproblem. Throws QPFailure
    /// when the iteration stalls or the final KKT residual exceeds 1e-8.
    Direction direction_subproblem(const NlpEvaluation &ev, const Vector &u, const Vector &lo, const Vector &hi,
                                   double c, const Matrix &H);

    struct DescentTest
    {
        double sigma = 0.0;
        double t_c = 0.0;
    };

    /// sigma = <grad F0, d> + c (beta - M),  t_c = sigma + M / c.
    DescentTest descent_and_test(const NlpEvaluation &ev, const Vector &d, double beta, double c);

    struct PenaltyAdjustment
    {
        double c = 0.0;
        Direction direction;
        DescentTest test;
        int increases = 0;
    };

    /// Smallest c in {c_prev, kappa c_prev, ..} with t_c <= 0; CFailure past the cap.
    PenaltyAdjustment adjust_penalty(const NlpEvaluation &ev, const Vector &u, const Vector &lo, const Vector &hi,
                                     double c_prev, const PenaltyConfig &cfg);

    struct LineSearchResult
    {
        double alpha = 0.0;
        Vector u;
        NlpEvaluation evaluation; ///< values only
        double penalty = 0.0;
        int trials = 0;
    };

    /// Largest alpha in {1, eta, eta^2, ..} with F_c(P(u + alpha d)) - F_c(u) <= gamma alpha sigma.
    LineSearchResult line_search(const Nlp &nlp, const Vector &u, const Vector &d, double penalty_u, double sigma,
                                 double c, const PenaltyConfig &cfg);

    struct IterateRecord
    {
        int k = 0;
        Vector u;
        double c = 0.0;
        Vector d;
        double beta = 0.0;
        double sigma = 0.0;
        double t_c = 0.0;
        double alpha = 0.0; ///< 0 on the terminating iterate
        double f0 = 0.0;
        double violation = 0.0;
        double penalty = 0.0;
        double penalty_next = 0.0; ///< F_c at the accepted trial point (same c)
        double kkt_residual = 0.0;
    };

    struct OptimizeResult
    {
        Vector u;
        std::vector<IterateRecord> history;
        bool converged = false;
    };

    /// Steps 1-3 of the method. Does not throw on the iteration cap; check `converged`.
    OptimizeResult optimize(const Nlp &nlp, const Vector &u0, PenaltyConfig cfg);

} // namespace slidoc

#endif // SLIDOC_OPTIMIZER_HPP
