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

#ifndef SLIDOC_MODEL_HPP
#define SLIDOC_MODEL_HPP

/**
 * @file
 * @brief Hybrid optimal control problem with one switching surface and the
 * pointwise sliding-mode algebra built on top of it.
 *
 * The state space is split by the surface g(x) = 0 into the region g < 0,
 * governed by f1, and the region g > 0, governed by f2. When both fields push
 * towards the surface the motion slides along it with the convex combination
 *
 *   f_F = (1 - alpha) f1 + alpha f2,   alpha = g_x f1 / (g_x (f1 - f2)),
 *
 * which is tangent to the surface by construction.
 */

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slidoc/linalg.hpp"

namespace slidoc
{

    /// Right-hand side of one region together with its analytic Jacobians.
    struct VectorField
    {
        std::function<Vector(const Vector &x, const Vector &u)> value;
        std::function<Matrix(const Vector &x, const Vector &u)> dx; ///< n x n
        std::function<Matrix(const Vector &x, const Vector &u)> du; ///< n x m
    };

    struct SwitchingSurface
    {
        std::function<double(const Vector &x)> value;
        std::function<Vector(const Vector &x)> gradient; ///< g_x^T as a column
        std::function<Matrix(const Vector &x)> hessian;
    };

    /// Scalar function of the terminal state (cost or terminal constraint).
    struct EndpointFunction
    {
        std::string name;
        std::function<double(const Vector &x)> value;
        std::function<Vector(const Vector &x)> gradient;
    };

    enum class FunctionalKind
    {
        Cost,
        Equality,
        Inequality
    };

    /// Selects phi, g1:i or g2:j.
    struct FunctionalId
    {
        FunctionalKind kind = FunctionalKind::Cost;
        int index = 0;

        std::string label() const;
        static FunctionalId parse(std::string_view text);
        friend bool operator==(const FunctionalId &, const FunctionalId &) = default;
    };

    /// Thresholds that decide when the sliding algebra is too degenerate to trust.
    struct SlidingTolerances
    {
        double denominator = 1e-12; ///< relative floor for |g_x (f1 - f2)|
        double tangential = 1e-10;  ///< floor for |g_x f1|, |g_x f2| in the transition tests
    };

    enum class Mode
    {
        Below,
        Above,
        Sliding
    };

    std::string_view to_string(Mode mode);

    enum class TransitionKind
    {
        Cross12,
        Cross21,
        EnterSliding,
        ExitToF1,
        ExitToF2
    };

    std::string_view to_string(TransitionKind kind);

    /// Problem instance. Immutable after construction; callbacks must be reentrant.
    struct HybridOCP
    {
        std::string name;
        int n = 0;
        int m = 0;
        VectorField field1;
        VectorField field2;
        SwitchingSurface surface;
        EndpointFunction cost;
        std::vector<EndpointFunction> equality;
        std::vector<EndpointFunction> inequality;
        double t0 = 0.0;
        double tf = 1.0;
        Vector x0;
        int N = 1;
        Vector u_lo;
        Vector u_hi;
        SlidingTolerances tolerances;

        /// Throws InvalidProblem on tf <= t0, N < 1, u_lo > u_hi or shape errors.
        void validate() const;

        /// t_n = t0 + n (tf - t0) / N for n = 0..N, computed once per call.
        std::vector<double> breakpoints() const;

        int functional_count() const { return 1 + static_cast<int>(equality.size() + inequality.size()); }
        const EndpointFunction &functional(const FunctionalId &id) const;

        /// phi, g1:0.., g2:0.. in that order.
        std::vector<FunctionalId> functionals() const;

        const VectorField &field(Mode mode) const;
    };

    /// Piecewise-constant control: one value in R^m per interval, stored column-wise.
    class ControlGrid
    {
    public:
        ControlGrid() = default;
        ControlGrid(int m, int intervals, double fill = 0.0);
        explicit ControlGrid(Matrix values) : values_(std::move(values)) {}

        static ControlGrid from_flat(const Vector &flat, int m);

        int m() const { return static_cast<int>(values_.rows()); }
        int intervals() const { return static_cast<int>(values_.cols()); }
        Vector value(int interval) const { return values_.col(interval); }
        double &operator()(int component, int interval) { return values_(component, interval); }
        double operator()(int component, int interval) const { return values_(component, interval); }
        const Matrix &values() const { return values_; }

        /// Interval-major flattening: entry n*m + j is component j of interval n.
        Vector flat() const;

        /// Componentwise clamp into [lo, hi].
        ControlGrid projected(const Vector &lo, const Vector &hi) const;

    private:
        Matrix values_;
    };

    /// Quantities of the two fields at one point that every sliding predicate needs.
    struct SurfaceGeometry
    {
        Vector normal; ///< g_x^T
        Vector f1;
        Vector f2;
        double gf1 = 0.0; ///< g_x f1
        double gf2 = 0.0; ///< g_x f2
    };

    SurfaceGeometry surface_geometry(const HybridOCP &ocp, const Vector &x, const Vector &u);

    /// Raw Filippov coefficient (no clamping). Throws DegenerateDenominator when
    /// |g_x (f1 - f2)| <= eps_den * scale.
    double alpha(const HybridOCP &ocp, const Vector &x, const Vector &u);

    struct FilippovField
    {
        Vector value;
        double alpha = 0.0;
    };

    FilippovField filippov_field(const HybridOCP &ocp, const Vector &x, const Vector &u);

    /// d alpha / dx as a column (n) and d alpha / du as a column (m), quotient rule.
    Vector alpha_dx(const HybridOCP &ocp, const Vector &x, const Vector &u);
    Vector alpha_du(const HybridOCP &ocp, const Vector &x, const Vector &u);

    /// (f_F)_x and (f_F)_u including the dependence of alpha on x and u.
    Matrix filippov_dx(const HybridOCP &ocp, const Vector &x, const Vector &u);
    Matrix filippov_du(const HybridOCP &ocp, const Vector &x, const Vector &u);

    /// Verdict when the state reaches the surface from region `from` (Below or Above):
    /// a crossing into the opposite region or the start of sliding.
    TransitionKind entry_test(const HybridOCP &ocp, const Vector &x, const Vector &u, Mode from);

    /// While sliding: ExitToF1 once alpha has reached 0 with both fields pointing
    /// into g < 0, ExitToF2 once alpha has reached 1 with both pointing into g > 0.
    /// `alpha_tol` is the slack allowed around the boundary values.
    std::optional<TransitionKind> exit_test(const HybridOCP &ocp, const Vector &x, const Vector &u,
                                            double alpha_tol = 1e-9);

    /// Mode for a state that starts on (or within surface_tol of) the surface.
    Mode classify_on_surface(const HybridOCP &ocp, const Vector &x, const Vector &u);

} // namespace slidoc

#endif // SLIDOC_MODEL_HPP
