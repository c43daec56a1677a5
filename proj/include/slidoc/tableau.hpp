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

#ifndef SLIDOC_TABLEAU_HPP
#define SLIDOC_TABLEAU_HPP

#include <string>
#include <vector>

#include "slidoc/linalg.hpp"

namespace slidoc
{

    /**
     * @brief Coefficients (A, b, c) of an s-stage implicit Runge-Kutta scheme.
     *
     * Immutable after construction. The constructor checks shapes and that every
     * weight is nonzero, because the adjoint transform divides by b_i.
     */
    class ButcherTableau
    {
    public:
        ButcherTableau(std::string name, Matrix a, Vector b, Vector c);

        const std::string &name() const { return name_; }
        int stages() const { return static_cast<int>(b_.size()); }
        const Matrix &a() const { return a_; }
        const Vector &b() const { return b_; }
        const Vector &c() const { return c_; }

        double a(int i, int j) const { return a_(i, j); }
        double b(int i) const { return b_(i); }
        double c(int i) const { return c_(i); }

        /// c_s = 1 and the last row of A equals b.
        bool stiffly_accurate(double tol = 1e-14) const;

        /// max_i |sum_j a_ij - c_i|
        double row_sum_defect() const;

    private:
        std::string name_;
        Matrix a_;
        Vector b_;
        Vector c_;
    };

    /// 3-stage Radau IIA, built from the rational-plus-sqrt(6) closed forms.
    ButcherTableau radau_iia_3();

    /// 3-stage Radau IA in closed form. Used as the reference that the adjoint
    /// transform of Radau IIA must reproduce.
    ButcherTableau radau_ia_3();

    /// abar_ij = a_ji b_j / b_i, bbar = b, cbar = 1 - c. Throws ZeroWeight when
    /// some |b_i| <= 1e-14.
    ButcherTableau adjoint_tableau(const ButcherTableau &t);

    /// Residual tables of the simplifying conditions.
    ///   B(l):    sum_i b_i c_i^(l-1) - 1/l
    ///   C(l)_i:  sum_j a_ij c_j^(l-1) - c_i^l / l
    ///   D(l)_j:  sum_i b_i c_i^(l-1) a_ij - b_j (1 - c_j^l) / l
    /// Each table entry for order l stores the max-norm over stages.
    struct ConditionReport
    {
        int p = 0;
        int q = 0;
        int r = 0;
        std::vector<double> b_residuals;
        std::vector<double> c_residuals;
        std::vector<double> d_residuals;
    };

    inline constexpr double kConditionTolerance = 1e-12;

    ConditionReport check_conditions(const ButcherTableau &t, int max_order, double tol = kConditionTolerance);

    /// Largest entrywise difference between two tableaus of equal stage count.
    double max_entry_difference(const ButcherTableau &x, const ButcherTableau &y);

} // namespace slidoc

#endif // SLIDOC_TABLEAU_HPP
