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

#include "slidoc/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slidoc
{

    namespace
    {
        constexpr double kZeroWeight = 1e-14;

        double ipow(double x, int k)
        {
            double r = 1.0;
            for (int i = 0; i < k; ++i)
            {
                r *= x;
            }
            return r;
        }
    } // namespace

    ButcherTableau::ButcherTableau(std::string name, Matrix a, Vector b, Vector c)
        : name_(std::move(name)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c))
    {
        const auto s = b_.size();
        if (s == 0 || a_.rows() != s || a_.cols() != s || c_.size() != s)
        {
            std::ostringstream os;
            os << "tableau '" << name_ << "': inconsistent shapes A=" << a_.rows() << "x" << a_.cols()
               << " b=" << b_.size() << " c=" << c_.size();
            fail(ErrorCode::InvalidTableau, os.str());
        }
        if (!a_.allFinite() || !b_.allFinite() || !c_.allFinite())
        {
            fail(ErrorCode::InvalidTableau, "tableau '" + name_ + "': non-finite coefficient");
        }
        for (Eigen::Index i = 0; i < s; ++i)
        {
            if (std::abs(b_(i)) <= kZeroWeight)
            {
                std::ostringstream os;
                os << "tableau '" << name_ << "': weight b_" << i + 1 << " = " << b_(i) << " is zero";
                fail(ErrorCode::ZeroWeight, os.str());
            }
        }
    }

    bool ButcherTableau::stiffly_accurate(double tol) const
    {
        const int s = stages();
        if (std::abs(c_(s - 1) - 1.0) > tol)
        {
            return false;
        }
        return (a_.row(s - 1).transpose() - b_).cwiseAbs().maxCoeff() <= tol;
    }

    double ButcherTableau::row_sum_defect() const
    {
        return (a_.rowwise().sum() - c_).cwiseAbs().maxCoeff();
    }

    ButcherTableau radau_iia_3()
    {
        const double r6 = std::sqrt(6.0);
        Matrix a(3, 3);
        a << 11.0 / 45.0 - 7.0 * r6 / 360.0, 37.0 / 225.0 - 169.0 * r6 / 1800.0, -2.0 / 225.0 + r6 / 75.0,
            37.0 / 225.0 + 169.0 * r6 / 1800.0, 11.0 / 45.0 + 7.0 * r6 / 360.0, -2.0 / 225.0 - r6 / 75.0,
            4.0 / 9.0 - r6 / 36.0, 4.0 / 9.0 + r6 / 36.0, 1.0 / 9.0;
        Vector b(3);
        b << 4.0 / 9.0 - r6 / 36.0, 4.0 / 9.0 + r6 / 36.0, 1.0 / 9.0;
        Vector c(3);
        c << 2.0 / 5.0 - r6 / 10.0, 2.0 / 5.0 + r6 / 10.0, 1.0;
        return ButcherTableau("radau-iia-3", std::move(a), std::move(b), std::move(c));
    }

    ButcherTableau radau_ia_3()
    {
        const double r6 = std::sqrt(6.0);
        Matrix a(3, 3);
        a << 11.0 / 45.0 - 7.0 * r6 / 360.0, 11.0 / 45.0 + 43.0 * r6 / 360.0, 1.0 / 9.0,
            11.0 / 45.0 - 43.0 * r6 / 360.0, 11.0 / 45.0 + 7.0 * r6 / 360.0, 1.0 / 9.0,
            -1.0 / 18.0 + r6 / 18.0, -1.0 / 18.0 - r6 / 18.0, 1.0 / 9.0;
        Vector b(3);
        b << 4.0 / 9.0 - r6 / 36.0, 4.0 / 9.0 + r6 / 36.0, 1.0 / 9.0;
        Vector c(3);
        c << 3.0 / 5.0 + r6 / 10.0, 3.0 / 5.0 - r6 / 10.0, 0.0;
        return ButcherTableau("radau-ia-3", std::move(a), std::move(b), std::move(c));
    }

    ButcherTableau adjoint_tableau(const ButcherTableau &t)
    {
        const int s = t.stages();
        Matrix abar(s, s);
        for (int i = 0; i < s; ++i)
        {
            if (std::abs(t.b(i)) <= kZeroWeight)
            {
                fail(ErrorCode::ZeroWeight, "adjoint_tableau: zero weight in '" + t.name() + "'");
            }
            for (int j = 0; j < s; ++j)
            {
                abar(i, j) = t.a(j, i) * t.b(j) / t.b(i);
            }
        }
        Vector cbar = Vector::Ones(s) - t.c();
        return ButcherTableau(t.name() + "-adjoint", std::move(abar), t.b(), std::move(cbar));
    }

    ConditionReport check_conditions(const ButcherTableau &t, int max_order, double tol)
    {
        if (max_order < 1)
        {
            fail(ErrorCode::ValidationError, "check_conditions: max_order must be >= 1");
        }
        const int s = t.stages();
        ConditionReport rep;
        rep.b_residuals.resize(max_order);
        rep.c_residuals.resize(max_order);
        rep.d_residuals.resize(max_order);

        for (int l = 1; l <= max_order; ++l)
        {
            double bsum = 0.0;
            for (int i = 0; i < s; ++i)
            {
                bsum += t.b(i) * ipow(t.c(i), l - 1);
            }
            rep.b_residuals[l - 1] = std::abs(bsum - 1.0 / l);

            double cres = 0.0;
            for (int i = 0; i < s; ++i)
            {
                double sum = 0.0;
                for (int j = 0; j < s; ++j)
                {
                    sum += t.a(i, j) * ipow(t.c(j), l - 1);
                }
                cres = std::max(cres, std::abs(sum - ipow(t.c(i), l) / l));
            }
            rep.c_residuals[l - 1] = cres;

            double dres = 0.0;
            for (int j = 0; j < s; ++j)
            {
                double sum = 0.0;
                for (int i = 0; i < s; ++i)
                {
                    sum += t.b(i) * ipow(t.c(i), l - 1) * t.a(i, j);
                }
                dres = std::max(dres, std::abs(sum - t.b(j) * (1.0 - ipow(t.c(j), l)) / l));
            }
            rep.d_residuals[l - 1] = dres;
        }

        auto leading = [tol](const std::vector<double> &res) {
            int k = 0;
            while (k < static_cast<int>(res.size()) && res[k] <= tol)
            {
                ++k;
            }
            return k;
        };
        rep.p = leading(rep.b_residuals);
        rep.q = leading(rep.c_residuals);
        rep.r = leading(rep.d_residuals);
        return rep;
    }

    double max_entry_difference(const ButcherTableau &x, const ButcherTableau &y)
    {
        if (x.stages() != y.stages())
        {
            fail(ErrorCode::DimensionMismatch, "max_entry_difference: stage counts differ");
        }
        double d = (x.a() - y.a()).cwiseAbs().maxCoeff();
        d = std::max(d, (x.b() - y.b()).cwiseAbs().maxCoeff());
        d = std::max(d, (x.c() - y.c()).cwiseAbs().maxCoeff());
        return d;
    }

} // namespace slidoc
