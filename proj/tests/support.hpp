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

#ifndef SLIDOC_TESTS_SUPPORT_HPP
#define SLIDOC_TESTS_SUPPORT_HPP

#include <random>

#include "slidoc/problems.hpp"

namespace slidoc::testing
{

    inline Vector vec(std::initializer_list<double> v)
    {
        Vector out(static_cast<Eigen::Index>(v.size()));
        Eigen::Index i = 0;
        for (double x : v)
            out(i++) = x;
        return out;
    }

    /// Planar problem with constant fields f1 = (1, a), f2 = (1, b) and g = x2,
    /// so that g_x f1 = a and g_x f2 = b everywhere.
    inline HybridOCP constant_fields(double a, double b, double surface_scale = 1.0)
    {
        HybridOCP ocp;
        ocp.name = "constant-fields";
        ocp.n = 2;
        ocp.m = 1;
        auto field = [](double v) {
            return VectorField{
                [v](const Vector &, const Vector &) { return vec({1.0, v}); },
                [](const Vector &, const Vector &) { return Matrix::Zero(2, 2).eval(); },
                [](const Vector &, const Vector &) { return Matrix::Zero(2, 1).eval(); },
            };
        };
        ocp.field1 = field(a);
        ocp.field2 = field(b);
        ocp.surface = {
            [surface_scale](const Vector &x) { return surface_scale * x(1); },
            [surface_scale](const Vector &) { return vec({0.0, surface_scale}); },
            [](const Vector &) { return Matrix::Zero(2, 2).eval(); },
        };
        ocp.cost = {"phi", [](const Vector &x) { return x(0); }, [](const Vector &) { return vec({1.0, 0.0}); }};
        ocp.x0 = vec({0.0, -1.0});
        ocp.u_lo = vec({-1.0});
        ocp.u_hi = vec({1.0});
        return ocp;
    }

    /// Random linear ODE problem x' = M x + B u with phi = c^T x; the surface is far away.
    inline HybridOCP random_linear(std::mt19937_64 &rng, int n, int m)
    {
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        Matrix a(n, n), b(n, m);
        Vector c(n), x0(n);
        for (int i = 0; i < n; ++i)
        {
            for (int j = 0; j < n; ++j)
                a(i, j) = uni(rng);
            for (int j = 0; j < m; ++j)
                b(i, j) = uni(rng);
            c(i) = uni(rng);
            x0(i) = uni(rng);
        }
        HybridOCP ocp;
        ocp.name = "random-linear";
        ocp.n = n;
        ocp.m = m;
        ocp.field1 = linear_field(a, b);
        ocp.field2 = ocp.field1;
        ocp.surface = {
            [](const Vector &x) { return x(0) - 1e6; },
            [n](const Vector &) {
                Vector g = Vector::Zero(n);
                g(0) = 1.0;
                return g;
            },
            [n](const Vector &) { return Matrix::Zero(n, n).eval(); },
        };
        ocp.cost = {"phi", [c](const Vector &x) { return c.dot(x); }, [c](const Vector &) { return c; }};
        ocp.x0 = x0;
        ocp.N = 4;
        ocp.u_lo = Vector::Constant(m, -10.0);
        ocp.u_hi = Vector::Constant(m, 10.0);
        return ocp;
    }

    inline double rel_diff(const Vector &a, const Vector &b)
    {
        return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
    }

} // namespace slidoc::testing

#endif // SLIDOC_TESTS_SUPPORT_HPP
