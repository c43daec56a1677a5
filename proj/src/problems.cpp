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

#include "slidoc/problems.hpp"

#include <set>

namespace slidoc
{

    namespace
    {
        double param(const ProblemParams &p, const std::string &key, double fallback)
        {
            auto it = p.find(key);
            return it == p.end() ? fallback : it->second;
        }

        void reject_unknown(const std::string &problem, const ProblemParams &p, const std::set<std::string> &known)
        {
            for (const auto &[key, value] : p)
            {
                if (!known.count(key))
                {
                    fail(ErrorCode::ValidationError, "params." + key + ": not a parameter of problem '" + problem + "'");
                }
            }
        }

        Vector vec(std::initializer_list<double> v)
        {
            Vector out(static_cast<Eigen::Index>(v.size()));
            Eigen::Index i = 0;
            for (double x : v)
            {
                out(i++) = x;
            }
            return out;
        }

        /// Plane x_0 = position, far outside the region the trajectory visits.
        SwitchingSurface distant_plane(int n, double position)
        {
            return {
                [position](const Vector &x) { return x(0) - position; },
                [n](const Vector &) {
                    Vector g = Vector::Zero(n);
                    g(0) = 1.0;
                    return g;
                },
                [n](const Vector &) { return Matrix::Zero(n, n); },
            };
        }

        ProblemInstance smooth_linear(const ProblemParams &p)
        {
            reject_unknown("smooth-linear", p, {"omega", "zeta"});
            const double omega = param(p, "omega", 3.0);
            const double zeta = param(p, "zeta", 0.1);
            Matrix a(2, 2);
            a << 0.0, 1.0, -omega * omega, -2.0 * zeta * omega;
            Matrix b(2, 1);
            b << 0.0, 1.0;

            HybridOCP ocp;
            ocp.name = "smooth-linear";
            ocp.n = 2;
            ocp.m = 1;
            ocp.field1 = linear_field(a, b);
            ocp.field2 = ocp.field1;
            ocp.surface = distant_plane(2, 1e3);
            ocp.cost = {"phi", [](const Vector &x) { return 0.5 * x.squaredNorm(); }, [](const Vector &x) { return x; }};
            ocp.t0 = 0.0;
            ocp.tf = 2.0;
            ocp.x0 = vec({1.0, 0.0});
            ocp.N = 10;
            ocp.u_lo = vec({-5.0});
            ocp.u_hi = vec({5.0});
            return {std::move(ocp), vec({0.5})};
        }

        ProblemInstance p2_sliding(const ProblemParams &p)
        {
            reject_unknown("p2-sliding", p, {"region2_cost"});
            const double w = param(p, "region2_cost", 1.0);

            HybridOCP ocp;
            ocp.name = "p2-sliding";
            ocp.n = 3;
            ocp.m = 1;
            ocp.field1 = {
                [](const Vector &x, const Vector &u) { return vec({1.0, 1.0 + u(0), x(1) * x(1) + u(0) * u(0)}); },
                [](const Vector &x, const Vector &) {
                    Matrix j = Matrix::Zero(3, 3);
                    j(2, 1) = 2.0 * x(1);
                    return j;
                },
                [](const Vector &, const Vector &u) {
                    Matrix j(3, 1);
                    j << 0.0, 1.0, 2.0 * u(0);
                    return j;
                },
            };
            ocp.field2 = {
                [w](const Vector &x, const Vector &u) { return vec({1.0, -1.0 + u(0), x(1) * x(1) + u(0) * u(0) + w}); },
                ocp.field1.dx,
                ocp.field1.du,
            };
            ocp.surface = {
                [](const Vector &x) { return x(1); },
                [](const Vector &) { return vec({0.0, 1.0, 0.0}); },
                [](const Vector &) { return Matrix::Zero(3, 3); },
            };
            ocp.cost = {"phi", [](const Vector &x) { return x(2); }, [](const Vector &) { return vec({0.0, 0.0, 1.0}); }};
            ocp.t0 = 0.0;
            ocp.tf = 1.0;
            ocp.x0 = vec({0.0, -0.5, 0.0});
            ocp.N = 10;
            ocp.u_lo = vec({-0.9});
            ocp.u_hi = vec({0.9});
            return {std::move(ocp), vec({0.2})};
        }

        ProblemInstance constrained_toy(const ProblemParams &p)
        {
            reject_unknown("constrained-toy", p, {"x1_target", "x2_max", "energy_weight"});
            const double target = param(p, "x1_target", 1.0);
            const double vmax = param(p, "x2_max", 1.2);
            const double weight = param(p, "energy_weight", 5.0);

            HybridOCP ocp;
            ocp.name = "constrained-toy";
            ocp.n = 3;
            ocp.m = 1;
            ocp.field1 = {
                [weight](const Vector &x, const Vector &u) { return vec({x(1), u(0), weight * u(0) * u(0)}); },
                [](const Vector &, const Vector &) {
                    Matrix j = Matrix::Zero(3, 3);
                    j(0, 1) = 1.0;
                    return j;
                },
                [weight](const Vector &, const Vector &u) {
                    Matrix j(3, 1);
                    j << 0.0, 1.0, 2.0 * weight * u(0);
                    return j;
                },
            };
            ocp.field2 = ocp.field1;
            ocp.surface = distant_plane(3, 1e3);
            ocp.cost = {"phi", [](const Vector &x) { return x(2); }, [](const Vector &) { return vec({0.0, 0.0, 1.0}); }};
            ocp.equality.push_back({"x1(tf) - target", [target](const Vector &x) { return x(0) - target; },
                                    [](const Vector &) { return vec({1.0, 0.0, 0.0}); }});
            ocp.inequality.push_back({"x2(tf) - x2_max", [vmax](const Vector &x) { return x(1) - vmax; },
                                      [](const Vector &) { return vec({0.0, 1.0, 0.0}); }});
            ocp.t0 = 0.0;
            ocp.tf = 1.0;
            ocp.x0 = Vector::Zero(3);
            ocp.N = 10;
            ocp.u_lo = vec({-10.0});
            ocp.u_hi = vec({10.0});
            return {std::move(ocp), vec({0.0})};
        }
    } // namespace

    VectorField linear_field(const Matrix &m, const Matrix &b)
    {
        return {
            [m, b](const Vector &x, const Vector &u) -> Vector { return m * x + b * u; },
            [m](const Vector &, const Vector &) -> Matrix { return m; },
            [b](const Vector &, const Vector &) -> Matrix { return b; },
        };
    }

    ProblemInstance make_problem(const std::string &name, const ProblemParams &params)
    {
        ProblemInstance inst;
        if (name == "smooth-linear")
        {
            inst = smooth_linear(params);
        }
        else if (name == "p2-sliding")
        {
            inst = p2_sliding(params);
        }
        else if (name == "constrained-toy")
        {
            inst = constrained_toy(params);
        }
        else
        {
            fail(ErrorCode::ValidationError, "problem: unknown name '" + name + "'");
        }
        inst.ocp.validate();
        return inst;
    }

    std::vector<std::string> problem_names() { return {"smooth-linear", "p2-sliding", "constrained-toy"}; }

} // namespace slidoc
