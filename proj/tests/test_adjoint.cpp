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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "slidoc/adjoint.hpp"
#include "slidoc/error.hpp"
#include "slidoc/problems.hpp"
#include "support.hpp"

using namespace slidoc;
using slidoc::testing::random_linear;
using slidoc::testing::rel_diff;
using slidoc::testing::vec;

namespace
{
    EndpointFunction linear_endpoint(const Vector &c)
    {
        return {"w", [c](const Vector &x) { return c.dot(x); }, [c](const Vector &) { return c; }};
    }

    Trajectory relay_trajectory(const HybridOCP &ocp)
    {
        return integrate(ocp, ControlGrid(1, ocp.N, 0.2), radau_iia_3());
    }

    HybridOCP scalar_problem(double a)
    {
        HybridOCP ocp;
        ocp.name = "scalar";
        ocp.n = 1;
        ocp.m = 1;
        ocp.field1 = linear_field(Matrix::Constant(1, 1, a), Matrix::Zero(1, 1));
        ocp.field2 = ocp.field1;
        ocp.surface = {[](const Vector &x) { return x(0) - 1e6; }, [](const Vector &) { return vec({1.0}); },
                       [](const Vector &) { return Matrix::Zero(1, 1).eval(); }};
        ocp.cost = linear_endpoint(vec({1.0}));
        ocp.x0 = vec({1.0});
        ocp.u_lo = vec({-1.0});
        ocp.u_hi = vec({1.0});
        return ocp;
    }
} // namespace

TEST_CASE("zero field propagates the adjoint unchanged")
{
    auto ocp = scalar_problem(0.0);
    const auto tr = integrate(ocp, ControlGrid(1, 1, 0.0), radau_iia_3());
    const Vector lp = vec({2.5});
    const auto m = adjoint_step_matrix(ocp, radau_iia_3(), tr.steps[0], lp);
    CHECK(m.Lambda.head(3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.Lambda(3) == 2.5);
    const auto t = adjoint_step_transformed(ocp, radau_iia_3(), tr.steps[0], lp);
    CHECK(t.lambda(0) == 2.5);
    CHECK((t.stage_lambda.array() == 2.5).all());
}

TEST_CASE("scalar decay: both forms and the adjoint stability function")
{
    for (double a : {-1.0, 0.7, -25.0})
    {
        auto ocp = scalar_problem(a);
        ocp.tf = 0.1;
        IntegratorOptions opts;
        opts.steps_per_interval = 1;
        const auto tab = radau_iia_3();
        const auto tr = integrate(ocp, ControlGrid(1, 1, 0.0), tab, opts);
        const Vector lp = vec({1.0});
        const auto m = adjoint_step_matrix(ocp, tab, tr.steps[0], lp);
        const auto t = adjoint_step_transformed(ocp, tab, tr.steps[0], lp);
        CHECK(std::abs(m.Lambda(3) - t.lambda(0)) <= 1e-13 * std::max(1.0, std::abs(t.lambda(0))));

        const auto adj = adjoint_tableau(tab);
        const double z = a * 0.1;
        const Matrix sys = Matrix::Identity(3, 3) - z * adj.a();
        const double r = 1.0 + z * adj.b().dot(sys.lu().solve(Vector::Ones(3)));
        CHECK(std::abs(t.lambda(0) - r) <= 1e-13 * std::max(1.0, std::abs(r)));
    }
}

TEST_CASE("matrix and transformed forms agree on random linear problems")
{
    std::mt19937_64 rng(20261018);
    const auto tab = radau_iia_3();
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto ocp = random_linear(rng, 2 + trial % 3, 1 + trial % 2);
        const auto tr = integrate(ocp, ControlGrid(ocp.m, ocp.N, 0.3), tab);
        const Vector lp = ocp.cost.gradient(tr.x.back());
        for (const auto &st : tr.steps)
        {
            const auto m = adjoint_step_matrix(ocp, tab, st, lp);
            const auto t = adjoint_step_transformed(ocp, tab, st, lp);
            CHECK(rel_diff(m.Lambda.tail(ocp.n), t.lambda) <= 1e-12);
            CHECK(m.Lambda.head(3 * ocp.n).cwiseAbs().maxCoeff() == 0.0);
            // r_j = h b_j f_x^T lambda_j
            for (int j = 0; j < 3; ++j)
            {
                const Vector rj = st.h * tab.b(j) * ocp.field1.dx(st.stages.col(j), st.u).transpose() *
                                  t.stage_lambda.col(j);
                CHECK(rel_diff(m.R.segment(j * ocp.n, ocp.n), rj) <= 1e-11);
            }
        }
        const auto full_m = run_adjoint(ocp, tab, tr, FunctionalId{}, {true});
        const auto full_t = run_adjoint(ocp, tab, tr, FunctionalId{});
        for (int k = 0; k <= tr.K(); ++k)
            CHECK(rel_diff(full_m.lambda[k], full_t.lambda[k]) <= 1e-12);
    }
}

TEST_CASE("bad adjoint input length")
{
    const auto ocp = scalar_problem(-1.0);
    const auto tr = integrate(ocp, ControlGrid(1, 1, 0.0), radau_iia_3());
    const auto map = discrete_state_map(ocp, radau_iia_3(), tr.steps[0]);
    CHECK(map.residual.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(adjoint_step_matrix(map, vec({1.0})), Error);
}

TEST_CASE("terminal conditions off the surface")
{
    const auto inst = make_problem("smooth-linear");
    const auto tr = integrate(inst.ocp, ControlGrid(1, inst.ocp.N, 0.5), radau_iia_3());
    const auto tc = terminal_conditions(inst.ocp, tr, inst.ocp.cost);
    CHECK_FALSE(tc.sliding);
    CHECK(tc.lambda == tr.x.back());
}

TEST_CASE("terminal conditions on the surface")
{
    const auto ocp = make_problem("p2-sliding").ocp;
    const auto tr = relay_trajectory(ocp);
    const Vector gx = ocp.surface.gradient(tr.x.back());

    const auto t1 = terminal_conditions(ocp, tr, linear_endpoint(vec({1.0, 0.0, 0.0})));
    CHECK(t1.sliding);
    CHECK(std::abs(gx.dot(t1.lambda)) <= 1e-12);
    CHECK(std::abs(t1.lambda(0) - 1.0) <= 1e-12);

    const auto t2 = terminal_conditions(ocp, tr, linear_endpoint(vec({0.0, 1.0, 0.0})));
    CHECK(std::abs(gx.dot(t2.lambda)) <= 1e-12);
    CHECK(std::abs(t2.nu1 - 1.0) <= 1e-12);

    const auto t0 = terminal_conditions(ocp, tr, linear_endpoint(Vector::Zero(3)));
    CHECK(t0.lambda.norm() == 0.0);
    CHECK(t0.nu1 == 0.0);
    CHECK(t0.lambda_g == 0.0);
}

TEST_CASE("jump at sliding entry")
{
    const auto ocp = make_problem("p2-sliding").ocp;
    const auto tr = relay_trajectory(ocp);
    const auto &rec = tr.transitions.at(0);

    const auto j0 = transition_jump(ocp, tr, rec, Vector::Zero(3), 0.0);
    CHECK(j0.pi == 0.0);
    CHECK(j0.lambda_minus.norm() == 0.0);

    const auto j1 = transition_jump(ocp, tr, rec, vec({1.0, 0.0, 0.0}), 0.0);
    CHECK(std::abs(j1.pi) <= 1e-12);
    CHECK((j1.lambda_minus - vec({1.0, 0.0, 0.0})).norm() <= 1e-12);
    CHECK(j1.residual <= 1e-10);

    // with the cost weight: lambda- . f1 must equal u^2 + alpha w + 1 = 1.64
    const auto j2 = transition_jump(ocp, tr, rec, vec({1.0, 0.0, 1.0}), 0.0);
    CHECK(std::abs(j2.pi + 0.5) <= 1e-9);
    CHECK((j2.lambda_minus - vec({1.0, 0.5, 1.0})).norm() <= 1e-9);
    CHECK(j2.residual <= 1e-10);
}

TEST_CASE("relay adjoint structure")
{
    const auto ocp = make_problem("p2-sliding").ocp;
    const auto tr = relay_trajectory(ocp);
    const auto adj = run_adjoint(ocp, radau_iia_3(), tr, FunctionalId{});
    REQUIRE(adj.jumps.size() == 1);
    CHECK(adj.jumps[0].kind == TransitionKind::EnterSliding);
    CHECK(adj.jumps[0].residual <= 1e-10);
    CHECK(adj.sliding_terminal);

    const int ke = tr.transitions[0].k;
    for (int k = ke; k <= tr.K(); ++k)
    {
        const Vector gx = ocp.surface.gradient(tr.x[k]);
        CHECK(std::abs(gx.dot(adj.lambda[k])) <= 1e-8 * adj.lambda[k].norm());
        CHECK((adj.lambda[k] - adj.lambda.back()).norm() <= 1e-12);
        CHECK_FALSE(std::isnan(adj.lambda_g[k]));
    }
    for (int k = 0; k < ke; ++k)
        CHECK(std::isnan(adj.lambda_g[k]));
}

TEST_CASE("zero terminal data gives a zero adjoint")
{
    const auto ocp = make_problem("p2-sliding").ocp;
    const auto tr = relay_trajectory(ocp);
    const auto adj = run_adjoint(ocp, radau_iia_3(), tr, linear_endpoint(Vector::Zero(3)));
    for (const auto &l : adj.lambda)
        CHECK(l.norm() == 0.0);
    for (const auto &j : adj.jumps)
        CHECK(j.pi == 0.0);
}

TEST_CASE("adjoint is linear in the terminal gradient")
{
    for (const char *name : {"smooth-linear", "p2-sliding"})
    {
        const auto inst = make_problem(name);
        const auto &ocp = inst.ocp;
        const auto tr = integrate(ocp, ControlGrid(ocp.m, ocp.N, inst.default_control(0)), radau_iia_3());
        const Vector c1 = vec({0.3, -1.2, 0.7}).head(ocp.n);
        const Vector c2 = vec({-2.0, 0.4, 1.1}).head(ocp.n);
        const auto a1 = run_adjoint(ocp, radau_iia_3(), tr, linear_endpoint(c1));
        const auto a2 = run_adjoint(ocp, radau_iia_3(), tr, linear_endpoint(c2));
        const auto a12 = run_adjoint(ocp, radau_iia_3(), tr, linear_endpoint(c1 + c2));
        for (int k = 0; k <= tr.K(); ++k)
            CHECK((a12.lambda[k] - a1.lambda[k] - a2.lambda[k]).norm() <= 1e-12 * std::max(1.0, a12.lambda[k].norm()));
    }
}

TEST_CASE("one adjoint per endpoint functional")
{
    const auto inst = make_problem("constrained-toy");
    const auto tr = integrate(inst.ocp, ControlGrid(1, inst.ocp.N, 0.4), radau_iia_3());
    const auto all = run_all_adjoints(inst.ocp, radau_iia_3(), tr);
    REQUIRE(all.size() == 3);
    CHECK(all[0].functional.label() == "phi");
    CHECK(all[1].functional.label() == "g1:0");
    CHECK(all[2].functional.label() == "g2:0");
    for (const auto &a : all)
        CHECK(a.jumps.empty());
    CHECK(all[1].lambda.back() == vec({1.0, 0.0, 0.0}));
}
