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

#include <random>

#include "slidoc/error.hpp"
#include "slidoc/model.hpp"
#include "slidoc/problems.hpp"
#include "support.hpp"

using namespace slidoc;
using slidoc::testing::constant_fields;
using slidoc::testing::vec;

namespace
{
    template <class F>
    ErrorCode code_of(F &&f)
    {
        try
        {
            f();
        }
        catch (const Error &e)
        {
            return e.code();
        }
        FAIL("expected an error");
        return ErrorCode::IoError;
    }

    const Vector x_on = vec({0.3, 0.0});
    const Vector u0 = vec({0.0});
} // namespace

TEST_CASE("alpha for symmetric and tangent fields")
{
    CHECK(alpha(constant_fields(1.0, -1.0), x_on, u0) == doctest::Approx(0.5));
    CHECK(alpha(constant_fields(0.0, -1.0), x_on, u0) == 0.0);
}

TEST_CASE("alpha and filippov field on the relay problem")
{
    const auto p2 = make_problem("p2-sliding").ocp;
    const Vector x = vec({0.4, 0.0, 0.0});
    const Vector u = vec({0.2});
    CHECK(alpha(p2, x, u) == doctest::Approx(0.6).epsilon(1e-15));
    const auto ff = filippov_field(p2, x, u);
    CHECK(ff.value(0) == doctest::Approx(1.0));
    CHECK(std::abs(ff.value(1)) <= 1e-15);
}

TEST_CASE("degenerate denominator is reported")
{
    CHECK(code_of([] { alpha(constant_fields(1.0, 1.0), x_on, u0); }) == ErrorCode::DegenerateDenominator);
}

TEST_CASE("alpha is invariant under surface scaling")
{
    for (double k : {0.01, 3.0, 250.0})
    {
        const double a1 = alpha(constant_fields(0.7, -2.3), x_on, u0);
        const double ak = alpha(constant_fields(0.7, -2.3, k), x_on, u0);
        CHECK(std::abs(a1 - ak) <= 1e-13);
    }
}

TEST_CASE("filippov field is tangent to a curved surface")
{
    // f1, f2 nonlinear, g = x1^2 + x2^2 - 1
    HybridOCP ocp;
    ocp.n = 2;
    ocp.m = 1;
    ocp.field1 = {[](const Vector &x, const Vector &u) { return vec({std::sin(x(1)) + u(0), -x(0) + 2.0}); },
                  [](const Vector &x, const Vector &) {
                      Matrix j(2, 2);
                      j << 0.0, std::cos(x(1)), -1.0, 0.0;
                      return j;
                  },
                  [](const Vector &, const Vector &) { return Matrix::Ones(2, 1).eval(); }};
    ocp.field2 = {[](const Vector &x, const Vector &u) { return vec({x(1) * x(0) - 1.0, -3.0 + u(0) * x(0)}); },
                  [](const Vector &x, const Vector &u) {
                      Matrix j(2, 2);
                      j << x(1), x(0), u(0), 0.0;
                      return j;
                  },
                  [](const Vector &x, const Vector &) { return vec({0.0, x(0)}).eval(); }};
    ocp.surface = {[](const Vector &x) { return x.squaredNorm() - 1.0; }, [](const Vector &x) { return (2.0 * x).eval(); },
                   [](const Vector &) { return (2.0 * Matrix::Identity(2, 2)).eval(); }};

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    int tested = 0;
    for (int trial = 0; trial < 500; ++trial)
    {
        const double th = 3.2 * uni(rng);
        const Vector x = vec({std::cos(th), std::sin(th)});
        const Vector u = vec({uni(rng)});
        try
        {
            const auto ff = filippov_field(ocp, x, u);
            const Vector gx = ocp.surface.gradient(x);
            CHECK(std::abs(gx.dot(ff.value)) <= 1e-12 * gx.norm() * std::max(1.0, ff.value.norm()));
            ++tested;
        }
        catch (const Error &e)
        {
            CHECK(e.code() == ErrorCode::DegenerateDenominator);
        }
    }
    CHECK(tested > 400);
}

TEST_CASE("analytic alpha derivatives match differences")
{
    const auto p2 = make_problem("p2-sliding").ocp;
    const Vector x = vec({0.4, 0.0, 0.1});
    const Vector u = vec({0.25});
    const double e = 1e-6;
    const double da = (alpha(p2, x, vec({0.25 + e})) - alpha(p2, x, vec({0.25 - e}))) / (2 * e);
    CHECK(alpha_du(p2, x, u)(0) == doctest::Approx(da).epsilon(1e-8));
    const Matrix fu = filippov_du(p2, x, u);
    const Vector fd = (filippov_field(p2, x, vec({0.25 + e})).value - filippov_field(p2, x, vec({0.25 - e})).value) / (2 * e);
    CHECK((fu.col(0) - fd).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("entry test verdicts")
{
    CHECK(entry_test(constant_fields(1.0, 2.0), x_on, u0, Mode::Below) == TransitionKind::Cross12);
    CHECK(entry_test(constant_fields(-2.0, -1.0), x_on, u0, Mode::Above) == TransitionKind::Cross21);
    CHECK(entry_test(constant_fields(1.0, -1.0), x_on, u0, Mode::Below) == TransitionKind::EnterSliding);
    CHECK(entry_test(constant_fields(1.0, -1.0), x_on, u0, Mode::Above) == TransitionKind::EnterSliding);
    CHECK(code_of([] { entry_test(constant_fields(1e-14, -1.0), x_on, u0, Mode::Below); }) ==
          ErrorCode::TangentialAmbiguity);
}

TEST_CASE("exit test verdicts")
{
    CHECK_FALSE(exit_test(constant_fields(1.0, -1.0), x_on, u0).has_value());
    // alpha has just crossed 0, both fields point into g < 0
    CHECK(exit_test(constant_fields(-1e-12, -1.0), x_on, u0) == TransitionKind::ExitToF1);
    // alpha has just crossed 1, both fields point into g > 0
    CHECK(exit_test(constant_fields(1.0, 1e-12), x_on, u0) == TransitionKind::ExitToF2);
    // after a control jump both fields may point clearly to one side
    CHECK(exit_test(constant_fields(-0.5, -0.1), x_on, u0) == TransitionKind::ExitToF1);
    CHECK(exit_test(constant_fields(0.1, 0.5), x_on, u0) == TransitionKind::ExitToF2);
}

TEST_CASE("no mode change when both fields are tangential")
{
    for (auto [a, b] : {std::pair{1e-12, -1e-12}, std::pair{-5e-11, 2e-11}, std::pair{0.0, 0.0}})
    {
        const auto ocp = constant_fields(a, b);
        CHECK(code_of([&] { entry_test(ocp, x_on, u0, Mode::Below); }) == ErrorCode::TangentialAmbiguity);
        CHECK(code_of([&] { exit_test(ocp, x_on, u0); }) == ErrorCode::TangentialAmbiguity);
    }
}

TEST_CASE("problem validation and registry")
{
    for (const auto &name : problem_names())
    {
        CHECK_NOTHROW(make_problem(name));
    }
    CHECK(code_of([] { make_problem("nope"); }) == ErrorCode::ValidationError);
    CHECK(code_of([] { make_problem("p2-sliding", {{"omega", 1.0}}); }) == ErrorCode::ValidationError);

    auto ocp = make_problem("smooth-linear").ocp;
    ocp.tf = ocp.t0;
    CHECK(code_of([&] { ocp.validate(); }) == ErrorCode::InvalidProblem);
    ocp = make_problem("smooth-linear").ocp;
    ocp.N = 0;
    CHECK(code_of([&] { ocp.validate(); }) == ErrorCode::InvalidProblem);
    ocp = make_problem("smooth-linear").ocp;
    ocp.u_lo(0) = 6.0;
    CHECK(code_of([&] { ocp.validate(); }) == ErrorCode::InvalidProblem);
}

TEST_CASE("breakpoints and control grid")
{
    auto ocp = make_problem("constrained-toy").ocp;
    ocp.N = 7;
    const auto bp = ocp.breakpoints();
    REQUIRE(bp.size() == 8);
    CHECK(bp.front() == ocp.t0);
    CHECK(bp.back() == ocp.tf);

    ControlGrid g(2, 3);
    g(1, 2) = 5.0;
    g(0, 1) = -7.0;
    const Vector flat = g.flat();
    CHECK(flat(2 * 2 + 1) == 5.0);
    CHECK(flat(1 * 2 + 0) == -7.0);
    CHECK(ControlGrid::from_flat(flat, 2).values() == g.values());
    const auto p = g.projected(vec({-1.0, -1.0}), vec({1.0, 1.0}));
    CHECK(p(1, 2) == 1.0);
    CHECK(p(0, 1) == -1.0);
}

TEST_CASE("functional ids")
{
    CHECK(FunctionalId::parse("phi") == FunctionalId{});
    CHECK(FunctionalId::parse("g1:0") == FunctionalId{FunctionalKind::Equality, 0});
    CHECK(FunctionalId::parse("g2:3").label() == "g2:3");
    CHECK(code_of([] { FunctionalId::parse("g3:1"); }) == ErrorCode::UsageError);
    const auto toy = make_problem("constrained-toy").ocp;
    CHECK(toy.functional_count() == 3);
    CHECK(toy.functionals().size() == 3);
}
