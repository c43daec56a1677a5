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

#include "slidoc/error.hpp"
#include "slidoc/tableau.hpp"

using namespace slidoc;

namespace
{
    const double r6 = std::sqrt(6.0);
}

TEST_CASE("radau iia closed forms")
{
    const auto t = radau_iia_3();
    CHECK(t.stages() == 3);
    CHECK(t.a(0, 0) == doctest::Approx(11.0 / 45 - 7 * r6 / 360).epsilon(1e-15));
    CHECK(std::abs(t.a(2, 2) - 1.0 / 9) <= 1e-14);
    CHECK(t.c(2) == 1.0);
    CHECK(std::abs(t.b(2) - 1.0 / 9) <= 1e-14);
    CHECK(std::abs(t.b(0) - (4.0 / 9 - r6 / 36)) <= 1e-14);
    CHECK(std::abs(t.b(1) - (4.0 / 9 + r6 / 36)) <= 1e-14);
    CHECK(std::abs(t.c(0) - (0.4 - r6 / 10)) <= 1e-14);
    CHECK(std::abs(t.c(1) - (0.4 + r6 / 10)) <= 1e-14);
    CHECK(std::abs(t.b().sum() - 1.0) <= 1e-15);
    CHECK(t.row_sum_defect() <= 1e-14);
    CHECK(t.stiffly_accurate());
}

TEST_CASE("adjoint transform of radau iia is radau ia")
{
    const auto adj = adjoint_tableau(radau_iia_3());
    CHECK(std::abs(adj.a(2, 2) - 1.0 / 9) <= 1e-14);
    CHECK(std::abs(adj.c(2)) <= 1e-15);
    CHECK((adj.b() - radau_iia_3().b()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(adj.a(2, 0) - (-1.0 / 18 + r6 / 18)) <= 1e-13);
    CHECK(max_entry_difference(adj, radau_ia_3()) <= 1e-13);
}

TEST_CASE("adjoint transform is an involution")
{
    const auto t = radau_iia_3();
    CHECK(max_entry_difference(adjoint_tableau(adjoint_tableau(t)), t) <= 1e-14);

    Matrix a(2, 2);
    a << 0.25, -0.1, 0.6, 0.3;
    Vector b(2), c(2);
    b << 0.3, 0.7;
    c << 0.15, 0.9;
    const ButcherTableau u("two-stage", a, b, c);
    CHECK(max_entry_difference(adjoint_tableau(adjoint_tableau(u)), u) <= 1e-14);
}

TEST_CASE("zero weight is rejected")
{
    Matrix a = Matrix::Zero(2, 2);
    Vector b(2), c(2);
    b << 1.0, 0.0;
    c << 0.0, 1.0;
    try
    {
        ButcherTableau t("bad", a, b, c);
        adjoint_tableau(t);
        FAIL("expected ZeroWeight");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::ZeroWeight);
    }
}

TEST_CASE("simplifying conditions of radau iia and its adjoint")
{
    const auto rep = check_conditions(radau_iia_3(), 5);
    CHECK(rep.p == 5);
    CHECK(rep.q == 3);
    CHECK(rep.r == 2);
    for (int l = 0; l < 5; ++l)
        CHECK(rep.b_residuals[l] <= 1e-12);
    for (int l = 0; l < 3; ++l)
        CHECK(rep.c_residuals[l] <= 1e-12);
    for (int l = 0; l < 2; ++l)
        CHECK(rep.d_residuals[l] <= 1e-12);

    const auto adj = check_conditions(adjoint_tableau(radau_iia_3()), 5);
    CHECK(adj.p == 5);
    CHECK(adj.q == 2);
    CHECK(adj.r == 3);
}

TEST_CASE("backward euler conditions")
{
    // D(1): b_1 a_11 - b_1 (1 - c_1) = 1, so D holds for no order.
    const ButcherTableau be("backward-euler", Matrix::Ones(1, 1), Vector::Ones(1), Vector::Ones(1));
    const auto rep = check_conditions(be, 3);
    CHECK(rep.p == 1);
    CHECK(rep.q == 1);
    CHECK(rep.r == 0);
    CHECK(rep.d_residuals[0] == doctest::Approx(1.0));
}

TEST_CASE("check_conditions needs a positive order")
{
    try
    {
        check_conditions(radau_iia_3(), 0);
        FAIL("expected ValidationError");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::ValidationError);
    }
}
