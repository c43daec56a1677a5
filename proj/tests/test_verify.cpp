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

#include "slidoc/error.hpp"
#include "slidoc/problems.hpp"
#include "slidoc/verify.hpp"
#include "support.hpp"

using namespace slidoc;
using slidoc::testing::vec;

namespace
{
    const std::vector<double> kGrid{0.1, 0.05, 0.025, 0.0125};
}

TEST_CASE("central difference of a square")
{
    CHECK(std::abs(central_difference([](double u) { return u * u; }, 3.0, 1e-6) - 6.0) <= 1e-6);
}

TEST_CASE("fitted slope of a power law")
{
    std::vector<double> h{0.1, 0.05, 0.025}, e;
    for (double x : h)
        e.push_back(3.0 * std::pow(x, 4));
    CHECK(std::abs(fitted_slope(h, e) - 4.0) <= 1e-12);
}

TEST_CASE("oracle of an uncontrolled system is zero")
{
    auto ocp = make_problem("smooth-linear").ocp;
    ocp.field1.value = [](const Vector &x, const Vector &) { return vec({x(1), -x(0)}); };
    ocp.field1.du = [](const Vector &, const Vector &) { return Matrix::Zero(2, 1).eval(); };
    ocp.field2 = ocp.field1;
    const auto fd = fd_gradient(ocp, radau_iia_3(), ControlGrid(1, 10, 0.3), {FunctionalId{}});
    CHECK(fd.gradients.at(0).norm() == 0.0);
}

TEST_CASE("gradient check on the built-in problems")
{
    const auto smooth = make_problem("smooth-linear").ocp;
    const auto c1 = check_gradient(smooth, radau_iia_3(), ControlGrid(1, 10, 0.5));
    REQUIRE(c1.size() == 1);
    CHECK(c1[0].max_rel_error <= 1e-5);
    CHECK(c1[0].excluded == 0);

    const auto relay = make_problem("p2-sliding").ocp;
    const auto c2 = check_gradient(relay, radau_iia_3(), ControlGrid(1, 10, 0.2));
    CHECK(c2[0].max_rel_error <= 1e-4);

    const auto toy = make_problem("constrained-toy").ocp;
    const auto c3 = check_gradient(toy, radau_iia_3(), ControlGrid(1, 10, 0.7));
    REQUIRE(c3.size() == 3);
    for (const auto &c : c3)
        CHECK(c.max_rel_error <= 1e-5);
}

TEST_CASE("structure changes are flagged")
{
    // u = 1 on the last interval puts alpha exactly at 1: u + eps leaves the
    // surface through f2, u - eps keeps sliding
    const auto ocp = make_problem("p2-sliding").ocp;
    ControlGrid u(1, 10, 0.2);
    u(0, 9) = 1.0;
    const auto fd = fd_gradient(ocp, radau_iia_3(), u, {FunctionalId{}}, 1e-6);
    REQUIRE(fd.structure_change.size() == 10);
    for (int i = 0; i < 9; ++i)
        CHECK_FALSE(fd.structure_change[i]);
    CHECK(fd.structure_change[9]);

    const auto c = check_gradient(ocp, radau_iia_3(), u);
    CHECK(c[0].excluded == 1);
    CHECK(c[0].entries[9].structure_change);
}

TEST_CASE("order studies on the smooth problem")
{
    const auto ocp = make_problem("smooth-linear").ocp;
    const ControlGrid u(1, 10, 0.5);
    const auto tab = radau_iia_3();

    const auto se = order_study(ocp, tab, u, OrderQuantity::StateEndpoint, kGrid);
    CHECK(se.slope >= 4.6);
    CHECK(se.slope <= 5.4);
    CHECK(se.reference_gap <= 1e-12);
    CHECK(se.h_ref <= kGrid.back() / 8);

    CHECK(order_study(ocp, tab, u, OrderQuantity::StateStage, kGrid).slope >= 3.6);
    CHECK(order_study(ocp, tab, u, OrderQuantity::AdjointEndpoint, kGrid).slope >= 3.6);
    CHECK(order_study(ocp, tab, u, OrderQuantity::AdjointStage, kGrid).slope >= 2.6);
    CHECK(order_study(ocp, tab, u, OrderQuantity::Gradient, kGrid).slope >= 2.6);
}

TEST_CASE("order study input checks")
{
    const auto ocp = make_problem("smooth-linear").ocp;
    const ControlGrid u(1, 10, 0.5);
    CHECK_THROWS_AS(order_study(ocp, radau_iia_3(), u, OrderQuantity::StateEndpoint, {0.05, 0.1}), Error);
    CHECK_THROWS_AS(order_study(ocp, radau_iia_3(), u, OrderQuantity::StateEndpoint, {0.07, 0.03}), Error);
    CHECK(parse_order_quantity("adjoint_stage") == OrderQuantity::AdjointStage);
    CHECK(to_string(OrderQuantity::Gradient) == "gradient");
    CHECK_THROWS_AS(parse_order_quantity("lambda"), Error);
}
