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

#ifndef SLIDOC_PROBLEMS_HPP
#define SLIDOC_PROBLEMS_HPP

#include <map>
#include <string>
#include <vector>

#include "slidoc/model.hpp"

namespace slidoc
{

    /// A registered problem together with the control it is simulated with by default.
    struct ProblemInstance
    {
        HybridOCP ocp;
        Vector default_control; ///< m-vector, applied on every interval
    };

    using ProblemParams = std::map<std::string, double>;

    /// Built-in problems:
    ///  - "smooth-linear":   damped oscillator x' = A x + B u, phi = |x(tf)|^2 / 2; the
    ///                       switching surface is far away, so it is a plain ODE.
    ///  - "p2-sliding":      relay f1 = (1, 1 + u, x2^2 + u^2), f2 = (1, -1 + u, x2^2 + u^2 + w),
    ///                       g = x2, phi = x3. The third state accumulates a running cost.
    ///  - "constrained-toy": double integrator with energy state, one terminal equality
    ///                       and one terminal inequality.
    /// Unknown parameter names are rejected with ValidationError.
    ProblemInstance make_problem(const std::string &name, const ProblemParams &params = {});

    std::vector<std::string> problem_names();

    /// Linear time-invariant test field x' = M x + B u used by the randomized tests.
    VectorField linear_field(const Matrix &m, const Matrix &b);

} // namespace slidoc

#endif // SLIDOC_PROBLEMS_HPP
