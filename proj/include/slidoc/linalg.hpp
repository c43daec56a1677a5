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

#ifndef SLIDOC_LINALG_HPP
#define SLIDOC_LINALG_HPP

#include <Eigen/Dense>

#include "slidoc/error.hpp"

namespace slidoc
{

    using Vector = Eigen::VectorXd;
    using Matrix = Eigen::MatrixXd;

    /// Reciprocal condition estimate below which a dense system is treated as singular.
    inline constexpr double kSingularRcond = 1e-14;

    /// Dense LU with partial pivoting that reports near-singular matrices through
    /// `code` instead of returning garbage.
    class CheckedLU
    {
    public:
        CheckedLU(const Matrix &a, ErrorCode code, const char *what);

        Vector solve(const Vector &rhs) const;
        Matrix solve(const Matrix &rhs) const;
        double rcond() const { return rcond_; }

    private:
        Eigen::PartialPivLU<Matrix> lu_;
        double rcond_;
    };

    inline Vector solve_checked(const Matrix &a, const Vector &rhs, ErrorCode code, const char *what)
    {
        return CheckedLU(a, code, what).solve(rhs);
    }

} // namespace slidoc

#endif // SLIDOC_LINALG_HPP
