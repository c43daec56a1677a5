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

#include "slidoc/linalg.hpp"

#include <cmath>
#include <sstream>

namespace slidoc
{

    CheckedLU::CheckedLU(const Matrix &a, ErrorCode code, const char *what)
    {
        if (a.rows() != a.cols() || a.rows() == 0)
        {
            fail(ErrorCode::DimensionMismatch, std::string(what) + ": matrix is not square");
        }
        lu_.compute(a);
        rcond_ = lu_.rcond();
        if (!std::isfinite(rcond_) || rcond_ < kSingularRcond)
        {
            std::ostringstream os;
            os << what << ": matrix of size " << a.rows() << " is numerically singular (rcond=" << rcond_ << ")";
            fail(code, os.str());
        }
    }

    Vector CheckedLU::solve(const Vector &rhs) const { return lu_.solve(rhs); }

    Matrix CheckedLU::solve(const Matrix &rhs) const { return lu_.solve(rhs); }

} // namespace slidoc
