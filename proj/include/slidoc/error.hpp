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

#ifndef SLIDOC_ERROR_HPP
#define SLIDOC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace slidoc
{

    /// Every failure the library reports. The CLI prints the name of the code
    /// as the `error` field of its one-line JSON payload.
    enum class ErrorCode
    {
        ZeroWeight,
        InvalidTableau,
        InvalidProblem,
        DegenerateDenominator,
        TangentialAmbiguity,
        NewtonDivergence,
        SingularIteration,
        NoBracket,
        EventLocationFailure,
        ChatteringLimit,
        SingularSystem,
        SingularTerminalSystem,
        SingularJumpSystem,
        MeshMismatch,
        DimensionMismatch,
        QPFailure,
        CFailure,
        LineSearchFailure,
        MaxIters,
        StructureChange,
        ReferenceUnconverged,
        ParseError,
        ValidationError,
        UsageError,
        IoError,
    };

    std::string_view to_string(ErrorCode code);

    class Error : public std::runtime_error
    {
    public:
        Error(ErrorCode code, const std::string &message)
            : std::runtime_error(message), code_(code) {}

        ErrorCode code() const noexcept { return code_; }

    private:
        ErrorCode code_;
    };

    [[noreturn]] inline void fail(ErrorCode code, const std::string &message)
    {
        throw Error(code, message);
    }

} // namespace slidoc

#endif // SLIDOC_ERROR_HPP
