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

#include "slidoc/error.hpp"

namespace slidoc
{

    std::string_view to_string(ErrorCode code)
    {
        switch (code)
        {
        case ErrorCode::ZeroWeight: return "ZeroWeight";
        case ErrorCode::InvalidTableau: return "InvalidTableau";
        case ErrorCode::InvalidProblem: return "InvalidProblem";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::TangentialAmbiguity: return "TangentialAmbiguity";
        case ErrorCode::NewtonDivergence: return "NewtonDivergence";
        case ErrorCode::SingularIteration: return "SingularIteration";
        case ErrorCode::NoBracket: return "NoBracket";
        case ErrorCode::EventLocationFailure: return "EventLocationFailure";
        case ErrorCode::ChatteringLimit: return "ChatteringLimit";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::SingularTerminalSystem: return "SingularTerminalSystem";
        case ErrorCode::SingularJumpSystem: return "SingularJumpSystem";
        case ErrorCode::MeshMismatch: return "MeshMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::QPFailure: return "QPFailure";
        case ErrorCode::CFailure: return "CFailure";
        case ErrorCode::LineSearchFailure: return "LineSearchFailure";
        case ErrorCode::MaxIters: return "MaxIters";
        case ErrorCode::StructureChange: return "StructureChange";
        case ErrorCode::ReferenceUnconverged: return "ReferenceUnconverged";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::UsageError: return "UsageError";
        case ErrorCode::IoError: return "IoError";
        }
        return "Unknown";
    }

} // namespace slidoc
