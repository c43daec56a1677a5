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

#ifndef SLIDOC_CLI_HPP
#define SLIDOC_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace slidoc
{

    inline constexpr const char *kVersion = "0.1.0";

    /// Runs one subcommand. args[0] is the program name. Returns 0 on success,
    /// 1 on a domain error and 2 on a usage error; errors go to `err` as one
    /// line of JSON {"error": code, "message": text}.
    int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace slidoc

#endif // SLIDOC_CLI_HPP
