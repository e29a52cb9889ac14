/*
 *    Copyright 2026 The orapsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ORAPSIM_COMMAND_HPP
#define ORAPSIM_COMMAND_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "orapsim/util.hpp"

namespace orapsim
{
enum class CommandKind : std::uint8_t { ACT, PRE, RD, WR, REF, RFM, PRAC_MITIGATE };

std::string_view to_string(CommandKind k);

// REF carries the first refreshed row in `row`; PRAC_MITIGATE carries the aggressor row.
struct DramCommand {
  cycle_t cycle = 0;
  CommandKind kind = CommandKind::ACT;
  std::uint32_t channel = 0;
  std::uint32_t rank = 0;
  std::uint32_t bankgroup = 0;
  std::uint32_t bank = 0;
  std::uint32_t row = 0;
  std::uint32_t column = 0;

  bool operator==(const DramCommand&) const = default;
};

// One command per line: "cycle kind ch ra bg ba row col".
std::string format_command(const DramCommand& c);
void write_command_log(std::ostream& os, const std::vector<DramCommand>& log);
/// Throws TraceError with the byte offset of the offending line.
std::vector<DramCommand> read_command_log(std::istream& is);
} // namespace orapsim

#endif
