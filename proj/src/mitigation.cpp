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

#include "orapsim/mitigation.hpp"

#include <algorithm>
#include <fmt/core.h>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

namespace orapsim
{
std::string_view to_string(CommandKind k)
{
  switch (k) {
  case CommandKind::ACT:
    return "ACT";
  case CommandKind::PRE:
    return "PRE";
  case CommandKind::RD:
    return "RD";
  case CommandKind::WR:
    return "WR";
  case CommandKind::REF:
    return "REF";
  case CommandKind::RFM:
    return "RFM";
  case CommandKind::PRAC_MITIGATE:
    return "PRAC_MITIGATE";
  }
  return "?";
}

std::string format_command(const DramCommand& c)
{
  return fmt::format("{} {} {} {} {} {} {} {}", c.cycle, to_string(c.kind), c.channel, c.rank, c.bankgroup, c.bank, c.row, c.column);
}

void write_command_log(std::ostream& os, const std::vector<DramCommand>& log)
{
  for (const auto& c : log)
    os << format_command(c) << '\n';
}

std::vector<DramCommand> read_command_log(std::istream& is)
{
  std::vector<DramCommand> out;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(is, line)) {
    const auto here = offset;
    offset += line.size() + 1;
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream ls(line);
    DramCommand c;
    std::string kind;
    if (!(ls >> c.cycle >> kind >> c.channel >> c.rank >> c.bankgroup >> c.bank >> c.row >> c.column))
      throw TraceError(fmt::format("malformed command log line '{}'", line), here);
    bool known = false;
    for (auto k : {CommandKind::ACT, CommandKind::PRE, CommandKind::RD, CommandKind::WR, CommandKind::REF, CommandKind::RFM, CommandKind::PRAC_MITIGATE})
      if (to_string(k) == kind) {
        c.kind = k;
        known = true;
      }
    if (!known)
      throw TraceError(fmt::format("unknown command '{}'", kind), here);
    out.push_back(c);
  }
  return out;
}

bool PracTracker::on_precharge(std::size_t bank, std::uint32_t row)
{
  auto& n = rows_[bank][row];
  ++n;
  if (n >= threshold_ && !alert_[bank]) {
    alert_[bank] = row;
    return true;
  }
  return false;
}

std::uint32_t PracTracker::on_mitigate(std::size_t bank)
{
  auto row = alert_[bank].value();
  alert_[bank].reset();
  rows_[bank].erase(row);
  // another row may have crossed the threshold while this alert was pending
  for (const auto& [r, n] : rows_[bank])
    if (n >= threshold_) {
      alert_[bank] = r;
      break;
    }
  return row;
}

void PracTracker::on_refresh(std::size_t bank, std::uint32_t first, std::uint32_t count)
{
  auto& m = rows_[bank];
  m.erase(m.lower_bound(first), m.lower_bound(first + count));
}

std::uint32_t PracTracker::count(std::size_t bank, std::uint32_t row) const
{
  auto it = rows_[bank].find(row);
  return it == rows_[bank].end() ? 0 : it->second;
}

std::uint32_t PracTracker::max_count() const
{
  std::uint32_t best = 0;
  for (const auto& m : rows_)
    for (const auto& [r, n] : m)
      best = std::max(best, n);
  return best;
}

namespace
{
struct BankAudit {
  std::map<std::uint32_t, std::uint64_t> victims; // accumulated disturbance
  std::map<std::uint32_t, std::uint64_t> shadow;  // per-aggressor ACTs since its last mitigation
};

using BankKey = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>;
} // namespace

AuditResult disturbance_audit(std::span<const DramCommand> log, const AuditOptions& opt)
{
  std::map<BankKey, BankAudit> banks;
  AuditResult res;
  const std::int64_t radius = opt.blast_radius;

  auto refresh_neighbours = [&](BankAudit& b, std::uint32_t aggressor) {
    for (std::int64_t d = -radius; d <= radius; ++d) {
      const std::int64_t v = static_cast<std::int64_t>(aggressor) + d;
      if (d != 0 && v >= 0 && v < opt.rows)
        b.victims.erase(static_cast<std::uint32_t>(v));
    }
    b.shadow.erase(aggressor);
  };

  for (const auto& c : log) {
    switch (c.kind) {
    case CommandKind::ACT: {
      ++res.acts;
      auto& b = banks[{c.channel, c.rank, c.bankgroup, c.bank}];
      b.victims.erase(c.row); // opening a row restores its charge
      ++b.shadow[c.row];
      for (std::int64_t d = -radius; d <= radius; ++d) {
        const std::int64_t v = static_cast<std::int64_t>(c.row) + d;
        if (d == 0 || v < 0 || v >= opt.rows)
          continue;
        auto& n = b.victims[static_cast<std::uint32_t>(v)];
        ++n;
        if (n > res.max_disturbance) {
          res.max_disturbance = n;
          std::tie(res.channel, res.rank, res.bankgroup, res.bank, res.row) = std::tuple{c.channel, c.rank, c.bankgroup, c.bank, static_cast<std::uint32_t>(v)};
        }
      }
      break;
    }
    case CommandKind::REF: {
      ++res.refreshes;
      for (auto& [key, b] : banks) {
        if (std::get<0>(key) != c.channel || std::get<1>(key) != c.rank)
          continue;
        b.victims.erase(b.victims.lower_bound(c.row), b.victims.lower_bound(c.row + opt.rows_per_ref));
        b.shadow.erase(b.shadow.lower_bound(c.row), b.shadow.lower_bound(c.row + opt.rows_per_ref));
      }
      break;
    }
    case CommandKind::RFM: {
      ++res.mitigations;
      auto& b = banks[{c.channel, c.rank, c.bankgroup, c.bank}];
      for (std::uint32_t i = 0; i < opt.rfm_rows && !b.shadow.empty(); ++i) {
        auto hottest = std::max_element(b.shadow.begin(), b.shadow.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
        refresh_neighbours(b, hottest->first);
      }
      break;
    }
    case CommandKind::PRAC_MITIGATE: {
      ++res.mitigations;
      refresh_neighbours(banks[{c.channel, c.rank, c.bankgroup, c.bank}], c.row);
      break;
    }
    case CommandKind::PRE:
    case CommandKind::RD:
    case CommandKind::WR:
      break;
    }
  }
  return res;
}
} // namespace orapsim
