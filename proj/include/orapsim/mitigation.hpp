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

#ifndef ORAPSIM_MITIGATION_HPP
#define ORAPSIM_MITIGATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "orapsim/command.hpp"

namespace orapsim
{
// Rolling accumulated activation counters, one per bank.
class RfmTracker
{
public:
  RfmTracker(std::size_t banks, std::uint32_t threshold) : raa_(banks, 0), threshold_(threshold) {}

  // Returns true when the bank now needs an RFM before its next ACT.
  bool on_act(std::size_t bank)
  {
    ++raa_[bank];
    return due(bank);
  }
  bool due(std::size_t bank) const { return raa_[bank] >= threshold_; }
  void on_rfm(std::size_t bank) { raa_[bank] = 0; }
  std::uint32_t raa(std::size_t bank) const { return raa_[bank]; }
  std::uint32_t threshold() const { return threshold_; }

private:
  std::vector<std::uint32_t> raa_;
  std::uint32_t threshold_;
};

// Per-row activation counters updated on precharge.
class PracTracker
{
public:
  PracTracker(std::size_t banks, std::uint32_t threshold) : rows_(banks), alert_(banks), threshold_(threshold) {}

  // Returns true when this precharge raised an alert for the bank.
  bool on_precharge(std::size_t bank, std::uint32_t row);
  std::optional<std::uint32_t> alert(std::size_t bank) const { return alert_[bank]; }
  // Services the bank's alert; returns the aggressor row whose neighbours get refreshed.
  std::uint32_t on_mitigate(std::size_t bank);
  // Rows [first, first + count) were refreshed.
  void on_refresh(std::size_t bank, std::uint32_t first, std::uint32_t count);
  std::uint32_t count(std::size_t bank, std::uint32_t row) const;
  std::uint32_t max_count() const;
  std::uint32_t threshold() const { return threshold_; }

private:
  std::vector<std::map<std::uint32_t, std::uint32_t>> rows_;
  std::vector<std::optional<std::uint32_t>> alert_;
  std::uint32_t threshold_;
};

struct AuditOptions {
  std::uint32_t blast_radius = 2;
  std::uint32_t rows = 65536;
  std::uint32_t rows_per_ref = 8;
  // Rows refreshed per RFM by the modelled vendor scheme (hottest shadow counters); 0 = RFM
  // refreshes nothing.
  std::uint32_t rfm_rows = 2;
};

struct AuditResult {
  std::uint64_t max_disturbance = 0; // neighbour ACTs seen by one victim between its refreshes
  std::uint32_t channel = 0, rank = 0, bankgroup = 0, bank = 0, row = 0;
  std::uint64_t acts = 0;
  std::uint64_t refreshes = 0;
  std::uint64_t mitigations = 0;
};

AuditResult disturbance_audit(std::span<const DramCommand> log, const AuditOptions& opt);
} // namespace orapsim

#endif
