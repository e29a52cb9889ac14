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

#ifndef ORAPSIM_BLP_BUFFER_HPP
#define ORAPSIM_BLP_BUFFER_HPP

#include <cstdint>
#include <deque>
#include <vector>

#include "orapsim/request.hpp"

namespace orapsim
{
struct BlpEntry {
  std::uint64_t block = 0; // block number
  std::uint32_t cpu = 0;
  Origin engine = Origin::nc;
  std::uint64_t ip = 0;
  bool pending = false;
};

enum class BlpInsert : std::uint8_t { accepted, rejected_full, duplicate };

struct BlpStats {
  std::uint64_t inserted = 0, rejected_full = 0, duplicates = 0;
  std::uint64_t issued = 0, completed = 0, dropped = 0, requeued = 0;
  std::uint64_t accounting_errors = 0;
};

// Bank-indexed holding buffer shared by every core's ORAP instance.
class BlpBuffer
{
public:
  BlpBuffer(std::uint32_t sub_buffers, std::uint32_t entries_per_core, std::uint32_t cores, std::uint32_t issue_per_cycle);

  BlpInsert insert(const BlpEntry& e, std::uint32_t bank_id);
  // Up to `limit` (capped at the per-cycle issue width) entries, from distinct sub-buffers.
  std::vector<BlpEntry> issue_cycle(std::size_t limit);
  std::vector<BlpEntry> issue_cycle() { return issue_cycle(issue_per_cycle_); }
  // Prefetch returned: frees the entry. Unknown or never-issued blocks count as accounting errors.
  bool complete(std::uint64_t block);
  // Issued entry could not be accepted downstream; make it issuable again.
  void requeue(std::uint64_t block);
  // Issued entry turned out redundant; free it.
  void drop(std::uint64_t block);

  bool contains(std::uint64_t block) const;
  std::size_t occupancy() const;
  std::size_t occupancy(std::uint32_t cpu) const { return per_core_.at(cpu); }
  std::size_t sub_buffer_occupancy(std::uint32_t sb) const { return subs_.at(sb).size(); }
  std::uint32_t sub_buffers() const { return static_cast<std::uint32_t>(subs_.size()); }
  std::uint32_t sub_capacity() const { return sub_capacity_; }
  const BlpStats& stats() const { return stats_; }

private:
  BlpEntry* locate(std::uint64_t block, std::size_t* sub, std::size_t* idx);
  void erase(std::size_t sub, std::size_t idx);

  std::vector<std::deque<BlpEntry>> subs_;
  std::vector<std::size_t> per_core_;
  std::uint32_t sub_capacity_;
  std::uint32_t core_quota_;
  std::uint32_t issue_per_cycle_;
  std::uint32_t rr_ = 0;
  BlpStats stats_;
};
} // namespace orapsim

#endif
