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

#ifndef ORAPSIM_HSD_HPP
#define ORAPSIM_HSD_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "orapsim/config.hpp"

namespace orapsim
{
inline constexpr std::uint32_t HSD_HIST_ENTRIES = 64;
inline constexpr std::uint16_t HSD_HIST_MAX = 8191;
inline constexpr std::uint32_t HSD_STORED_DEPTH_MAX = 63;

// Probability requirement for forward prefetching at a given IPCT confidence.
double p_req(const HsdConfig& cfg, std::uint32_t confidence);

enum class HsdState : std::uint8_t { train, active, swap };

struct StreamEntry {
  bool valid = false;
  std::uint64_t ip = 0;
  std::uint64_t page = 0;       // 4 KiB page id of the last access
  std::uint64_t last_block = 0;
  std::uint32_t depth = 0;      // blocks seen at the current stride
  std::int32_t stride = 0;      // blocks, 0 while unknown
  std::uint8_t age = 0;
};

// Cumulative histogram: entry k counts streams that reached depth k+1.
using StreamHistogram = std::array<std::uint16_t, HSD_HIST_ENTRIES>;

struct HsdStats {
  std::uint64_t accesses = 0, matches = 0, allocations = 0, candidates = 0, epochs = 0;
};

class Hsd
{
public:
  explicit Hsd(const HsdConfig& cfg);

  // Forward prefetch candidates (block addresses) for one LLC access.
  std::vector<std::uint64_t> on_llc_access(std::uint64_t ip, std::uint64_t address, std::uint32_t confidence);
  void epoch_rollover();

  // P(depth >= k | depth >= from) on the active histogram; 0 when nothing was observed.
  double continuation(std::uint32_t from, std::uint32_t k) const;

  const std::vector<StreamEntry>& streams() const { return streams_; }
  const StreamHistogram& active() const { return active_; }
  const StreamHistogram& training() const { return training_; }
  void set_active(const StreamHistogram& h) { active_ = h; }
  HsdState state() const { return state_; }
  std::uint32_t epoch_counter() const { return epoch_; }
  const HsdStats& stats() const { return stats_; }

private:
  void record_depth(std::uint32_t depth);

  HsdConfig cfg_;
  std::vector<StreamEntry> streams_;
  StreamHistogram active_{}, training_{};
  HsdState state_ = HsdState::train;
  std::uint32_t epoch_ = 0;
  HsdStats stats_;
};
} // namespace orapsim

#endif
