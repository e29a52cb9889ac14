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

#include "orapsim/hsd.hpp"

#include <algorithm>

#include "orapsim/util.hpp"

namespace orapsim
{
double p_req(const HsdConfig& cfg, std::uint32_t confidence)
{
  const double c = std::min<std::uint32_t>(confidence, 255);
  const double p = cfg.p_req_high - (cfg.p_req_high - cfg.p_req_low) * c / 255.0;
  return std::clamp(p, cfg.p_req_low, cfg.p_req_high);
}

Hsd::Hsd(const HsdConfig& cfg) : cfg_(cfg), streams_(cfg.streams) {}

double Hsd::continuation(std::uint32_t from, std::uint32_t k) const
{
  if (from < 1 || k < 1 || k > HSD_HIST_ENTRIES || from > HSD_HIST_ENTRIES)
    return 0.0;
  const auto base = active_[from - 1];
  if (base == 0)
    return 0.0;
  return std::min(1.0, static_cast<double>(active_[k - 1]) / base);
}

void Hsd::record_depth(std::uint32_t depth)
{
  if (depth >= 1 && depth <= HSD_HIST_ENTRIES)
    training_[depth - 1] = sat_inc(training_[depth - 1], HSD_HIST_MAX);
}

void Hsd::epoch_rollover()
{
  state_ = HsdState::swap;
  active_ = training_;
  training_.fill(0);
  epoch_ = 0;
  ++stats_.epochs;
  state_ = HsdState::active;
}

std::vector<std::uint64_t> Hsd::on_llc_access(std::uint64_t ip, std::uint64_t address, std::uint32_t confidence)
{
  ++stats_.accesses;
  const auto block = block_number(address);
  const auto page = small_page(address);

  for (auto& s : streams_)
    if (s.valid)
      s.age = sat_inc<std::uint8_t>(s.age, 255);

  auto it = std::find_if(streams_.begin(), streams_.end(), [&](const StreamEntry& s) { return s.valid && (s.ip == ip || s.page == page); });
  std::vector<std::uint64_t> out;
  if (it == streams_.end()) {
    ++stats_.allocations;
    // invalid slots first, then strictly oldest, lowest index on ties
    auto victim = std::find_if(streams_.begin(), streams_.end(), [](const StreamEntry& s) { return !s.valid; });
    if (victim == streams_.end())
      victim = std::max_element(streams_.begin(), streams_.end(), [](const StreamEntry& a, const StreamEntry& b) { return a.age < b.age; });
    *victim = StreamEntry{true, ip, page, block, 1, 0, 0};
    record_depth(1);
  } else {
    ++stats_.matches;
    auto& s = *it;
    const auto delta = static_cast<std::int64_t>(block) - static_cast<std::int64_t>(s.last_block);
    s.age = 0;
    s.ip = ip;
    if (page != s.page) {
      // a stream is confined to its 4 KiB page; crossing it starts a new one
      s.page = page;
      s.last_block = block;
      s.depth = 1;
      record_depth(1);
    } else if (delta != 0) {
      if (s.stride == 0 && s.depth == 1 && delta >= -4 && delta <= 3) {
        // second access of an untrained stream: learn the stride
        s.stride = static_cast<std::int32_t>(delta);
        record_depth(++s.depth);
      } else if (delta == s.stride) {
        s.depth = std::min(s.depth + 1, HSD_STORED_DEPTH_MAX + 1);
        record_depth(s.depth);
      } else {
        // stride broke: count it as a fresh stream
        s.stride = (delta >= -4 && delta <= 3) ? static_cast<std::int32_t>(delta) : 0;
        s.depth = 1;
        record_depth(1);
        if (s.stride != 0)
          record_depth(++s.depth);
      }
      s.last_block = block;
    }
    if (s.stride != 0 && s.depth >= 1) {
      const double need = p_req(cfg_, confidence);
      const std::uint32_t limit = std::min(cfg_.max_depth, HSD_HIST_ENTRIES);
      for (std::uint32_t k = s.depth + 1; k <= limit; ++k) {
        if (continuation(s.depth, k) < need)
          break;
        const auto target = static_cast<std::int64_t>(block) + static_cast<std::int64_t>(k - s.depth) * s.stride;
        if (target < 0)
          break;
        const auto a = static_cast<std::uint64_t>(target) << LOG2_BLOCK_SIZE;
        if (small_page(a) != page)
          break;
        out.push_back(a);
      }
    }
  }
  stats_.candidates += out.size();
  if (++epoch_ >= cfg_.epoch_length)
    epoch_rollover();
  return out;
}
} // namespace orapsim
