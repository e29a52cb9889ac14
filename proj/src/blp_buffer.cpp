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

#include "orapsim/blp_buffer.hpp"

#include <algorithm>
#include <stdexcept>

namespace orapsim
{
BlpBuffer::BlpBuffer(std::uint32_t sub_buffers, std::uint32_t entries_per_core, std::uint32_t cores, std::uint32_t issue_per_cycle)
    : subs_(sub_buffers), per_core_(cores, 0), sub_capacity_(sub_buffers ? entries_per_core / sub_buffers * cores : 0), core_quota_(entries_per_core),
      issue_per_cycle_(issue_per_cycle)
{
  if (sub_buffers == 0 || cores == 0 || sub_capacity_ == 0)
    throw std::invalid_argument("bank-leveling buffer needs at least one entry per sub-buffer");
}

BlpInsert BlpBuffer::insert(const BlpEntry& e, std::uint32_t bank_id)
{
  if (contains(e.block)) {
    ++stats_.duplicates;
    return BlpInsert::duplicate;
  }
  auto& sb = subs_[bank_id % subs_.size()];
  if (sb.size() >= sub_capacity_ || per_core_.at(e.cpu) >= core_quota_) {
    ++stats_.rejected_full;
    return BlpInsert::rejected_full;
  }
  auto copy = e;
  copy.pending = false;
  sb.push_back(copy);
  ++per_core_[e.cpu];
  ++stats_.inserted;
  return BlpInsert::accepted;
}

std::vector<BlpEntry> BlpBuffer::issue_cycle(std::size_t limit)
{
  limit = std::min<std::size_t>(limit, issue_per_cycle_);
  std::vector<BlpEntry> out;
  const auto n = static_cast<std::uint32_t>(subs_.size());
  std::uint32_t next = rr_;
  for (std::uint32_t i = 0; i < n && out.size() < limit; ++i) {
    const auto sbi = (rr_ + i) % n;
    auto& sb = subs_[sbi];
    auto it = std::find_if(sb.begin(), sb.end(), [](const BlpEntry& e) { return !e.pending; });
    if (it == sb.end())
      continue;
    it->pending = true;
    out.push_back(*it);
    ++stats_.issued;
    next = (sbi + 1) % n;
  }
  rr_ = next;
  return out;
}

BlpEntry* BlpBuffer::locate(std::uint64_t block, std::size_t* sub, std::size_t* idx)
{
  for (std::size_t s = 0; s < subs_.size(); ++s)
    for (std::size_t i = 0; i < subs_[s].size(); ++i)
      if (subs_[s][i].block == block) {
        *sub = s;
        *idx = i;
        return &subs_[s][i];
      }
  return nullptr;
}

void BlpBuffer::erase(std::size_t sub, std::size_t idx)
{
  --per_core_[subs_[sub][idx].cpu];
  subs_[sub].erase(subs_[sub].begin() + static_cast<std::ptrdiff_t>(idx));
}

bool BlpBuffer::complete(std::uint64_t block)
{
  std::size_t s, i;
  auto* e = locate(block, &s, &i);
  if (!e || !e->pending) {
    ++stats_.accounting_errors;
    return false;
  }
  erase(s, i);
  ++stats_.completed;
  return true;
}

void BlpBuffer::requeue(std::uint64_t block)
{
  std::size_t s, i;
  auto* e = locate(block, &s, &i);
  if (!e || !e->pending) {
    ++stats_.accounting_errors;
    return;
  }
  e->pending = false;
  ++stats_.requeued;
}

void BlpBuffer::drop(std::uint64_t block)
{
  std::size_t s, i;
  if (!locate(block, &s, &i)) {
    ++stats_.accounting_errors;
    return;
  }
  erase(s, i);
  ++stats_.dropped;
}

bool BlpBuffer::contains(std::uint64_t block) const
{
  return std::any_of(subs_.begin(), subs_.end(), [&](const auto& sb) { return std::any_of(sb.begin(), sb.end(), [&](const BlpEntry& e) { return e.block == block; }); });
}

std::size_t BlpBuffer::occupancy() const
{
  std::size_t n = 0;
  for (const auto& sb : subs_)
    n += sb.size();
  return n;
}
} // namespace orapsim
