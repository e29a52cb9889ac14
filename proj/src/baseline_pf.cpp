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

#include "orapsim/baseline_pf.hpp"

#include <algorithm>

namespace orapsim
{
std::optional<std::uint64_t> next_line_target(std::uint64_t address)
{
  const auto next = block_base(address) + BLOCK_SIZE;
  if (large_page(next) != large_page(address))
    return std::nullopt;
  return next;
}

std::vector<std::uint64_t> StrideTable::access(std::uint64_t ip, std::uint64_t address)
{
  address = block_base(address);
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.ip == ip; });
  if (it == entries_.end()) {
    if (entries_.size() < STRIDE_TABLE_ENTRIES) {
      entries_.push_back({});
      it = entries_.end() - 1;
    } else {
      it = std::min_element(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.lru < b.lru; });
    }
    *it = Entry{ip, address, 0, 0, ++clock_};
    return {};
  }
  auto& e = *it;
  e.lru = ++clock_;
  const auto delta = static_cast<std::int64_t>(address) - static_cast<std::int64_t>(e.last);
  e.last = address;
  if (delta == 0)
    return {};
  if (delta == e.stride) {
    e.seen = std::min(e.seen + 1, STRIDE_CONFIRMATIONS);
  } else {
    e.stride = delta;
    e.seen = 1;
  }
  if (e.seen < STRIDE_CONFIRMATIONS)
    return {};
  std::vector<std::uint64_t> out;
  for (std::uint32_t k = 1; k <= STRIDE_DEGREE; ++k) {
    const auto target = static_cast<std::int64_t>(address) + delta * k;
    if (target < 0 || large_page(static_cast<std::uint64_t>(target)) != large_page(address))
      break;
    out.push_back(static_cast<std::uint64_t>(target));
  }
  return out;
}

void NextLinePrefetcher::on_access(Cache& c, const Request& r, bool, cycle_t now)
{
  if (!r.is_demand())
    return;
  if (auto t = next_line_target(r.address))
    c.add_prefetch(*t, r.ip, r.cpu, origin_, now);
}

void StridePrefetcher::on_access(Cache& c, const Request& r, bool, cycle_t now)
{
  if (!r.is_demand())
    return;
  if (tables_.size() <= r.cpu)
    tables_.resize(r.cpu + 1);
  for (auto a : tables_[r.cpu].access(r.ip, r.address))
    c.add_prefetch(a, r.ip, r.cpu, origin_, now);
}
} // namespace orapsim
