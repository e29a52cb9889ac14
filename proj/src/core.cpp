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

#include "orapsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <stdexcept>

namespace orapsim
{
Core::Core(std::uint32_t cpu, const CoreConfig& cfg, std::span<const TraceRecord> trace, std::uint64_t address_offset)
    : cpu_(cpu), cfg_(cfg), trace_(trace), offset_(address_offset)
{
  if (!trace_.empty())
    front_ = cfg_.base_cpi_non_mem * static_cast<double>(trace_.front().instr_index);
}

void Core::on_fill(const Request& r, cycle_t now)
{
  auto it = std::lower_bound(outstanding_.begin(), outstanding_.end(), r.token, [](const Load& l, std::uint64_t t) { return l.token < t; });
  if (it == outstanding_.end() || it->token != r.token || it->done)
    throw std::logic_error(fmt::format("core {}: unexpected response for token {}", cpu_, r.token));
  it->done = true;
  ++stats_.loads_completed;
  stats_.load_latency_sum += now - it->issued;
}

void Core::operate(cycle_t now)
{
  while (!outstanding_.empty() && outstanding_.front().done)
    outstanding_.pop_front();

  std::uint32_t issued = 0;
  while (next_ < trace_.size() && issued < cfg_.mem_issue_width) {
    const auto& rec = trace_[next_];
    if (front_ > static_cast<double>(now))
      break;
    if (!outstanding_.empty() && rec.instr_index - outstanding_.front().instr_index >= cfg_.rob_capacity) {
      ++stats_.rob_stall_cycles;
      break;
    }
    Request r;
    r.address = block_base(rec.address + offset_);
    r.ip = rec.ip;
    r.cpu = cpu_;
    r.type = rec.kind == AccessKind::store ? ReqType::rfo : ReqType::load;
    r.token = next_;
    r.requester = rec.kind == AccessKind::store ? nullptr : this;
    if (!port_->add_request(r, now)) {
      ++stats_.port_stall_cycles;
      break;
    }
    if (rec.kind == AccessKind::store) {
      ++stats_.stores_issued;
    } else {
      outstanding_.push_back({next_, rec.instr_index, now});
      ++stats_.loads_issued;
      stats_.max_outstanding = std::max<std::uint64_t>(stats_.max_outstanding, outstanding_.size());
    }
    ++issued;
    ++next_;
    if (next_ < trace_.size())
      front_ = std::max(front_, static_cast<double>(now)) + cfg_.base_cpi_non_mem * static_cast<double>(trace_[next_].instr_index - rec.instr_index);
  }

  if (done() && !finished_) {
    finished_ = true;
    finish_ = std::max<cycle_t>(now, static_cast<cycle_t>(std::ceil(front_)));
  }
}
} // namespace orapsim
