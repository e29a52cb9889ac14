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

#ifndef ORAPSIM_CORE_HPP
#define ORAPSIM_CORE_HPP

#include <cstdint>
#include <deque>
#include <span>

#include "orapsim/config.hpp"
#include "orapsim/request.hpp"
#include "orapsim/trace.hpp"

namespace orapsim
{
struct CoreStats {
  std::uint64_t loads_issued = 0, loads_completed = 0, stores_issued = 0;
  std::uint64_t rob_stall_cycles = 0, port_stall_cycles = 0;
  std::uint64_t load_latency_sum = 0;
  std::uint64_t max_outstanding = 0;
};

// In-order retire front end: non-memory work costs base_cpi per instruction, memory records
// issue while they fit in the ROB window behind the oldest outstanding load.
class Core : public MemClient
{
public:
  Core(std::uint32_t cpu, const CoreConfig& cfg, std::span<const TraceRecord> trace, std::uint64_t address_offset = 0);

  void set_port(MemPort* port) { port_ = port; }
  void operate(cycle_t now);
  void on_fill(const Request& r, cycle_t now) override;

  bool done() const { return next_ == trace_.size() && outstanding_.empty(); }
  // Cycle at which the last instruction retired; valid once done().
  cycle_t finish_cycle() const { return finish_; }
  std::uint64_t retired_instructions() const { return trace_.empty() ? 0 : trace_.back().instr_index; }
  std::size_t outstanding() const { return outstanding_.size(); }
  std::uint32_t cpu() const { return cpu_; }
  const CoreStats& stats() const { return stats_; }

private:
  struct Load {
    std::uint64_t token;
    std::uint64_t instr_index;
    cycle_t issued;
    bool done = false;
  };

  std::uint32_t cpu_;
  CoreConfig cfg_;
  std::span<const TraceRecord> trace_;
  std::uint64_t offset_;
  MemPort* port_ = nullptr;
  std::size_t next_ = 0;
  double front_ = 0; // cycle at which the front end reaches trace_[next_]
  std::deque<Load> outstanding_;
  cycle_t finish_ = 0;
  bool finished_ = false;
  CoreStats stats_;
};
} // namespace orapsim

#endif
