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

#ifndef ORAPSIM_SIMULATION_HPP
#define ORAPSIM_SIMULATION_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "orapsim/baseline_pf.hpp"
#include "orapsim/cache.hpp"
#include "orapsim/config.hpp"
#include "orapsim/core.hpp"
#include "orapsim/dram.hpp"
#include "orapsim/metrics.hpp"
#include "orapsim/orap.hpp"
#include "orapsim/trace.hpp"

namespace orapsim
{
struct RunOptions {
  bool log_commands = false;
  bool audit_timing = false; // implies log_commands
  cycle_t max_cycles = 0;    // 0: derived from trace length
};

// A full simulated machine: cores, private and shared cache levels, one DRAM controller.
class System
{
public:
  // One trace per core, or a single trace run by every core. Core c's addresses are shifted
  // into the c-th slice of physical memory.
  System(const SimConfig& cfg, std::vector<std::vector<TraceRecord>> traces, const RunOptions& opt = {});
  ~System();
  System(const System&) = delete;
  System& operator=(const System&) = delete;

  SimReport run();

  const SimConfig& config() const { return cfg_; }
  DramController& dram() { return *dram_; }
  Core& core(std::uint32_t i) { return *cores_.at(i); }
  // Instance of cache level `level` serving core `cpu`; nullptr outside the hierarchy.
  Cache* cache(std::size_t level, std::uint32_t cpu);
  OrapLlc* orap() { return orap_; }

private:
  class DirectPort;

  SimReport build_report(cycle_t cycles);

  SimConfig cfg_;
  RunOptions opt_;
  std::vector<std::vector<TraceRecord>> traces_;
  std::unique_ptr<DramController> dram_;
  std::unique_ptr<DirectPort> direct_;
  std::vector<std::vector<std::unique_ptr<Cache>>> levels_; // [level][instance]
  std::vector<std::unique_ptr<CachePrefetcher>> prefetchers_;
  std::vector<std::unique_ptr<Core>> cores_;
  OrapLlc* orap_ = nullptr;
  std::vector<Origin> pf_origin_; // per level
  bool ran_ = false;
};

SimReport simulate(const SimConfig& cfg, const std::vector<TraceRecord>& trace, const RunOptions& opt = {});

struct SweepCell {
  std::string prefetcher;
  std::string mitigation;
  SimReport report;
};

// Prefetchers {none, next-line, orap, orap+hsd} x mitigations {none, rfm, prac}.
// "next-line" sits at L1D; the ORAP variants sit at the LLC.
std::vector<SweepCell> sweep(const SimConfig& base, const std::vector<TraceRecord>& trace, const RunOptions& opt = {});
std::string sweep_csv(const std::vector<SweepCell>& cells);

// Apply one sweep prefetcher choice to a config (clears every other level's prefetcher).
void configure_prefetcher(SimConfig& cfg, std::string_view choice);
} // namespace orapsim

#endif
