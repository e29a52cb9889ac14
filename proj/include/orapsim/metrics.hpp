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

#ifndef ORAPSIM_METRICS_HPP
#define ORAPSIM_METRICS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "orapsim/request.hpp"

namespace orapsim
{
inline constexpr int REPORT_SCHEMA_VERSION = 1;

struct EngineReport {
  std::uint64_t requested = 0; // candidates handed to the cache
  std::uint64_t issued = 0;    // allocated an MSHR at the owning level
  std::uint64_t useful = 0;
  std::uint64_t dropped = 0;   // redundant or no queue/MSHR space
  std::uint64_t useless = 0;   // evicted unused
  std::uint64_t dram_reads = 0, dram_row_hits = 0;

  bool operator==(const EngineReport&) const = default;
};

struct LevelReport {
  std::string name;
  std::uint64_t demand_accesses = 0, demand_hits = 0, demand_misses = 0;
  std::uint64_t mshr_merges = 0, fills = 0, writebacks = 0, promotions = 0;

  bool operator==(const LevelReport&) const = default;
};

struct SimReport {
  std::string config_name;
  std::uint32_t cores = 1;
  std::string mitigation;
  std::uint64_t retired_instructions = 0;
  std::uint64_t cycles = 0;
  std::uint64_t dram_cycles = 0;

  std::uint64_t act_count = 0, pre_count = 0, rd_count = 0, wr_count = 0, ref_count = 0;
  std::uint64_t rfm_count = 0, prac_mitigations = 0;
  std::uint64_t rowbuffer_hits = 0, rowbuffer_misses = 0;
  std::uint64_t bus_busy_cycles = 0;
  double command_energy_pj = 0, standby_energy_pj = 0, dynamic_energy_pj = 0;

  std::array<EngineReport, ORIGIN_COUNT> engines{};
  std::vector<LevelReport> levels;

  // LLC demand miss latency, MSHR allocation to fill, core cycles
  std::uint64_t latency_sum = 0, latency_count = 0;
  std::vector<std::uint64_t> latency_histogram;

  std::uint64_t timing_violations = 0;
  std::vector<std::string> audit_failures;

  bool operator==(const SimReport&) const = default;
};

// Both throw std::domain_error when no instructions retired.
double apki(const SimReport& r);
double rpki(const SimReport& r);
double depi(const SimReport& r);
// Throws std::domain_error when the engine issued nothing.
double usefulness(const SimReport& r, Origin engine);
double rowbuffer_hit_rate(const SimReport& r);
double engine_row_hit_rate(const SimReport& r, Origin engine);
double average_latency(const SimReport& r);
// Data bus utilisation across channels.
double bandwidth_gbps(const SimReport& r, double dram_clock_mhz, std::uint32_t channels, std::uint32_t channel_width_bits);

// Structural invariants of a finished report; empty when all hold.
std::vector<std::string> check_report(const SimReport& r);

std::string format_report(const SimReport& r);
std::string csv_header();
std::string csv_row(const SimReport& r, std::string_view label);

std::string report_to_json(const SimReport& r);
SimReport report_from_json(std::string_view text);

struct MetricDelta {
  std::string metric;
  double a = 0, b = 0;
  double percent = 0; // (b - a) / a, 0 when both are 0
};

// Throws std::invalid_argument when the reports cover different instruction counts.
std::vector<MetricDelta> compare(const SimReport& a, const SimReport& b);
std::string format_compare(const std::vector<MetricDelta>& d);
} // namespace orapsim

#endif
