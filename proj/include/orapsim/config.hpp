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

#ifndef ORAPSIM_CONFIG_HPP
#define ORAPSIM_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orapsim/addrmap.hpp"

namespace orapsim
{
enum class MitigationKind : std::uint8_t { none, rfm, prac };
enum class ReplacementPolicy : std::uint8_t { lru, ship };
enum class PrefetcherKind : std::uint8_t { none, next_line, stride, orap, orap_hsd };
enum class ConfidenceMode : std::uint8_t { hybrid, ip_only, row_only };

std::string_view to_string(MitigationKind k);
std::string_view to_string(ReplacementPolicy p);
std::string_view to_string(PrefetcherKind p);
std::string_view to_string(ConfidenceMode m);
MitigationKind parse_mitigation(std::string_view s);
PrefetcherKind parse_prefetcher(std::string_view s);
ReplacementPolicy parse_replacement(std::string_view s);
ConfidenceMode parse_confidence_mode(std::string_view s);

struct DramGeometry {
  std::uint32_t channels = 2;
  std::uint32_t ranks = 1;
  std::uint32_t bankgroups = 4;
  std::uint32_t banks = 4;
  std::uint32_t rows = 65536;
  std::uint32_t columns = 1024;
  std::uint32_t channel_width_bits = 32;
  std::uint32_t device_width_bits = 16;
  std::uint32_t density_gbit = 16;

  std::uint64_t row_bytes() const { return std::uint64_t{columns} * channel_width_bits / 8; }
  std::uint32_t blocks_per_row() const { return static_cast<std::uint32_t>(row_bytes() / 64); }
  std::uint32_t banks_per_rank() const { return bankgroups * banks; }
  std::uint64_t physical_size() const
  {
    return std::uint64_t{channels} * ranks * bankgroups * banks * rows * row_bytes();
  }

  bool operator==(const DramGeometry&) const = default;
};

struct DramTimings {
  double nCL = 16.25;
  double nRCD = 16.25;
  double nRP = 16.25;
  double nRAS = 32.5;
  double nRC = 48.0;
  double nWR = 30.0;
  double nRTP = 7.5;
  double nRFC = 295.0;

  bool operator==(const DramTimings&) const = default;
};

/// Per-command energies in pJ for one rank; active standby is charged per open bank.
struct EnergyConstants {
  double act_pj = 0;
  double pre_pj = 0;
  double rd_pj = 0;
  double wr_pj = 0;
  double ref_pj = 0;
  double rfm_pj = 0;
  double active_standby_mw = 0;

  bool operator==(const EnergyConstants&) const = default;
};

/// Datasheet-style supply currents used to derive EnergyConstants for a timing set.
struct DeviceCurrents {
  double vdd = 1.1;
  double idd0 = 60;
  double idd2n = 50;
  double idd3n = 55;
  double idd4r = 145;
  double idd4w = 145;
  double idd5b = 362;
};

DramTimings standard_timings();
DramTimings prac_timings();

struct RowPolicyConfig {
  std::uint32_t initial_timeout = 128; // controller cycles
  std::uint32_t min_timeout = 8;
  std::uint32_t max_timeout = 2048;

  bool operator==(const RowPolicyConfig&) const = default;
};

struct DramConfig {
  DramGeometry geometry;
  DramTimings timings_ns;
  double data_rate_mtps = 6400;
  std::uint32_t burst_length = 16;
  double refresh_period_ms = 32;
  std::uint32_t refresh_commands = 8192;
  EnergyConstants energy;
  std::uint32_t read_queue_size = 64;
  std::uint32_t write_queue_size = 64;
  std::uint32_t write_high_watermark = 48;
  std::uint32_t write_low_watermark = 16;
  std::uint32_t prefetch_batch_quota = 4;
  RowPolicyConfig row_policy;

  double clock_mhz() const { return data_rate_mtps / 2.0; }
  bool operator==(const DramConfig&) const = default;
};

struct MitigationConfig {
  MitigationKind kind = MitigationKind::none;
  std::uint32_t rfm_threshold = 16;
  double rfm_service_time_ns = 350;
  std::uint32_t prac_threshold = 512;
  std::uint32_t blast_radius = 2;
  double prac_recovery_time_ns = 350;
  std::uint32_t rfm_rows_per_command = 2;

  bool operator==(const MitigationConfig&) const = default;
};

struct CacheConfig {
  std::string name;
  std::uint64_t size_bytes = 0; // per core when `shared`
  std::uint32_t ways = 1;
  std::uint32_t latency = 1;
  std::uint32_t mshr_entries = 1; // per core when `shared`
  std::uint32_t lookups_per_cycle = 2;
  bool shared = false;
  ReplacementPolicy replacement = ReplacementPolicy::lru;
  PrefetcherKind prefetcher = PrefetcherKind::none;

  std::uint64_t lines(std::uint32_t cores) const { return (shared ? size_bytes * cores : size_bytes) / 64; }
  std::uint32_t sets(std::uint32_t cores) const { return static_cast<std::uint32_t>(lines(cores) / ways); }
  bool operator==(const CacheConfig&) const = default;
};

struct CoreConfig {
  std::uint32_t rob_capacity = 512;
  double base_cpi_non_mem = 0.25;
  std::uint32_t mem_issue_width = 2;
  double frequency_mhz = 4000;

  bool operator==(const CoreConfig&) const = default;
};

struct OrapConfig {
  std::uint32_t issue_max = 5;
  std::uint32_t useful_max = 4;
  std::uint32_t confidence_increment = 1;
  std::uint32_t initial_confidence = 32;
  double gate_floor = 0.005;
  double gate_slope = 0.0095;
  std::uint32_t gate_full = 100;
  // depth = number of thresholds <= confidence; must be nondecreasing
  std::vector<std::uint32_t> depth_thresholds = {1, 32, 64, 96, 128, 160, 192, 224};
  ConfidenceMode confidence_mode = ConfidenceMode::hybrid;
  std::uint32_t table_entries = 1024;
  std::uint32_t table_ways = 8;
  std::uint32_t pot_entries = 256;
  std::uint32_t pot_ways = 8;
  std::uint32_t blp_sub_buffers = 16;
  std::uint32_t blp_entries_per_core = 64;
  std::uint32_t blp_issue_per_cycle = 2;
  std::uint32_t mshr_demand_reserve = 8;

  bool operator==(const OrapConfig&) const = default;
};

struct HsdConfig {
  std::uint32_t streams = 32;
  std::uint32_t max_depth = 64;
  std::uint32_t epoch_length = 8192;
  double p_req_high = 0.9;
  double p_req_low = 0.3;

  bool operator==(const HsdConfig&) const = default;
};

struct SimConfig {
  std::string name = "custom";
  std::uint32_t core_count = 1;
  CoreConfig core;
  std::vector<CacheConfig> cache_levels;
  DramConfig dram;
  std::string mapping_preset = "zen4"; // empty when `mapping` is an explicit layout
  MappingDescriptor mapping;
  MitigationConfig mitigation;
  OrapConfig orap;
  HsdConfig hsd;
  std::uint64_t rng_seed = 1;

  // Throws ConfigError naming the offending field.
  void validate() const;
  const CacheConfig* level(std::string_view name) const;
  CacheConfig* level(std::string_view name);
  bool operator==(const SimConfig&) const = default;
};

EnergyConstants derive_energy(const DeviceCurrents& cur, const DramTimings& t, const DramGeometry& g, double data_rate_mtps,
                              double rfm_service_time_ns);

SimConfig load_config(const std::filesystem::path& path);
SimConfig parse_config(std::string_view text);
std::string serialize_config(const SimConfig& cfg);

// "paper-1core", "paper-rfm", "paper-prac", "paper-8core", "downscaled-1gib"
SimConfig make_preset(std::string_view name);
std::vector<std::string> preset_names();

// Set the prefetcher of a cache level by name (L1D, L2, LLC).
void set_prefetcher(SimConfig& cfg, std::string_view level, PrefetcherKind kind);
// Apply a mitigation, switching to the matching timing and energy set.
void apply_mitigation(SimConfig& cfg, MitigationKind kind);
} // namespace orapsim

#endif
