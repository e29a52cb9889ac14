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

#ifndef ORAPSIM_ORAP_HPP
#define ORAPSIM_ORAP_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "orapsim/addrmap.hpp"
#include "orapsim/blp_buffer.hpp"
#include "orapsim/cache.hpp"
#include "orapsim/config.hpp"
#include "orapsim/hsd.hpp"
#include "orapsim/request.hpp"

namespace orapsim
{
inline constexpr std::uint32_t CONFIDENCE_MAX = 255;

// Steady-state usefulness the throttle aims for, useful_max / issue_max.
// Throws std::invalid_argument outside 1 <= useful_max <= issue_max <= 6.
double target_usefulness(std::uint32_t issue_max, std::uint32_t useful_max);
// Fills a never-useful IP can cause starting from full confidence.
std::uint32_t max_pending(std::uint32_t issue_max, std::uint32_t increment);

std::uint32_t depth_from_confidence(const OrapConfig& cfg, std::uint32_t c);
double gate_probability(const OrapConfig& cfg, std::uint32_t c);

enum class Engine : std::uint8_t { next_column = 0, hsd = 1 };
constexpr std::size_t ENGINE_COUNT = 2;

struct ConfidenceLane {
  std::uint8_t confidence = 0;
  std::uint8_t issue = 0;
  std::uint8_t useful = 0;

  // Both return true when the counter rolled over and confidence moved.
  bool on_issue(const OrapConfig& cfg);
  bool on_useful(const OrapConfig& cfg);
  // Fills this lane may still authorise before confidence reaches zero.
  std::uint32_t budget(const OrapConfig& cfg) const;
};

struct ConfidenceEntry {
  bool valid = false;
  std::uint16_t tag = 0;
  std::uint64_t lru = 0;
  std::array<ConfidenceLane, ENGINE_COUNT> lanes{};
};

// IPCT/RCT: set-associative, LRU, indexed by a 16-bit hash of the key.
class ConfidenceTable
{
public:
  ConfidenceTable(std::uint32_t entries, std::uint32_t ways, std::uint8_t initial_confidence);

  ConfidenceLane* find(std::uint64_t key, Engine e);
  const ConfidenceLane* find(std::uint64_t key, Engine e) const;
  // Allocates (evicting LRU) when absent.
  ConfidenceLane& lookup(std::uint64_t key, Engine e);
  std::uint32_t sets() const { return sets_; }
  std::uint32_t ways() const { return ways_; }

private:
  std::pair<std::uint32_t, std::uint16_t> index(std::uint64_t key) const;
  ConfidenceEntry* entry(std::uint64_t key);

  std::uint32_t sets_, ways_;
  std::uint8_t init_;
  std::vector<ConfidenceEntry> entries_;
  std::uint64_t clock_ = 0;
};

// Per-4 KiB-page bitmap of recently filled or requested lines.
class PageOccupancyTable
{
public:
  PageOccupancyTable(std::uint32_t entries, std::uint32_t ways);

  // True when the line was new (and is now recorded).
  bool filter_and_record(std::uint64_t address);
  void record(std::uint64_t address) { filter_and_record(address); }
  bool contains(std::uint64_t address) const;

private:
  struct Entry {
    bool valid = false;
    std::uint64_t page = 0;
    std::uint64_t bitmap = 0;
    std::uint64_t lru = 0;
  };
  std::uint32_t sets_, ways_;
  std::vector<Entry> entries_;
  std::uint64_t clock_ = 0;
};

struct OrapStats {
  std::uint64_t triggers = 0;
  std::uint64_t hsd_triggers = 0; // Next-Column triggers caused by an HSD prefetch miss
  std::uint64_t gated = 0;
  std::uint64_t candidates = 0;
  std::uint64_t pot_duplicates = 0;
  std::uint64_t budget_truncated = 0;
  std::array<std::uint64_t, ENGINE_COUNT> fills{}, useful{};
};

// One core's ORAP state. Nothing here is shared between cores.
class Orap
{
public:
  Orap(const OrapConfig& cfg, const MappingDescriptor& map, std::uint64_t seed);

  // Next-Column candidates for an LLC miss not yet in the POT. Recording is left to the caller.
  std::vector<std::uint64_t> on_llc_miss(std::uint64_t ip, std::uint64_t address, bool from_hsd = false);
  void on_prefetch_fill(Engine engine, std::uint64_t trigger_ip, std::uint64_t row_id);
  void on_demand_hit_prefetched(std::uint64_t hit_ip, std::uint64_t row_id, Engine engine);

  // Combined confidence a trigger would see (allocates nothing).
  std::uint32_t confidence(std::uint64_t ip, std::uint64_t row_id) const;
  std::uint32_t ip_confidence(std::uint64_t ip, Engine e) const;
  std::uint32_t row_confidence(std::uint64_t row_id) const;

  ConfidenceTable& ipct() { return ipct_; }
  ConfidenceTable& rct() { return rct_; }
  PageOccupancyTable& pot() { return pot_; }
  const OrapStats& stats() const { return stats_; }
  const OrapConfig& config() const { return cfg_; }
  std::uint64_t row_of(std::uint64_t address) const;

private:
  OrapConfig cfg_;
  const MappingDescriptor* map_;
  ConfidenceTable ipct_, rct_;
  PageOccupancyTable pot_;
  std::mt19937_64 rng_;
  OrapStats stats_;
};

inline Engine engine_of(Origin o) { return o == Origin::hsd ? Engine::hsd : Engine::next_column; }
inline Origin origin_of(Engine e) { return e == Engine::hsd ? Origin::hsd : Origin::nc; }

struct OrapLlcStats {
  std::uint64_t pot_filtered = 0;
  std::uint64_t cache_filtered = 0; // candidate already present or in flight at the LLC
  std::uint64_t blp_rejected = 0;
  std::uint64_t blp_accepted = 0;
};

// Binds per-core ORAP (and optionally HSD) instances and the shared bank-leveling buffer to the LLC.
class OrapLlc : public CachePrefetcher
{
public:
  OrapLlc(const OrapConfig& cfg, const HsdConfig& hsd, bool with_hsd, const MappingDescriptor& map, std::uint32_t cores, std::uint64_t seed);

  void on_access(Cache& c, const Request& r, bool hit, cycle_t now) override;
  void on_prefetch_lookup(Cache& c, const Request& r, PrefetchOutcome outcome, cycle_t now) override;
  void on_fill(Cache& c, const Request& first, bool prefetch_fill, cycle_t now) override;
  void on_useful(Cache& c, const CacheLine& line, std::uint64_t hit_ip, cycle_t now) override;
  void operate(Cache& c, cycle_t now) override;

  Orap& orap(std::uint32_t cpu) { return orap_.at(cpu); }
  const Orap& orap(std::uint32_t cpu) const { return orap_.at(cpu); }
  const Hsd* hsd(std::uint32_t cpu) const { return hsd_.empty() ? nullptr : &hsd_.at(cpu); }
  const BlpBuffer& blp() const { return blp_; }
  const OrapLlcStats& stats() const { return stats_; }

private:
  void stage(Cache& c, const std::vector<std::uint64_t>& candidates, std::uint32_t cpu, std::uint64_t ip, Origin engine);
  void next_column(Cache& c, std::uint32_t cpu, std::uint64_t ip, std::uint64_t address, bool from_hsd);

  const MappingDescriptor* map_;
  std::vector<Orap> orap_;
  std::vector<Hsd> hsd_;
  BlpBuffer blp_;
  OrapLlcStats stats_;
};
} // namespace orapsim

#endif
