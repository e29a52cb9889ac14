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

#ifndef ORAPSIM_CACHE_HPP
#define ORAPSIM_CACHE_HPP

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "orapsim/config.hpp"
#include "orapsim/request.hpp"

namespace orapsim
{
inline constexpr unsigned SHIP_SIGNATURE_BITS = 14;
inline constexpr std::uint8_t SHIP_COUNTER_MAX = 3;
inline constexpr std::uint8_t RRPV_MAX = 3;

// Signature history counter table. Only demand accesses ever train it.
class ShipPredictor
{
public:
  ShipPredictor() : shct_(std::size_t{1} << SHIP_SIGNATURE_BITS, 1) {}

  static std::uint16_t signature(std::uint64_t ip) { return static_cast<std::uint16_t>(fold16(ip) & bitmask(SHIP_SIGNATURE_BITS)); }
  std::uint8_t counter(std::uint16_t sig) const { return shct_[sig]; }
  void reused(std::uint16_t sig) { shct_[sig] = sat_inc(shct_[sig], SHIP_COUNTER_MAX); }
  void dead(std::uint16_t sig) { shct_[sig] = sat_dec(shct_[sig]); }
  const std::vector<std::uint8_t>& table() const { return shct_; }

private:
  std::vector<std::uint8_t> shct_;
};

enum class FillKind : std::uint8_t { demand, prefetch, writeback };

struct CacheLine {
  bool valid = false;
  std::uint64_t block = 0;
  bool dirty = false;
  bool prefetched = false;
  Origin pf_origin = Origin::demand; // engine id while prefetched
  std::uint64_t pf_ip = 0;           // trigger IP of the prefetch
  std::uint32_t pf_cpu = 0;
  bool has_signature = false;
  std::uint16_t signature = 0;
  bool outcome = false;
  std::uint8_t rrpv = RRPV_MAX;
  std::uint64_t lru = 0;
};

// Functional set-associative tag store with LRU or SHiP replacement.
class CacheArray
{
public:
  CacheArray(std::uint32_t sets, std::uint32_t ways, ReplacementPolicy policy);

  std::uint32_t sets() const { return sets_; }
  std::uint32_t ways() const { return ways_; }
  std::uint32_t set_of(std::uint64_t block) const { return static_cast<std::uint32_t>(block & (sets_ - 1)); }

  CacheLine* find(std::uint64_t block);
  const CacheLine* find(std::uint64_t block) const;

  // Replacement update for a hit. Prefetch hits leave all state untouched.
  void touch(CacheLine& line, std::uint64_t ip, bool is_prefetch);
  // Way that the next fill into this set would replace.
  std::uint32_t victim_way(std::uint32_t set);
  // Install a block; returns the evicted line when a valid one was replaced.
  std::optional<CacheLine> fill(std::uint64_t block, std::uint64_t ip, FillKind kind, bool dirty, CacheLine** installed = nullptr);

  const ShipPredictor& predictor() const { return ship_; }
  const CacheLine& line(std::uint32_t set, std::uint32_t way) const { return lines_[std::size_t{set} * ways_ + way]; }
  std::uint64_t occupancy() const;

private:
  std::uint32_t sets_, ways_;
  ReplacementPolicy policy_;
  std::vector<CacheLine> lines_;
  ShipPredictor ship_;
  std::uint64_t clock_ = 0;
};

enum class PrefetchOutcome : std::uint8_t { issued, hit, in_flight, no_mshr };

class Cache;

// Prefetch engine attached to one cache level.
class CachePrefetcher
{
public:
  virtual ~CachePrefetcher() = default;
  // Every lookup of a read from above (demand or upper-level prefetch); `hit` is false for merges too.
  virtual void on_access(Cache& c, const Request& r, bool hit, cycle_t now) = 0;
  // Lookup result of a prefetch this level generated itself.
  virtual void on_prefetch_lookup(Cache&, const Request&, PrefetchOutcome, cycle_t) {}
  virtual void on_fill(Cache&, const Request& /*first*/, bool /*prefetch_fill*/, cycle_t) {}
  // A demand consumed a prefetched line (hit or merge into the in-flight prefetch).
  virtual void on_useful(Cache&, const CacheLine& /*line*/, std::uint64_t /*hit_ip*/, cycle_t) {}
  virtual void operate(Cache&, cycle_t) {}
};

struct CacheStats {
  std::uint64_t demand_accesses = 0, demand_hits = 0, demand_misses = 0;
  std::uint64_t mshr_merges = 0, mshr_full = 0, promotions = 0;
  std::uint64_t fills = 0, writebacks_out = 0, writebacks_in = 0;
  std::array<std::uint64_t, ORIGIN_COUNT> pf_requested{}, pf_issued{}, pf_useful{}, pf_fills{}, pf_dropped{}, pf_no_mshr{}, pf_useless{};
  std::uint64_t latency_sum = 0, latency_count = 0;
  std::vector<std::uint64_t> latency_hist = std::vector<std::uint64_t>(24, 0); // log2 buckets, core cycles
};

class Cache : public MemPort, public MemClient
{
public:
  Cache(const CacheConfig& cfg, std::uint32_t cores, std::uint32_t prefetch_mshr_reserve);

  const std::string& name() const { return cfg_.name; }
  const CacheConfig& config() const { return cfg_; }
  void set_lower(MemPort* lower) { lower_ = lower; }
  void set_prefetcher(CachePrefetcher* pf) { pf_ = pf; }
  CachePrefetcher* prefetcher() const { return pf_; }

  bool add_request(const Request& r, cycle_t now) override;
  void promote(std::uint64_t address) override;
  void on_fill(const Request& r, cycle_t now) override;
  // Queue a prefetch generated at this level.
  bool add_prefetch(std::uint64_t address, std::uint64_t ip, std::uint32_t cpu, Origin origin, cycle_t now);

  void operate(cycle_t now);
  bool idle() const;

  bool present(std::uint64_t address) const { return array_.find(block_number(address)) != nullptr; }
  bool in_flight(std::uint64_t address) const { return find_mshr(address) != nullptr; }
  std::size_t mshr_occupancy() const { return mshrs_.size(); }
  std::size_t mshr_capacity() const { return mshr_cap_; }
  std::size_t pq_space() const { return pq_size - pq_.size(); }

  const CacheArray& array() const { return array_; }
  const CacheStats& stats() const { return stats_; }

private:
  struct Mshr {
    std::uint64_t address;
    Request first;
    std::vector<Request> waiting;
    bool is_prefetch = false;
    bool promoted = false;
    bool demand_merged = false;
    std::uint64_t demand_ip = 0;
    bool dirty = false;
    bool sent = false;
    cycle_t alloc = 0;
  };

  bool handle_read(Request& r, cycle_t now);
  void handle_own_prefetch(const Request& r, cycle_t now);
  void handle_writeback(const Request& r);
  void install_victim(const std::optional<CacheLine>& evicted);
  void send_down(cycle_t now);
  void respond(const Request& r, cycle_t now);
  Mshr* find_mshr(std::uint64_t address);
  const Mshr* find_mshr(std::uint64_t address) const;

  CacheConfig cfg_;
  std::uint32_t lookups_;
  std::size_t mshr_cap_;
  std::size_t pf_reserve_;
  CacheArray array_;
  MemPort* lower_ = nullptr;
  CachePrefetcher* pf_ = nullptr;

  std::deque<Request> rq_, wq_, pq_;
  std::deque<Request> wb_out_;
  std::vector<Mshr> mshrs_;
  CacheStats stats_;

  static constexpr std::size_t queue_size = 64;
  static constexpr std::size_t pq_size = 32;
};
} // namespace orapsim

#endif
