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

#include "orapsim/orap.hpp"

#include <algorithm>
#include <fmt/core.h>
#include <stdexcept>

namespace orapsim
{
double target_usefulness(std::uint32_t issue_max, std::uint32_t useful_max)
{
  if (issue_max < 1 || issue_max > 6 || useful_max < 1 || useful_max > issue_max)
    throw std::invalid_argument(fmt::format("no target usefulness for issue max {} / useful max {}", issue_max, useful_max));
  return static_cast<double>(useful_max) / issue_max;
}

std::uint32_t max_pending(std::uint32_t issue_max, std::uint32_t increment)
{
  if (issue_max < 1 || increment < 1)
    throw std::invalid_argument("issue max and increment must be positive");
  return CONFIDENCE_MAX * issue_max / increment;
}

std::uint32_t depth_from_confidence(const OrapConfig& cfg, std::uint32_t c)
{
  return static_cast<std::uint32_t>(std::upper_bound(cfg.depth_thresholds.begin(), cfg.depth_thresholds.end(), c) - cfg.depth_thresholds.begin());
}

double gate_probability(const OrapConfig& cfg, std::uint32_t c)
{
  if (c >= cfg.gate_full)
    return 1.0;
  return std::min(1.0, std::max(cfg.gate_floor, cfg.gate_slope * c));
}

bool ConfidenceLane::on_issue(const OrapConfig& cfg)
{
  if (++issue < cfg.issue_max)
    return false;
  issue = 0;
  confidence = static_cast<std::uint8_t>(confidence > cfg.confidence_increment ? confidence - cfg.confidence_increment : 0);
  return true;
}

bool ConfidenceLane::on_useful(const OrapConfig& cfg)
{
  if (++useful < cfg.useful_max)
    return false;
  useful = 0;
  confidence = static_cast<std::uint8_t>(std::min<std::uint32_t>(CONFIDENCE_MAX, confidence + cfg.confidence_increment));
  return true;
}

std::uint32_t ConfidenceLane::budget(const OrapConfig& cfg) const
{
  const std::uint32_t total = std::uint32_t{confidence} * cfg.issue_max / cfg.confidence_increment;
  return total > issue ? total - issue : 0;
}

ConfidenceTable::ConfidenceTable(std::uint32_t entries, std::uint32_t ways, std::uint8_t initial_confidence)
    : sets_(entries / ways), ways_(ways), init_(initial_confidence), entries_(entries)
{
  if (!is_pow2(sets_) || sets_ > (1u << 16))
    throw std::invalid_argument("confidence table needs a power-of-two set count");
}

std::pair<std::uint32_t, std::uint16_t> ConfidenceTable::index(std::uint64_t key) const
{
  const auto h = fold16(key);
  return {h & (sets_ - 1), static_cast<std::uint16_t>(h >> lg2(sets_))};
}

ConfidenceEntry* ConfidenceTable::entry(std::uint64_t key)
{
  auto [set, tag] = index(key);
  auto* base = &entries_[std::size_t{set} * ways_];
  for (std::uint32_t w = 0; w < ways_; ++w)
    if (base[w].valid && base[w].tag == tag)
      return base + w;
  return nullptr;
}

ConfidenceLane* ConfidenceTable::find(std::uint64_t key, Engine e)
{
  auto* en = entry(key);
  if (!en)
    return nullptr;
  en->lru = ++clock_;
  return &en->lanes[static_cast<std::size_t>(e)];
}

const ConfidenceLane* ConfidenceTable::find(std::uint64_t key, Engine e) const
{
  auto* en = const_cast<ConfidenceTable*>(this)->entry(key);
  return en ? &en->lanes[static_cast<std::size_t>(e)] : nullptr;
}

ConfidenceLane& ConfidenceTable::lookup(std::uint64_t key, Engine e)
{
  if (auto* lane = find(key, e))
    return *lane;
  auto [set, tag] = index(key);
  auto* base = &entries_[std::size_t{set} * ways_];
  auto* victim = base;
  for (std::uint32_t w = 0; w < ways_; ++w) {
    if (!base[w].valid) {
      victim = base + w;
      break;
    }
    if (base[w].lru < victim->lru)
      victim = base + w;
  }
  *victim = ConfidenceEntry{};
  victim->valid = true;
  victim->tag = tag;
  victim->lru = ++clock_;
  for (auto& l : victim->lanes)
    l.confidence = init_;
  return victim->lanes[static_cast<std::size_t>(e)];
}

PageOccupancyTable::PageOccupancyTable(std::uint32_t entries, std::uint32_t ways) : sets_(entries / ways), ways_(ways), entries_(entries)
{
  if (!is_pow2(sets_))
    throw std::invalid_argument("page occupancy table needs a power-of-two set count");
}

bool PageOccupancyTable::filter_and_record(std::uint64_t address)
{
  const auto page = small_page(address);
  const auto bit = std::uint64_t{1} << (block_number(address) & (BLOCKS_PER_SMALL_PAGE - 1));
  auto* base = &entries_[(page & (sets_ - 1)) * ways_];
  Entry* victim = base;
  for (std::uint32_t w = 0; w < ways_; ++w) {
    auto& e = base[w];
    if (e.valid && e.page == page) {
      e.lru = ++clock_;
      if (e.bitmap & bit)
        return false;
      e.bitmap |= bit;
      return true;
    }
    if (victim->valid && (!e.valid || e.lru < victim->lru))
      victim = &e;
  }
  *victim = Entry{true, page, bit, ++clock_};
  return true;
}

bool PageOccupancyTable::contains(std::uint64_t address) const
{
  const auto page = small_page(address);
  const auto bit = std::uint64_t{1} << (block_number(address) & (BLOCKS_PER_SMALL_PAGE - 1));
  const auto* base = &entries_[(page & (sets_ - 1)) * ways_];
  for (std::uint32_t w = 0; w < ways_; ++w)
    if (base[w].valid && base[w].page == page)
      return (base[w].bitmap & bit) != 0;
  return false;
}

Orap::Orap(const OrapConfig& cfg, const MappingDescriptor& map, std::uint64_t seed)
    : cfg_(cfg), map_(&map), ipct_(cfg.table_entries, cfg.table_ways, static_cast<std::uint8_t>(cfg.initial_confidence)),
      rct_(cfg.table_entries, cfg.table_ways, static_cast<std::uint8_t>(cfg.initial_confidence)), pot_(cfg.pot_entries, cfg.pot_ways), rng_(seed)
{
}

std::uint64_t Orap::row_of(std::uint64_t address) const { return map_->row_id(decompose(*map_, address)); }

std::uint32_t Orap::ip_confidence(std::uint64_t ip, Engine e) const
{
  const auto* l = ipct_.find(ip, e);
  return l ? l->confidence : cfg_.initial_confidence;
}

std::uint32_t Orap::row_confidence(std::uint64_t row_id) const
{
  const auto* l = rct_.find(row_id, Engine::next_column);
  return l ? l->confidence : cfg_.initial_confidence;
}

std::uint32_t Orap::confidence(std::uint64_t ip, std::uint64_t row_id) const
{
  switch (cfg_.confidence_mode) {
  case ConfidenceMode::ip_only:
    return ip_confidence(ip, Engine::next_column);
  case ConfidenceMode::row_only:
    return row_confidence(row_id);
  case ConfidenceMode::hybrid:
    break;
  }
  return std::max(ip_confidence(ip, Engine::next_column), row_confidence(row_id));
}

std::vector<std::uint64_t> Orap::on_llc_miss(std::uint64_t ip, std::uint64_t address, bool from_hsd)
{
  ++stats_.triggers;
  if (from_hsd)
    ++stats_.hsd_triggers;
  const auto coord = decompose(*map_, address);
  const auto row = map_->row_id(coord);

  auto& ip_lane = ipct_.lookup(ip, Engine::next_column);
  auto& row_lane = rct_.lookup(row, Engine::next_column);
  const ConfidenceLane* lane = &ip_lane;
  if (cfg_.confidence_mode == ConfidenceMode::row_only || (cfg_.confidence_mode == ConfidenceMode::hybrid && row_lane.confidence > ip_lane.confidence))
    lane = &row_lane;
  const std::uint32_t c = lane->confidence;

  std::uint32_t depth = depth_from_confidence(cfg_, c);
  if (c < cfg_.gate_full) {
    const double p = gate_probability(cfg_, c);
    if (p <= 0.0 || unit_real(rng_) >= p) {
      ++stats_.gated;
      return {};
    }
    depth = std::max<std::uint32_t>(depth, 1);
  }

  // a probe from zero confidence is not bounded by the (empty) lane budget
  const auto budget = c == 0 ? depth * map_->cluster_size() : lane->budget(cfg_);
  std::vector<std::uint64_t> out;
  for (auto base : next_clusters(*map_, coord, depth)) {
    const auto cc = decompose(*map_, base);
    for (auto a : cluster_blocks(*map_, cc, cc.cluster_index)) {
      ++stats_.candidates;
      if (out.size() >= budget)
        ++stats_.budget_truncated;
      else if (!pot_.contains(a))
        out.push_back(a);
      else
        ++stats_.pot_duplicates;
    }
  }
  return out;
}

void Orap::on_prefetch_fill(Engine engine, std::uint64_t trigger_ip, std::uint64_t row_id)
{
  ++stats_.fills[static_cast<std::size_t>(engine)];
  ipct_.lookup(trigger_ip, engine).on_issue(cfg_);
  if (engine == Engine::next_column)
    rct_.lookup(row_id, Engine::next_column).on_issue(cfg_);
}

void Orap::on_demand_hit_prefetched(std::uint64_t hit_ip, std::uint64_t row_id, Engine engine)
{
  ++stats_.useful[static_cast<std::size_t>(engine)];
  ipct_.lookup(hit_ip, engine).on_useful(cfg_);
  if (engine == Engine::next_column)
    rct_.lookup(row_id, Engine::next_column).on_useful(cfg_);
}

OrapLlc::OrapLlc(const OrapConfig& cfg, const HsdConfig& hsd, bool with_hsd, const MappingDescriptor& map, std::uint32_t cores, std::uint64_t seed)
    : map_(&map), blp_(cfg.blp_sub_buffers, cfg.blp_entries_per_core, cores, cfg.blp_issue_per_cycle)
{
  std::seed_seq seq{seed, std::uint64_t{0x6f726170}};
  std::vector<std::uint64_t> seeds(cores);
  seq.generate(seeds.begin(), seeds.end());
  for (std::uint32_t i = 0; i < cores; ++i) {
    orap_.emplace_back(cfg, map, seeds[i]);
    if (with_hsd)
      hsd_.emplace_back(hsd);
  }
}

void OrapLlc::stage(Cache& c, const std::vector<std::uint64_t>& candidates, std::uint32_t cpu, std::uint64_t ip, Origin engine)
{
  for (auto a : candidates) {
    auto& pot = orap_.at(cpu).pot();
    if (pot.contains(a)) {
      ++stats_.pot_filtered;
      continue;
    }
    if (c.present(a) || c.in_flight(a)) {
      ++stats_.cache_filtered;
      pot.record(a);
      continue;
    }
    BlpEntry e{block_number(a), cpu, engine, ip, false};
    const auto bank = map_->flat_bank(decompose(*map_, a));
    // rejected candidates stay out of the POT so a later trigger can propose them again
    if (blp_.insert(e, bank) == BlpInsert::accepted) {
      ++stats_.blp_accepted;
      pot.record(a);
    } else {
      ++stats_.blp_rejected;
    }
  }
}

void OrapLlc::next_column(Cache& c, std::uint32_t cpu, std::uint64_t ip, std::uint64_t address, bool from_hsd)
{
  stage(c, orap_.at(cpu).on_llc_miss(ip, address, from_hsd), cpu, ip, Origin::nc);
}

void OrapLlc::on_access(Cache& c, const Request& r, bool hit, cycle_t)
{
  if (!hsd_.empty()) {
    auto& o = orap_.at(r.cpu);
    stage(c, hsd_.at(r.cpu).on_llc_access(r.ip, r.address, o.ip_confidence(r.ip, Engine::hsd)), r.cpu, r.ip, Origin::hsd);
  }
  if (!hit && r.is_demand())
    next_column(c, r.cpu, r.ip, r.address, false);
}

void OrapLlc::on_prefetch_lookup(Cache& c, const Request& r, PrefetchOutcome outcome, cycle_t)
{
  const auto block = block_number(r.address);
  switch (outcome) {
  case PrefetchOutcome::issued:
    // HSD prefetches look up the LLC like any access; their misses drive Next-Column too
    if (r.origin == Origin::hsd)
      next_column(c, r.cpu, r.ip, r.address, true);
    break;
  case PrefetchOutcome::hit:
  case PrefetchOutcome::in_flight:
    blp_.drop(block);
    break;
  case PrefetchOutcome::no_mshr:
    blp_.requeue(block);
    break;
  }
}

void OrapLlc::on_fill(Cache&, const Request& first, bool prefetch_fill, cycle_t)
{
  auto& o = orap_.at(first.cpu);
  o.pot().record(first.address);
  const bool own = first.requester == nullptr && (first.origin == Origin::nc || first.origin == Origin::hsd);
  if (!own || !prefetch_fill)
    return;
  blp_.complete(block_number(first.address));
  o.on_prefetch_fill(engine_of(first.origin), first.ip, o.row_of(first.address));
}

void OrapLlc::on_useful(Cache&, const CacheLine& line, std::uint64_t hit_ip, cycle_t)
{
  if (line.pf_origin != Origin::nc && line.pf_origin != Origin::hsd)
    return;
  auto& o = orap_.at(line.pf_cpu);
  o.on_demand_hit_prefetched(hit_ip, o.row_of(line.block << LOG2_BLOCK_SIZE), engine_of(line.pf_origin));
}

void OrapLlc::operate(Cache& c, cycle_t now)
{
  for (const auto& e : blp_.issue_cycle(c.pq_space())) {
    if (!c.add_prefetch(e.block << LOG2_BLOCK_SIZE, e.ip, e.cpu, e.engine, now))
      blp_.requeue(e.block);
  }
}
} // namespace orapsim
