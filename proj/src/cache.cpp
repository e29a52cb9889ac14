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

#include "orapsim/cache.hpp"

#include <algorithm>
#include <fmt/core.h>
#include <stdexcept>

namespace orapsim
{
CacheArray::CacheArray(std::uint32_t sets, std::uint32_t ways, ReplacementPolicy policy)
    : sets_(sets), ways_(ways), policy_(policy), lines_(std::size_t{sets} * ways)
{
  if (!is_pow2(sets) || ways == 0)
    throw std::invalid_argument(fmt::format("cache array needs a power-of-two set count and nonzero ways, got {}x{}", sets, ways));
}

CacheLine* CacheArray::find(std::uint64_t block)
{
  auto* base = &lines_[std::size_t{set_of(block)} * ways_];
  for (std::uint32_t w = 0; w < ways_; ++w)
    if (base[w].valid && base[w].block == block)
      return base + w;
  return nullptr;
}

const CacheLine* CacheArray::find(std::uint64_t block) const { return const_cast<CacheArray*>(this)->find(block); }

std::uint64_t CacheArray::occupancy() const
{
  return static_cast<std::uint64_t>(std::count_if(lines_.begin(), lines_.end(), [](const CacheLine& l) { return l.valid; }));
}

void CacheArray::touch(CacheLine& line, std::uint64_t ip, bool is_prefetch)
{
  if (is_prefetch)
    return;
  if (policy_ == ReplacementPolicy::lru) {
    line.lru = ++clock_;
    return;
  }
  if (!line.has_signature) {
    // first demand touch of a prefetched or written-back line: train as if the demand had missed
    line.has_signature = true;
    line.signature = ShipPredictor::signature(ip);
    line.outcome = false;
    line.rrpv = ship_.counter(line.signature) == 0 ? RRPV_MAX : RRPV_MAX - 1;
    return;
  }
  line.outcome = true;
  ship_.reused(line.signature);
  line.rrpv = 0;
}

std::uint32_t CacheArray::victim_way(std::uint32_t set)
{
  auto* base = &lines_[std::size_t{set} * ways_];
  for (std::uint32_t w = 0; w < ways_; ++w)
    if (!base[w].valid)
      return w;
  if (policy_ == ReplacementPolicy::lru) {
    std::uint32_t best = 0;
    for (std::uint32_t w = 1; w < ways_; ++w)
      if (base[w].lru < base[best].lru)
        best = w;
    return best;
  }
  for (;;) {
    for (std::uint32_t w = 0; w < ways_; ++w)
      if (base[w].rrpv >= RRPV_MAX)
        return w;
    for (std::uint32_t w = 0; w < ways_; ++w)
      ++base[w].rrpv;
  }
}

std::optional<CacheLine> CacheArray::fill(std::uint64_t block, std::uint64_t ip, FillKind kind, bool dirty, CacheLine** installed)
{
  const auto set = set_of(block);
  auto& line = lines_[std::size_t{set} * ways_ + victim_way(set)];
  std::optional<CacheLine> evicted;
  if (line.valid) {
    evicted = line;
    if (policy_ == ReplacementPolicy::ship && line.has_signature && !line.outcome)
      ship_.dead(line.signature);
  }
  line = CacheLine{};
  line.valid = true;
  line.block = block;
  line.dirty = dirty;
  line.lru = ++clock_;
  if (kind == FillKind::demand) {
    line.has_signature = true;
    line.signature = ShipPredictor::signature(ip);
    line.rrpv = ship_.counter(line.signature) == 0 ? RRPV_MAX : RRPV_MAX - 1;
  } else {
    line.rrpv = RRPV_MAX - 1;
  }
  if (installed)
    *installed = &line;
  return evicted;
}

Cache::Cache(const CacheConfig& cfg, std::uint32_t cores, std::uint32_t prefetch_mshr_reserve)
    : cfg_(cfg), lookups_(cfg.lookups_per_cycle * (cfg.shared ? cores : 1)), mshr_cap_(std::size_t{cfg.mshr_entries} * (cfg.shared ? cores : 1)),
      pf_reserve_(std::min<std::size_t>(prefetch_mshr_reserve, mshr_cap_ / 4)), array_(cfg.sets(cores), cfg.ways, cfg.replacement)
{
}

Cache::Mshr* Cache::find_mshr(std::uint64_t address)
{
  for (auto& m : mshrs_)
    if (m.address == address)
      return &m;
  return nullptr;
}

const Cache::Mshr* Cache::find_mshr(std::uint64_t address) const { return const_cast<Cache*>(this)->find_mshr(address); }

bool Cache::add_request(const Request& r, cycle_t now)
{
  auto& q = r.type == ReqType::writeback ? wq_ : rq_;
  if (q.size() >= queue_size)
    return false;
  Request copy = r;
  copy.address = block_base(r.address);
  copy.ready = now + cfg_.latency;
  q.push_back(copy);
  return true;
}

bool Cache::add_prefetch(std::uint64_t address, std::uint64_t ip, std::uint32_t cpu, Origin origin, cycle_t now)
{
  address = block_base(address);
  ++stats_.pf_requested[static_cast<std::size_t>(origin)];
  if (pq_.size() >= pq_size || std::any_of(pq_.begin(), pq_.end(), [&](const Request& p) { return p.address == address; })) {
    ++stats_.pf_dropped[static_cast<std::size_t>(origin)];
    return false;
  }
  Request r;
  r.address = address;
  r.ip = ip;
  r.cpu = cpu;
  r.type = ReqType::prefetch;
  r.origin = origin;
  r.ready = now;
  pq_.push_back(r);
  return true;
}

void Cache::promote(std::uint64_t address)
{
  if (auto* m = find_mshr(block_base(address)); m && !m->promoted) {
    m->promoted = true;
    ++stats_.promotions;
    if (m->sent && lower_)
      lower_->promote(m->address);
  }
}

void Cache::respond(const Request& r, cycle_t now)
{
  if (r.requester)
    r.requester->on_fill(r, now);
}

bool Cache::handle_read(Request& r, cycle_t now)
{
  const auto block = block_number(r.address);
  const bool demand = r.is_demand();

  if (auto* line = array_.find(block)) {
    if (demand) {
      ++stats_.demand_accesses;
      ++stats_.demand_hits;
      if (line->prefetched) {
        line->prefetched = false;
        ++stats_.pf_useful[static_cast<std::size_t>(line->pf_origin)];
        if (pf_)
          pf_->on_useful(*this, *line, r.ip, now);
      }
    }
    array_.touch(*line, r.ip, !demand);
    if (r.type == ReqType::rfo)
      line->dirty = true;
    if (pf_)
      pf_->on_access(*this, r, true, now);
    respond(r, now);
    return true;
  }

  if (auto* m = find_mshr(r.address)) {
    if (demand) {
      ++stats_.demand_accesses;
      ++stats_.demand_misses;
      ++stats_.mshr_merges;
      if (m->is_prefetch && !m->demand_merged) {
        m->demand_merged = true;
        m->demand_ip = r.ip;
        if (!m->first.requester) {
          // prefetch generated here: a demand is consuming it
          ++stats_.pf_useful[static_cast<std::size_t>(m->first.origin)];
          if (pf_) {
            CacheLine info;
            info.block = block;
            info.prefetched = true;
            info.pf_origin = m->first.origin;
            info.pf_ip = m->first.ip;
            info.pf_cpu = m->first.cpu;
            pf_->on_useful(*this, info, r.ip, now);
          }
        }
      }
      if (!m->promoted) {
        m->promoted = true;
        ++stats_.promotions;
        if (m->sent && lower_)
          lower_->promote(m->address);
      }
    }
    if (r.type == ReqType::rfo)
      m->dirty = true;
    m->waiting.push_back(r);
    if (pf_)
      pf_->on_access(*this, r, false, now);
    return true;
  }

  if (mshrs_.size() >= mshr_cap_) {
    ++stats_.mshr_full;
    return false;
  }
  Mshr m;
  m.address = r.address;
  m.first = r;
  m.waiting.push_back(r);
  m.is_prefetch = !demand;
  m.demand_merged = demand;
  m.demand_ip = r.ip;
  m.dirty = r.type == ReqType::rfo;
  m.alloc = now;
  mshrs_.push_back(std::move(m));
  if (demand) {
    ++stats_.demand_accesses;
    ++stats_.demand_misses;
  }
  if (pf_)
    pf_->on_access(*this, r, false, now);
  return true;
}

void Cache::handle_own_prefetch(const Request& r, cycle_t now)
{
  const auto o = static_cast<std::size_t>(r.origin);
  PrefetchOutcome outcome;
  if (array_.find(block_number(r.address))) {
    outcome = PrefetchOutcome::hit;
    ++stats_.pf_dropped[o];
  } else if (find_mshr(r.address)) {
    outcome = PrefetchOutcome::in_flight;
    ++stats_.pf_dropped[o];
  } else if (mshrs_.size() + pf_reserve_ >= mshr_cap_) {
    outcome = PrefetchOutcome::no_mshr;
    ++stats_.pf_no_mshr[o];
  } else {
    outcome = PrefetchOutcome::issued;
    ++stats_.pf_issued[o];
    Mshr m;
    m.address = r.address;
    m.first = r;
    m.is_prefetch = true;
    m.alloc = now;
    mshrs_.push_back(std::move(m));
  }
  if (pf_)
    pf_->on_prefetch_lookup(*this, r, outcome, now);
}

void Cache::install_victim(const std::optional<CacheLine>& evicted)
{
  if (!evicted)
    return;
  if (evicted->prefetched)
    ++stats_.pf_useless[static_cast<std::size_t>(evicted->pf_origin)];
  if (evicted->dirty) {
    Request wb;
    wb.address = evicted->block << LOG2_BLOCK_SIZE;
    wb.type = ReqType::writeback;
    wb.origin = Origin::writeback;
    wb.cpu = evicted->pf_cpu;
    wb_out_.push_back(wb);
    ++stats_.writebacks_out;
  }
}

void Cache::handle_writeback(const Request& r)
{
  ++stats_.writebacks_in;
  const auto block = block_number(r.address);
  if (auto* line = array_.find(block)) {
    line->dirty = true;
    return;
  }
  install_victim(array_.fill(block, 0, FillKind::writeback, true));
}

void Cache::on_fill(const Request& r, cycle_t now)
{
  auto it = std::find_if(mshrs_.begin(), mshrs_.end(), [&](const Mshr& m) { return m.address == r.address; });
  if (it == mshrs_.end())
    throw std::logic_error(fmt::format("{}: fill for {:#x} without an MSHR", cfg_.name, r.address));
  Mshr m = std::move(*it);
  mshrs_.erase(it);

  const bool prefetch_fill = m.is_prefetch && !m.demand_merged;
  CacheLine* line = nullptr;
  install_victim(array_.fill(block_number(m.address), m.demand_ip, prefetch_fill ? FillKind::prefetch : FillKind::demand, m.dirty, &line));
  line->prefetched = prefetch_fill;
  line->pf_origin = m.first.origin;
  line->pf_ip = m.first.ip;
  line->pf_cpu = m.first.cpu;
  ++stats_.fills;
  if (m.is_prefetch && !m.first.requester)
    ++stats_.pf_fills[static_cast<std::size_t>(m.first.origin)];
  if (!m.is_prefetch || m.promoted) {
    const auto lat = now - m.alloc;
    stats_.latency_sum += lat;
    ++stats_.latency_count;
    stats_.latency_hist[std::min<std::size_t>(lg2(lat + 1), stats_.latency_hist.size() - 1)]++;
  }
  if (pf_)
    pf_->on_fill(*this, m.first, m.is_prefetch, now);
  for (const auto& w : m.waiting)
    respond(w, now);
}

void Cache::send_down(cycle_t now)
{
  if (!lower_)
    return;
  while (!wb_out_.empty() && lower_->add_request(wb_out_.front(), now))
    wb_out_.pop_front();

  std::uint32_t budget = lookups_;
  for (int pass = 0; pass < 2 && budget > 0; ++pass) {
    for (auto& m : mshrs_) {
      if (m.sent || budget == 0)
        continue;
      const bool urgent = !m.is_prefetch || m.promoted;
      if (urgent != (pass == 0))
        continue;
      Request down = m.first;
      down.requester = this;
      down.promoted = m.promoted;
      if (m.is_prefetch && !m.promoted)
        down.type = ReqType::prefetch;
      else if (down.type == ReqType::prefetch)
        down.type = ReqType::load;
      if (!lower_->add_request(down, now))
        return;
      m.sent = true;
      --budget;
    }
  }
}

void Cache::operate(cycle_t now)
{
  std::uint32_t budget = lookups_;
  while (budget > 0 && !rq_.empty() && rq_.front().ready <= now) {
    if (!handle_read(rq_.front(), now))
      break;
    rq_.pop_front();
    --budget;
  }
  for (std::uint32_t n = 0; n < lookups_ && !wq_.empty() && wq_.front().ready <= now; ++n) {
    handle_writeback(wq_.front());
    wq_.pop_front();
  }
  while (budget > 0 && !pq_.empty() && pq_.front().ready <= now) {
    Request r = pq_.front();
    pq_.pop_front();
    handle_own_prefetch(r, now);
    --budget;
  }
  send_down(now);
  if (pf_)
    pf_->operate(*this, now);
}

bool Cache::idle() const { return rq_.empty() && wq_.empty() && pq_.empty() && wb_out_.empty() && mshrs_.empty(); }
} // namespace orapsim
