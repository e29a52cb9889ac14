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

#ifndef ORAPSIM_TESTS_HARNESS_HPP
#define ORAPSIM_TESTS_HARNESS_HPP

#include <deque>
#include <string_view>
#include <vector>

#include "oracles.hpp"
#include "orapsim/baseline_pf.hpp"
#include "orapsim/cache.hpp"
#include "orapsim/config.hpp"
#include "orapsim/dram.hpp"

namespace harness
{
using namespace orapsim;

// Fixed-latency backing store that answers reads through their requester.
class FakeMemory : public MemPort
{
public:
  explicit FakeMemory(cycle_t latency) : latency_(latency) {}

  bool add_request(const Request& r, cycle_t now) override
  {
    if (blocked)
      return false;
    arrivals.push_back(r);
    if (r.type == ReqType::writeback)
      ++writes;
    else
      inflight_.push_back({now + latency_, r});
    return true;
  }
  void promote(std::uint64_t address) override { promotions.push_back(address); }

  void tick(cycle_t now)
  {
    while (!inflight_.empty() && inflight_.front().first <= now) {
      auto r = inflight_.front().second;
      inflight_.pop_front();
      if (r.requester)
        r.requester->on_fill(r, now);
    }
  }
  bool idle() const { return inflight_.empty(); }
  std::size_t reads() const { return arrivals.size() - writes; }

  bool blocked = false;
  std::vector<Request> arrivals;
  std::vector<std::uint64_t> promotions;
  std::size_t writes = 0;

private:
  cycle_t latency_;
  std::deque<std::pair<cycle_t, Request>> inflight_;
};

class Sink : public MemClient
{
public:
  void on_fill(const Request& r, cycle_t now) override { fills.push_back({now, r}); }
  std::vector<std::pair<cycle_t, Request>> fills;
};

inline Request load(std::uint64_t addr, MemClient* who, std::uint64_t ip = 0x400, std::uint64_t token = 0)
{
  Request r;
  r.address = addr;
  r.ip = ip;
  r.type = ReqType::load;
  r.requester = who;
  r.token = token;
  return r;
}

struct ChurnResult {
  std::uint64_t accesses = 0, hits = 0, fills = 0;
};

// Serial replay of a block-letter stimulus on a 4-entry fully associative LRU cache, each access
// (and the prefetch it triggers) completing before the next one starts.
inline ChurnResult run_churn(std::string_view stimulus, bool next_line, unsigned reps = oracle::churn_reps,
                             unsigned first = oracle::churn_first_measured, unsigned last = oracle::churn_last_measured)
{
  CacheConfig cc;
  cc.name = "churn";
  cc.size_bytes = 4 * 64;
  cc.ways = 4;
  cc.latency = 1;
  cc.mshr_entries = 8;
  cc.lookups_per_cycle = 2;
  cc.replacement = ReplacementPolicy::lru;
  Cache cache(cc, 1, 0);
  FakeMemory mem(3);
  Sink sink;
  NextLinePrefetcher nl(Origin::l1pf);
  cache.set_lower(&mem);
  if (next_line)
    cache.set_prefetcher(&nl);

  ChurnResult out;
  cycle_t now = 0;
  for (unsigned rep = 0; rep < reps; ++rep) {
    const bool measured = rep >= first && rep <= last;
    for (char ch : stimulus) {
      const auto hits0 = cache.stats().demand_hits, fills0 = cache.stats().fills;
      const auto before = sink.fills.size();
      cache.add_request(load(static_cast<std::uint64_t>(ch - 'A') * 64, &sink), now);
      while (sink.fills.size() == before || !cache.idle() || !mem.idle()) {
        cache.operate(now);
        mem.tick(now);
        ++now;
      }
      if (measured) {
        ++out.accesses;
        out.hits += cache.stats().demand_hits - hits0;
        out.fills += cache.stats().fills - fills0;
      }
    }
  }
  return out;
}

struct Hammer {
  DramStats stats;
  std::vector<DramCommand> log;
  cycle_t cycles;
  DramCycles timing;
  DramGeometry geom;
};

// Serial reads alternating over `rows` of one bank (moving to the next of `banks` after each round),
// straight into a controller with command logging on.
inline Hammer hammer(MitigationKind kind, int n, std::vector<std::uint32_t> rows, std::uint32_t banks = 1)
{
  auto cfg = make_preset("paper-1core");
  apply_mitigation(cfg, kind);
  DramController d(cfg.dram, cfg.mapping, cfg.mitigation);
  d.enable_log(true);
  harness::Sink sink;
  cycle_t now = 0;
  for (int i = 0; i < n; ++i) {
    DramCoord c;
    c.row = rows[static_cast<std::size_t>(i) % rows.size()];
    c.bank = static_cast<std::uint32_t>(i / static_cast<int>(rows.size())) % banks;
    auto r = harness::load(compose(cfg.mapping, c), &sink, 0x400, static_cast<std::uint64_t>(i));
    while (!d.add_request(r, now))
      d.tick(now++);
    const auto before = sink.fills.size();
    while (sink.fills.size() == before)
      d.tick(now++);
  }
  d.finish();
  return {d.stats(), d.log(), now, d.timing(), cfg.dram.geometry};
}
} // namespace harness

#endif
