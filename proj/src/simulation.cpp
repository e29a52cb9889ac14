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

#include "orapsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <stdexcept>

namespace orapsim
{
// Core talking straight to DRAM: stores become writes, loads are answered by the controller.
class System::DirectPort : public MemPort
{
public:
  explicit DirectPort(DramController& d) : dram_(d) {}
  bool add_request(const Request& r, cycle_t now) override
  {
    if (r.type != ReqType::rfo)
      return dram_.add_request(r, now);
    Request w = r;
    w.type = ReqType::writeback;
    w.requester = nullptr;
    return dram_.add_request(w, now);
  }
  void promote(std::uint64_t address) override { dram_.promote(address); }

private:
  DramController& dram_;
};

System::System(const SimConfig& cfg, std::vector<std::vector<TraceRecord>> traces, const RunOptions& opt)
    : cfg_(cfg), opt_(opt), traces_(std::move(traces))
{
  cfg_.validate();
  const auto cores = cfg_.core_count;
  if (traces_.empty())
    throw std::invalid_argument("no trace given");
  if (traces_.size() == 1 && cores > 1)
    traces_.resize(cores, traces_.front());
  if (traces_.size() != cores)
    throw std::invalid_argument(fmt::format("{} traces for {} cores", traces_.size(), cores));

  const auto slice = cfg_.mapping.physical_size() / cores;
  for (std::uint32_t c = 0; c < cores; ++c)
    for (const auto& r : traces_[c])
      if (r.address >= slice)
        throw std::out_of_range(fmt::format("core {} trace address {:#x} outside its {} byte physical slice", c, r.address, slice));

  if (opt_.audit_timing)
    opt_.log_commands = true;
  dram_ = std::make_unique<DramController>(cfg_.dram, cfg_.mapping, cfg_.mitigation);
  dram_->enable_log(opt_.log_commands);

  const auto n_levels = cfg_.cache_levels.size();
  levels_.resize(n_levels);
  pf_origin_.assign(n_levels, Origin::demand);
  for (std::size_t l = 0; l < n_levels; ++l) {
    const auto& lc = cfg_.cache_levels[l];
    const bool orap = lc.prefetcher == PrefetcherKind::orap || lc.prefetcher == PrefetcherKind::orap_hsd;
    const std::uint32_t reserve = orap ? cfg_.orap.mshr_demand_reserve : 0;
    const std::uint32_t instances = lc.shared ? 1 : cores;
    for (std::uint32_t i = 0; i < instances; ++i)
      levels_[l].push_back(std::make_unique<Cache>(lc, cores, reserve));

    const Origin origin = l == 0 ? Origin::l1pf : Origin::l2pf;
    for (auto& inst : levels_[l]) {
      std::unique_ptr<CachePrefetcher> pf;
      switch (lc.prefetcher) {
      case PrefetcherKind::none:
        break;
      case PrefetcherKind::next_line:
        pf = std::make_unique<NextLinePrefetcher>(origin);
        pf_origin_[l] = origin;
        break;
      case PrefetcherKind::stride:
        pf = std::make_unique<StridePrefetcher>(origin);
        pf_origin_[l] = origin;
        break;
      case PrefetcherKind::orap:
      case PrefetcherKind::orap_hsd: {
        auto o = std::make_unique<OrapLlc>(cfg_.orap, cfg_.hsd, lc.prefetcher == PrefetcherKind::orap_hsd, cfg_.mapping, cores, cfg_.rng_seed);
        orap_ = o.get();
        pf = std::move(o);
        pf_origin_[l] = Origin::nc;
        break;
      }
      }
      if (pf) {
        inst->set_prefetcher(pf.get());
        prefetchers_.push_back(std::move(pf));
      }
    }
  }

  for (std::size_t l = 0; l < n_levels; ++l)
    for (std::uint32_t c = 0; c < levels_[l].size(); ++c) {
      MemPort* lower = dram_.get();
      if (l + 1 < n_levels)
        lower = cache(l + 1, c);
      levels_[l][c]->set_lower(lower);
    }

  if (n_levels == 0)
    direct_ = std::make_unique<DirectPort>(*dram_);
  for (std::uint32_t c = 0; c < cores; ++c) {
    cores_.push_back(std::make_unique<Core>(c, cfg_.core, traces_[c], std::uint64_t{c} * slice));
    cores_.back()->set_port(n_levels ? static_cast<MemPort*>(cache(0, c)) : direct_.get());
  }
}

System::~System() = default;

Cache* System::cache(std::size_t level, std::uint32_t cpu)
{
  if (level >= levels_.size())
    return nullptr;
  auto& insts = levels_[level];
  return insts.size() == 1 ? insts.front().get() : insts.at(cpu).get();
}

SimReport System::run()
{
  if (ran_)
    throw std::logic_error("a System runs once");
  ran_ = true;

  std::uint64_t records = 0;
  for (const auto& t : traces_)
    records += t.size();
  const cycle_t limit = opt_.max_cycles ? opt_.max_cycles : 10'000'000 + 5'000 * records;

  // the controller clock is derived from the core clock with an integer credit counter
  const auto core_khz = static_cast<std::uint64_t>(std::llround(cfg_.core.frequency_mhz * 1000));
  const auto dram_khz = static_cast<std::uint64_t>(std::llround(cfg_.dram.clock_mhz() * 1000));
  std::uint64_t credit = 0;

  auto finished = [&] {
    for (const auto& c : cores_)
      if (!c->done())
        return false;
    for (const auto& lv : levels_)
      for (const auto& c : lv)
        if (!c->idle())
          return false;
    if (orap_ && orap_->blp().occupancy())
      return false;
    return dram_->idle();
  };

  cycle_t now = 0;
  for (;; ++now) {
    if (now > limit)
      throw std::runtime_error(fmt::format("simulation exceeded {} cycles without draining", limit));
    for (auto& c : cores_)
      c->operate(now);
    for (auto& lv : levels_)
      for (auto& c : lv)
        c->operate(now);
    credit += dram_khz;
    while (credit >= core_khz) {
      dram_->tick(now);
      credit -= core_khz;
    }
    if (finished())
      break;
  }
  // cores may have finished before the write-backs drained
  for (auto& c : cores_)
    c->operate(now);
  dram_->finish();
  cycle_t cycles = 0;
  for (const auto& c : cores_)
    cycles = std::max(cycles, c->finish_cycle());
  return build_report(cycles);
}

SimReport System::build_report(cycle_t cycles)
{
  SimReport r;
  r.config_name = cfg_.name;
  r.cores = cfg_.core_count;
  r.mitigation = std::string(to_string(cfg_.mitigation.kind));
  for (const auto& c : cores_)
    r.retired_instructions += c->retired_instructions();
  r.cycles = cycles;

  const auto& d = dram_->stats();
  r.dram_cycles = d.cycles;
  r.act_count = d.act;
  r.pre_count = d.pre;
  r.rd_count = d.rd;
  r.wr_count = d.wr;
  r.ref_count = d.ref;
  r.rfm_count = d.rfm;
  r.prac_mitigations = d.prac_mitigations;
  r.rowbuffer_hits = d.rowbuffer_hits;
  r.rowbuffer_misses = d.rowbuffer_misses;
  r.bus_busy_cycles = d.bus_busy_cycles;
  r.command_energy_pj = d.command_energy_pj;
  r.standby_energy_pj = d.standby_energy_pj;
  r.dynamic_energy_pj = d.dynamic_energy_pj();
  for (std::size_t o = 0; o < ORIGIN_COUNT; ++o) {
    r.engines[o].dram_reads = d.by_origin[o].reads;
    r.engines[o].dram_row_hits = d.by_origin[o].row_hits;
  }

  for (std::size_t l = 0; l < levels_.size(); ++l) {
    LevelReport lr;
    lr.name = cfg_.cache_levels[l].name;
    for (const auto& c : levels_[l]) {
      const auto& s = c->stats();
      lr.demand_accesses += s.demand_accesses;
      lr.demand_hits += s.demand_hits;
      lr.demand_misses += s.demand_misses;
      lr.mshr_merges += s.mshr_merges;
      lr.fills += s.fills;
      lr.writebacks += s.writebacks_out;
      lr.promotions += s.promotions;

      std::vector<Origin> owned;
      if (pf_origin_[l] == Origin::nc)
        owned = {Origin::nc, Origin::hsd};
      else if (pf_origin_[l] != Origin::demand)
        owned = {pf_origin_[l]};
      for (auto o : owned) {
        const auto i = static_cast<std::size_t>(o);
        auto& e = r.engines[i];
        e.requested += s.pf_requested[i];
        e.issued += s.pf_issued[i];
        e.useful += s.pf_useful[i];
        e.dropped += s.pf_dropped[i] + s.pf_no_mshr[i];
        e.useless += s.pf_useless[i];
      }
      for (std::size_t o = 0; o < ORIGIN_COUNT; ++o)
        if (s.pf_issued[o] != s.pf_fills[o])
          r.audit_failures.push_back(fmt::format("{}: {} prefetches issued but {} filled", lr.name, s.pf_issued[o], s.pf_fills[o]));
      if (l + 1 == levels_.size()) {
        r.latency_sum += s.latency_sum;
        r.latency_count += s.latency_count;
        if (r.latency_histogram.size() < s.latency_hist.size())
          r.latency_histogram.resize(s.latency_hist.size(), 0);
        for (std::size_t b = 0; b < s.latency_hist.size(); ++b)
          r.latency_histogram[b] += s.latency_hist[b];
      }
    }
    r.levels.push_back(std::move(lr));
  }
  if (levels_.empty()) {
    for (const auto& c : cores_) {
      r.latency_sum += c->stats().load_latency_sum;
      r.latency_count += c->stats().loads_completed;
    }
  }

  for (const auto& c : cores_)
    if (c->stats().loads_issued != c->stats().loads_completed)
      r.audit_failures.push_back(fmt::format("core {}: {} loads issued, {} completed", c->cpu(), c->stats().loads_issued, c->stats().loads_completed));
  if (d.reads_accepted != d.reads_returned)
    r.audit_failures.push_back(fmt::format("dram: {} reads accepted, {} returned", d.reads_accepted, d.reads_returned));
  if (orap_) {
    const auto& b = orap_->blp().stats();
    if (b.inserted != b.completed + b.dropped || orap_->blp().occupancy() != 0)
      r.audit_failures.push_back(fmt::format("bank-leveling buffer: {} inserted, {} completed, {} dropped", b.inserted, b.completed, b.dropped));
    if (b.accounting_errors)
      r.audit_failures.push_back(fmt::format("bank-leveling buffer: {} accounting errors", b.accounting_errors));
  }
  if (opt_.audit_timing)
    r.timing_violations = audit_timing(dram_->log(), dram_->timing(), cfg_.dram.geometry).size();
  return r;
}

SimReport simulate(const SimConfig& cfg, const std::vector<TraceRecord>& trace, const RunOptions& opt)
{
  System sys(cfg, {trace}, opt);
  return sys.run();
}

void configure_prefetcher(SimConfig& cfg, std::string_view choice)
{
  for (auto& l : cfg.cache_levels)
    l.prefetcher = PrefetcherKind::none;
  const auto kind = parse_prefetcher(choice);
  if (kind == PrefetcherKind::none)
    return;
  if (cfg.cache_levels.empty())
    throw ConfigError("prefetcher choice needs a cache hierarchy");
  if (kind == PrefetcherKind::orap || kind == PrefetcherKind::orap_hsd)
    cfg.cache_levels.back().prefetcher = kind;
  else
    cfg.cache_levels.front().prefetcher = kind;
}

std::vector<SweepCell> sweep(const SimConfig& base, const std::vector<TraceRecord>& trace, const RunOptions& opt)
{
  std::vector<SweepCell> cells;
  for (std::string_view pf : {"none", "next-line", "orap", "orap+hsd"})
    for (auto mit : {MitigationKind::none, MitigationKind::rfm, MitigationKind::prac}) {
      SimConfig cfg = base;
      configure_prefetcher(cfg, pf);
      apply_mitigation(cfg, mit);
      cells.push_back({std::string(pf), std::string(to_string(mit)), simulate(cfg, trace, opt)});
    }
  return cells;
}

std::string sweep_csv(const std::vector<SweepCell>& cells)
{
  std::string s = "prefetcher," + csv_header() + "\n";
  for (const auto& c : cells)
    s += c.prefetcher + "," + csv_row(c.report, c.prefetcher + "/" + c.mitigation) + "\n";
  return s;
}
} // namespace orapsim
