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

#include "orapsim/dram.hpp"

#include <algorithm>
#include <fmt/core.h>
#include <map>
#include <tuple>

namespace orapsim
{
DramCycles dram_cycles(const DramConfig& d, const MitigationConfig& m)
{
  const double mhz = d.clock_mhz();
  const auto& t = d.timings_ns;
  DramCycles c{};
  c.cl = ns_to_cycles(t.nCL, mhz);
  c.rcd = ns_to_cycles(t.nRCD, mhz);
  c.rp = ns_to_cycles(t.nRP, mhz);
  c.ras = ns_to_cycles(t.nRAS, mhz);
  c.rc = ns_to_cycles(t.nRC, mhz);
  c.wr = ns_to_cycles(t.nWR, mhz);
  c.rtp = ns_to_cycles(t.nRTP, mhz);
  c.rfc = ns_to_cycles(t.nRFC, mhz);
  c.refi = ns_to_cycles(d.refresh_period_ms * 1e6 / d.refresh_commands, mhz);
  c.burst = d.burst_length / 2;
  c.rfm = ns_to_cycles(m.rfm_service_time_ns, mhz);
  c.prac = ns_to_cycles(m.prac_recovery_time_ns, mhz);
  return c;
}

DramController::DramController(const DramConfig& dram, const MappingDescriptor& mapping, const MitigationConfig& mit)
    : cfg_(dram), map_(mapping), mit_(mit), t_(dram_cycles(dram, mit))
{
  const auto& g = cfg_.geometry;
  banks_per_rank_ = g.banks_per_rank();
  banks_per_channel_ = banks_per_rank_ * g.ranks;
  rows_per_ref_ = g.rows / cfg_.refresh_commands;
  standby_pj_per_cycle_ = cfg_.energy.active_standby_mw * 1000.0 / cfg_.clock_mhz();

  channels_.resize(g.channels);
  for (auto& c : channels_) {
    c.banks.resize(banks_per_channel_);
    for (auto& b : c.banks)
      b.timeout = cfg_.row_policy.initial_timeout;
    c.next_ref.resize(g.ranks);
    for (std::uint32_t r = 0; r < g.ranks; ++r)
      c.next_ref[r] = t_.refi + r * t_.refi / g.ranks;
    c.ref_pending.assign(g.ranks, false);
    c.ref_row.assign(g.ranks, 0);
    c.rank_busy_until.assign(g.ranks, 0);
    if (mit_.kind == MitigationKind::rfm)
      c.rfm.emplace(banks_per_channel_, mit_.rfm_threshold);
    if (mit_.kind == MitigationKind::prac)
      c.prac.emplace(banks_per_channel_, mit_.prac_threshold);
  }
  stats_.bank_acts.assign(std::size_t{banks_per_channel_} * g.channels, 0);
  stats_.bank_rfms.assign(std::size_t{banks_per_channel_} * g.channels, 0);
}

bool DramController::add_request(const Request& r, cycle_t)
{
  Pending p;
  p.req = r;
  p.coord = decompose(map_, r.address);
  p.bank = (p.coord.rank * cfg_.geometry.bankgroups + p.coord.bankgroup) * cfg_.geometry.banks + p.coord.bank;
  p.is_write = r.type == ReqType::writeback;
  p.seq = seq_++;
  auto& c = channels_[p.coord.channel];

  if (p.is_write) {
    auto same = [&](const Pending& w) { return w.req.address == r.address; };
    if (std::any_of(c.writes.begin(), c.writes.end(), same)) {
      ++stats_.writes_accepted;
      return true;
    }
    if (c.writes.size() >= cfg_.write_queue_size)
      return false;
    c.writes.push_back(p);
    ++stats_.writes_accepted;
    return true;
  }

  if (c.reads.size() >= cfg_.read_queue_size)
    return false;
  ++stats_.reads_accepted;
  if (std::any_of(c.writes.begin(), c.writes.end(), [&](const Pending& w) { return w.req.address == r.address; })) {
    ++stats_.reads_forwarded;
    Return ret{now_ + 1, r};
    auto pos = std::upper_bound(returns_.begin(), returns_.end(), ret.when, [](cycle_t w, const Return& x) { return w < x.when; });
    returns_.insert(pos, ret);
    return true;
  }
  c.reads.push_back(p);
  return true;
}

void DramController::promote(std::uint64_t address)
{
  for (auto& c : channels_)
    for (auto& p : c.reads)
      if (p.req.address == address && !p.promoted) {
        p.promoted = true;
        ++stats_.promotions;
      }
}

bool DramController::idle() const
{
  if (!returns_.empty())
    return false;
  return std::all_of(channels_.begin(), channels_.end(), [](const Channel& c) { return c.reads.empty() && c.writes.empty(); });
}

std::size_t DramController::pending_reads() const
{
  std::size_t n = returns_.size();
  for (const auto& c : channels_)
    n += c.reads.size();
  return n;
}

std::uint32_t DramController::row_timeout(std::uint32_t channel, std::uint32_t bank) const { return channels_.at(channel).banks.at(bank).timeout; }
const RfmTracker* DramController::rfm(std::uint32_t ch) const { return channels_.at(ch).rfm ? &*channels_.at(ch).rfm : nullptr; }
const PracTracker* DramController::prac(std::uint32_t ch) const { return channels_.at(ch).prac ? &*channels_.at(ch).prac : nullptr; }

void DramController::tick(cycle_t core_now)
{
  while (!returns_.empty() && returns_.front().when <= now_) {
    auto r = returns_.front().req;
    returns_.pop_front();
    ++stats_.reads_returned;
    if (r.requester)
      r.requester->on_fill(r, core_now);
  }
  for (std::uint32_t ch = 0; ch < channels_.size(); ++ch)
    tick_channel(ch, core_now);
  ++now_;
  stats_.cycles = now_;
}

void DramController::finish()
{
  for (auto& c : channels_)
    for (auto& b : c.banks)
      if (b.open) {
        stats_.standby_energy_pj += static_cast<double>(now_ - b.open_since) * standby_pj_per_cycle_;
        b.open_since = now_;
      }
}

void DramController::tick_channel(std::uint32_t ch, cycle_t)
{
  auto& c = channels_[ch];
  if (!c.draining && c.writes.size() >= cfg_.write_high_watermark)
    c.draining = true;
  if (c.draining && c.writes.size() <= cfg_.write_low_watermark)
    c.draining = false;
  for (std::size_t r = 0; r < c.next_ref.size(); ++r)
    if (now_ >= c.next_ref[r])
      c.ref_pending[r] = true;

  if (try_refresh(ch) || try_mitigation(ch) || try_requests(ch))
    return;
  try_row_policy(ch);
}

DramCommand DramController::make_cmd(std::uint32_t ch, CommandKind kind, std::uint32_t bank, std::uint32_t row, std::uint32_t column) const
{
  DramCommand cmd;
  cmd.cycle = now_;
  cmd.kind = kind;
  cmd.channel = ch;
  cmd.rank = bank / banks_per_rank_;
  cmd.bankgroup = (bank % banks_per_rank_) / cfg_.geometry.banks;
  cmd.bank = bank % cfg_.geometry.banks;
  cmd.row = row;
  cmd.column = column;
  return cmd;
}

void DramController::issue(std::uint32_t ch, CommandKind kind, std::uint32_t bank, std::uint32_t row, std::uint32_t column)
{
  if (logging_)
    log_.push_back(make_cmd(ch, kind, bank, row, column));
}

bool DramController::act_blocked(const Channel& c, std::uint32_t bank) const
{
  const auto r = rank_of(bank);
  if (c.ref_pending[r] || c.rank_busy_until[r] > now_)
    return true;
  if (c.rfm && c.rfm->due(bank))
    return true;
  if (c.prac && c.prac->alert(bank))
    return true;
  return false;
}

bool DramController::try_refresh(std::uint32_t ch)
{
  auto& c = channels_[ch];
  for (std::uint32_t r = 0; r < c.ref_pending.size(); ++r) {
    if (!c.ref_pending[r])
      continue;
    const std::uint32_t first = r * banks_per_rank_;
    bool all_closed = true;
    for (std::uint32_t b = first; b < first + banks_per_rank_; ++b) {
      auto& bk = c.banks[b];
      if (!bk.open)
        continue;
      all_closed = false;
      if (now_ >= bk.next_pre) {
        do_pre(ch, b, false, false);
        return true;
      }
    }
    if (!all_closed)
      continue;
    bool ready = true;
    for (std::uint32_t b = first; b < first + banks_per_rank_; ++b)
      ready = ready && now_ >= c.banks[b].next_act;
    if (!ready)
      continue;

    issue(ch, CommandKind::REF, first, c.ref_row[r], 0);
    for (std::uint32_t b = first; b < first + banks_per_rank_; ++b) {
      c.banks[b].next_act = now_ + t_.rfc;
      if (c.prac)
        c.prac->on_refresh(b, c.ref_row[r], rows_per_ref_);
    }
    c.ref_row[r] = (c.ref_row[r] + rows_per_ref_) % cfg_.geometry.rows;
    c.rank_busy_until[r] = now_ + t_.rfc;
    c.ref_pending[r] = false;
    c.next_ref[r] += t_.refi;
    ++stats_.ref;
    stats_.refresh_energy_pj += cfg_.energy.ref_pj;
    return true;
  }
  return false;
}

bool DramController::try_mitigation(std::uint32_t ch)
{
  auto& c = channels_[ch];
  if (!c.rfm && !c.prac)
    return false;
  for (std::uint32_t b = 0; b < c.banks.size(); ++b) {
    auto& bk = c.banks[b];
    if (bk.open || now_ < bk.next_act || c.rank_busy_until[rank_of(b)] > now_)
      continue;
    if (c.rfm && c.rfm->due(b)) {
      issue(ch, CommandKind::RFM, b, 0, 0);
      c.rfm->on_rfm(b);
      bk.next_act = now_ + t_.rfm;
      ++stats_.rfm;
      ++stats_.bank_rfms[std::size_t{ch} * banks_per_channel_ + b];
      stats_.command_energy_pj += cfg_.energy.rfm_pj;
      return true;
    }
    if (c.prac && c.prac->alert(b)) {
      auto row = c.prac->on_mitigate(b);
      issue(ch, CommandKind::PRAC_MITIGATE, b, row, 0);
      bk.next_act = now_ + t_.prac;
      ++stats_.prac_mitigations;
      stats_.command_energy_pj += cfg_.energy.rfm_pj;
      return true;
    }
  }
  return false;
}

bool DramController::has_row_hit_pending(const Channel& c, std::uint32_t bank, std::uint32_t row) const
{
  auto hit = [&](const Pending& p) { return p.bank == bank && p.coord.row == row; };
  if (std::any_of(c.reads.begin(), c.reads.end(), hit))
    return true;
  if (c.draining || c.reads.empty())
    return std::any_of(c.writes.begin(), c.writes.end(), hit);
  return false;
}

bool DramController::has_conflict_pending(const Channel& c, std::uint32_t bank, std::uint32_t row) const
{
  auto conflict = [&](const Pending& p) { return p.bank == bank && p.coord.row != row; };
  return std::any_of(c.reads.begin(), c.reads.end(), conflict) || std::any_of(c.writes.begin(), c.writes.end(), conflict);
}

bool DramController::try_requests(std::uint32_t ch)
{
  auto& c = channels_[ch];
  if (c.reads.empty() && c.writes.empty())
    return false;

  const bool writes_eligible = c.draining || c.reads.empty();
  // banks whose open row still has work queued
  std::vector<std::uint8_t> hit_pending(c.banks.size(), 0);
  auto mark = [&](const std::vector<Pending>& q) {
    for (const auto& p : q) {
      const auto& bk = c.banks[p.bank];
      if (bk.open && bk.row == p.coord.row)
        hit_pending[p.bank] = 1;
    }
  };
  mark(c.reads);
  if (writes_eligible)
    mark(c.writes);

  struct Choice {
    bool found = false;
    std::tuple<int, int, std::uint64_t> key;
    bool write = false;
    std::size_t idx = 0;
    CommandKind cmd = CommandKind::ACT;
  } best;

  auto consider = [&](std::vector<Pending>& q, bool write) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto& p = q[i];
      const auto& bk = c.banks[p.bank];
      CommandKind cmd;
      bool legal;
      bool hit = false;
      if (bk.open && bk.row == p.coord.row) {
        cmd = write ? CommandKind::WR : CommandKind::RD;
        legal = now_ >= bk.next_rdwr && c.bus_free <= now_ + t_.cl;
        hit = true;
      } else if (bk.open) {
        cmd = CommandKind::PRE;
        legal = now_ >= bk.next_pre && (!hit_pending[p.bank] || bk.hits_while_conflict >= cfg_.prefetch_batch_quota);
      } else {
        cmd = CommandKind::ACT;
        legal = now_ >= bk.next_act && !act_blocked(c, p.bank);
      }
      if (!legal)
        continue;
      int cls;
      if (write)
        cls = c.draining ? 0 : 2;
      else
        cls = (p.promoted || p.req.promoted || !is_prefetch(p.req.origin)) ? 1 : 3;
      std::tuple<int, int, std::uint64_t> key{cls, hit ? 0 : 1, p.seq};
      if (!best.found || key < best.key)
        best = {true, key, write, i, cmd};
    }
  };
  consider(c.reads, false);
  if (writes_eligible)
    consider(c.writes, true);
  if (!best.found)
    return false;

  auto& q = best.write ? c.writes : c.reads;
  auto& p = q[best.idx];
  switch (best.cmd) {
  case CommandKind::ACT:
    p.caused_act = true;
    do_act(ch, p.bank, p.coord.row);
    break;
  case CommandKind::PRE:
    do_pre(ch, p.bank, false, true);
    break;
  default: {
    auto& bk = c.banks[p.bank];
    if (has_conflict_pending(c, p.bank, bk.row))
      ++bk.hits_while_conflict;
    serve(ch, q, best.idx);
    break;
  }
  }
  return true;
}

bool DramController::try_row_policy(std::uint32_t ch)
{
  auto& c = channels_[ch];
  for (std::uint32_t b = 0; b < c.banks.size(); ++b) {
    auto& bk = c.banks[b];
    if (!bk.open || now_ < bk.next_pre || now_ - bk.last_access < bk.timeout)
      continue;
    if (has_row_hit_pending(c, b, bk.row))
      continue;
    do_pre(ch, b, true, false);
    return true;
  }
  return false;
}

void DramController::do_act(std::uint32_t ch, std::uint32_t bank, std::uint32_t row)
{
  auto& c = channels_[ch];
  auto& bk = c.banks[bank];
  issue(ch, CommandKind::ACT, bank, row, 0);
  if (bk.last_closed_row == row && bk.last_close_by_timeout)
    bk.timeout = std::min(cfg_.row_policy.max_timeout, bk.timeout * 2);
  bk.last_closed_row.reset();
  bk.open = true;
  bk.row = row;
  bk.open_since = now_;
  bk.last_access = now_;
  bk.next_rdwr = now_ + t_.rcd;
  bk.next_pre = now_ + t_.ras;
  bk.next_act = now_ + t_.rc;
  bk.hits_while_conflict = 0;
  if (c.rfm)
    c.rfm->on_act(bank);
  ++stats_.act;
  ++stats_.bank_acts[std::size_t{ch} * banks_per_channel_ + bank];
  stats_.command_energy_pj += cfg_.energy.act_pj;
}

void DramController::do_pre(std::uint32_t ch, std::uint32_t bank, bool by_timeout, bool by_conflict)
{
  auto& c = channels_[ch];
  auto& bk = c.banks[bank];
  issue(ch, CommandKind::PRE, bank, bk.row, 0);
  stats_.standby_energy_pj += static_cast<double>(now_ - bk.open_since) * standby_pj_per_cycle_;
  bk.open = false;
  bk.next_act = std::max(bk.next_act, now_ + t_.rp);
  bk.last_closed_row = bk.row;
  bk.last_close_by_timeout = by_timeout;
  if (by_timeout)
    ++stats_.timeout_closes;
  if (by_conflict) {
    ++stats_.conflict_closes;
    bk.timeout = std::max(cfg_.row_policy.min_timeout, bk.timeout / 2);
  }
  if (c.prac)
    c.prac->on_precharge(bank, bk.row);
  ++stats_.pre;
  stats_.command_energy_pj += cfg_.energy.pre_pj;
}

void DramController::serve(std::uint32_t ch, std::vector<Pending>& q, std::size_t idx)
{
  auto& c = channels_[ch];
  Pending p = q[idx];
  q.erase(q.begin() + static_cast<std::ptrdiff_t>(idx));
  auto& bk = c.banks[p.bank];
  bk.last_access = now_;
  const cycle_t data_end = now_ + t_.cl + t_.burst;
  auto& os = stats_.by_origin[static_cast<std::size_t>(p.req.origin)];
  if (p.is_write) {
    issue(ch, CommandKind::WR, p.bank, p.coord.row, p.coord.column);
    bk.next_pre = std::max(bk.next_pre, data_end + t_.wr);
    ++stats_.wr;
    ++os.writes;
    stats_.command_energy_pj += cfg_.energy.wr_pj;
  } else {
    issue(ch, CommandKind::RD, p.bank, p.coord.row, p.coord.column);
    bk.next_pre = std::max(bk.next_pre, now_ + t_.rtp);
    ++stats_.rd;
    ++os.reads;
    stats_.command_energy_pj += cfg_.energy.rd_pj;
    returns_.push_back({data_end, p.req});
  }
  c.bus_free = data_end;
  stats_.bus_busy_cycles += t_.burst;
  if (p.caused_act) {
    ++stats_.rowbuffer_misses;
    ++os.row_misses;
  } else {
    ++stats_.rowbuffer_hits;
    ++os.row_hits;
  }
}

std::vector<TimingViolation> audit_timing(const std::vector<DramCommand>& log, const DramCycles& t, const DramGeometry& g)
{
  constexpr std::int64_t never = INT64_MIN / 4;
  struct B {
    bool open = false;
    std::uint32_t row = 0;
    std::int64_t act = never, pre = never, rd = never, wr_end = never, blocked = never;
  };
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>, B> banks;
  std::map<std::uint32_t, std::int64_t> bus_free;
  std::vector<TimingViolation> out;

  auto bank = [&](const DramCommand& c) -> B& { return banks[{c.channel, c.rank, c.bankgroup, c.bank}]; };
  auto check = [&](std::size_t i, bool ok, std::string_view name, const DramCommand& c) {
    if (!ok)
      out.push_back({i, fmt::format("{} violated by {}", name, format_command(c))});
  };
  const auto rcd = static_cast<std::int64_t>(t.rcd), rp = static_cast<std::int64_t>(t.rp), ras = static_cast<std::int64_t>(t.ras),
             rc = static_cast<std::int64_t>(t.rc), wr = static_cast<std::int64_t>(t.wr), rtp = static_cast<std::int64_t>(t.rtp),
             cl = static_cast<std::int64_t>(t.cl), burst = static_cast<std::int64_t>(t.burst);

  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& c = log[i];
    const auto now = static_cast<std::int64_t>(c.cycle);
    switch (c.kind) {
    case CommandKind::ACT: {
      auto& b = bank(c);
      check(i, !b.open, "ACT-to-open-bank", c);
      check(i, now >= b.pre + rp, "nRP", c);
      check(i, now >= b.act + rc, "nRC", c);
      check(i, now >= b.blocked, "refresh/mitigation blackout", c);
      b.open = true;
      b.row = c.row;
      b.act = now;
      break;
    }
    case CommandKind::PRE: {
      auto& b = bank(c);
      check(i, b.open, "PRE-to-closed-bank", c);
      check(i, now >= b.act + ras, "nRAS", c);
      check(i, now >= b.rd + rtp, "nRTP", c);
      check(i, now >= b.wr_end + wr, "nWR", c);
      b.open = false;
      b.pre = now;
      break;
    }
    case CommandKind::RD:
    case CommandKind::WR: {
      auto& b = bank(c);
      check(i, b.open && b.row == c.row, "column-command-to-wrong-row", c);
      check(i, now >= b.act + rcd, "nRCD", c);
      auto& bf = bus_free.try_emplace(c.channel, never).first->second;
      check(i, now + cl >= bf, "data-bus-overlap", c);
      bf = now + cl + burst;
      if (c.kind == CommandKind::RD)
        b.rd = now;
      else
        b.wr_end = now + cl + burst;
      break;
    }
    case CommandKind::REF: {
      for (std::uint32_t bg = 0; bg < g.bankgroups; ++bg)
        for (std::uint32_t ba = 0; ba < g.banks; ++ba) {
          auto& b = banks[{c.channel, c.rank, bg, ba}];
          check(i, !b.open, "REF-with-open-bank", c);
          check(i, now >= b.pre + rp, "nRP", c);
          check(i, now >= b.blocked, "refresh/mitigation blackout", c);
          b.blocked = now + static_cast<std::int64_t>(t.rfc);
        }
      break;
    }
    case CommandKind::RFM:
    case CommandKind::PRAC_MITIGATE: {
      auto& b = bank(c);
      check(i, !b.open, "mitigation-with-open-bank", c);
      check(i, now >= b.pre + rp, "nRP", c);
      check(i, now >= b.blocked, "refresh/mitigation blackout", c);
      b.blocked = now + static_cast<std::int64_t>(c.kind == CommandKind::RFM ? t.rfm : t.prac);
      break;
    }
    }
  }
  return out;
}
} // namespace orapsim
