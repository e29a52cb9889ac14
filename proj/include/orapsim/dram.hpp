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

#ifndef ORAPSIM_DRAM_HPP
#define ORAPSIM_DRAM_HPP

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "orapsim/addrmap.hpp"
#include "orapsim/command.hpp"
#include "orapsim/config.hpp"
#include "orapsim/mitigation.hpp"
#include "orapsim/request.hpp"

namespace orapsim
{
// All timings in controller clock cycles.
struct DramCycles {
  cycle_t cl, rcd, rp, ras, rc, wr, rtp, rfc, refi, burst, rfm, prac;
};

DramCycles dram_cycles(const DramConfig& d, const MitigationConfig& m);

struct OriginDramStats {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t row_hits = 0;   // served without an ACT of their own
  std::uint64_t row_misses = 0;
};

struct DramStats {
  std::uint64_t act = 0, pre = 0, rd = 0, wr = 0, ref = 0, rfm = 0, prac_mitigations = 0;
  std::uint64_t rowbuffer_hits = 0, rowbuffer_misses = 0;
  std::uint64_t reads_accepted = 0, reads_returned = 0, reads_forwarded = 0, writes_accepted = 0;
  std::uint64_t promotions = 0;
  std::uint64_t timeout_closes = 0, conflict_closes = 0;
  std::array<OriginDramStats, ORIGIN_COUNT> by_origin{};
  double command_energy_pj = 0;
  double standby_energy_pj = 0;
  double refresh_energy_pj = 0; // idle baseline, not dynamic
  cycle_t bus_busy_cycles = 0;
  cycle_t cycles = 0;
  std::vector<std::uint64_t> bank_acts; // flat bank id across channels
  std::vector<std::uint64_t> bank_rfms;

  double dynamic_energy_pj() const { return command_energy_pj + standby_energy_pj; }
};

class DramController : public MemPort
{
public:
  DramController(const DramConfig& dram, const MappingDescriptor& mapping, const MitigationConfig& mit);

  // Reads are answered through the request's requester; writes need no answer.
  bool add_request(const Request& r, cycle_t core_now) override;
  void promote(std::uint64_t address) override;

  // Advance one controller cycle. `core_now` stamps responses.
  void tick(cycle_t core_now);
  // Charge standby energy for rows still open.
  void finish();

  bool idle() const;
  std::size_t pending_reads() const;
  const DramStats& stats() const { return stats_; }
  const DramCycles& timing() const { return t_; }
  const MappingDescriptor& mapping() const { return map_; }

  void enable_log(bool on) { logging_ = on; }
  const std::vector<DramCommand>& log() const { return log_; }

  // Row-policy timeout currently learned by a bank (flat id within its channel).
  std::uint32_t row_timeout(std::uint32_t channel, std::uint32_t bank) const;
  const RfmTracker* rfm(std::uint32_t channel) const;
  const PracTracker* prac(std::uint32_t channel) const;

private:
  struct Pending {
    Request req;
    DramCoord coord;
    std::uint32_t bank = 0; // within the channel
    bool is_write = false;
    bool promoted = false;
    bool caused_act = false;
    std::uint64_t seq = 0;
  };

  struct Bank {
    bool open = false;
    std::uint32_t row = 0;
    cycle_t open_since = 0;
    cycle_t next_act = 0;
    cycle_t next_rdwr = 0;
    cycle_t next_pre = 0;
    cycle_t last_access = 0;
    std::uint32_t timeout = 0;
    std::optional<std::uint32_t> last_closed_row;
    bool last_close_by_timeout = false;
    std::uint32_t hits_while_conflict = 0;
  };

  struct Channel {
    std::vector<Bank> banks;
    std::vector<Pending> reads;
    std::vector<Pending> writes;
    std::vector<cycle_t> next_ref;
    std::vector<bool> ref_pending;
    std::vector<std::uint32_t> ref_row;
    std::vector<cycle_t> rank_busy_until;
    cycle_t bus_free = 0;
    bool draining = false;
    std::optional<RfmTracker> rfm;
    std::optional<PracTracker> prac;
  };

  struct Return {
    cycle_t when;
    Request req;
  };

  void tick_channel(std::uint32_t ch, cycle_t core_now);
  bool try_refresh(std::uint32_t ch);
  bool try_mitigation(std::uint32_t ch);
  bool try_requests(std::uint32_t ch);
  bool try_row_policy(std::uint32_t ch);

  void issue(std::uint32_t ch, CommandKind kind, std::uint32_t bank, std::uint32_t row, std::uint32_t column);
  void do_act(std::uint32_t ch, std::uint32_t bank, std::uint32_t row);
  void do_pre(std::uint32_t ch, std::uint32_t bank, bool by_timeout, bool by_conflict);
  void serve(std::uint32_t ch, std::vector<Pending>& q, std::size_t idx);

  bool act_blocked(const Channel& c, std::uint32_t bank) const;
  bool has_row_hit_pending(const Channel& c, std::uint32_t bank, std::uint32_t row) const;
  bool has_conflict_pending(const Channel& c, std::uint32_t bank, std::uint32_t row) const;
  std::uint32_t rank_of(std::uint32_t bank) const { return bank / banks_per_rank_; }
  DramCommand make_cmd(std::uint32_t ch, CommandKind kind, std::uint32_t bank, std::uint32_t row, std::uint32_t column) const;

  DramConfig cfg_;
  MappingDescriptor map_;
  MitigationConfig mit_;
  DramCycles t_;
  std::uint32_t banks_per_rank_;
  std::uint32_t banks_per_channel_;
  std::uint32_t rows_per_ref_;
  double standby_pj_per_cycle_;

  std::vector<Channel> channels_;
  std::deque<Return> returns_;
  cycle_t now_ = 0;
  std::uint64_t seq_ = 0;
  bool issued_ = false;
  DramStats stats_;
  bool logging_ = false;
  std::vector<DramCommand> log_;
};

struct TimingViolation {
  std::size_t index;
  std::string what;
};

/// Replays a command log and reports every nRCD/nRP/nRAS/nRC/nWR/nRTP violation, plus data-bus
/// overlaps and commands to a bank in an illegal state.
std::vector<TimingViolation> audit_timing(const std::vector<DramCommand>& log, const DramCycles& t, const DramGeometry& g);
} // namespace orapsim

#endif
