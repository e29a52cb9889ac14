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

#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "harness.hpp"
#include "orapsim/config.hpp"
#include "orapsim/dram.hpp"

using namespace orapsim;
using harness::Sink;

namespace
{
struct Rig {
  explicit Rig(const std::string& preset = "paper-1core") : cfg(make_preset(preset)), dram(cfg.dram, cfg.mapping, cfg.mitigation)
  {
    dram.enable_log(true);
  }

  std::uint64_t at(std::uint32_t row, std::uint32_t column = 0, std::uint32_t bank = 0, std::uint32_t channel = 0)
  {
    DramCoord c;
    c.row = row;
    c.column = column;
    c.bank = bank;
    c.channel = channel;
    return compose(cfg.mapping, c);
  }

  bool read(std::uint64_t addr, Origin o = Origin::demand)
  {
    auto r = harness::load(addr, &sink, 0x400, next_token++);
    r.origin = o;
    if (is_prefetch(o))
      r.type = ReqType::prefetch;
    return dram.add_request(r, now);
  }
  bool write(std::uint64_t addr)
  {
    Request r;
    r.address = addr;
    r.type = ReqType::writeback;
    r.origin = Origin::writeback;
    return dram.add_request(r, now);
  }
  void tick(cycle_t n = 1)
  {
    for (cycle_t i = 0; i < n; ++i)
      dram.tick(now++);
  }
  void drain()
  {
    while (!dram.idle())
      tick();
  }
  std::vector<DramCommand> kind(CommandKind k) const
  {
    std::vector<DramCommand> out;
    for (const auto& c : dram.log())
      if (c.kind == k)
        out.push_back(c);
    return out;
  }

  SimConfig cfg;
  DramController dram;
  Sink sink;
  cycle_t now = 0;
  std::uint64_t next_token = 0;
};
} // namespace

TEST_CASE("timing table in controller cycles")
{
  const auto s = make_preset("paper-1core"), p = make_preset("paper-prac");
  const auto ts = dram_cycles(s.dram, s.mitigation), tp = dram_cycles(p.dram, p.mitigation);
  CHECK(ts.cl == 52);
  CHECK(ts.rcd == 52);
  CHECK(ts.rp == 52);
  CHECK(ts.ras == 104);
  CHECK(ts.rc == 154);
  CHECK(ts.wr == 96);
  CHECK(ts.rtp == 24);
  CHECK(ts.burst == 8);
  CHECK(tp.rp == 116);
  CHECK(tp.ras == 52);
  CHECK(tp.rc == 167);
  CHECK(tp.wr == 32);
  CHECK(tp.rtp == 16);
}

TEST_CASE("isolated read: ACT then RD exactly nRCD later, data after CL + burst")
{
  Rig r;
  REQUIRE(r.read(r.at(100)));
  r.drain();
  const auto acts = r.kind(CommandKind::ACT), rds = r.kind(CommandKind::RD);
  REQUIRE(acts.size() == 1);
  REQUIRE(rds.size() == 1);
  const auto t = r.dram.timing();
  CHECK(rds[0].cycle - acts[0].cycle == t.rcd);
  REQUIRE(r.sink.fills.size() == 1);
  CHECK(r.dram.stats().rowbuffer_misses == 1);
  CHECK(r.dram.stats().reads_returned == 1);
}

TEST_CASE("row hits are served before an older conflicting request")
{
  Rig r;
  REQUIRE(r.read(r.at(100, 0)));
  r.tick(60); // RD issued, row still open
  REQUIRE(r.read(r.at(200, 0)));  // older, conflicts
  REQUIRE(r.read(r.at(100, 10))); // younger, hits the open row
  r.drain();
  const auto& log = r.dram.log();
  std::vector<CommandKind> seq;
  for (const auto& c : log)
    if (c.kind != CommandKind::REF)
      seq.push_back(c.kind);
  REQUIRE(seq.size() >= 5);
  CHECK(seq[0] == CommandKind::ACT);
  CHECK(seq[1] == CommandKind::RD);
  CHECK(seq[2] == CommandKind::RD); // the hit
  CHECK(seq[3] == CommandKind::PRE);
  CHECK(seq[4] == CommandKind::ACT);
  CHECK(r.dram.stats().rowbuffer_hits == 1);
}

TEST_CASE("demand reads outrank prefetch reads")
{
  Rig r;
  REQUIRE(r.read(r.at(10, 0, 1), Origin::nc));
  REQUIRE(r.read(r.at(20, 0, 2), Origin::demand));
  r.drain();
  const auto acts = r.kind(CommandKind::ACT);
  REQUIRE(acts.size() == 2);
  CHECK(acts[0].row == decompose(r.cfg.mapping, r.at(20, 0, 2)).row);
}

TEST_CASE("back-to-back activations of one bank respect nRC")
{
  Rig r;
  for (std::uint32_t i = 0; i < 20; ++i)
    REQUIRE(r.read(r.at(1000 + i)));
  r.drain();
  const auto acts = r.kind(CommandKind::ACT);
  REQUIRE(acts.size() == 20);
  for (std::size_t i = 1; i < acts.size(); ++i)
    CHECK(acts[i].cycle - acts[i - 1].cycle >= r.dram.timing().rc);
  CHECK(audit_timing(r.dram.log(), r.dram.timing(), r.cfg.dram.geometry).empty());
}

TEST_CASE("continuous same-row stream keeps the row open")
{
  Rig r;
  for (std::uint32_t col = 0; col < 64; ++col)
    REQUIRE(r.read(r.at(55, col)));
  r.drain();
  CHECK(r.kind(CommandKind::ACT).size() == 1);
  CHECK(r.kind(CommandKind::PRE).empty());
  CHECK(r.dram.stats().rowbuffer_hits == 63);
}

TEST_CASE("an idle open row closes within the maximum timeout")
{
  Rig r;
  REQUIRE(r.read(r.at(55)));
  r.tick(r.cfg.dram.row_policy.max_timeout + 400);
  CHECK(r.kind(CommandKind::PRE).size() == 1);
  CHECK(r.dram.stats().timeout_closes == 1);
}

TEST_CASE("alternating-row conflicts drive the row timeout down")
{
  Rig r;
  const auto initial = r.dram.row_timeout(0, 0);
  std::uint32_t prev = initial;
  // both rows queued together, so every second request is a genuine conflict
  for (int i = 0; i < 2000; ++i) {
    const auto before = r.sink.fills.size();
    REQUIRE(r.read(r.at(300, static_cast<std::uint32_t>(i % 64))));
    REQUIRE(r.read(r.at(301, static_cast<std::uint32_t>(i % 64))));
    while (r.sink.fills.size() < before + 2)
      r.tick();
    const auto now_timeout = r.dram.row_timeout(0, 0);
    CHECK(now_timeout <= prev);
    prev = now_timeout;
  }
  CHECK(prev < initial);
  CHECK(prev == r.cfg.dram.row_policy.min_timeout);
}

TEST_CASE("reopening a row just closed by timeout lengthens the timeout")
{
  Rig r;
  const auto initial = r.dram.row_timeout(0, 0);
  REQUIRE(r.read(r.at(77)));
  r.tick(initial + 500);
  REQUIRE(r.kind(CommandKind::PRE).size() == 1);
  REQUIRE(r.read(r.at(77, 3)));
  r.drain();
  CHECK(r.dram.row_timeout(0, 0) == 2 * initial);
}

TEST_CASE("writes drain and reads forward from the write queue")
{
  Rig r;
  const auto a = r.at(9, 4, 3);
  REQUIRE(r.write(a));
  REQUIRE(r.read(a));
  r.drain();
  CHECK(r.dram.stats().reads_forwarded == 1);
  CHECK(r.dram.stats().wr == 1);
  CHECK(r.sink.fills.size() == 1);
  CHECK(r.dram.stats().rd == 0);

  Rig w;
  for (std::uint32_t i = 0; i < 60; ++i)
    while (!w.write(w.at(500 + i % 4, i, i % 4)))
      w.tick();
  w.drain();
  CHECK(w.dram.stats().wr == 60);
  CHECK(audit_timing(w.dram.log(), w.dram.timing(), w.cfg.dram.geometry).empty());
}

TEST_CASE("refresh happens every tREFI per rank")
{
  Rig r;
  const auto t = r.dram.timing();
  r.tick(t.refi * 10 + 10);
  const auto refs = r.kind(CommandKind::REF);
  CHECK(refs.size() == 10 * r.cfg.dram.geometry.channels);
  CHECK(r.dram.stats().dynamic_energy_pj() == 0.0);
}

TEST_CASE("command energy is linear in command counts")
{
  Rig r;
  std::mt19937_64 rng{5};
  for (int i = 0; i < 3000; ++i) {
    if (!r.read(r.at(static_cast<std::uint32_t>(rng() % 2000), static_cast<std::uint32_t>(rng() % 64), static_cast<std::uint32_t>(rng() % 4),
                     static_cast<std::uint32_t>(rng() % 2))))
      r.tick(50);
    if (i % 7 == 0)
      r.write(r.at(static_cast<std::uint32_t>(rng() % 2000), 1, 1, 1));
    r.tick(3);
  }
  r.drain();
  r.dram.finish();
  const auto& s = r.dram.stats();
  const auto& e = r.cfg.dram.energy;
  const double expect = static_cast<double>(s.act) * e.act_pj + static_cast<double>(s.pre) * e.pre_pj + static_cast<double>(s.rd) * e.rd_pj +
                        static_cast<double>(s.wr) * e.wr_pj;
  CHECK(s.command_energy_pj == Catch::Approx(expect).epsilon(1e-9));
  CHECK(s.standby_energy_pj > 0);
  CHECK(audit_timing(r.dram.log(), r.dram.timing(), r.cfg.dram.geometry).empty());
  CHECK(s.reads_returned == s.reads_accepted);
}

TEST_CASE("PRAC timings cost more energy on a conflict-heavy stream")
{
  double energy[2];
  int i = 0;
  for (const auto* preset : {"paper-1core", "paper-prac"}) {
    auto cfg = make_preset(preset);
    cfg.mitigation.kind = MitigationKind::none; // same command stream, only timings and energy differ
    DramController d(cfg.dram, cfg.mapping, cfg.mitigation);
    Sink sink;
    cycle_t now = 0;
    for (int k = 0; k < 2000; ++k) {
      DramCoord c;
      c.row = static_cast<std::uint32_t>(k % 2 ? 10 : 11);
      auto rq = harness::load(compose(cfg.mapping, c), &sink, 0x400, static_cast<std::uint64_t>(k));
      REQUIRE(d.add_request(rq, now));
      const auto before = sink.fills.size();
      while (sink.fills.size() == before)
        d.tick(now++);
    }
    d.finish();
    energy[i++] = d.stats().dynamic_energy_pj();
  }
  CHECK(energy[1] > energy[0]);
}

TEST_CASE("timing auditor catches violations")
{
  const auto cfg = make_preset("paper-1core");
  const auto t = dram_cycles(cfg.dram, cfg.mitigation);
  const auto& g = cfg.dram.geometry;
  std::vector<DramCommand> log{{0, CommandKind::ACT, 0, 0, 0, 0, 5, 0}, {t.rcd - 1, CommandKind::RD, 0, 0, 0, 0, 5, 0}};
  CHECK_FALSE(audit_timing(log, t, g).empty());
  log = {{0, CommandKind::ACT, 0, 0, 0, 0, 5, 0}, {t.rcd, CommandKind::RD, 0, 0, 0, 0, 5, 0}, {t.ras - 1, CommandKind::PRE, 0, 0, 0, 0, 5, 0}};
  CHECK_FALSE(audit_timing(log, t, g).empty());
  log = {{0, CommandKind::ACT, 0, 0, 0, 0, 5, 0}, {t.ras, CommandKind::PRE, 0, 0, 0, 0, 5, 0}, {t.rc - 1, CommandKind::ACT, 0, 0, 0, 0, 6, 0}};
  CHECK_FALSE(audit_timing(log, t, g).empty());
  const auto reopen = std::max(t.rc, t.ras + t.rp);
  log = {{0, CommandKind::ACT, 0, 0, 0, 0, 5, 0}, {t.ras, CommandKind::PRE, 0, 0, 0, 0, 5, 0}, {reopen, CommandKind::ACT, 0, 0, 0, 0, 6, 0}};
  CHECK(audit_timing(log, t, g).empty());
  log = {{0, CommandKind::RD, 0, 0, 0, 0, 5, 0}};
  CHECK_FALSE(audit_timing(log, t, g).empty()); // bank closed
}

TEST_CASE("command log text round trip")
{
  Rig r;
  for (std::uint32_t i = 0; i < 50; ++i)
    r.read(r.at(i * 7, i % 64, i % 4, i % 2));
  r.drain();
  std::stringstream ss;
  write_command_log(ss, r.dram.log());
  CHECK(read_command_log(ss) == r.dram.log());

  std::stringstream bad("0 ACT 0 0 0 0 1 0\n12 FLY 0 0 0 0 1 0\n");
  try {
    read_command_log(bad);
    FAIL("expected TraceError");
  } catch (const TraceError& e) {
    CHECK(e.byte_offset == 18);
  }
}
