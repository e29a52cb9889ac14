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

// Acceptance suite: one PASS/FAIL line per criterion, each within its runtime budget.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "harness.hpp"
#include "oracles.hpp"
#include "orapsim/mitigation.hpp"
#include "orapsim/simulation.hpp"

using namespace orapsim;

namespace
{
struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Verdict()> run;
};

// ---- 1, 2: closed-form tables -------------------------------------------------------------

Verdict usefulness_table()
{
  int cells = 0, bad = 0, blank_ok = 0;
  for (std::uint32_t i = 1; i <= 6; ++i)
    for (std::uint32_t u = 1; u <= 6; ++u) {
      const auto cell = oracle::usefulness_printed[i - 1][u - 1];
      if (cell.empty()) {
        try {
          target_usefulness(i, u);
        } catch (const std::invalid_argument&) {
          ++blank_ok;
        }
        continue;
      }
      ++cells;
      if (!oracle::matches_printed(target_usefulness(i, u), cell))
        ++bad;
    }
  return {bad == 0 && cells == 21 && blank_ok == 15, fmt::format("{} cells, {} mismatched, {}/15 blanks rejected", cells, bad, blank_ok)};
}

Verdict pending_table()
{
  int bad = 0;
  for (std::uint32_t i = 1; i <= 6; ++i)
    for (std::uint32_t k = 1; k <= 4; ++k)
      bad += max_pending(i, k) != oracle::max_pending[i - 1][k - 1];
  return {bad == 0, fmt::format("24 cells, {} mismatched; (5,3)={} (6,4)={}", bad, max_pending(5, 3), max_pending(6, 4))};
}

// ---- 3: never-useful trigger ----------------------------------------------------------------

Verdict pending_bound()
{
  const auto base = make_preset("paper-1core");
  auto cfg = base.orap;
  cfg.issue_max = 5;
  cfg.confidence_increment = 1;
  cfg.initial_confidence = 0;
  cfg.gate_floor = 0; // no cold probes: only the trigger IP's own confidence drives issue
  Orap o(cfg, base.mapping, 1);
  const std::uint64_t ip = 0xdead40;
  o.ipct().lookup(ip, Engine::next_column).confidence = 255;
  std::uint64_t fills = 0;
  for (std::uint32_t row = 0; row < 20000; ++row) {
    DramCoord c;
    c.row = row;
    const auto cands = o.on_llc_miss(ip, compose(base.mapping, c));
    for (auto a : cands) {
      o.pot().record(a);
      o.on_prefetch_fill(Engine::next_column, ip, o.row_of(a));
      ++fills;
    }
  }
  const auto conf = o.ip_confidence(ip, Engine::next_column);
  return {fills == 1275 && conf == 0, fmt::format("{} fills before throttling (expect 1275), final confidence {}", fills, conf)};
}

// ---- 4: churn ---------------------------------------------------------------------------------

Verdict churn()
{
  const auto blocks = std::set<char>(oracle::churn_stimulus.begin(), oracle::churn_stimulus.end()).size();
  const auto plain = harness::run_churn(oracle::churn_stimulus, false);
  const auto nl = harness::run_churn(oracle::churn_stimulus, true);
  const double h0 = static_cast<double>(plain.hits) / static_cast<double>(plain.accesses);
  const double h1 = static_cast<double>(nl.hits) / static_cast<double>(nl.accesses);
  // 0.40 and 0.80 exactly, fills in the exact ratio 4:3
  const bool ok = blocks <= 8 && plain.hits * 5 == plain.accesses * 2 && nl.hits * 5 == nl.accesses * 4 && nl.fills * 3 == plain.fills * 4;
  return {ok, fmt::format("{} blocks; hit rate {:.2f} -> {:.2f}; fills {} -> {} (x{:.4f})", blocks, h0, h1, plain.fills, nl.fills,
                          static_cast<double>(nl.fills) / static_cast<double>(plain.fills))};
}

// ---- 5, 8: streaming suite --------------------------------------------------------------------

struct SuiteTrace {
  TraceGenerator gen;
  std::uint64_t stride;
  std::uint32_t streams;
};

// Fixed before measurement; traces where ORAP has little to gain individually stay in.
constexpr SuiteTrace suite_traces[] = {
    {TraceGenerator::stream, 64, 1},  {TraceGenerator::stream, 64, 4},  {TraceGenerator::stream, 64, 8},
    {TraceGenerator::stride, 128, 2}, {TraceGenerator::stride, 192, 4}, {TraceGenerator::stride, 256, 3},
};
constexpr std::uint64_t suite_records = 1'000'000;

struct SuiteRow {
  std::string label;
  SimReport next_line, orap, orap_hsd;
};
std::optional<std::vector<SuiteRow>> suite_cache;

std::vector<TraceRecord> suite_trace(const SuiteTrace& t)
{
  TraceSpec s;
  s.generator = t.gen;
  s.stride_bytes = t.stride;
  s.stream_count = t.streams;
  s.ip_count = t.streams;
  s.seed = t.streams * 7 + 1;
  s.footprint_bytes = std::uint64_t{1} << 30;
  s.length_records = suite_records;
  s.instr_gap = 16;
  return generate(s);
}

SimReport run_with(const std::vector<TraceRecord>& trace, std::string_view pf)
{
  auto cfg = make_preset("paper-1core"); // Zen4 layout
  configure_prefetcher(cfg, pf);
  cfg.orap.initial_confidence = 255; // warmed
  return simulate(cfg, trace);
}

const std::vector<SuiteRow>& suite()
{
  if (!suite_cache) {
    std::vector<SuiteRow> rows;
    for (const auto& t : suite_traces) {
      const auto trace = suite_trace(t);
      rows.push_back({fmt::format("{}/{}B/{}x", to_string(t.gen), t.stride, t.streams), run_with(trace, "next-line"), run_with(trace, "orap"),
                      run_with(trace, "orap+hsd")});
    }
    suite_cache = std::move(rows);
  }
  return *suite_cache;
}

Verdict activation_avoidance()
{
  const auto& rows = suite();
  double nl = 0, orap = 0, hsd = 0;
  std::uint64_t nc_reads = 0, nc_hits = 0;
  const auto nc = static_cast<std::size_t>(Origin::nc);
  for (const auto& r : rows) {
    nl += apki(r.next_line);
    orap += apki(r.orap);
    hsd += apki(r.orap_hsd);
    nc_reads += r.orap.engines[nc].dram_reads;
    nc_hits += r.orap.engines[nc].dram_row_hits;
    fmt::print("    {:<16} APKI next-line {:6.2f}  orap {:6.2f} ({:+.1f}%)  orap+hsd {:6.2f} ({:+.1f}%)  NC row-hit {:.3f}\n", r.label,
                apki(r.next_line), apki(r.orap), 100 * (apki(r.orap) / apki(r.next_line) - 1), apki(r.orap_hsd),
                100 * (apki(r.orap_hsd) / apki(r.next_line) - 1), engine_row_hit_rate(r.orap, Origin::nc));
  }
  // equal-length traces: the suite APKI is the mean
  const double cut = 1 - orap / nl, cut_hsd = 1 - hsd / nl;
  const double hit = nc_reads ? static_cast<double>(nc_hits) / static_cast<double>(nc_reads) : 0;
  return {rows.size() >= 5 && cut >= 0.40 && hit >= 0.95,
          fmt::format("{} traces x {} records: APKI -{:.1f}% (need 40%), NC row-hit {:.3f} (need 0.95); orap+hsd APKI -{:.1f}% (informational)",
                      rows.size(), suite_records, 100 * cut, hit, 100 * cut_hsd)};
}

// ---- 6, 7: mitigation ------------------------------------------------------------------------

struct SystemRun {
  SimReport report;
  DramStats dram;
};

SystemRun run_system(const SimConfig& cfg, const std::vector<TraceRecord>& trace, bool audit = false)
{
  RunOptions opt;
  opt.audit_timing = audit;
  System sys(cfg, {trace}, opt);
  auto r = sys.run();
  return {std::move(r), sys.dram().stats()};
}

std::vector<std::pair<std::string, std::vector<TraceRecord>>> mixed_traces(std::uint64_t records)
{
  std::vector<std::pair<std::string, std::vector<TraceRecord>>> out;
  const std::pair<const char*, TraceGenerator> gens[] = {
      {"stream", TraceGenerator::stream}, {"random", TraceGenerator::random}, {"mixed", TraceGenerator::mixed}, {"cyclic", TraceGenerator::cyclic}};
  for (const auto& [name, g] : gens) {
    TraceSpec s;
    s.generator = g;
    s.stream_count = 4;
    s.ip_count = 4;
    s.footprint_bytes = g == TraceGenerator::cyclic ? (64 << 20) : (std::uint64_t{1} << 30);
    s.length_records = records;
    s.store_fraction = 0.1;
    s.seed = 11;
    out.emplace_back(name, generate(s));
  }
  return out;
}

// RFMs per bank within one of floor(ACTs / threshold), counting one possibly still owed.
bool rfm_identity(const DramStats& s, std::uint32_t threshold, std::string& worst)
{
  for (std::size_t b = 0; b < s.bank_acts.size(); ++b) {
    const auto expect = s.bank_acts[b] / threshold;
    if (s.bank_rfms[b] > expect || s.bank_rfms[b] + 1 < expect) {
      worst = fmt::format("bank {}: {} ACTs, {} RFMs", b, s.bank_acts[b], s.bank_rfms[b]);
      return false;
    }
  }
  return true;
}

Verdict rfm_accounting()
{
  const auto threshold = make_preset("paper-rfm").mitigation.rfm_threshold;
  int traces = 0;
  std::uint64_t rfms = 0;
  std::string why;
  bool ok = true;

  const auto none = harness::hammer(MitigationKind::none, 6000, {40000, 40004}, 3);
  const auto rfm = harness::hammer(MitigationKind::rfm, 6000, {40000, 40004}, 3);
  ++traces;
  rfms += rfm.stats.rfm;
  ok &= rfm_identity(rfm.stats, threshold, why);
  if (rfm.cycles < none.cycles) {
    ok = false;
    why = "hammer: RFM run finished sooner";
  }

  for (const auto& [name, trace] : mixed_traces(150000)) {
    auto cfg = make_preset("paper-1core");
    configure_prefetcher(cfg, "orap+hsd");
    const auto base = run_system(cfg, trace);
    apply_mitigation(cfg, MitigationKind::rfm);
    const auto with = run_system(cfg, trace);
    ++traces;
    rfms += with.dram.rfm;
    if (!rfm_identity(with.dram, threshold, why)) {
      ok = false;
      why = name + ": " + why;
    }
    if (with.report.cycles < base.report.cycles) {
      ok = false;
      why = fmt::format("{}: cycles {} with RFM < {} without", name, with.report.cycles, base.report.cycles);
    }
  }
  return {ok && rfms > 0, fmt::format("{} traces, {} RFMs, per-bank identity {}{}", traces, rfms, ok ? "holds" : "broken: ", why)};
}

// ACTs that can still reach a row between its counter crossing the threshold and the mitigation.
constexpr std::uint64_t prac_slack = 2;

Verdict prac_safety()
{
  const auto threshold = make_preset("paper-prac").mitigation.prac_threshold;
  const AuditOptions opt;
  const auto prac = harness::hammer(MitigationKind::prac, 8000, {40000, 40010});
  const auto none = harness::hammer(MitigationKind::none, 8000, {40000, 40010});
  const auto a = disturbance_audit(prac.log, opt);
  const auto b = disturbance_audit(none.log, opt);
  return {a.max_disturbance <= threshold + prac_slack && b.max_disturbance > threshold,
          fmt::format("max disturbance {} with PRAC (limit {} + {}), {} without; {} mitigations", a.max_disturbance, threshold, prac_slack,
                      b.max_disturbance, prac.stats.prac_mitigations)};
}

// ---- 8: energy --------------------------------------------------------------------------------

Verdict directional_energy()
{
  // identical request stream, only the timing set differs
  std::vector<TraceRecord> conflicts;
  const auto map = make_preset("paper-1core").mapping;
  for (std::uint64_t i = 0; i < 60000; ++i) {
    DramCoord c;
    // every record a new block, alternating between two rows of one bank
    c.row = static_cast<std::uint32_t>(100 + (i % 2) * 7 + (i / 128) * 16);
    c.column = static_cast<std::uint32_t>(i / 2 % 64);
    conflicts.push_back({(i + 1) * 8, 0x400, compose(map, c), AccessKind::load});
  }
  auto std_cfg = make_preset("paper-1core");
  auto prac_cfg = make_preset("paper-prac");
  configure_prefetcher(std_cfg, "none");
  configure_prefetcher(prac_cfg, "none");
  prac_cfg.mitigation.kind = MitigationKind::none; // PRAC timings, no mitigation commands
  const auto s = simulate(std_cfg, conflicts), p = simulate(prac_cfg, conflicts);

  double nl = 0, orap = 0;
  for (const auto& r : suite()) {
    nl += r.next_line.dynamic_energy_pj;
    orap += r.orap.dynamic_energy_pj;
  }
  const bool ok = depi(p) > depi(s) && orap < nl;
  return {ok, fmt::format("conflict trace DEPI {:.2f} pJ (PRAC, {} ACTs) vs {:.2f} pJ (standard, {} ACTs); streaming suite dynamic energy {:+.1f}% "
                          "orap vs next-line",
                          depi(p), p.act_count, depi(s), s.act_count, 100 * (orap / nl - 1))};
}

// ---- 9: timing legality -------------------------------------------------------------------------

Verdict timing_legality()
{
  std::uint64_t runs = 0, commands = 0, violations = 0;
  for (const auto& [name, trace] : mixed_traces(40000)) {
    for (const auto* pf : {"none", "next-line", "orap+hsd"}) {
      for (auto kind : {MitigationKind::none, MitigationKind::rfm, MitigationKind::prac}) {
        auto cfg = make_preset(kind == MitigationKind::prac ? "paper-prac" : "paper-1core");
        configure_prefetcher(cfg, pf);
        apply_mitigation(cfg, kind);
        RunOptions opt;
        opt.audit_timing = true;
        System sys(cfg, {trace}, opt);
        const auto r = sys.run();
        ++runs;
        commands += sys.dram().log().size();
        violations += r.timing_violations;
      }
    }
  }
  for (auto kind : {MitigationKind::none, MitigationKind::rfm, MitigationKind::prac}) {
    const auto h = harness::hammer(kind, 4000, {40000, 40004, 40008}, 2);
    ++runs;
    commands += h.log.size();
    violations += audit_timing(h.log, h.timing, h.geom).size();
  }
  return {violations == 0 && commands > 0,
          fmt::format("{} runs (standard and PRAC timings), {} commands audited, {} violations", runs, commands, violations)};
}

// ---- 10: determinism and conservation -----------------------------------------------------------

Verdict determinism()
{
  TraceSpec s;
  s.generator = TraceGenerator::mixed;
  s.stream_count = 3;
  s.ip_count = 4;
  s.footprint_bytes = 256 << 20;
  s.length_records = 100000;
  s.store_fraction = 0.15;
  s.seed = 42;
  const auto trace = generate(s);
  auto cfg = make_preset("paper-prac");
  configure_prefetcher(cfg, "orap+hsd");
  const auto a = report_to_json(simulate(cfg, trace)), b = report_to_json(simulate(cfg, trace));
  const auto trace2 = generate(s);
  const bool identical = a == b && trace == trace2;

  int clean = 0;
  std::string first_problem;
  const char* pfs[] = {"none", "next-line", "orap", "orap+hsd"};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TraceSpec f;
    f.generator = TraceGenerator::mixed;
    f.stream_count = 1 + static_cast<std::uint32_t>(seed % 5);
    f.ip_count = 3;
    f.footprint_bytes = 64 << 20;
    f.length_records = 20000;
    f.store_fraction = 0.25;
    f.random_fraction = 0.1 * static_cast<double>(seed % 10);
    f.seed = seed;
    auto c = make_preset("paper-1core");
    configure_prefetcher(c, pfs[seed % 4]);
    apply_mitigation(c, static_cast<MitigationKind>(seed % 3));
    RunOptions opt;
    opt.audit_timing = true;
    const auto r = simulate(c, generate(f), opt);
    const auto problems = check_report(r);
    if (problems.empty())
      ++clean;
    else if (first_problem.empty())
      first_problem = fmt::format(" (seed {}: {})", seed, problems.front());
  }
  return {identical && clean == 10,
          fmt::format("repeat runs {}; {}/10 fuzz seeds conserve requests{}", identical ? "byte-identical" : "DIFFER", clean, first_problem)};
}
} // namespace

int main()
{
  const std::vector<Criterion> criteria{
      {1, "usefulness table", 1, usefulness_table},
      {2, "pending table", 1, pending_table},
      {3, "pending bound", 10, pending_bound},
      {4, "churn", 10, churn},
      {5, "activation avoidance", 300, activation_avoidance},
      {6, "RFM accounting", 60, rfm_accounting},
      {7, "PRAC safety", 60, prac_safety},
      {8, "directional energy", 120, directional_energy},
      {9, "timing legality", 120, timing_legality},
      {10, "determinism and conservation", 120, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, fmt::format("threw: {}", e.what())};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = v.pass && s < c.limit_s;
    failed += !pass;
    fmt::print("criterion {:>2} {:<29} {}  {:.2f}s/{:.0f}s  {}\n", c.id, c.name, pass ? "PASS" : "FAIL", s, c.limit_s, v.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
