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

#include "orapsim/metrics.hpp"

#include <cmath>
#include <fmt/core.h>
#include <json.hpp>
#include <limits>
#include <stdexcept>

namespace orapsim
{
namespace
{
double per_instr(const SimReport& r, double v, double scale)
{
  if (r.retired_instructions == 0)
    throw std::domain_error("report has no retired instructions");
  return scale * v / static_cast<double>(r.retired_instructions);
}

constexpr std::array<Origin, 4> engines_reported{Origin::l1pf, Origin::l2pf, Origin::nc, Origin::hsd};

double overall_usefulness(const SimReport& r)
{
  std::uint64_t issued = 0, useful = 0;
  for (auto o : engines_reported) {
    issued += r.engines[static_cast<std::size_t>(o)].issued;
    useful += r.engines[static_cast<std::size_t>(o)].useful;
  }
  return issued ? static_cast<double>(useful) / issued : 0.0;
}
} // namespace

double apki(const SimReport& r) { return per_instr(r, static_cast<double>(r.act_count), 1000.0); }
double rpki(const SimReport& r) { return per_instr(r, static_cast<double>(r.rd_count), 1000.0); }
double depi(const SimReport& r) { return per_instr(r, r.dynamic_energy_pj, 1.0); }

double usefulness(const SimReport& r, Origin engine)
{
  const auto& e = r.engines[static_cast<std::size_t>(engine)];
  if (e.issued == 0)
    throw std::domain_error(fmt::format("engine {} issued no prefetches", to_string(engine)));
  return static_cast<double>(e.useful) / e.issued;
}

double rowbuffer_hit_rate(const SimReport& r)
{
  const auto n = r.rowbuffer_hits + r.rowbuffer_misses;
  return n ? static_cast<double>(r.rowbuffer_hits) / n : 0.0;
}

double engine_row_hit_rate(const SimReport& r, Origin engine)
{
  const auto& e = r.engines[static_cast<std::size_t>(engine)];
  return e.dram_reads ? static_cast<double>(e.dram_row_hits) / e.dram_reads : 0.0;
}

double average_latency(const SimReport& r) { return r.latency_count ? static_cast<double>(r.latency_sum) / r.latency_count : 0.0; }

double bandwidth_gbps(const SimReport& r, double dram_clock_mhz, std::uint32_t channels, std::uint32_t channel_width_bits)
{
  if (r.dram_cycles == 0 || channels == 0)
    return 0.0;
  // two transfers per controller cycle while the bus is busy
  const double bytes = static_cast<double>(r.bus_busy_cycles) * 2.0 * channel_width_bits / 8.0;
  const double seconds = static_cast<double>(r.dram_cycles) / (dram_clock_mhz * 1e6);
  return bytes / seconds / 1e9;
}

std::vector<std::string> check_report(const SimReport& r)
{
  std::vector<std::string> bad;
  if (r.rowbuffer_hits + r.rowbuffer_misses != r.rd_count + r.wr_count)
    bad.push_back(fmt::format("rowbuffer hits+misses {} != RD+WR {}", r.rowbuffer_hits + r.rowbuffer_misses, r.rd_count + r.wr_count));
  for (auto o : engines_reported) {
    const auto& e = r.engines[static_cast<std::size_t>(o)];
    if (e.useful > e.issued)
      bad.push_back(fmt::format("engine {}: useful {} > issued {}", to_string(o), e.useful, e.issued));
  }
  for (const auto& l : r.levels)
    if (l.demand_hits + l.demand_misses != l.demand_accesses)
      bad.push_back(fmt::format("{}: hits+misses != accesses", l.name));
  if (r.timing_violations)
    bad.push_back(fmt::format("{} DRAM timing violations", r.timing_violations));
  for (const auto& a : r.audit_failures)
    bad.push_back(a);
  return bad;
}

std::string format_report(const SimReport& r)
{
  std::string s;
  auto row = [&](std::string_view k, const std::string& v) { s += fmt::format("{:<28}{:>18}\n", k, v); };
  row("config", r.config_name);
  row("cores", fmt::format("{}", r.cores));
  row("mitigation", r.mitigation);
  row("instructions", fmt::format("{}", r.retired_instructions));
  row("cycles", fmt::format("{}", r.cycles));
  row("IPC", fmt::format("{:.4f}", r.cycles ? static_cast<double>(r.retired_instructions) / r.cycles : 0.0));
  row("ACT", fmt::format("{}", r.act_count));
  row("PRE", fmt::format("{}", r.pre_count));
  row("RD", fmt::format("{}", r.rd_count));
  row("WR", fmt::format("{}", r.wr_count));
  row("REF", fmt::format("{}", r.ref_count));
  row("RFM", fmt::format("{}", r.rfm_count));
  row("PRAC mitigations", fmt::format("{}", r.prac_mitigations));
  row("rowbuffer hit rate", fmt::format("{:.4f}", rowbuffer_hit_rate(r)));
  if (r.retired_instructions) {
    row("APKI", fmt::format("{:.4f}", apki(r)));
    row("RPKI", fmt::format("{:.4f}", rpki(r)));
    row("DEPI (pJ)", fmt::format("{:.4f}", depi(r)));
  }
  row("dynamic energy (nJ)", fmt::format("{:.3f}", r.dynamic_energy_pj / 1000.0));
  row("avg LLC miss latency", fmt::format("{:.2f}", average_latency(r)));
  for (const auto& l : r.levels)
    row(fmt::format("{} hit rate", l.name), fmt::format("{:.4f}", l.demand_accesses ? static_cast<double>(l.demand_hits) / l.demand_accesses : 0.0));
  for (auto o : engines_reported) {
    const auto& e = r.engines[static_cast<std::size_t>(o)];
    if (e.requested == 0 && e.issued == 0)
      continue;
    row(fmt::format("{} issued/useful", to_string(o)), fmt::format("{}/{}", e.issued, e.useful));
    row(fmt::format("{} usefulness", to_string(o)), fmt::format("{:.4f}", e.issued ? static_cast<double>(e.useful) / e.issued : 0.0));
    if (e.dram_reads)
      row(fmt::format("{} DRAM row hit rate", to_string(o)), fmt::format("{:.4f}", engine_row_hit_rate(r, o)));
  }
  row("timing violations", fmt::format("{}", r.timing_violations));
  for (const auto& a : r.audit_failures)
    s += fmt::format("audit: {}\n", a);
  return s;
}

std::string csv_header()
{
  return "schema,label,config,cores,mitigation,instructions,cycles,act,pre,rd,wr,ref,rfm,prac_mitigations,rowbuffer_hits,rowbuffer_misses,"
         "apki,rpki,depi_pj,dynamic_energy_pj,avg_latency,nc_issued,nc_useful,nc_row_hit_rate,hsd_issued,hsd_useful,l1pf_issued,l1pf_useful,"
         "l2pf_issued,l2pf_useful,usefulness,timing_violations";
}

std::string csv_row(const SimReport& r, std::string_view label)
{
  const auto& nc = r.engines[static_cast<std::size_t>(Origin::nc)];
  const auto& hsd = r.engines[static_cast<std::size_t>(Origin::hsd)];
  const auto& l1 = r.engines[static_cast<std::size_t>(Origin::l1pf)];
  const auto& l2 = r.engines[static_cast<std::size_t>(Origin::l2pf)];
  const bool has_instr = r.retired_instructions > 0;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.3f},{:.3f},{},{},{:.6f},{},{},{},{},{},{},{:.6f},{}",
                     REPORT_SCHEMA_VERSION, label, r.config_name, r.cores, r.mitigation, r.retired_instructions, r.cycles, r.act_count, r.pre_count,
                     r.rd_count, r.wr_count, r.ref_count, r.rfm_count, r.prac_mitigations, r.rowbuffer_hits, r.rowbuffer_misses,
                     has_instr ? apki(r) : 0.0, has_instr ? rpki(r) : 0.0, has_instr ? depi(r) : 0.0, r.dynamic_energy_pj, average_latency(r),
                     nc.issued, nc.useful, engine_row_hit_rate(r, Origin::nc), hsd.issued, hsd.useful, l1.issued, l1.useful, l2.issued, l2.useful,
                     overall_usefulness(r), r.timing_violations);
}

std::string report_to_json(const SimReport& r)
{
  nlohmann::ordered_json j;
  j["schema"] = REPORT_SCHEMA_VERSION;
  j["config"] = r.config_name;
  j["cores"] = r.cores;
  j["mitigation"] = r.mitigation;
  j["instructions"] = r.retired_instructions;
  j["cycles"] = r.cycles;
  j["dram_cycles"] = r.dram_cycles;
  j["dram"] = {{"act", r.act_count},
               {"pre", r.pre_count},
               {"rd", r.rd_count},
               {"wr", r.wr_count},
               {"ref", r.ref_count},
               {"rfm", r.rfm_count},
               {"prac_mitigations", r.prac_mitigations},
               {"rowbuffer_hits", r.rowbuffer_hits},
               {"rowbuffer_misses", r.rowbuffer_misses},
               {"bus_busy_cycles", r.bus_busy_cycles}};
  j["energy_pj"] = {{"command", r.command_energy_pj}, {"standby", r.standby_energy_pj}, {"dynamic", r.dynamic_energy_pj}};
  auto& eng = j["engines"];
  eng = nlohmann::ordered_json::object();
  for (std::size_t o = 0; o < ORIGIN_COUNT; ++o) {
    const auto& e = r.engines[o];
    eng[std::string(origin_names[o])] = {{"requested", e.requested}, {"issued", e.issued},       {"useful", e.useful},
                                         {"dropped", e.dropped},     {"useless", e.useless},     {"dram_reads", e.dram_reads},
                                         {"dram_row_hits", e.dram_row_hits}};
  }
  auto& lv = j["levels"];
  lv = nlohmann::ordered_json::array();
  for (const auto& l : r.levels)
    lv.push_back({{"name", l.name},
                  {"demand_accesses", l.demand_accesses},
                  {"demand_hits", l.demand_hits},
                  {"demand_misses", l.demand_misses},
                  {"mshr_merges", l.mshr_merges},
                  {"fills", l.fills},
                  {"writebacks", l.writebacks},
                  {"promotions", l.promotions}});
  j["latency"] = {{"sum", r.latency_sum}, {"count", r.latency_count}, {"histogram", r.latency_histogram}};
  j["timing_violations"] = r.timing_violations;
  j["audit_failures"] = r.audit_failures;
  return j.dump(2) + "\n";
}

SimReport report_from_json(std::string_view text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("report is not valid JSON: {}", e.what()));
  }
  try {
    if (j.at("schema").get<int>() != REPORT_SCHEMA_VERSION)
      throw std::invalid_argument(fmt::format("unsupported report schema {}", j.at("schema").get<int>()));
    SimReport r;
    r.config_name = j.at("config").get<std::string>();
    r.cores = j.at("cores").get<std::uint32_t>();
    r.mitigation = j.at("mitigation").get<std::string>();
    r.retired_instructions = j.at("instructions").get<std::uint64_t>();
    r.cycles = j.at("cycles").get<std::uint64_t>();
    r.dram_cycles = j.at("dram_cycles").get<std::uint64_t>();
    const auto& d = j.at("dram");
    r.act_count = d.at("act");
    r.pre_count = d.at("pre");
    r.rd_count = d.at("rd");
    r.wr_count = d.at("wr");
    r.ref_count = d.at("ref");
    r.rfm_count = d.at("rfm");
    r.prac_mitigations = d.at("prac_mitigations");
    r.rowbuffer_hits = d.at("rowbuffer_hits");
    r.rowbuffer_misses = d.at("rowbuffer_misses");
    r.bus_busy_cycles = d.at("bus_busy_cycles");
    const auto& en = j.at("energy_pj");
    r.command_energy_pj = en.at("command");
    r.standby_energy_pj = en.at("standby");
    r.dynamic_energy_pj = en.at("dynamic");
    for (std::size_t o = 0; o < ORIGIN_COUNT; ++o) {
      const auto& e = j.at("engines").at(std::string(origin_names[o]));
      auto& x = r.engines[o];
      x.requested = e.at("requested");
      x.issued = e.at("issued");
      x.useful = e.at("useful");
      x.dropped = e.at("dropped");
      x.useless = e.at("useless");
      x.dram_reads = e.at("dram_reads");
      x.dram_row_hits = e.at("dram_row_hits");
    }
    for (const auto& l : j.at("levels"))
      r.levels.push_back({l.at("name"), l.at("demand_accesses"), l.at("demand_hits"), l.at("demand_misses"), l.at("mshr_merges"), l.at("fills"),
                          l.at("writebacks"), l.at("promotions")});
    r.latency_sum = j.at("latency").at("sum");
    r.latency_count = j.at("latency").at("count");
    r.latency_histogram = j.at("latency").at("histogram").get<std::vector<std::uint64_t>>();
    r.timing_violations = j.at("timing_violations");
    r.audit_failures = j.at("audit_failures").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("malformed report: {}", e.what()));
  }
}

std::vector<MetricDelta> compare(const SimReport& a, const SimReport& b)
{
  if (a.retired_instructions != b.retired_instructions)
    throw std::invalid_argument(fmt::format("reports cover different instruction counts ({} vs {})", a.retired_instructions, b.retired_instructions));
  auto delta = [](std::string name, double x, double y) {
    MetricDelta d{std::move(name), x, y, 0.0};
    if (x != 0)
      d.percent = 100.0 * (y - x) / x;
    else if (y != 0)
      d.percent = std::numeric_limits<double>::infinity();
    return d;
  };
  std::vector<MetricDelta> out;
  out.push_back(delta("cycles", static_cast<double>(a.cycles), static_cast<double>(b.cycles)));
  out.push_back(delta("apki", apki(a), apki(b)));
  out.push_back(delta("depi", depi(a), depi(b)));
  out.push_back(delta("usefulness", overall_usefulness(a), overall_usefulness(b)));
  out.push_back(delta("rowbuffer_hit_rate", rowbuffer_hit_rate(a), rowbuffer_hit_rate(b)));
  return out;
}

std::string format_compare(const std::vector<MetricDelta>& d)
{
  std::string s = fmt::format("{:<20}{:>16}{:>16}{:>12}\n", "metric", "a", "b", "delta %");
  for (const auto& m : d)
    s += fmt::format("{:<20}{:>16.6g}{:>16.6g}{:>12.3f}\n", m.metric, m.a, m.b, m.percent);
  return s;
}
} // namespace orapsim
