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

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fstream>
#include <iostream>
#include <sstream>

#include "orapsim/addrmap.hpp"
#include "orapsim/config.hpp"
#include "orapsim/metrics.hpp"
#include "orapsim/mitigation.hpp"
#include "orapsim/simulation.hpp"
#include "orapsim/trace.hpp"

using namespace orapsim;

namespace
{
struct ConfigArgs {
  std::string config_path;
  std::string preset = "paper-1core";
  std::optional<std::uint64_t> seed;
  std::string prefetcher;
  std::string mitigation;

  void add(CLI::App* app)
  {
    app->add_option("-c,--config", config_path, "JSON configuration file");
    app->add_option("-p,--preset", preset, "built-in configuration preset")->capture_default_str();
    app->add_option("--seed", seed, "override the configuration's rng seed");
    app->add_option("--prefetcher", prefetcher, "none | next-line | stride | orap | orap+hsd (replaces configured prefetchers)");
    app->add_option("--mitigation", mitigation, "none | rfm | prac");
  }

  SimConfig load() const
  {
    SimConfig cfg = config_path.empty() ? make_preset(preset) : load_config(config_path);
    if (seed)
      cfg.rng_seed = *seed;
    if (!prefetcher.empty())
      configure_prefetcher(cfg, prefetcher);
    if (!mitigation.empty())
      apply_mitigation(cfg, parse_mitigation(mitigation));
    cfg.validate();
    return cfg;
  }
};

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error(fmt::format("cannot open {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
    throw std::runtime_error(fmt::format("cannot write {}", path));
}

std::vector<std::vector<TraceRecord>> load_traces(const std::vector<std::string>& paths)
{
  std::vector<std::vector<TraceRecord>> out;
  for (const auto& p : paths) {
    try {
      out.push_back(read_trace(p));
    } catch (const TraceError& e) {
      throw TraceError(fmt::format("{}: {}", p, e.what()), e.byte_offset);
    }
  }
  return out;
}
} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"orapsim: trace-driven cache and DDR5 memory-system simulator"};
  app.require_subcommand(1);

  // gen-trace
  auto* gen = app.add_subcommand("gen-trace", "generate a synthetic trace");
  TraceSpec spec;
  std::string gen_kind = "stream", gen_out;
  gen->add_option("-g,--generator", gen_kind, "stream | stride | cyclic | random | mixed")->capture_default_str();
  gen->add_option("--footprint", spec.footprint_bytes, "bytes touched")->capture_default_str();
  gen->add_option("--stride", spec.stride_bytes, "bytes between consecutive accesses of one stream")->capture_default_str();
  gen->add_option("--streams", spec.stream_count)->capture_default_str();
  gen->add_option("--ips", spec.ip_count)->capture_default_str();
  gen->add_option("-n,--length", spec.length_records, "records")->capture_default_str();
  gen->add_option("--seed", spec.seed)->capture_default_str();
  gen->add_option("--base", spec.base_address)->capture_default_str();
  gen->add_option("--gap", spec.instr_gap, "instructions per memory record")->capture_default_str();
  gen->add_option("--store-fraction", spec.store_fraction)->capture_default_str();
  gen->add_option("--random-fraction", spec.random_fraction)->capture_default_str();
  gen->add_option("-o,--output", gen_out, "trace file")->required();

  // run
  auto* run = app.add_subcommand("run", "simulate one configuration");
  ConfigArgs run_cfg;
  run_cfg.add(run);
  std::vector<std::string> run_traces;
  std::string run_report, run_csv, run_log;
  bool run_audit = false;
  run->add_option("-t,--trace", run_traces, "trace file (one, or one per core)")->required();
  run->add_option("--report", run_report, "write the report as JSON");
  run->add_option("--csv", run_csv, "write the report as one CSV row");
  run->add_option("--command-log", run_log, "write the DRAM command log");
  run->add_flag("--audit-timing", run_audit, "replay the command log through the timing auditor");

  // sweep
  auto* sw = app.add_subcommand("sweep", "prefetcher x mitigation grid");
  ConfigArgs sw_cfg;
  sw_cfg.add(sw);
  std::string sw_trace, sw_csv;
  bool sw_audit = false;
  sw->add_option("-t,--trace", sw_trace, "trace file")->required();
  sw->add_option("--csv", sw_csv, "CSV output (stdout when omitted)");
  sw->add_flag("--audit-timing", sw_audit, "audit every cell's command log");

  // compare
  auto* cmp = app.add_subcommand("compare", "percentage deltas between two JSON reports");
  std::string cmp_a, cmp_b;
  cmp->add_option("a", cmp_a, "baseline report")->required();
  cmp->add_option("b", cmp_b, "candidate report")->required();

  // inspect-map
  auto* im = app.add_subcommand("inspect-map", "show an address mapping and decompose addresses");
  ConfigArgs im_cfg;
  im_cfg.add(im);
  std::vector<std::string> im_addrs;
  std::string im_trace;
  im->add_option("-a,--address", im_addrs, "physical address to decompose (hex or decimal)");
  im->add_option("-t,--trace", im_trace, "estimate BLP and rowbuffer locality of a trace");

  // audit-disturbance
  auto* ad = app.add_subcommand("audit-disturbance", "replay a DRAM command log and report neighbour disturbance");
  std::string ad_log;
  AuditOptions ad_opt;
  std::uint64_t ad_limit = 0;
  ad->add_option("-l,--log", ad_log, "command log")->required();
  ad->add_option("--blast-radius", ad_opt.blast_radius)->capture_default_str();
  ad->add_option("--rows", ad_opt.rows)->capture_default_str();
  ad->add_option("--rows-per-ref", ad_opt.rows_per_ref)->capture_default_str();
  ad->add_option("--rfm-rows", ad_opt.rfm_rows)->capture_default_str();
  ad->add_option("--limit", ad_limit, "fail when any victim exceeds this many disturbances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      spec.generator = parse_generator(gen_kind);
      auto records = generate(spec);
      write_trace(gen_out, records);
      fmt::print("wrote {} records to {}\n", records.size(), gen_out);
      return 0;
    }

    if (*run) {
      const auto cfg = run_cfg.load();
      RunOptions opt;
      opt.audit_timing = run_audit;
      opt.log_commands = !run_log.empty();
      System sys(cfg, load_traces(run_traces), opt);
      const auto report = sys.run();
      fmt::print("{}", format_report(report));
      if (!run_report.empty())
        write_file(run_report, report_to_json(report));
      if (!run_csv.empty())
        write_file(run_csv, csv_header() + "\n" + csv_row(report, cfg.name) + "\n");
      if (!run_log.empty()) {
        std::ofstream out(run_log);
        write_command_log(out, sys.dram().log());
      }
      const auto bad = check_report(report);
      for (const auto& b : bad)
        fmt::print(stderr, "audit failed: {}\n", b);
      return bad.empty() ? 0 : 1;
    }

    if (*sw) {
      const auto cfg = sw_cfg.load();
      RunOptions opt;
      opt.audit_timing = sw_audit;
      const auto traces = load_traces({sw_trace});
      const auto cells = sweep(cfg, traces.front(), opt);
      const auto csv = sweep_csv(cells);
      if (sw_csv.empty())
        fmt::print("{}", csv);
      else
        write_file(sw_csv, csv);
      int rc = 0;
      for (const auto& c : cells)
        for (const auto& b : check_report(c.report)) {
          fmt::print(stderr, "{}/{}: audit failed: {}\n", c.prefetcher, c.mitigation, b);
          rc = 1;
        }
      return rc;
    }

    if (*cmp) {
      const auto a = report_from_json(read_file(cmp_a));
      const auto b = report_from_json(read_file(cmp_b));
      fmt::print("{}", format_compare(compare(a, b)));
      return 0;
    }

    if (*im) {
      const auto cfg = im_cfg.load();
      fmt::print("{}", describe_layout(cfg.mapping));
      for (const auto& s : im_addrs) {
        const auto addr = std::stoull(s, nullptr, 0);
        const auto c = decompose(cfg.mapping, addr);
        fmt::print("{:#x}: channel {} rank {} bankgroup {} bank {} row {} column {} cluster {}\n", addr, c.channel, c.rank, c.bankgroup, c.bank, c.row,
                   c.column, c.cluster_index);
      }
      if (!im_trace.empty()) {
        const auto t = read_trace(im_trace);
        const auto a = analyze_mapping(cfg.mapping, t);
        fmt::print("estimated BLP {:.3f}, rowbuffer hits {:.3f}, same-row pairs {:.3f}, banks touched {}, max bank deviation {:.3f}\n", a.est_blp,
                   a.est_rowbuffer_hits, a.consecutive_same_row, a.banks_touched, a.max_bank_deviation);
      }
      return 0;
    }

    if (*ad) {
      std::ifstream in(ad_log);
      if (!in)
        throw std::runtime_error(fmt::format("cannot open {}", ad_log));
      const auto log = read_command_log(in);
      const auto r = disturbance_audit(log, ad_opt);
      fmt::print("acts {} refreshes {} mitigations {}\n", r.acts, r.refreshes, r.mitigations);
      fmt::print("max disturbance {} at channel {} rank {} bankgroup {} bank {} row {}\n", r.max_disturbance, r.channel, r.rank, r.bankgroup, r.bank,
                 r.row);
      return ad_limit && r.max_disturbance > ad_limit ? 1 : 0;
    }
  } catch (const TraceError& e) {
    fmt::print(stderr, "error: {} (byte offset {})\n", e.what(), e.byte_offset);
    return 2;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
