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

#include "orapsim/config.hpp"

#include <algorithm>
#include <fmt/core.h>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "orapsim/util.hpp"

namespace orapsim
{
using json = nlohmann::ordered_json;

namespace
{
template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& all, std::string_view what)
{
  for (auto e : all)
    if (to_string(e) == s)
      return e;
  throw ConfigError(fmt::format("unknown {} '{}'", what, s));
}

// Reads the keys of one JSON object into a struct, rejecting keys it does not know.
class Reader
{
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object())
      throw ConfigError(fmt::format("{}: expected an object", path_));
  }

  template <typename T>
  void get(const char* key, T& out)
  {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end())
      return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("{}.{}: {}", path_, key, e.what()));
    }
  }

  template <typename E, typename F>
  void get_enum(const char* key, E& out, F parse)
  {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end())
      return;
    if (!it->is_string())
      throw ConfigError(fmt::format("{}.{}: expected a string", path_, key));
    try {
      out = parse(it->template get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}.{}: {}", path_, key, e.what()));
    }
  }

  const json* child(const char* key)
  {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string sub(const char* key) const { return path_ + "." + key; }

  void finish() const
  {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k))
        throw ConfigError(fmt::format("{}.{}: unknown key", path_, k));
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

void need(bool cond, std::string_view field, std::string_view msg)
{
  if (!cond)
    throw ConfigError(fmt::format("{}: {}", field, msg));
}

void read_geometry(const json& j, DramGeometry& g)
{
  Reader r(j, "dram.geometry");
  r.get("channels", g.channels);
  r.get("ranks", g.ranks);
  r.get("bankgroups", g.bankgroups);
  r.get("banks", g.banks);
  r.get("rows", g.rows);
  r.get("columns", g.columns);
  r.get("channel_width_bits", g.channel_width_bits);
  r.get("device_width_bits", g.device_width_bits);
  r.get("density_gbit", g.density_gbit);
  r.finish();
}

void read_timings(const json& j, DramTimings& t)
{
  Reader r(j, "dram.timings_ns");
  r.get("nCL", t.nCL);
  r.get("nRCD", t.nRCD);
  r.get("nRP", t.nRP);
  r.get("nRAS", t.nRAS);
  r.get("nRC", t.nRC);
  r.get("nWR", t.nWR);
  r.get("nRTP", t.nRTP);
  r.get("nRFC", t.nRFC);
  r.finish();
}

void read_energy(const json& j, EnergyConstants& e)
{
  Reader r(j, "dram.energy");
  r.get("act_pj", e.act_pj);
  r.get("pre_pj", e.pre_pj);
  r.get("rd_pj", e.rd_pj);
  r.get("wr_pj", e.wr_pj);
  r.get("ref_pj", e.ref_pj);
  r.get("rfm_pj", e.rfm_pj);
  r.get("active_standby_mw", e.active_standby_mw);
  r.finish();
}

void read_dram(const json& j, DramConfig& d)
{
  Reader r(j, "dram");
  if (auto c = r.child("geometry"))
    read_geometry(*c, d.geometry);
  if (auto c = r.child("timings_ns"))
    read_timings(*c, d.timings_ns);
  if (auto c = r.child("energy"))
    read_energy(*c, d.energy);
  r.get("data_rate_mtps", d.data_rate_mtps);
  r.get("burst_length", d.burst_length);
  r.get("refresh_period_ms", d.refresh_period_ms);
  r.get("refresh_commands", d.refresh_commands);
  r.get("read_queue_size", d.read_queue_size);
  r.get("write_queue_size", d.write_queue_size);
  r.get("write_high_watermark", d.write_high_watermark);
  r.get("write_low_watermark", d.write_low_watermark);
  r.get("prefetch_batch_quota", d.prefetch_batch_quota);
  if (auto c = r.child("row_policy")) {
    Reader rp(*c, "dram.row_policy");
    rp.get("initial_timeout", d.row_policy.initial_timeout);
    rp.get("min_timeout", d.row_policy.min_timeout);
    rp.get("max_timeout", d.row_policy.max_timeout);
    rp.finish();
  }
  r.finish();
}

CacheConfig read_cache(const json& j, std::size_t i)
{
  CacheConfig c;
  Reader r(j, fmt::format("cache_levels[{}]", i));
  r.get("name", c.name);
  r.get("size_bytes", c.size_bytes);
  r.get("ways", c.ways);
  r.get("latency", c.latency);
  r.get("mshr_entries", c.mshr_entries);
  r.get("lookups_per_cycle", c.lookups_per_cycle);
  r.get("shared", c.shared);
  r.get_enum("replacement", c.replacement, parse_replacement);
  r.get_enum("prefetcher", c.prefetcher, parse_prefetcher);
  r.finish();
  return c;
}

MappingDescriptor read_layout(const json& j, std::string name)
{
  std::vector<BitRange> ranges;
  std::vector<XorTerm> xors;
  Reader r(j, "mapping");
  std::string preset;
  r.get("preset", preset);
  r.get("name", name);
  auto layout = r.child("layout");
  auto xor_list = r.child("xor");
  r.finish();
  if (!layout || !layout->is_array())
    throw ConfigError("mapping.layout: expected an array of {field, lsb, width}");
  for (std::size_t i = 0; i < layout->size(); ++i) {
    Reader br((*layout)[i], fmt::format("mapping.layout[{}]", i));
    std::string field;
    BitRange b{AddrField::offset, 0, 0};
    br.get("field", field);
    br.get("lsb", b.lsb);
    br.get("width", b.width);
    br.finish();
    auto f = parse_addr_field(field);
    if (!f)
      throw ConfigError(fmt::format("mapping.layout[{}].field: unknown field '{}'", i, field));
    b.field = *f;
    ranges.push_back(b);
  }
  if (xor_list) {
    for (std::size_t i = 0; i < xor_list->size(); ++i) {
      Reader xr((*xor_list)[i], fmt::format("mapping.xor[{}]", i));
      std::string field;
      XorTerm t{AddrField::bank, 0, {}};
      xr.get("field", field);
      xr.get("bit", t.bit);
      xr.get("row_bits", t.row_bits);
      xr.finish();
      auto f = parse_addr_field(field);
      if (!f)
        throw ConfigError(fmt::format("mapping.xor[{}].field: unknown field '{}'", i, field));
      t.field = *f;
      xors.push_back(std::move(t));
    }
  }
  return MappingDescriptor(std::move(name), std::move(ranges), std::move(xors));
}

std::vector<CacheConfig> default_caches()
{
  CacheConfig l1{"L1D", 48 * 1024, 12, 5, 32, 2, false, ReplacementPolicy::lru, PrefetcherKind::none};
  CacheConfig l2{"L2", 1024 * 1024, 16, 10, 64, 2, false, ReplacementPolicy::lru, PrefetcherKind::none};
  CacheConfig llc{"LLC", 8 * 1024 * 1024, 16, 60, 40, 2, true, ReplacementPolicy::ship, PrefetcherKind::none};
  return {l1, l2, llc};
}
} // namespace

std::string_view to_string(MitigationKind k)
{
  switch (k) {
  case MitigationKind::none:
    return "none";
  case MitigationKind::rfm:
    return "rfm";
  case MitigationKind::prac:
    return "prac";
  }
  return "?";
}

std::string_view to_string(ReplacementPolicy p) { return p == ReplacementPolicy::lru ? "lru" : "ship"; }

std::string_view to_string(PrefetcherKind p)
{
  switch (p) {
  case PrefetcherKind::none:
    return "none";
  case PrefetcherKind::next_line:
    return "next-line";
  case PrefetcherKind::stride:
    return "stride";
  case PrefetcherKind::orap:
    return "orap";
  case PrefetcherKind::orap_hsd:
    return "orap+hsd";
  }
  return "?";
}

std::string_view to_string(ConfidenceMode m)
{
  switch (m) {
  case ConfidenceMode::hybrid:
    return "hybrid";
  case ConfidenceMode::ip_only:
    return "ip-only";
  case ConfidenceMode::row_only:
    return "row-only";
  }
  return "?";
}

MitigationKind parse_mitigation(std::string_view s)
{
  return parse_enum(s, std::array{MitigationKind::none, MitigationKind::rfm, MitigationKind::prac}, "mitigation");
}

PrefetcherKind parse_prefetcher(std::string_view s)
{
  return parse_enum(s, std::array{PrefetcherKind::none, PrefetcherKind::next_line, PrefetcherKind::stride, PrefetcherKind::orap, PrefetcherKind::orap_hsd},
                    "prefetcher");
}

ReplacementPolicy parse_replacement(std::string_view s)
{
  return parse_enum(s, std::array{ReplacementPolicy::lru, ReplacementPolicy::ship}, "replacement policy");
}

ConfidenceMode parse_confidence_mode(std::string_view s)
{
  return parse_enum(s, std::array{ConfidenceMode::hybrid, ConfidenceMode::ip_only, ConfidenceMode::row_only}, "confidence mode");
}

DramTimings standard_timings() { return DramTimings{}; }

DramTimings prac_timings()
{
  DramTimings t;
  t.nCL = 16.25;
  t.nRCD = 16.25;
  t.nRP = 36.25;
  t.nRAS = 16.25;
  t.nRC = 52;
  t.nWR = 10;
  t.nRTP = 5;
  return t;
}

EnergyConstants derive_energy(const DeviceCurrents& cur, const DramTimings& t, const DramGeometry& g, double data_rate_mtps,
                              double rfm_service_time_ns)
{
  // mA x V x ns = pJ
  const double chips = static_cast<double>(g.channel_width_bits) / g.device_width_bits;
  const double t_burst = 16.0 / data_rate_mtps * 1000.0;
  EnergyConstants e;
  e.act_pj = chips * cur.vdd * (cur.idd0 - cur.idd3n) * t.nRAS;
  e.pre_pj = chips * cur.vdd * (cur.idd0 - cur.idd2n) * (t.nRC - t.nRAS);
  e.rd_pj = chips * cur.vdd * (cur.idd4r - cur.idd3n) * t_burst;
  e.wr_pj = chips * cur.vdd * (cur.idd4w - cur.idd3n) * t_burst;
  e.ref_pj = chips * cur.vdd * (cur.idd5b - cur.idd3n) * t.nRFC;
  e.rfm_pj = chips * cur.vdd * (cur.idd5b - cur.idd3n) * rfm_service_time_ns / g.banks_per_rank();
  e.active_standby_mw = chips * cur.vdd * (cur.idd3n - cur.idd2n) / g.banks_per_rank();
  return e;
}

const CacheConfig* SimConfig::level(std::string_view n) const
{
  auto it = std::find_if(cache_levels.begin(), cache_levels.end(), [n](const auto& c) { return c.name == n; });
  return it == cache_levels.end() ? nullptr : &*it;
}

CacheConfig* SimConfig::level(std::string_view n)
{
  return const_cast<CacheConfig*>(static_cast<const SimConfig*>(this)->level(n));
}

void SimConfig::validate() const
{
  need(core_count >= 1 && core_count <= 8, "core_count", "must be in 1..8");
  need(core.rob_capacity >= 1, "core.rob_capacity", "must be positive");
  need(core.base_cpi_non_mem >= 0, "core.base_cpi_non_mem", "must be nonnegative");
  need(core.mem_issue_width >= 1, "core.mem_issue_width", "must be positive");
  need(core.frequency_mhz > 0, "core.frequency_mhz", "must be positive");

  std::set<std::string> names;
  for (std::size_t i = 0; i < cache_levels.size(); ++i) {
    const auto& c = cache_levels[i];
    auto f = [&](std::string_view k) { return fmt::format("cache_levels[{}].{}", i, k); };
    need(!c.name.empty(), f("name"), "must not be empty");
    need(names.insert(c.name).second, f("name"), fmt::format("duplicate level '{}'", c.name));
    need(c.size_bytes > 0 && c.size_bytes % BLOCK_SIZE == 0, f("size_bytes"), "must be a positive multiple of 64");
    need(c.ways >= 1, f("ways"), "must be positive");
    need(c.lines(core_count) % c.ways == 0, f("ways"), "associativity must divide the line count");
    need(is_pow2(c.sets(core_count)), f("size_bytes"), "set count must be a power of two");
    need(c.latency >= 1, f("latency"), "must be positive");
    need(c.mshr_entries >= 1, f("mshr_entries"), "must be positive");
    need(c.lookups_per_cycle >= 1, f("lookups_per_cycle"), "must be positive");
    const bool llc = i + 1 == cache_levels.size();
    if (c.prefetcher == PrefetcherKind::orap || c.prefetcher == PrefetcherKind::orap_hsd)
      need(llc, f("prefetcher"), "ORAP runs at the last cache level only");
  }

  const auto& g = dram.geometry;
  for (auto [v, k] : {std::pair{g.channels, "channels"}, {g.ranks, "ranks"}, {g.bankgroups, "bankgroups"}, {g.banks, "banks"}, {g.rows, "rows"},
                      {g.columns, "columns"}, {g.channel_width_bits, "channel_width_bits"}, {g.device_width_bits, "device_width_bits"}})
    need(is_pow2(v), fmt::format("dram.geometry.{}", k), "must be a positive power of two");
  need(g.density_gbit >= 1, "dram.geometry.density_gbit", "must be positive");
  need(g.device_width_bits <= g.channel_width_bits, "dram.geometry.device_width_bits", "must not exceed the channel width");
  need(g.row_bytes() >= BLOCK_SIZE, "dram.geometry.columns", "a row must hold at least one 64 B block");
  {
    const std::uint64_t device_bits = std::uint64_t{g.rows} * g.columns * g.device_width_bits * g.banks_per_rank();
    need(device_bits == std::uint64_t{g.density_gbit} << 30, "dram.geometry.density_gbit",
         fmt::format("rows x columns x device width x banks = {} Gb, not {}", static_cast<double>(device_bits) / (1ull << 30), g.density_gbit));
  }

  const auto& t = dram.timings_ns;
  for (auto [v, k] : {std::pair{t.nCL, "nCL"}, {t.nRCD, "nRCD"}, {t.nRP, "nRP"}, {t.nRAS, "nRAS"}, {t.nRC, "nRC"}, {t.nWR, "nWR"}, {t.nRTP, "nRTP"},
                      {t.nRFC, "nRFC"}})
    need(v > 0, fmt::format("dram.timings_ns.{}", k), "must be strictly positive");
  need(t.nRC >= t.nRAS, "dram.timings_ns.nRC", "must be >= nRAS");
  need(t.nRAS >= t.nRCD, "dram.timings_ns.nRAS", "must be >= nRCD");
  need(dram.data_rate_mtps > 0, "dram.data_rate_mtps", "must be positive");
  need(dram.burst_length >= 1 && dram.burst_length % 2 == 0, "dram.burst_length", "must be a positive even number");
  need(dram.refresh_period_ms > 0, "dram.refresh_period_ms", "must be positive");
  need(dram.refresh_commands >= 1 && g.rows % dram.refresh_commands == 0, "dram.refresh_commands", "must divide the row count");
  need(dram.read_queue_size >= 1, "dram.read_queue_size", "must be positive");
  need(dram.write_queue_size >= 1, "dram.write_queue_size", "must be positive");
  need(dram.write_high_watermark <= dram.write_queue_size && dram.write_high_watermark >= 1, "dram.write_high_watermark",
       "must be in 1..write_queue_size");
  need(dram.write_low_watermark < dram.write_high_watermark, "dram.write_low_watermark", "must be below the high watermark");
  need(dram.prefetch_batch_quota >= 1, "dram.prefetch_batch_quota", "must be positive");
  const auto& rp = dram.row_policy;
  need(rp.min_timeout >= 1 && rp.min_timeout <= rp.initial_timeout && rp.initial_timeout <= rp.max_timeout, "dram.row_policy",
       "need 1 <= min_timeout <= initial_timeout <= max_timeout");
  for (auto [v, k] : {std::pair{dram.energy.act_pj, "act_pj"}, {dram.energy.pre_pj, "pre_pj"}, {dram.energy.rd_pj, "rd_pj"},
                      {dram.energy.wr_pj, "wr_pj"}, {dram.energy.ref_pj, "ref_pj"}, {dram.energy.rfm_pj, "rfm_pj"},
                      {dram.energy.active_standby_mw, "active_standby_mw"}})
    need(v >= 0, fmt::format("dram.energy.{}", k), "must be nonnegative");

  mapping.validate();
  for (auto [f, count, k] : {std::tuple{AddrField::channel, g.channels, "channels"}, {AddrField::rank, g.ranks, "ranks"},
                             {AddrField::bankgroup, g.bankgroups, "bankgroups"}, {AddrField::bank, g.banks, "banks"}, {AddrField::row, g.rows, "rows"},
                             {AddrField::column, g.blocks_per_row(), "blocks per row"}})
    need(mapping.field_width(f) == lg2(count), fmt::format("mapping.{}", to_string(f)),
         fmt::format("layout provides {} bits but geometry needs {} for {} {}", mapping.field_width(f), lg2(count), count, k));

  need(mitigation.rfm_threshold >= 1, "mitigation.rfm_threshold", "must be >= 1");
  need(mitigation.prac_threshold >= 1, "mitigation.prac_threshold", "must be >= 1");
  need(mitigation.blast_radius >= 1, "mitigation.blast_radius", "must be >= 1");
  need(mitigation.rfm_service_time_ns > 0, "mitigation.rfm_service_time_ns", "must be positive");
  need(mitigation.prac_recovery_time_ns > 0, "mitigation.prac_recovery_time_ns", "must be positive");
  need(mitigation.rfm_rows_per_command >= 1, "mitigation.rfm_rows_per_command", "must be >= 1");

  need(orap.issue_max >= 1 && orap.issue_max <= 7, "orap.issue_max", "must be in 1..7");
  need(orap.useful_max >= 1 && orap.useful_max <= orap.issue_max, "orap.useful_max", "must be in 1..issue_max");
  need(orap.confidence_increment >= 1 && orap.confidence_increment <= 255, "orap.confidence_increment", "must be in 1..255");
  need(orap.initial_confidence <= 255, "orap.initial_confidence", "must be <= 255");
  need(orap.gate_floor >= 0 && orap.gate_floor <= 1, "orap.gate_floor", "must be in [0, 1]");
  need(orap.gate_slope >= 0, "orap.gate_slope", "must be nonnegative");
  need(!orap.depth_thresholds.empty() && std::is_sorted(orap.depth_thresholds.begin(), orap.depth_thresholds.end()), "orap.depth_thresholds",
       "must be a nonempty nondecreasing list");
  need(is_pow2(orap.table_ways) && is_pow2(orap.table_entries) && orap.table_entries >= orap.table_ways, "orap.table_entries",
       "entries and ways must be powers of two with entries >= ways");
  need(is_pow2(orap.pot_ways) && is_pow2(orap.pot_entries) && orap.pot_entries >= orap.pot_ways, "orap.pot_entries",
       "entries and ways must be powers of two with entries >= ways");
  need(orap.blp_sub_buffers >= 1, "orap.blp_sub_buffers", "must be positive");
  need(orap.blp_entries_per_core >= orap.blp_sub_buffers, "orap.blp_entries_per_core", "must be >= blp_sub_buffers");
  need(orap.blp_issue_per_cycle >= 1, "orap.blp_issue_per_cycle", "must be positive");

  need(hsd.streams >= 1, "hsd.streams", "must be positive");
  need(hsd.max_depth >= 1 && hsd.max_depth <= 64, "hsd.max_depth", "must be in 1..64");
  need(hsd.epoch_length >= 1 && hsd.epoch_length <= 8192, "hsd.epoch_length", "must be in 1..8192");
  need(hsd.p_req_low > 0 && hsd.p_req_low <= hsd.p_req_high && hsd.p_req_high <= 1, "hsd.p_req_low", "need 0 < p_req_low <= p_req_high <= 1");
}

SimConfig parse_config(std::string_view text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("config parse error at byte {}: {}", e.byte, e.what()));
  }

  SimConfig cfg;
  Reader r(j, "config");
  r.get("name", cfg.name);
  r.get("core_count", cfg.core_count);
  r.get("rng_seed", cfg.rng_seed);
  if (auto c = r.child("core")) {
    Reader cr(*c, "core");
    cr.get("rob_capacity", cfg.core.rob_capacity);
    cr.get("base_cpi_non_mem", cfg.core.base_cpi_non_mem);
    cr.get("mem_issue_width", cfg.core.mem_issue_width);
    cr.get("frequency_mhz", cfg.core.frequency_mhz);
    cr.finish();
  }
  if (auto c = r.child("cache_levels")) {
    if (!c->is_array())
      throw ConfigError("cache_levels: expected an array");
    for (std::size_t i = 0; i < c->size(); ++i)
      cfg.cache_levels.push_back(read_cache((*c)[i], i));
  } else {
    cfg.cache_levels = default_caches();
  }
  bool explicit_energy = false;
  if (auto c = r.child("dram")) {
    read_dram(*c, cfg.dram);
    explicit_energy = c->contains("energy");
  }
  if (auto c = r.child("mitigation")) {
    Reader mr(*c, "mitigation");
    mr.get_enum("kind", cfg.mitigation.kind, parse_mitigation);
    mr.get("rfm_threshold", cfg.mitigation.rfm_threshold);
    mr.get("rfm_service_time_ns", cfg.mitigation.rfm_service_time_ns);
    mr.get("prac_threshold", cfg.mitigation.prac_threshold);
    mr.get("blast_radius", cfg.mitigation.blast_radius);
    mr.get("prac_recovery_time_ns", cfg.mitigation.prac_recovery_time_ns);
    mr.get("rfm_rows_per_command", cfg.mitigation.rfm_rows_per_command);
    mr.finish();
  }
  if (auto c = r.child("orap")) {
    Reader o(*c, "orap");
    auto& oc = cfg.orap;
    o.get("issue_max", oc.issue_max);
    o.get("useful_max", oc.useful_max);
    o.get("confidence_increment", oc.confidence_increment);
    o.get("initial_confidence", oc.initial_confidence);
    o.get("gate_floor", oc.gate_floor);
    o.get("gate_slope", oc.gate_slope);
    o.get("gate_full", oc.gate_full);
    o.get("depth_thresholds", oc.depth_thresholds);
    o.get_enum("confidence_mode", oc.confidence_mode, parse_confidence_mode);
    o.get("table_entries", oc.table_entries);
    o.get("table_ways", oc.table_ways);
    o.get("pot_entries", oc.pot_entries);
    o.get("pot_ways", oc.pot_ways);
    o.get("blp_sub_buffers", oc.blp_sub_buffers);
    o.get("blp_entries_per_core", oc.blp_entries_per_core);
    o.get("blp_issue_per_cycle", oc.blp_issue_per_cycle);
    o.get("mshr_demand_reserve", oc.mshr_demand_reserve);
    o.finish();
  }
  if (auto c = r.child("hsd")) {
    Reader h(*c, "hsd");
    h.get("streams", cfg.hsd.streams);
    h.get("max_depth", cfg.hsd.max_depth);
    h.get("epoch_length", cfg.hsd.epoch_length);
    h.get("p_req_high", cfg.hsd.p_req_high);
    h.get("p_req_low", cfg.hsd.p_req_low);
    h.finish();
  }

  const json* mj = r.child("mapping");
  r.finish();
  if (!explicit_energy)
    cfg.dram.energy = derive_energy(DeviceCurrents{}, cfg.dram.timings_ns, cfg.dram.geometry, cfg.dram.data_rate_mtps, cfg.mitigation.rfm_service_time_ns);
  if (mj) {
    if (!mj->is_object())
      throw ConfigError("mapping: expected an object");
    const bool has_preset = mj->contains("preset");
    const bool has_layout = mj->contains("layout");
    if (has_preset == has_layout)
      throw ConfigError("mapping: select exactly one of 'preset' or 'layout'");
    if (has_preset) {
      Reader mr(*mj, "mapping");
      mr.get("preset", cfg.mapping_preset);
      mr.finish();
    } else {
      cfg.mapping_preset.clear();
      cfg.mapping = read_layout(*mj, "custom");
    }
  }
  if (!cfg.mapping_preset.empty())
    cfg.mapping = make_mapping_preset(cfg.mapping_preset, cfg.dram.geometry);

  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path)
{
  std::ifstream f(path);
  if (!f)
    throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string serialize_config(const SimConfig& cfg)
{
  json j;
  j["name"] = cfg.name;
  j["core_count"] = cfg.core_count;
  j["rng_seed"] = cfg.rng_seed;
  j["core"] = {{"rob_capacity", cfg.core.rob_capacity},
               {"base_cpi_non_mem", cfg.core.base_cpi_non_mem},
               {"mem_issue_width", cfg.core.mem_issue_width},
               {"frequency_mhz", cfg.core.frequency_mhz}};
  j["cache_levels"] = json::array();
  for (const auto& c : cfg.cache_levels)
    j["cache_levels"].push_back({{"name", c.name},
                                 {"size_bytes", c.size_bytes},
                                 {"ways", c.ways},
                                 {"latency", c.latency},
                                 {"mshr_entries", c.mshr_entries},
                                 {"lookups_per_cycle", c.lookups_per_cycle},
                                 {"shared", c.shared},
                                 {"replacement", to_string(c.replacement)},
                                 {"prefetcher", to_string(c.prefetcher)}});

  const auto& d = cfg.dram;
  const auto& g = d.geometry;
  const auto& t = d.timings_ns;
  const auto& e = d.energy;
  j["dram"] = {{"geometry",
                {{"channels", g.channels},
                 {"ranks", g.ranks},
                 {"bankgroups", g.bankgroups},
                 {"banks", g.banks},
                 {"rows", g.rows},
                 {"columns", g.columns},
                 {"channel_width_bits", g.channel_width_bits},
                 {"device_width_bits", g.device_width_bits},
                 {"density_gbit", g.density_gbit}}},
               {"timings_ns",
                {{"nCL", t.nCL}, {"nRCD", t.nRCD}, {"nRP", t.nRP}, {"nRAS", t.nRAS}, {"nRC", t.nRC}, {"nWR", t.nWR}, {"nRTP", t.nRTP}, {"nRFC", t.nRFC}}},
               {"data_rate_mtps", d.data_rate_mtps},
               {"burst_length", d.burst_length},
               {"refresh_period_ms", d.refresh_period_ms},
               {"refresh_commands", d.refresh_commands},
               {"energy",
                {{"act_pj", e.act_pj},
                 {"pre_pj", e.pre_pj},
                 {"rd_pj", e.rd_pj},
                 {"wr_pj", e.wr_pj},
                 {"ref_pj", e.ref_pj},
                 {"rfm_pj", e.rfm_pj},
                 {"active_standby_mw", e.active_standby_mw}}},
               {"read_queue_size", d.read_queue_size},
               {"write_queue_size", d.write_queue_size},
               {"write_high_watermark", d.write_high_watermark},
               {"write_low_watermark", d.write_low_watermark},
               {"prefetch_batch_quota", d.prefetch_batch_quota},
               {"row_policy",
                {{"initial_timeout", d.row_policy.initial_timeout},
                 {"min_timeout", d.row_policy.min_timeout},
                 {"max_timeout", d.row_policy.max_timeout}}}};

  if (!cfg.mapping_preset.empty()) {
    j["mapping"] = {{"preset", cfg.mapping_preset}};
  } else {
    json layout = json::array();
    for (const auto& r : cfg.mapping.ranges())
      layout.push_back({{"field", to_string(r.field)}, {"lsb", r.lsb}, {"width", r.width}});
    json xors = json::array();
    for (const auto& x : cfg.mapping.xors())
      xors.push_back({{"field", to_string(x.field)}, {"bit", x.bit}, {"row_bits", x.row_bits}});
    j["mapping"] = {{"name", cfg.mapping.name()}, {"layout", layout}, {"xor", xors}};
  }

  const auto& m = cfg.mitigation;
  j["mitigation"] = {{"kind", to_string(m.kind)},
                     {"rfm_threshold", m.rfm_threshold},
                     {"rfm_service_time_ns", m.rfm_service_time_ns},
                     {"prac_threshold", m.prac_threshold},
                     {"blast_radius", m.blast_radius},
                     {"prac_recovery_time_ns", m.prac_recovery_time_ns},
                     {"rfm_rows_per_command", m.rfm_rows_per_command}};
  const auto& o = cfg.orap;
  j["orap"] = {{"issue_max", o.issue_max},
               {"useful_max", o.useful_max},
               {"confidence_increment", o.confidence_increment},
               {"initial_confidence", o.initial_confidence},
               {"gate_floor", o.gate_floor},
               {"gate_slope", o.gate_slope},
               {"gate_full", o.gate_full},
               {"depth_thresholds", o.depth_thresholds},
               {"confidence_mode", to_string(o.confidence_mode)},
               {"table_entries", o.table_entries},
               {"table_ways", o.table_ways},
               {"pot_entries", o.pot_entries},
               {"pot_ways", o.pot_ways},
               {"blp_sub_buffers", o.blp_sub_buffers},
               {"blp_entries_per_core", o.blp_entries_per_core},
               {"blp_issue_per_cycle", o.blp_issue_per_cycle},
               {"mshr_demand_reserve", o.mshr_demand_reserve}};
  j["hsd"] = {{"streams", cfg.hsd.streams},
              {"max_depth", cfg.hsd.max_depth},
              {"epoch_length", cfg.hsd.epoch_length},
              {"p_req_high", cfg.hsd.p_req_high},
              {"p_req_low", cfg.hsd.p_req_low}};
  return j.dump(2) + "\n";
}

void apply_mitigation(SimConfig& cfg, MitigationKind kind)
{
  cfg.mitigation.kind = kind;
  cfg.dram.timings_ns = kind == MitigationKind::prac ? prac_timings() : standard_timings();
  cfg.dram.energy = derive_energy(DeviceCurrents{}, cfg.dram.timings_ns, cfg.dram.geometry, cfg.dram.data_rate_mtps, cfg.mitigation.rfm_service_time_ns);
}

void set_prefetcher(SimConfig& cfg, std::string_view level, PrefetcherKind kind)
{
  auto* c = cfg.level(level);
  if (!c)
    throw ConfigError(fmt::format("no cache level named '{}'", level));
  c->prefetcher = kind;
}

std::vector<std::string> preset_names() { return {"paper-1core", "paper-rfm", "paper-prac", "paper-8core", "downscaled-1gib"}; }

SimConfig make_preset(std::string_view name)
{
  SimConfig cfg;
  cfg.name = std::string(name);
  cfg.cache_levels = default_caches();
  MitigationKind kind = MitigationKind::none;

  if (name == "paper-1core") {
  } else if (name == "paper-rfm") {
    kind = MitigationKind::rfm;
  } else if (name == "paper-prac") {
    kind = MitigationKind::prac;
  } else if (name == "paper-8core") {
    cfg.core_count = 8;
    auto& g = cfg.dram.geometry;
    g.channels = 4;
    g.ranks = 2;
    g.bankgroups = 8;
    g.device_width_bits = 8;
  } else if (name == "downscaled-1gib") {
    cfg.dram.geometry.rows = 8192;
    cfg.dram.geometry.density_gbit = 2;
  } else {
    throw ConfigError(fmt::format("unknown preset '{}'", name));
  }
  apply_mitigation(cfg, kind);
  cfg.mapping = make_mapping_preset(cfg.mapping_preset, cfg.dram.geometry);
  cfg.validate();
  return cfg;
}
} // namespace orapsim
