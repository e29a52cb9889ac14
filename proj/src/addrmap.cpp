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

#include "orapsim/addrmap.hpp"

#include <algorithm>
#include <array>
#include <fmt/core.h>
#include <stdexcept>
#include <unordered_set>

#include "orapsim/config.hpp"
#include "orapsim/trace.hpp"
#include "orapsim/util.hpp"

namespace orapsim
{
namespace
{
constexpr std::array<std::string_view, 7> field_names{"offset", "column", "channel", "rank", "bankgroup", "bank", "row"};

std::size_t idx(AddrField f) { return static_cast<std::size_t>(f); }

std::uint32_t& coord_field(DramCoord& c, AddrField f)
{
  switch (f) {
  case AddrField::channel:
    return c.channel;
  case AddrField::rank:
    return c.rank;
  case AddrField::bankgroup:
    return c.bankgroup;
  case AddrField::bank:
    return c.bank;
  case AddrField::row:
    return c.row;
  case AddrField::column:
    return c.column;
  case AddrField::offset:
    break;
  }
  throw std::logic_error("offset has no coordinate field");
}

std::uint32_t xor_bits(const MappingDescriptor& m, AddrField f, std::uint32_t row)
{
  std::uint32_t mask = 0;
  for (const auto& term : m.xors()) {
    if (term.field != f)
      continue;
    std::uint32_t parity = 0;
    for (auto rb : term.row_bits)
      parity ^= (row >> rb) & 1u;
    mask |= parity << term.bit;
  }
  return mask;
}
} // namespace

std::string_view to_string(AddrField f) { return field_names.at(idx(f)); }

std::optional<AddrField> parse_addr_field(std::string_view s)
{
  for (std::size_t i = 0; i < field_names.size(); ++i)
    if (field_names[i] == s)
      return static_cast<AddrField>(i);
  return std::nullopt;
}

MappingDescriptor::MappingDescriptor(std::string name, std::vector<BitRange> ranges, std::vector<XorTerm> xors)
    : name_(std::move(name)), ranges_(std::move(ranges)), xors_(std::move(xors))
{
  std::sort(ranges_.begin(), ranges_.end(), [](const auto& a, const auto& b) { return a.lsb < b.lsb; });
  for (const auto& r : ranges_) {
    widths_[idx(r.field)] += r.width;
    address_bits_ = std::max(address_bits_, r.lsb + r.width);
  }
  for (const auto& r : ranges_)
    if (r.field == AddrField::column && r.lsb == LOG2_BLOCK_SIZE)
      cluster_width_ = r.width;
  validate();
}

void MappingDescriptor::validate() const
{
  unsigned next = 0;
  for (const auto& r : ranges_) {
    if (r.width == 0)
      throw ConfigError(fmt::format("mapping.layout: {} range at bit {} has zero width", to_string(r.field), r.lsb));
    if (r.lsb != next)
      throw ConfigError(fmt::format("mapping.layout: bit ranges must be disjoint and contiguous; expected a range at bit {}, found {} at bit {}",
                                    next, to_string(r.field), r.lsb));
    next = r.lsb + r.width;
  }
  if (address_bits_ > 63)
    throw ConfigError("mapping.layout: more than 63 address bits");
  if (widths_[idx(AddrField::offset)] != LOG2_BLOCK_SIZE || ranges_.empty() || ranges_.front().field != AddrField::offset)
    throw ConfigError("mapping.layout: block offset must occupy the low 6 bits");
  for (const auto& t : xors_) {
    if (t.field != AddrField::bank && t.field != AddrField::bankgroup)
      throw ConfigError(fmt::format("mapping.xor: only bank and bankgroup bits may be permuted, not {}", to_string(t.field)));
    if (t.bit >= widths_[idx(t.field)])
      throw ConfigError(fmt::format("mapping.xor: {} bit {} does not exist", to_string(t.field), t.bit));
    for (auto rb : t.row_bits)
      if (rb >= widths_[idx(AddrField::row)])
        throw ConfigError(fmt::format("mapping.xor: row bit {} does not exist", rb));
  }
}

std::uint32_t MappingDescriptor::total_banks() const
{
  return 1u << (field_width(AddrField::channel) + field_width(AddrField::rank) + field_width(AddrField::bankgroup) + field_width(AddrField::bank));
}

std::uint32_t MappingDescriptor::flat_bank(const DramCoord& c) const
{
  std::uint32_t id = c.channel;
  id = (id << field_width(AddrField::rank)) | c.rank;
  id = (id << field_width(AddrField::bankgroup)) | c.bankgroup;
  id = (id << field_width(AddrField::bank)) | c.bank;
  return id;
}

DramCoord decompose(const MappingDescriptor& m, std::uint64_t address)
{
  if (address >= m.physical_size())
    throw std::out_of_range(fmt::format("address {:#x} outside {}-bit physical space", address, m.address_bits()));

  DramCoord c;
  std::array<unsigned, 7> filled{};
  for (const auto& r : m.ranges()) {
    auto part = static_cast<std::uint32_t>((address >> r.lsb) & bitmask(r.width));
    if (r.field != AddrField::offset)
      coord_field(c, r.field) |= part << filled[idx(r.field)];
    filled[idx(r.field)] += r.width;
  }
  c.bank ^= xor_bits(m, AddrField::bank, c.row);
  c.bankgroup ^= xor_bits(m, AddrField::bankgroup, c.row);
  c.cluster_index = c.column >> m.cluster_width();
  return c;
}

std::uint64_t compose(const MappingDescriptor& m, const DramCoord& coord)
{
  DramCoord raw = coord;
  raw.bank ^= xor_bits(m, AddrField::bank, coord.row);
  raw.bankgroup ^= xor_bits(m, AddrField::bankgroup, coord.row);

  std::uint64_t address = 0;
  std::array<unsigned, 7> used{};
  for (const auto& r : m.ranges()) {
    if (r.field != AddrField::offset) {
      std::uint64_t part = (coord_field(raw, r.field) >> used[idx(r.field)]) & bitmask(r.width);
      address |= part << r.lsb;
    }
    used[idx(r.field)] += r.width;
  }
  return address;
}

std::vector<std::uint64_t> next_clusters(const MappingDescriptor& m, const DramCoord& coord, std::uint32_t n)
{
  std::vector<std::uint64_t> out;
  auto cluster = coord.column >> m.cluster_width();
  for (std::uint32_t k = 1; k <= n && cluster + k < m.clusters_per_row(); ++k) {
    DramCoord next = coord;
    next.column = (cluster + k) << m.cluster_width();
    next.cluster_index = cluster + k;
    out.push_back(compose(m, next));
  }
  return out;
}

std::vector<std::uint64_t> cluster_blocks(const MappingDescriptor& m, const DramCoord& coord, std::uint32_t cluster)
{
  std::vector<std::uint64_t> out;
  if (cluster >= m.clusters_per_row())
    return out;
  out.reserve(m.cluster_size());
  DramCoord c = coord;
  for (std::uint32_t i = 0; i < m.cluster_size(); ++i) {
    c.column = (cluster << m.cluster_width()) | i;
    out.push_back(compose(m, c));
  }
  return out;
}

MappingAnalysis analyze_mapping(const MappingDescriptor& m, std::span<const TraceRecord> trace, std::uint32_t window)
{
  MappingAnalysis res;
  res.bank_histogram.assign(m.total_banks(), 0);
  if (trace.empty() || window == 0)
    return res;

  std::vector<std::int64_t> last_row(m.total_banks(), -1);
  std::uint64_t row_hits = 0;
  std::uint64_t consecutive = 0;
  std::uint64_t windows = 0;
  std::uint64_t distinct_sum = 0;
  std::unordered_set<std::uint32_t> in_window;
  std::optional<std::uint64_t> prev_row;

  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto c = decompose(m, trace[i].address % m.physical_size());
    auto bank = m.flat_bank(c);
    auto rid = m.row_id(c);
    ++res.bank_histogram[bank];
    if (last_row[bank] == static_cast<std::int64_t>(c.row))
      ++row_hits;
    last_row[bank] = c.row;
    if (prev_row && *prev_row == rid)
      ++consecutive;
    prev_row = rid;

    in_window.insert(bank);
    if ((i + 1) % window == 0 || i + 1 == trace.size()) {
      distinct_sum += in_window.size();
      ++windows;
      in_window.clear();
    }
  }

  const double n = static_cast<double>(trace.size());
  res.est_rowbuffer_hits = static_cast<double>(row_hits) / n;
  res.consecutive_same_row = trace.size() > 1 ? static_cast<double>(consecutive) / (n - 1) : 0.0;
  res.est_blp = static_cast<double>(distinct_sum) / static_cast<double>(windows);
  const double expected = n / static_cast<double>(res.bank_histogram.size());
  for (auto count : res.bank_histogram) {
    res.max_bank_deviation = std::max(res.max_bank_deviation, std::abs(static_cast<double>(count) / expected - 1.0));
    res.banks_touched += count > 0;
  }
  return res;
}

MappingDescriptor make_mapping_preset(std::string_view preset, const DramGeometry& g)
{
  const unsigned ch = lg2(g.channels);
  const unsigned ra = lg2(g.ranks);
  const unsigned bg = lg2(g.bankgroups);
  const unsigned ba = lg2(g.banks);
  const unsigned ro = lg2(g.rows);
  const unsigned co = lg2(g.blocks_per_row());

  std::vector<BitRange> ranges;
  unsigned pos = 0;
  auto push = [&](AddrField f, unsigned w) {
    if (w > 0) {
      ranges.push_back({f, pos, w});
      pos += w;
    }
  };
  std::vector<XorTerm> xors;

  push(AddrField::offset, LOG2_BLOCK_SIZE);
  if (preset == "row-hit") {
    push(AddrField::column, co);
    push(AddrField::channel, ch);
    push(AddrField::bank, ba);
    push(AddrField::bankgroup, bg);
    push(AddrField::rank, ra);
    push(AddrField::row, ro);
  } else if (preset == "blp") {
    push(AddrField::channel, ch);
    push(AddrField::bank, ba);
    push(AddrField::bankgroup, bg);
    push(AddrField::rank, ra);
    push(AddrField::column, co);
    push(AddrField::row, ro);
  } else if (preset == "zen4") {
    const unsigned cluster = co > 0 ? 1 : 0;
    push(AddrField::column, cluster);
    push(AddrField::channel, ch);
    push(AddrField::bank, ba);
    push(AddrField::bankgroup, bg);
    push(AddrField::column, co - cluster);
    push(AddrField::rank, ra);
    push(AddrField::row, ro);
    // each bank-index bit j is XORed with row bits j and j + (bank index width)
    const unsigned index_bits = ba + bg;
    for (unsigned j = 0; j < index_bits; ++j) {
      XorTerm t{j < ba ? AddrField::bank : AddrField::bankgroup, j < ba ? j : j - ba, {}};
      for (unsigned rb : {j, j + index_bits})
        if (rb < ro)
          t.row_bits.push_back(rb);
      if (!t.row_bits.empty())
        xors.push_back(std::move(t));
    }
  } else {
    throw ConfigError(fmt::format("mapping.preset: unknown preset '{}'", preset));
  }
  return MappingDescriptor(std::string(preset), std::move(ranges), std::move(xors));
}

std::vector<std::string> mapping_preset_names() { return {"row-hit", "blp", "zen4"}; }

std::string describe_layout(const MappingDescriptor& m)
{
  std::string out = fmt::format("mapping {} ({} address bits, {} B)\n", m.name(), m.address_bits(), m.physical_size());
  out += fmt::format("  {:<10} {:>7}  {}\n", "field", "bits", "note");
  std::array<unsigned, 7> used{};
  std::vector<std::string> lines;
  for (const auto& r : m.ranges()) {
    std::string note;
    auto base = used[static_cast<std::size_t>(r.field)];
    if (r.field == AddrField::column)
      note = base == 0 && r.lsb == LOG2_BLOCK_SIZE ? fmt::format("column-cluster ({} blocks/cluster)", m.cluster_size())
                                                 : fmt::format("upper column ({} clusters/row)", m.clusters_per_row());
    else if (r.field != AddrField::offset && r.width > 0)
      note = fmt::format("{}[{}:{}]", to_string(r.field), base + r.width - 1, base);
    for (const auto& t : m.xors()) {
      if (t.field == r.field && t.bit >= base && t.bit < base + r.width) {
        note += fmt::format(" {}{}^row{{", to_string(t.field), t.bit);
        for (std::size_t i = 0; i < t.row_bits.size(); ++i)
          note += fmt::format("{}{}", i ? "," : "", t.row_bits[i]);
        note += "}";
      }
    }
    lines.push_back(fmt::format("  {:<10} {:>3}:{:<3}  {}\n", to_string(r.field), r.lsb + r.width - 1, r.lsb, note));
    used[static_cast<std::size_t>(r.field)] += r.width;
  }
  for (auto it = lines.rbegin(); it != lines.rend(); ++it)
    out += *it;
  return out;
}
} // namespace orapsim
