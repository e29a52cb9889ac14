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

#ifndef ORAPSIM_ADDRMAP_HPP
#define ORAPSIM_ADDRMAP_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace orapsim
{
struct DramGeometry;
struct TraceRecord;

enum class AddrField : std::uint8_t { offset, column, channel, rank, bankgroup, bank, row };

std::string_view to_string(AddrField f);
std::optional<AddrField> parse_addr_field(std::string_view s);

/// A contiguous run of physical-address bits assigned to (part of) one DRAM coordinate.
/// Runs belonging to the same field stack from low to high address bits.
struct BitRange {
  AddrField field;
  unsigned lsb;
  unsigned width;

  bool operator==(const BitRange&) const = default;
};

/// Bank-index permutation: `field` bit `bit` is XORed with the listed row bits.
struct XorTerm {
  AddrField field; // bank or bankgroup
  unsigned bit;
  std::vector<unsigned> row_bits;

  bool operator==(const XorTerm&) const = default;
};

/// Decomposed DRAM location. `column` is in cache-block units within the row.
struct DramCoord {
  std::uint32_t channel = 0;
  std::uint32_t rank = 0;
  std::uint32_t bankgroup = 0;
  std::uint32_t bank = 0;
  std::uint32_t row = 0;
  std::uint32_t column = 0;
  std::uint32_t cluster_index = 0;

  bool operator==(const DramCoord&) const = default;
  bool same_row(const DramCoord& o) const
  {
    return channel == o.channel && rank == o.rank && bankgroup == o.bankgroup && bank == o.bank && row == o.row;
  }
};

class MappingDescriptor
{
public:
  MappingDescriptor() = default;
  MappingDescriptor(std::string name, std::vector<BitRange> ranges, std::vector<XorTerm> xors);

  // Throws ConfigError naming the problem when ranges overlap, leave holes, or the XOR terms
  // reference bits that do not exist.
  void validate() const;

  const std::string& name() const { return name_; }
  const std::vector<BitRange>& ranges() const { return ranges_; }
  const std::vector<XorTerm>& xors() const { return xors_; }

  unsigned address_bits() const { return address_bits_; }
  std::uint64_t physical_size() const { return std::uint64_t{1} << address_bits_; }
  unsigned field_width(AddrField f) const { return widths_[static_cast<std::size_t>(f)]; }
  std::uint64_t field_count(AddrField f) const { return std::uint64_t{1} << field_width(f); }

  // Column bits sitting directly above the block offset form a column cluster.
  unsigned cluster_width() const { return cluster_width_; }
  std::uint32_t cluster_size() const { return 1u << cluster_width_; }
  std::uint32_t clusters_per_row() const { return 1u << (field_width(AddrField::column) - cluster_width_); }
  std::uint32_t blocks_per_row() const { return 1u << field_width(AddrField::column); }

  std::uint32_t flat_bank(const DramCoord& c) const;
  std::uint64_t row_id(const DramCoord& c) const { return (std::uint64_t{flat_bank(c)} << field_width(AddrField::row)) | c.row; }
  std::uint32_t total_banks() const;

  bool operator==(const MappingDescriptor& o) const { return name_ == o.name_ && ranges_ == o.ranges_ && xors_ == o.xors_; }

private:
  std::string name_;
  std::vector<BitRange> ranges_;
  std::vector<XorTerm> xors_;
  unsigned address_bits_ = 0;
  unsigned cluster_width_ = 0;
  unsigned widths_[7] = {};
};

/// Throws std::out_of_range when `address` is outside the mapped physical space.
DramCoord decompose(const MappingDescriptor& m, std::uint64_t address);
/// Byte address of the first byte of `coord`'s block. `cluster_index` is ignored.
std::uint64_t compose(const MappingDescriptor& m, const DramCoord& coord);

/// Base addresses of the next `n` column clusters in the same row, stopping at the row end.
std::vector<std::uint64_t> next_clusters(const MappingDescriptor& m, const DramCoord& coord, std::uint32_t n);
/// Every block address inside the cluster `cluster` of `coord`'s row.
std::vector<std::uint64_t> cluster_blocks(const MappingDescriptor& m, const DramCoord& coord, std::uint32_t cluster);

struct MappingAnalysis {
  double est_blp = 0;                // mean distinct banks per window of consecutive accesses
  double est_rowbuffer_hits = 0;     // fraction of accesses whose bank last saw the same row
  double consecutive_same_row = 0;   // fraction of adjacent access pairs sharing a row
  double max_bank_deviation = 0;     // max |count/expected - 1| over banks
  std::vector<std::uint64_t> bank_histogram;
  std::uint32_t banks_touched = 0;
};

MappingAnalysis analyze_mapping(const MappingDescriptor& m, std::span<const TraceRecord> trace, std::uint32_t window = 16);

// Presets sized from the DRAM geometry.
//  "row-hit": column bits lowest, all bank bits above (favours rowbuffer hits)
//  "blp":     channel/bank bits lowest, column bits above (favours bank parallelism)
//  "zen4":    one column bit above the offset, bank bits (XOR-permuted), remaining column bits, rank, row
MappingDescriptor make_mapping_preset(std::string_view preset, const DramGeometry& geom);
std::vector<std::string> mapping_preset_names();

/// Human-readable bit layout table, most significant bit first.
std::string describe_layout(const MappingDescriptor& m);
} // namespace orapsim

#endif
