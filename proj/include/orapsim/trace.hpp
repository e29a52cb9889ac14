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

#ifndef ORAPSIM_TRACE_HPP
#define ORAPSIM_TRACE_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace orapsim
{
enum class AccessKind : std::uint8_t { load, store };

struct TraceRecord {
  std::uint64_t instr_index = 0;
  std::uint64_t ip = 0; // 48 significant bits
  std::uint64_t address = 0;
  AccessKind kind = AccessKind::load;

  bool operator==(const TraceRecord&) const = default;
};

enum class TraceGenerator : std::uint8_t { stream, stride, cyclic, random, mixed };

std::string_view to_string(TraceGenerator g);
TraceGenerator parse_generator(std::string_view s);

struct TraceSpec {
  TraceGenerator generator = TraceGenerator::stream;
  std::uint64_t footprint_bytes = 1 << 20;
  std::uint64_t stride_bytes = 64;
  std::uint32_t stream_count = 1;
  std::uint32_t ip_count = 1;
  std::uint64_t length_records = 1000;
  std::uint64_t seed = 1;
  std::uint64_t base_address = 0;
  std::uint32_t instr_gap = 4;       // instructions per memory record
  double store_fraction = 0.0;
  double random_fraction = 0.5;      // mixed only: share of records drawn uniformly
};

/// Throws std::invalid_argument on a malformed spec and std::out_of_range when the footprint does
/// not fit in `physical_size` bytes.
std::vector<TraceRecord> generate(const TraceSpec& spec, std::uint64_t physical_size = UINT64_MAX);

// 16-byte header ("ORAPTRC\0", u32 version, u32 reserved) followed by 24-byte little-endian records:
// instr_index, ip, address with bit 63 set for stores.
inline constexpr std::uint32_t TRACE_VERSION = 1;
inline constexpr std::size_t TRACE_HEADER_BYTES = 16;
inline constexpr std::size_t TRACE_RECORD_BYTES = 24;

void write_trace(const std::filesystem::path& path, std::span<const TraceRecord> records);
/// Throws TraceError carrying the byte offset of the first byte that could not be decoded.
std::vector<TraceRecord> read_trace(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_trace(std::span<const TraceRecord> records);
std::vector<TraceRecord> decode_trace(std::span<const std::uint8_t> bytes);
} // namespace orapsim

#endif
