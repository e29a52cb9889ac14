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

#include "orapsim/trace.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fmt/core.h>
#include <fstream>
#include <iterator>
#include <random>
#include <stdexcept>

#include "orapsim/util.hpp"

namespace orapsim
{
namespace
{
constexpr std::array<char, 8> magic{'O', 'R', 'A', 'P', 'T', 'R', 'C', '\0'};
constexpr std::uint64_t store_bit = std::uint64_t{1} << 63;
constexpr std::uint64_t ip_base = 0x401000;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at)
{
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i)
    v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at)
{
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i)
    v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

std::uint64_t stream_ip(std::uint32_t s) { return ip_base + 0x40 * std::uint64_t{s}; }
} // namespace

std::string_view to_string(TraceGenerator g)
{
  switch (g) {
  case TraceGenerator::stream:
    return "stream";
  case TraceGenerator::stride:
    return "stride";
  case TraceGenerator::cyclic:
    return "cyclic";
  case TraceGenerator::random:
    return "random";
  case TraceGenerator::mixed:
    return "mixed";
  }
  return "?";
}

TraceGenerator parse_generator(std::string_view s)
{
  for (auto g : {TraceGenerator::stream, TraceGenerator::stride, TraceGenerator::cyclic, TraceGenerator::random, TraceGenerator::mixed})
    if (to_string(g) == s)
      return g;
  throw std::invalid_argument(fmt::format("unknown trace generator '{}'", s));
}

std::vector<TraceRecord> generate(const TraceSpec& spec, std::uint64_t physical_size)
{
  if (spec.length_records < 1)
    throw std::invalid_argument("trace spec: length_records must be >= 1");
  if (spec.stride_bytes == 0 || spec.stride_bytes % BLOCK_SIZE != 0)
    throw std::invalid_argument("trace spec: stride_bytes must be a nonzero multiple of 64");
  if (spec.stream_count < 1 || spec.ip_count < 1)
    throw std::invalid_argument("trace spec: stream_count and ip_count must be >= 1");
  if (spec.footprint_bytes < BLOCK_SIZE)
    throw std::invalid_argument("trace spec: footprint must hold at least one block");
  if (spec.base_address > physical_size || spec.footprint_bytes > physical_size - spec.base_address)
    throw std::out_of_range(fmt::format("trace spec: footprint [{:#x}, +{:#x}) exceeds physical memory of {:#x} bytes", spec.base_address,
                                        spec.footprint_bytes, physical_size));

  std::mt19937_64 rng{spec.seed};
  std::vector<TraceRecord> out;
  out.reserve(spec.length_records);

  const std::uint64_t footprint_blocks = spec.footprint_bytes / BLOCK_SIZE;
  const std::uint64_t region = (spec.footprint_bytes / spec.stream_count) & ~(BLOCK_SIZE - 1);
  const std::uint64_t per_stream_capacity = region / spec.stride_bytes;
  std::vector<std::uint64_t> cursor(spec.stream_count, 0);

  auto stream_step = [&](std::uint32_t s) -> TraceRecord {
    if (cursor[s] >= per_stream_capacity)
      throw std::invalid_argument(fmt::format("trace spec: stream {} exhausted its {}-byte region; raise footprint_bytes", s, region));
    TraceRecord r;
    r.ip = stream_ip(s % std::max(spec.ip_count, spec.stream_count));
    r.address = spec.base_address + s * region + cursor[s] * spec.stride_bytes;
    ++cursor[s];
    return r;
  };

  for (std::uint64_t i = 0; i < spec.length_records; ++i) {
    TraceRecord r;
    switch (spec.generator) {
    case TraceGenerator::stream:
    case TraceGenerator::stride: {
      auto s = spec.stream_count == 1 ? 0u : static_cast<std::uint32_t>(rng() % spec.stream_count);
      r = stream_step(s);
      break;
    }
    case TraceGenerator::cyclic: {
      const std::uint64_t n = std::max<std::uint64_t>(1, spec.footprint_bytes / spec.stride_bytes);
      r.address = spec.base_address + (i % n) * spec.stride_bytes;
      r.ip = stream_ip(0);
      break;
    }
    case TraceGenerator::random:
      r.address = spec.base_address + (rng() % footprint_blocks) * BLOCK_SIZE;
      r.ip = stream_ip(static_cast<std::uint32_t>(rng() % spec.ip_count));
      break;
    case TraceGenerator::mixed:
      if (unit_real(rng) < spec.random_fraction) {
        r.address = spec.base_address + (rng() % footprint_blocks) * BLOCK_SIZE;
        r.ip = stream_ip(spec.stream_count + static_cast<std::uint32_t>(rng() % spec.ip_count));
      } else {
        r = stream_step(spec.stream_count == 1 ? 0u : static_cast<std::uint32_t>(rng() % spec.stream_count));
      }
      break;
    }
    r.instr_index = (i + 1) * spec.instr_gap;
    if (spec.store_fraction > 0 && unit_real(rng) < spec.store_fraction)
      r.kind = AccessKind::store;
    out.push_back(r);
  }
  return out;
}

std::vector<std::uint8_t> encode_trace(std::span<const TraceRecord> records)
{
  std::vector<std::uint8_t> out;
  out.reserve(TRACE_HEADER_BYTES + records.size() * TRACE_RECORD_BYTES);
  for (char ch : magic)
    out.push_back(static_cast<std::uint8_t>(ch));
  put_u32(out, TRACE_VERSION);
  put_u32(out, 0);
  for (const auto& r : records) {
    if (r.address & store_bit)
      throw std::invalid_argument(fmt::format("address {:#x} does not fit in 63 bits", r.address));
    put_u64(out, r.instr_index);
    put_u64(out, r.ip & bitmask(48));
    put_u64(out, r.address | (r.kind == AccessKind::store ? store_bit : 0));
  }
  return out;
}

std::vector<TraceRecord> decode_trace(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() < TRACE_HEADER_BYTES || !std::equal(magic.begin(), magic.end(), bytes.begin()))
    throw TraceError("trace header missing or has bad magic", 0);
  if (auto v = get_u32(bytes, 8); v != TRACE_VERSION)
    throw TraceError(fmt::format("unsupported trace version {}", v), 8);

  const std::size_t body = bytes.size() - TRACE_HEADER_BYTES;
  const std::size_t count = body / TRACE_RECORD_BYTES;
  std::vector<TraceRecord> out;
  out.reserve(count);
  std::uint64_t last_instr = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = TRACE_HEADER_BYTES + i * TRACE_RECORD_BYTES;
    TraceRecord r;
    r.instr_index = get_u64(bytes, at);
    r.ip = get_u64(bytes, at + 8);
    auto addr = get_u64(bytes, at + 16);
    r.kind = (addr & store_bit) ? AccessKind::store : AccessKind::load;
    r.address = addr & ~store_bit;
    if (r.ip > bitmask(48))
      throw TraceError(fmt::format("malformed record {}: ip exceeds 48 bits", i), at);
    if (r.instr_index < last_instr)
      throw TraceError(fmt::format("malformed record {}: instruction index decreases", i), at);
    last_instr = r.instr_index;
    out.push_back(r);
  }
  if (body % TRACE_RECORD_BYTES != 0)
    throw TraceError(fmt::format("truncated record after {} complete records", count), TRACE_HEADER_BYTES + count * TRACE_RECORD_BYTES);
  return out;
}

void write_trace(const std::filesystem::path& path, std::span<const TraceRecord> records)
{
  auto bytes = encode_trace(records);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f)
    throw std::runtime_error(fmt::format("write to {} failed", path.string()));
}

std::vector<TraceRecord> read_trace(const std::filesystem::path& path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error(fmt::format("cannot open {} for reading", path.string()));
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  return decode_trace(bytes);
}
} // namespace orapsim
