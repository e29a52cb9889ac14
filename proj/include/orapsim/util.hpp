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

#ifndef ORAPSIM_UTIL_HPP
#define ORAPSIM_UTIL_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace orapsim
{
inline constexpr unsigned LOG2_BLOCK_SIZE = 6;
inline constexpr std::uint64_t BLOCK_SIZE = std::uint64_t{1} << LOG2_BLOCK_SIZE;
inline constexpr unsigned LOG2_SMALL_PAGE = 12;
inline constexpr unsigned LOG2_LARGE_PAGE = 21;
inline constexpr std::uint64_t BLOCKS_PER_SMALL_PAGE = std::uint64_t{1} << (LOG2_SMALL_PAGE - LOG2_BLOCK_SIZE);

using cycle_t = std::uint64_t;

constexpr std::uint64_t block_number(std::uint64_t addr) { return addr >> LOG2_BLOCK_SIZE; }
constexpr std::uint64_t block_base(std::uint64_t addr) { return addr & ~(BLOCK_SIZE - 1); }
constexpr std::uint64_t small_page(std::uint64_t addr) { return addr >> LOG2_SMALL_PAGE; }
constexpr std::uint64_t large_page(std::uint64_t addr) { return addr >> LOG2_LARGE_PAGE; }

constexpr bool is_pow2(std::uint64_t x) { return x != 0 && std::has_single_bit(x); }
constexpr unsigned lg2(std::uint64_t x) { return x == 0 ? 0 : static_cast<unsigned>(std::bit_width(x) - 1); }
constexpr std::uint64_t bitmask(unsigned width) { return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1; }

// Fold a wide identifier down to 16 bits.
constexpr std::uint16_t fold16(std::uint64_t x)
{
  x ^= x >> 32;
  x ^= x >> 16;
  return static_cast<std::uint16_t>(x & 0xffff);
}

// Timings are specified in ns; the controller counts whole cycles.
inline cycle_t ns_to_cycles(double ns, double clock_mhz)
{
  double cycles = ns * clock_mhz / 1000.0;
  return static_cast<cycle_t>(std::ceil(cycles - 1e-9));
}

// Uniform [0,1) from a 64-bit engine, independent of the standard library's distribution code.
inline double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename T>
constexpr T sat_inc(T v, T max)
{
  return v < max ? static_cast<T>(v + 1) : v;
}

template <typename T>
constexpr T sat_dec(T v)
{
  return v > 0 ? static_cast<T>(v - 1) : v;
}

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class TraceError : public std::runtime_error
{
public:
  TraceError(const std::string& what, std::uint64_t offset) : std::runtime_error(what), byte_offset(offset) {}
  std::uint64_t byte_offset;
};
} // namespace orapsim

#endif
