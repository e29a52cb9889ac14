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

#ifndef ORAPSIM_BASELINE_PF_HPP
#define ORAPSIM_BASELINE_PF_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "orapsim/cache.hpp"

namespace orapsim
{
inline constexpr std::uint32_t STRIDE_DEGREE = 4;
inline constexpr std::uint32_t STRIDE_CONFIRMATIONS = 2;
inline constexpr std::uint32_t STRIDE_TABLE_ENTRIES = 64;

// Block after `address`, unless that leaves the 2 MiB page.
std::optional<std::uint64_t> next_line_target(std::uint64_t address);

// Per-IP constant-stride detector. A stride must be seen twice in a row before it issues.
class StrideTable
{
public:
  std::vector<std::uint64_t> access(std::uint64_t ip, std::uint64_t address);

private:
  struct Entry {
    std::uint64_t ip = 0;
    std::uint64_t last = 0;
    std::int64_t stride = 0;
    std::uint32_t seen = 0;
    std::uint64_t lru = 0;
  };
  std::vector<Entry> entries_;
  std::uint64_t clock_ = 0;
};

class NextLinePrefetcher : public CachePrefetcher
{
public:
  explicit NextLinePrefetcher(Origin origin) : origin_(origin) {}
  void on_access(Cache& c, const Request& r, bool hit, cycle_t now) override;

private:
  Origin origin_;
};

class StridePrefetcher : public CachePrefetcher
{
public:
  explicit StridePrefetcher(Origin origin) : origin_(origin) {}
  void on_access(Cache& c, const Request& r, bool hit, cycle_t now) override;

private:
  Origin origin_;
  std::vector<StrideTable> tables_; // per cpu
};
} // namespace orapsim

#endif
