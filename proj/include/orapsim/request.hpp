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

#ifndef ORAPSIM_REQUEST_HPP
#define ORAPSIM_REQUEST_HPP

#include <array>
#include <cstdint>
#include <string_view>

#include "orapsim/util.hpp"

namespace orapsim
{
// Who caused a memory request. nc/hsd are the two ORAP engines.
enum class Origin : std::uint8_t { demand, l1pf, l2pf, nc, hsd, writeback };
inline constexpr std::size_t ORIGIN_COUNT = 6;

constexpr std::array<std::string_view, ORIGIN_COUNT> origin_names{"demand", "l1pf", "l2pf", "nc", "hsd", "writeback"};
constexpr std::string_view to_string(Origin o) { return origin_names[static_cast<std::size_t>(o)]; }
constexpr bool is_prefetch(Origin o) { return o != Origin::demand && o != Origin::writeback; }

enum class ReqType : std::uint8_t { load, rfo, prefetch, writeback };

class MemClient;

struct Request {
  std::uint64_t address = 0; // block aligned
  std::uint64_t ip = 0;
  std::uint32_t cpu = 0;
  ReqType type = ReqType::load;
  Origin origin = Origin::demand;
  std::uint64_t token = 0;
  cycle_t ready = 0;
  MemClient* requester = nullptr;
  bool promoted = false;

  bool is_demand() const { return type == ReqType::load || type == ReqType::rfo; }
};

class MemClient
{
public:
  virtual ~MemClient() = default;
  virtual void on_fill(const Request& r, cycle_t now) = 0;
};

class MemPort
{
public:
  virtual ~MemPort() = default;
  virtual bool add_request(const Request& r, cycle_t now) = 0;
  // A demand is now waiting on an in-flight prefetch of this block.
  virtual void promote(std::uint64_t address) = 0;
};
} // namespace orapsim

#endif
