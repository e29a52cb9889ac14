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

#include <catch_amalgamated.hpp>

#include <random>

#include "orapsim/hsd.hpp"
#include "orapsim/util.hpp"

using namespace orapsim;

namespace
{
std::uint64_t addr(std::uint64_t page, std::uint64_t line) { return (page << 12) | (line << 6); }

// One IP walking pages; `lens` blocks per page, unit stride.
std::uint64_t walk(Hsd& h, std::uint64_t ip, std::uint64_t first_page, const std::vector<std::uint32_t>& lens, std::uint32_t conf = 0)
{
  std::uint64_t page = first_page, n = 0;
  for (auto len : lens) {
    for (std::uint32_t i = 0; i < len; ++i, ++n)
      h.on_llc_access(ip, addr(page, i), conf);
    ++page;
  }
  return n;
}
} // namespace

TEST_CASE("probability requirement mapping")
{
  const HsdConfig cfg;
  CHECK(p_req(cfg, 0) == Catch::Approx(0.9));
  CHECK(p_req(cfg, 255) == Catch::Approx(0.3));
  CHECK(p_req(cfg, 1000) == Catch::Approx(0.3));
  double prev = 1.0;
  for (std::uint32_t c = 0; c <= 255; ++c) {
    CHECK(p_req(cfg, c) <= prev);
    CHECK(p_req(cfg, c) >= 0.3);
    prev = p_req(cfg, c);
  }
}

TEST_CASE("histograms are cumulative and swap on epoch rollover")
{
  HsdConfig cfg;
  Hsd h(cfg);
  CHECK(h.state() == HsdState::train);
  walk(h, 0x400, 10, {3});
  CHECK(h.training()[0] == 1);
  CHECK(h.training()[1] == 1);
  CHECK(h.training()[2] == 1);
  CHECK(h.training()[3] == 0);
  CHECK(h.active()[0] == 0);

  h.epoch_rollover();
  CHECK(h.state() == HsdState::active);
  CHECK(h.active()[2] == 1);
  CHECK(h.training()[0] == 0);
  CHECK(h.epoch_counter() == 0);
}

TEST_CASE("epoch rolls over after epoch_length accesses")
{
  HsdConfig cfg;
  cfg.epoch_length = 100;
  Hsd h(cfg);
  walk(h, 0x400, 0, {50, 49});
  CHECK(h.stats().epochs == 0);
  CHECK(h.epoch_counter() == 99);
  h.on_llc_access(0x400, addr(5, 0), 0);
  CHECK(h.stats().epochs == 1);
  CHECK(h.active()[0] == 3);
}

TEST_CASE("histogram counters saturate")
{
  HsdConfig cfg;
  cfg.epoch_length = 100000;
  Hsd h(cfg);
  for (int i = 0; i < 9000; ++i)
    h.on_llc_access(0x400, addr(static_cast<std::uint64_t>(i), 0), 0);
  CHECK(h.training()[0] == HSD_HIST_MAX);
}

TEST_CASE("all depth-1 epoch gives no forward prefetch")
{
  HsdConfig cfg;
  cfg.epoch_length = 500;
  Hsd h(cfg);
  for (int i = 0; i < 500; ++i)
    h.on_llc_access(0x400, addr(static_cast<std::uint64_t>(i), 0), 0);
  REQUIRE(h.state() == HsdState::active);
  CHECK(h.continuation(1, 2) == 0.0);
  std::size_t out = 0;
  for (std::uint32_t i = 0; i < 10; ++i)
    out += h.on_llc_access(0x800, addr(9000, i), 255).size();
  CHECK(out == 0);
}

TEST_CASE("all depth-64 epoch prefetches to the end of the page")
{
  HsdConfig cfg;
  const std::uint32_t pages = 20;
  cfg.epoch_length = 64 * pages;
  Hsd h(cfg);
  walk(h, 0x400, 100, std::vector<std::uint32_t>(pages, 64));
  REQUIRE(h.state() == HsdState::active);
  for (std::uint32_t k = 1; k <= 64; ++k)
    CHECK(h.continuation(1, k) == 1.0);
  h.on_llc_access(0x800, addr(7000, 0), 0);
  const auto out = h.on_llc_access(0x800, addr(7000, 1), 0);
  REQUIRE(out.size() == 62);
  CHECK(out.front() == addr(7000, 2));
  CHECK(out.back() == addr(7000, 63));
}

TEST_CASE("50/50 depth-8 and depth-64 epoch prefetches beyond 8 only at low requirement")
{
  HsdConfig cfg;
  const std::uint32_t n = 10;
  cfg.epoch_length = (8 + 64) * n;
  Hsd trained(cfg);
  std::vector<std::uint32_t> lens;
  for (std::uint32_t i = 0; i < n; ++i) {
    lens.push_back(8);
    lens.push_back(64);
  }
  walk(trained, 0x400, 0, lens);
  REQUIRE(trained.state() == HsdState::active);
  CHECK(trained.active()[7] == 2 * n);
  CHECK(trained.active()[8] == n);
  CHECK(trained.continuation(8, 9) == Catch::Approx(0.5));

  auto probe = [&](std::uint32_t conf) {
    Hsd h(cfg);
    h.set_active(trained.active());
    std::vector<std::uint64_t> out;
    for (std::uint32_t i = 0; i < 8; ++i)
      out = h.on_llc_access(0x900, addr(5000, i), conf);
    return out;
  };
  // p_req(170) = 0.5 exactly
  const auto deep = probe(170);
  REQUIRE(deep.size() == 56);
  CHECK(deep.front() == addr(5000, 8));
  CHECK(probe(169).empty());
  CHECK(probe(0).empty());
}

TEST_CASE("higher confidence never prefetches less on the same histogram")
{
  HsdConfig cfg;
  StreamHistogram hist{};
  for (std::uint32_t k = 0; k < 64; ++k)
    hist[k] = static_cast<std::uint16_t>(6400 / (k + 1));
  std::size_t prev = 0;
  for (std::uint32_t c = 0; c <= 255; c += 15) {
    Hsd h(cfg);
    h.set_active(hist);
    std::size_t out = 0;
    for (std::uint32_t i = 0; i < 4; ++i)
      out = h.on_llc_access(0x900, addr(5000, i), c).size();
    CHECK(out >= prev);
    prev = out;
  }
  CHECK(prev > 0);
}

TEST_CASE("stride learning and stride breaks")
{
  Hsd h(HsdConfig{});
  h.on_llc_access(0x400, addr(1, 10), 0);
  h.on_llc_access(0x400, addr(1, 12), 0);
  REQUIRE(h.streams()[0].stride == 2);
  CHECK(h.streams()[0].depth == 2);
  h.on_llc_access(0x400, addr(1, 14), 0);
  CHECK(h.streams()[0].depth == 3);
  // break: -3 is representable, depth restarts at 2 with the new stride
  h.on_llc_access(0x400, addr(1, 11), 0);
  CHECK(h.streams()[0].stride == -3);
  CHECK(h.streams()[0].depth == 2);
  // +5 is not representable: the stream falls back to depth 1
  h.on_llc_access(0x400, addr(1, 16), 0);
  CHECK(h.streams()[0].stride == 0);
  CHECK(h.streams()[0].depth == 1);
}

TEST_CASE("streams collate by IP or by page")
{
  Hsd h(HsdConfig{});
  h.on_llc_access(0x400, addr(1, 0), 0);
  h.on_llc_access(0x404, addr(1, 1), 0); // same page, other IP
  h.on_llc_access(0x404, addr(9, 0), 0); // same IP, other page
  CHECK(h.stats().allocations == 1);
  CHECK(h.stats().matches == 2);
}

TEST_CASE("replacement evicts the oldest stream, lowest index on ties")
{
  Hsd h(HsdConfig{});
  for (std::uint64_t s = 0; s < 32; ++s)
    h.on_llc_access(0x1000 + s, addr(100 + s, 0), 0);
  REQUIRE(h.streams().size() == 32);
  h.on_llc_access(0x1000, addr(100, 1), 0);
  h.on_llc_access(0x9999, addr(999, 0), 0);
  CHECK(h.streams()[1].ip == 0x9999);
  CHECK(h.streams()[0].ip == 0x1000);

  // saturate every age except slot 0's
  for (int i = 0; i < 300; ++i)
    h.on_llc_access(0x1000, addr(100, 1), 0);
  h.on_llc_access(0x7777, addr(777, 0), 0);
  CHECK(h.streams()[1].ip == 0x7777);
  CHECK(h.streams().size() == 32);
}

TEST_CASE("candidates stay in the trigger's page and within 64 blocks")
{
  HsdConfig cfg;
  cfg.epoch_length = 2000;
  Hsd h(cfg);
  std::mt19937_64 rng{4};
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t page = rng() % 8;
    const std::uint64_t a = addr(page, rng() % 64);
    for (auto c : h.on_llc_access(0x400 + (rng() % 4), a, static_cast<std::uint32_t>(rng() % 256))) {
      REQUIRE(small_page(c) == page);
      REQUIRE(c != block_base(a));
    }
  }
  for (int i = 0; i < 64; ++i)
    REQUIRE(h.on_llc_access(0x555, addr(50, static_cast<std::uint64_t>(i)), 255).size() <= 64);
  CHECK(h.streams().size() == 32);
}
