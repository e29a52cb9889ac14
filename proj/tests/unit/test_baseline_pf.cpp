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

#include "harness.hpp"
#include "orapsim/baseline_pf.hpp"

using namespace orapsim;

TEST_CASE("next-line target stays inside the 2 MiB page")
{
  CHECK(next_line_target(0) == 64u);
  CHECK(next_line_target(0x1234) == 0x1240u);
  CHECK_FALSE(next_line_target((std::uint64_t{1} << 21) - 64));
  CHECK(next_line_target(std::uint64_t{1} << 21) == (std::uint64_t{1} << 21) + 64);
}

TEST_CASE("stride table confirms a stride before issuing")
{
  StrideTable t;
  CHECK(t.access(0x400, 0).empty());
  CHECK(t.access(0x400, 128).empty());
  CHECK(t.access(0x400, 256) == std::vector<std::uint64_t>{384, 512, 640, 768});
  CHECK(t.access(0x400, 384) == std::vector<std::uint64_t>{512, 640, 768, 896});
  // a new stride has to be confirmed again
  CHECK(t.access(0x400, 384 + 64 * 3).empty());
  CHECK(t.access(0x400, 384 + 64 * 6).size() == STRIDE_DEGREE);
  // negative strides work and stop at zero
  StrideTable n;
  n.access(0x10, 320);
  n.access(0x10, 256);
  CHECK(n.access(0x10, 192) == std::vector<std::uint64_t>{128, 64, 0});
  // IPs are tracked separately
  CHECK(n.access(0x20, 192).empty());
}

TEST_CASE("stride table stays inside the 2 MiB page and evicts LRU")
{
  StrideTable t;
  const std::uint64_t top = (std::uint64_t{1} << 21) - 64;
  t.access(1, top - 128);
  t.access(1, top - 64);
  CHECK(t.access(1, top).empty());

  for (std::uint64_t ip = 100; ip < 100 + STRIDE_TABLE_ENTRIES; ++ip) {
    t.access(ip, 0);
    t.access(ip, 64);
  }
  // ip 1 was least recently used: its history is gone
  CHECK(t.access(1, top + 64).empty());
  CHECK(t.access(100 + STRIDE_TABLE_ENTRIES - 1, 128).size() == STRIDE_DEGREE);
}

TEST_CASE("baseline prefetchers react to demands only")
{
  CacheConfig cc;
  cc.name = "L1D";
  cc.size_bytes = 64 * 64;
  cc.ways = 4;
  cc.latency = 1;
  cc.mshr_entries = 16;
  Cache c(cc, 1, 0);
  harness::FakeMemory mem(5);
  harness::Sink sink;
  NextLinePrefetcher nl(Origin::l1pf);
  c.set_lower(&mem);
  c.set_prefetcher(&nl);
  cycle_t now = 0;
  c.add_request(harness::load(0x1000, &sink), now);
  for (int i = 0; i < 20; ++i, ++now) {
    c.operate(now);
    mem.tick(now);
  }
  const auto o = static_cast<std::size_t>(Origin::l1pf);
  CHECK(c.stats().pf_requested[o] == 1);
  CHECK(c.stats().pf_issued[o] == 1);
  CHECK(c.present(0x1040));
  // the prefetch fill itself does not trigger another prefetch
  CHECK_FALSE(c.present(0x1080));
}
