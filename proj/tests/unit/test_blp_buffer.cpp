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

#include <map>
#include <random>
#include <set>

#include "orapsim/blp_buffer.hpp"

using namespace orapsim;

namespace
{
BlpEntry entry(std::uint64_t block, std::uint32_t cpu = 0) { return BlpEntry{block, cpu, Origin::nc, 0x400, false}; }
} // namespace

TEST_CASE("insert: capacity per sub-buffer and independence across banks")
{
  BlpBuffer b(16, 64, 1, 2);
  CHECK(b.sub_capacity() == 4);
  for (std::uint64_t i = 0; i < 4; ++i)
    CHECK(b.insert(entry(i), 3) == BlpInsert::accepted);
  CHECK(b.insert(entry(4), 3) == BlpInsert::rejected_full);
  CHECK(b.insert(entry(4), 19) == BlpInsert::rejected_full); // aliases sub-buffer 3
  CHECK(b.insert(entry(1), 5) == BlpInsert::duplicate);
  for (std::uint32_t bank = 4; bank < 9; ++bank)
    CHECK(b.insert(entry(100 + bank), bank) == BlpInsert::accepted);
  CHECK(b.occupancy() == 9);
  CHECK(b.stats().rejected_full == 2);
}

TEST_CASE("issue: at most two per cycle from distinct sub-buffers")
{
  SECTION("8 entries over 8 sub-buffers drain in 4 cycles")
  {
    BlpBuffer b(16, 64, 1, 2);
    for (std::uint32_t i = 0; i < 8; ++i)
      b.insert(entry(i), i);
    int cycles = 0;
    std::size_t issued = 0;
    while (issued < 8) {
      auto out = b.issue_cycle();
      REQUIRE(out.size() == 2);
      issued += out.size();
      ++cycles;
    }
    CHECK(cycles == 4);
    CHECK(b.issue_cycle().empty());
  }
  SECTION("one sub-buffer issues one per cycle")
  {
    BlpBuffer b(16, 64, 1, 2);
    for (std::uint32_t i = 0; i < 4; ++i)
      b.insert(entry(i), 7);
    for (int c = 0; c < 4; ++c)
      CHECK(b.issue_cycle().size() == 1);
    CHECK(b.issue_cycle().empty());
  }
  SECTION("empty buffer issues nothing")
  {
    BlpBuffer b(16, 64, 1, 2);
    CHECK(b.issue_cycle().empty());
  }
  SECTION("caller limit")
  {
    BlpBuffer b(16, 64, 1, 2);
    for (std::uint32_t i = 0; i < 4; ++i)
      b.insert(entry(i), i);
    CHECK(b.issue_cycle(1).size() == 1);
    CHECK(b.issue_cycle(0).empty());
    CHECK(b.issue_cycle(9).size() == 2);
  }
}

TEST_CASE("round-robin pointer persists across cycles")
{
  BlpBuffer b(16, 64, 1, 2);
  for (std::uint32_t i = 0; i < 3; ++i) {
    b.insert(entry(10 * i), i);
    b.insert(entry(10 * i + 1), i);
  }
  auto c1 = b.issue_cycle();
  auto c2 = b.issue_cycle();
  REQUIRE(c1.size() == 2);
  REQUIRE(c2.size() == 2);
  CHECK(c1[0].block == 0);
  CHECK(c1[1].block == 10);
  CHECK(c2[0].block == 20); // resumes after sub-buffer 1
  CHECK(c2[1].block == 1);
}

TEST_CASE("lifecycle and accounting errors")
{
  BlpBuffer b(16, 64, 1, 2);
  b.insert(entry(42), 1);
  CHECK_FALSE(b.complete(42)); // never issued
  CHECK(b.stats().accounting_errors == 1);
  auto out = b.issue_cycle();
  REQUIRE(out.size() == 1);
  CHECK(out[0].pending);
  CHECK(b.complete(42));
  CHECK(b.occupancy() == 0);
  CHECK_FALSE(b.complete(42));
  CHECK_FALSE(b.complete(7));
  CHECK(b.stats().accounting_errors == 3);

  b.insert(entry(5), 2);
  b.issue_cycle();
  b.requeue(5);
  CHECK(b.issue_cycle().size() == 1);
  b.drop(5);
  CHECK(b.occupancy() == 0);
}

TEST_CASE("per-core quota in a shared buffer")
{
  BlpBuffer b(16, 64, 2, 2);
  CHECK(b.sub_capacity() == 8);
  std::uint64_t blk = 0;
  for (std::uint32_t bank = 0; bank < 16; ++bank)
    for (int i = 0; i < 4; ++i)
      REQUIRE(b.insert(entry(blk++, 0), bank) == BlpInsert::accepted);
  CHECK(b.occupancy(0) == 64);
  CHECK(b.insert(entry(blk++, 0), 0) == BlpInsert::rejected_full);
  CHECK(b.insert(entry(blk++, 1), 0) == BlpInsert::accepted);
  CHECK(b.occupancy(1) == 1);
}

TEST_CASE("lifecycle fuzz keeps occupancy = inserts - completes - drops")
{
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng{seed};
    BlpBuffer b(16, 64, 2, 2);
    std::set<std::uint64_t> queued, pending;
    std::uint64_t ins = 0, done = 0, dropped = 0;
    for (int step = 0; step < 5000; ++step) {
      switch (rng() % 5) {
      case 0:
      case 1: {
        const auto blk = rng() % 500;
        if (b.insert(entry(blk, static_cast<std::uint32_t>(rng() % 2)), static_cast<std::uint32_t>(rng() % 64)) == BlpInsert::accepted) {
          ++ins;
          queued.insert(blk);
        }
        break;
      }
      case 2: {
        auto out = b.issue_cycle();
        REQUIRE(out.size() <= 2);
        if (out.size() == 2)
          REQUIRE(out[0].block != out[1].block);
        for (auto& e : out) {
          REQUIRE(queued.erase(e.block) == 1);
          pending.insert(e.block);
        }
        break;
      }
      case 3:
        if (!pending.empty()) {
          auto it = pending.begin();
          std::advance(it, static_cast<long>(rng() % pending.size()));
          REQUIRE(b.complete(*it));
          pending.erase(it);
          ++done;
        }
        break;
      case 4:
        if (!pending.empty()) {
          auto blk = *pending.begin();
          pending.erase(pending.begin());
          if (rng() % 2) {
            b.drop(blk);
            ++dropped;
          } else {
            b.requeue(blk);
            queued.insert(blk);
          }
        }
        break;
      }
      REQUIRE(b.occupancy() == ins - done - dropped);
      REQUIRE(b.occupancy() == queued.size() + pending.size());
      REQUIRE(b.occupancy(0) + b.occupancy(1) == b.occupancy());
      for (std::uint32_t s = 0; s < 16; ++s)
        REQUIRE(b.sub_buffer_occupancy(s) <= b.sub_capacity());
    }
    CHECK(b.stats().accounting_errors == 0);
  }
}
