// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Counter-based random streams. Every (key, stream) pair is an independent
// sequence, so trajectory i draws the same numbers whichever worker runs it.

#include <array>
#include <cstdint>

namespace qtraj {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

class CounterRng {
 public:
  CounterRng(std::uint64_t key, std::uint64_t stream);

  std::uint32_t next_u32();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t key() const { return key_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int next_ = 4;
};

// Key for sub-run `index` of a master seed (sweep points, validation runs).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

}  // namespace qtraj
