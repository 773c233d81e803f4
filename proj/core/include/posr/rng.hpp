// Copyright 2026 The POSR Authors
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

#ifndef POSR_RNG_H_
#define POSR_RNG_H_

#include <cstdint>
#include <span>

namespace posr {

// Splittable counter-style generator built on the splitmix64 finalizer.
// Child streams are derived by key, never by drawing, so per-(episode,
// player) streams are identical no matter how work is scheduled.
class SplitRng {
 public:
  explicit SplitRng(uint64_t seed) : state_(Mix(seed + kGolden)) {}

  // Independent stream addressed by `key`; does not advance this stream.
  SplitRng Child(uint64_t key) const {
    return SplitRng(FromState(Mix(state_ + kGolden * (key + 1))));
  }

  uint64_t NextUint64() {
    state_ += kGolden;
    return Mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double NextDouble() { return (NextUint64() >> 11) * 0x1.0p-53; }

  // Samples an index from an (unnormalized-tolerant) probability row.
  int NextIndex(std::span<const double> probs) {
    const double u = NextDouble();
    double acc = 0.0;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return static_cast<int>(probs.size()) - 1;
  }

  uint64_t state() const { return state_; }

 private:
  struct RawTag {};
  SplitRng(uint64_t raw_state, RawTag) : state_(raw_state) {}
  static SplitRng FromState(uint64_t raw_state) {
    return SplitRng(raw_state, RawTag{});
  }

  static constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static uint64_t Mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t state_;
};

}  // namespace posr

#endif  // POSR_RNG_H_
