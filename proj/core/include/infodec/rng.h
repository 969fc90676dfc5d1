// Copyright 2025 The infodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INFODEC_RNG_H_
#define INFODEC_RNG_H_

#include <array>
#include <cstdint>

namespace infodec {

// Philox4x32-10 (Salmon et al., SC'11). The stream for one shot is keyed by
// the global seed with the shot index in the high counter words, so shots
// can be generated in any order or on any worker.
class Philox4x32 {
   public:
    using Block = std::array<uint32_t, 4>;

    static Block generate(Block ctr, std::array<uint32_t, 2> key) {
        for (int round = 0; round < 10; round++) {
            uint64_t p0 = uint64_t{0xD2511F53} * ctr[0];
            uint64_t p1 = uint64_t{0xCD9E8D57} * ctr[2];
            uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
            uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += 0x9E3779B9;
            key[1] += 0xBB67AE85;
        }
        return ctr;
    }
};

class ShotRng {
   public:
    ShotRng(uint64_t seed, uint64_t shot)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)}, shot_(shot) {}

    uint64_t next_u64() {
        if (avail_ == 0) {
            Philox4x32::Block ctr{static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32),
                                  static_cast<uint32_t>(shot_), static_cast<uint32_t>(shot_ >> 32)};
            counter_++;
            buf_ = Philox4x32::generate(ctr, key_);
            avail_ = 2;
        }
        avail_--;
        return (uint64_t{buf_[2 * avail_]} << 32) | buf_[2 * avail_ + 1];
    }

    // Uniform in (0, 1]; never returns 0 so log() stays finite.
    double uniform_open0() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    uint32_t below(uint32_t n) { return static_cast<uint32_t>(((next_u64() >> 32) * n) >> 32); }

   private:
    std::array<uint32_t, 2> key_;
    uint64_t shot_;
    uint64_t counter_ = 0;
    Philox4x32::Block buf_{};
    int avail_ = 0;
};

// SplitMix64 finalizer; used to derive independent sub-seeds.
inline uint64_t mix_seed(uint64_t seed, uint64_t lane) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (lane + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace infodec

#endif  // INFODEC_RNG_H_
