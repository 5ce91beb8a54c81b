// Copyright 2026 The Microdoom Authors.
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

#include "bf16_kernel.h"

#include <immintrin.h>
#include <sys/syscall.h>
#include <unistd.h>

#include <cpuid.h>
#include <cstdint>
#include <cstring>
#include <vector>

namespace microdoom::nn::internal {
namespace {

constexpr int kArchReqXcompPerm = 0x1023;
constexpr int kXfeatureXtiledata = 18;

struct alignas(64) TileConfig {
  uint8_t palette = 1;
  uint8_t start_row = 0;
  uint8_t reserved[14] = {};
  uint16_t colsb[16] = {};
  uint8_t rows[16] = {};
};

int RoundUp(int x, int m) { return (x + m - 1) / m * m; }

uint16_t ToBf16(float f) {
  uint32_t u;
  std::memcpy(&u, &f, 4);
  if ((u & 0x7F800000u) == 0) return static_cast<uint16_t>((u >> 16) & 0x8000u);
  u += 0x7FFFu + ((u >> 16) & 1u);
  return static_cast<uint16_t>(u >> 16);
}

// Two 16-float vectors -> 32 bf16 laid out [lo..., hi...].
__m512i Convert32(__m512 lo, __m512 hi) {
  return reinterpret_cast<__m512i>(_mm512_cvtne2ps_pbh(hi, lo));
}

// [lo0, hi0, lo1, hi1, ...] from [lo..., hi...].
__m512i Interleave(__m512i v) {
  const __m512i idx = _mm512_set_epi16(31, 15, 30, 14, 29, 13, 28, 12, 27, 11, 26, 10, 25, 9, 24, 8, 23,
                                       7, 22, 6, 21, 5, 20, 4, 19, 3, 18, 2, 17, 1, 16, 0);
  return _mm512_permutexvar_epi16(idx, v);
}

// Row-major bf16 copy of op(a), zero-padded to mp x kp.
void PackA(const float* a, int lda, bool trans, int m, int k, int mp, int kp, uint16_t* out) {
  if (!trans) {
    for (int i = 0; i < m; ++i) {
      const float* src = a + static_cast<size_t>(i) * lda;
      uint16_t* dst = out + static_cast<size_t>(i) * kp;
      int j = 0;
      for (; j + 32 <= k; j += 32) {
        _mm512_storeu_si512(dst + j, Convert32(_mm512_loadu_ps(src + j), _mm512_loadu_ps(src + j + 16)));
      }
      for (; j < k; ++j) dst[j] = ToBf16(src[j]);
      std::memset(dst + k, 0, sizeof(uint16_t) * (kp - k));
    }
  } else {
    for (int i = 0; i < m; ++i) std::memset(out + static_cast<size_t>(i) * kp + k, 0, sizeof(uint16_t) * (kp - k));
    // Rows j and j+1 of the source become one 32-bit pair per output row.
    const __m512i rows = _mm512_mullo_epi32(_mm512_set_epi32(15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0),
                                            _mm512_set1_epi32(kp / 2));
    int j = 0;
    for (; j + 2 <= k; j += 2) {
      const float* s0 = a + static_cast<size_t>(j) * lda;
      const float* s1 = s0 + lda;
      int i = 0;
      for (; i + 16 <= m; i += 16) {
        const __m512i v = Interleave(Convert32(_mm512_loadu_ps(s0 + i), _mm512_loadu_ps(s1 + i)));
        _mm512_i32scatter_epi32(out + static_cast<size_t>(i) * kp + j, rows, v, 4);
      }
      for (; i < m; ++i) {
        out[static_cast<size_t>(i) * kp + j] = ToBf16(s0[i]);
        out[static_cast<size_t>(i) * kp + j + 1] = ToBf16(s1[i]);
      }
    }
    for (; j < k; ++j) {
      const float* src = a + static_cast<size_t>(j) * lda;
      for (int i = 0; i < m; ++i) out[static_cast<size_t>(i) * kp + j] = ToBf16(src[i]);
    }
  }
  std::memset(out + static_cast<size_t>(m) * kp, 0, sizeof(uint16_t) * (mp - m) * kp);
}

// Pair-interleaved layout the tile multiply expects: for column block nb
// and k-pair p, 16 columns of {b(2p, n), b(2p+1, n)}.
void PackB(const float* b, int ldb, bool trans, int k, int n, int kp, int np, uint16_t* out) {
  const int pairs = kp / 2;
  std::memset(out, 0, sizeof(uint16_t) * static_cast<size_t>(kp) * np);
  auto at = [&](int nb, int p) { return out + (static_cast<size_t>(nb) * pairs + p) * 32; };
  if (!trans) {
    for (int p = 0; p < pairs; ++p) {
      const int r0 = 2 * p, r1 = 2 * p + 1;
      if (r0 >= k) break;
      const float* s0 = b + static_cast<size_t>(r0) * ldb;
      const float* s1 = r1 < k ? b + static_cast<size_t>(r1) * ldb : nullptr;
      int c = 0;
      for (; c + 16 <= n; c += 16) {
        const __m512 lo = _mm512_loadu_ps(s0 + c);
        const __m512 hi = s1 ? _mm512_loadu_ps(s1 + c) : _mm512_setzero_ps();
        _mm512_storeu_si512(at(c / 16, p), Interleave(Convert32(lo, hi)));
      }
      for (; c < n; ++c) {
        uint16_t* dst = at(c / 16, p) + (c % 16) * 2;
        dst[0] = ToBf16(s0[c]);
        dst[1] = s1 ? ToBf16(s1[c]) : 0;
      }
    }
  } else {
    // 32 consecutive k of one column are 16 pairs, 64 bytes apart.
    const __m512i stride = _mm512_mullo_epi32(
        _mm512_set_epi32(15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0), _mm512_set1_epi32(16));
    for (int c = 0; c < n; ++c) {
      const float* src = b + static_cast<size_t>(c) * ldb;
      int r = 0;
      for (; r + 32 <= k; r += 32) {
        const __m512i v = Convert32(_mm512_loadu_ps(src + r), _mm512_loadu_ps(src + r + 16));
        _mm512_i32scatter_epi32(at(c / 16, r / 2) + (c % 16) * 2, stride, v, 4);
      }
      for (; r < k; ++r) at(c / 16, r / 2)[(c % 16) * 2 + (r & 1)] = ToBf16(src[r]);
    }
  }
}

}  // namespace

bool Bf16KernelInit() {
  unsigned eax, ebx, ecx, edx;
  if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
  const bool amx_bf16 = (edx >> 22) & 1;
  const bool amx_tile = (edx >> 24) & 1;
  const bool avx512_bf16 = __get_cpuid_count(7, 1, &eax, &ebx, &ecx, &edx) && ((eax >> 5) & 1);
  if (!amx_bf16 || !amx_tile || !avx512_bf16) return false;
  return syscall(SYS_arch_prctl, kArchReqXcompPerm, kXfeatureXtiledata) == 0;
}

void Bf16Gemm(const float* a, int lda, bool trans_a, const float* b, int ldb, bool trans_b,
              float* c, int ldc, int m, int n, int k, bool accumulate) {
  const int mp = RoundUp(m, 32), np = RoundUp(n, 32), kp = RoundUp(k, 32);
  thread_local std::vector<uint16_t> pa, pb;
  pa.resize(static_cast<size_t>(mp) * kp);
  pb.resize(static_cast<size_t>(kp) * np);
  PackA(a, lda, trans_a, m, k, mp, kp, pa.data());
  PackB(b, ldb, trans_b, k, n, kp, np, pb.data());

  TileConfig cfg;
  for (int t = 0; t < 8; ++t) {
    cfg.colsb[t] = 64;
    cfg.rows[t] = 16;
  }
  _tile_loadconfig(&cfg);
  alignas(64) float edge[4][256];
  const int pairs = kp / 2;
  for (int i0 = 0; i0 < mp; i0 += 32) {
    for (int n0 = 0; n0 < np; n0 += 32) {
      // Accumulator t covers rows i0 + 16*(t/2), columns n0 + 16*(t%2).
      float* dst[4];
      int ld[4];
      bool interior[4];
      for (int t = 0; t < 4; ++t) {
        const int r = i0 + 16 * (t / 2), col = n0 + 16 * (t % 2);
        interior[t] = r + 16 <= m && col + 16 <= n;
        if (interior[t]) {
          dst[t] = c + static_cast<size_t>(r) * ldc + col;
          ld[t] = ldc;
        } else {
          dst[t] = edge[t];
          ld[t] = 16;
          for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 16; ++x) {
              const bool in = r + y < m && col + x < n;
              edge[t][y * 16 + x] = in && accumulate ? c[static_cast<size_t>(r + y) * ldc + col + x] : 0.f;
            }
          }
        }
      }
#define MICRODOOM_TILE_INIT(t)                                        \
  if (accumulate || !interior[t]) {                                   \
    _tile_loadd(t, dst[t], ld[t] * 4);                                \
  } else {                                                            \
    _tile_zero(t);                                                    \
  }
      MICRODOOM_TILE_INIT(0)
      MICRODOOM_TILE_INIT(1)
      MICRODOOM_TILE_INIT(2)
      MICRODOOM_TILE_INIT(3)
#undef MICRODOOM_TILE_INIT
      const uint16_t* a0 = pa.data() + static_cast<size_t>(i0) * kp;
      const uint16_t* a1 = a0 + static_cast<size_t>(16) * kp;
      const uint16_t* b0 = pb.data() + static_cast<size_t>(n0 / 16) * pairs * 32;
      const uint16_t* b1 = b0 + static_cast<size_t>(pairs) * 32;
      for (int k0 = 0; k0 < kp; k0 += 32) {
        _tile_loadd(4, a0 + k0, kp * 2);
        _tile_loadd(5, a1 + k0, kp * 2);
        _tile_loadd(6, b0 + k0 * 16, 64);
        _tile_loadd(7, b1 + k0 * 16, 64);
        _tile_dpbf16ps(0, 4, 6);
        _tile_dpbf16ps(1, 4, 7);
        _tile_dpbf16ps(2, 5, 6);
        _tile_dpbf16ps(3, 5, 7);
      }
      _tile_stored(0, dst[0], ld[0] * 4);
      _tile_stored(1, dst[1], ld[1] * 4);
      _tile_stored(2, dst[2], ld[2] * 4);
      _tile_stored(3, dst[3], ld[3] * 4);
      for (int t = 0; t < 4; ++t) {
        if (interior[t]) continue;
        const int r = i0 + 16 * (t / 2), col = n0 + 16 * (t % 2);
        for (int y = 0; y < 16 && r + y < m; ++y) {
          for (int x = 0; x < 16 && col + x < n; ++x) {
            c[static_cast<size_t>(r + y) * ldc + col + x] = edge[t][y * 16 + x];
          }
        }
      }
    }
  }
  _tile_release();
}

}  // namespace microdoom::nn::internal
