// Copyright 2026-present the zshash project
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

#include "zshash/kernels.hpp"

#include <bit>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace zshash::kernels {

namespace scalar {

double l2_sqr(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

std::uint32_t hamming(const std::uint64_t* a, const std::uint64_t* b,
                      std::size_t n_words) {
    std::uint32_t acc = 0;
    for (std::size_t i = 0; i < n_words; ++i) {
        acc += static_cast<std::uint32_t>(std::popcount(a[i] ^ b[i]));
    }
    return acc;
}

}  // namespace scalar

bool avx2_supported() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const char* level_name(Level level) {
    switch (level) {
        case Level::Scalar:
            return "scalar";
        case Level::Avx2:
            return "avx2";
    }
    return "unknown";
}

namespace {

struct Dispatch {
    double (*l2_sqr)(const double*, const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    std::uint32_t (*hamming)(const std::uint64_t*, const std::uint64_t*,
                             std::size_t);
};

constexpr Dispatch kScalarDispatch{scalar::l2_sqr, scalar::dot,
                                   scalar::hamming};

#if defined(__x86_64__)
constexpr Dispatch kAvx2Dispatch{avx2::l2_sqr, avx2::dot, avx2::hamming};
#endif

Dispatch g_dispatch = kScalarDispatch;
Level g_level = Level::Scalar;

void apply_level(Level level) {
    switch (level) {
        case Level::Scalar:
            g_dispatch = kScalarDispatch;
            break;
        case Level::Avx2:
#if defined(__x86_64__)
            g_dispatch = kAvx2Dispatch;
            break;
#else
            throw std::invalid_argument("avx2 kernels not built for this arch");
#endif
    }
    g_level = level;
}

Level startup_level() {
    if (const char* env = std::getenv("ZSHASH_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Level::Scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!avx2_supported())
                throw std::invalid_argument("ZSHASH_SIMD=avx2 but CPU lacks AVX2");
            return Level::Avx2;
        }
        throw std::invalid_argument(std::string("unknown ZSHASH_SIMD value: ") +
                                    env);
    }
    return avx2_supported() ? Level::Avx2 : Level::Scalar;
}

struct Init {
    Init() { apply_level(startup_level()); }
};
Init g_init;

}  // namespace

Level active_level() { return g_level; }

void set_level(Level level) {
    if (level == Level::Avx2 && !avx2_supported())
        throw std::invalid_argument("CPU does not support AVX2");
    apply_level(level);
}

double l2_sqr(const double* a, const double* b, std::size_t n) {
    return g_dispatch.l2_sqr(a, b, n);
}

double dot(const double* a, const double* b, std::size_t n) {
    return g_dispatch.dot(a, b, n);
}

void l2_sqr_rows(const double* x, const double* rows, std::size_t n_rows,
                 std::size_t dim, double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) {
        out[r] = g_dispatch.l2_sqr(x, rows + r * dim, dim);
    }
}

std::uint32_t hamming(const std::uint64_t* a, const std::uint64_t* b,
                      std::size_t n_words) {
    return g_dispatch.hamming(a, b, n_words);
}

}  // namespace zshash::kernels
