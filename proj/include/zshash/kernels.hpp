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

#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops shared by the clustering, hashing, and
// evaluation stages. Every kernel has a scalar reference implementation
// and, on x86-64, an AVX2 variant. The active variant is picked once at
// startup (overridable with the ZSHASH_SIMD environment variable or
// set_level) and both variants are equivalence-tested against each other.

namespace zshash::kernels {

enum class Level { Scalar = 0, Avx2 = 1 };

const char* level_name(Level level);

// Level selected at startup: ZSHASH_SIMD env var if set ("scalar"/"avx2"),
// otherwise the best level the CPU supports.
Level active_level();

// Forces a level; throws std::invalid_argument if the CPU lacks it.
void set_level(Level level);

bool avx2_supported();

// Squared Euclidean distance between two length-n vectors.
double l2_sqr(const double* a, const double* b, std::size_t n);

// Dot product of two length-n vectors.
double dot(const double* a, const double* b, std::size_t n);

// Squared distances from x to each row of a row-major n_rows x dim block.
void l2_sqr_rows(const double* x, const double* rows, std::size_t n_rows,
                 std::size_t dim, double* out);

// Number of differing bits between two packed codes of n_words words.
std::uint32_t hamming(const std::uint64_t* a, const std::uint64_t* b,
                      std::size_t n_words);

namespace scalar {
double l2_sqr(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
std::uint32_t hamming(const std::uint64_t* a, const std::uint64_t* b,
                      std::size_t n_words);
}  // namespace scalar

#if defined(__x86_64__)
namespace avx2 {
double l2_sqr(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
std::uint32_t hamming(const std::uint64_t* a, const std::uint64_t* b,
                      std::size_t n_words);
}  // namespace avx2
#endif

}  // namespace zshash::kernels
