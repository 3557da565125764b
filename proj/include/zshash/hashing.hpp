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

#include <cstdint>
#include <string>
#include <vector>

#include "zshash/anchors.hpp"
#include "zshash/defaults.hpp"
#include "zshash/embedding.hpp"
#include "zshash/types.hpp"

namespace zshash {

// A b-bit code packed into 64-bit words, bit j in word j/64 at position
// j%64. Bit value 1 encodes sign +1, 0 encodes -1. Padding bits stay zero.
struct HashCode {
    std::vector<std::uint64_t> words;
    int length = 0;

    static HashCode zeros(int length);
    int sign(int j) const;  // +1 or -1
    void set_sign(int j, bool positive);
    bool operator==(const HashCode& other) const = default;
};

// N codes of uniform length in one flat allocation.
class HashCodeSet {
  public:
    HashCodeSet() = default;
    HashCodeSet(std::size_t n, int length);

    std::size_t size() const { return n_; }
    int length() const { return length_; }
    std::size_t words_per_code() const { return words_; }
    const std::uint64_t* data(std::size_t i) const {
        return storage_.data() + i * words_;
    }
    std::uint64_t* data(std::size_t i) { return storage_.data() + i * words_; }

    void assign(std::size_t i, const HashCode& code);
    HashCode get(std::size_t i) const;
    int sign(std::size_t i, int j) const;

  private:
    std::size_t n_ = 0;
    std::size_t words_ = 0;
    int length_ = 0;
    std::vector<std::uint64_t> storage_;
};

struct HashParams {
    double sigma = 0.0;  // 0 selects the auto rule when a model is trained
    int s = defaults::kTopS;
    double omega = defaults::kOmega;
};

// Throws std::invalid_argument unless sigma > 0, 1 <= s <= n_anchors and
// omega >= 1.
void validate_hash_params(const HashParams& params, Index n_anchors);

// w_q = exp(-|x - mu_q|^2 / sigma^2)
Vector rbf_weights(const Vector& x, const Matrix& anchors, double sigma);

// Keep the s largest weights (ties toward the lower index), damp the rank-i
// survivor by omega^-i with i starting at 1, renormalize survivors to sum 1.
Vector top_s_boost_renormalize(const Vector& weights, int s, double omega);

// m* = sum_q w_q m_q for weights already summing to 1.
Vector inductive_embed(const Vector& sparse_weights, const Matrix& m);

// sign with sign(0) = +1
HashCode binarize(const Vector& m);

HashCode hash_seen_instance(const Vector& x, const AnchorSet& anchors,
                            const AnchorEmbedding& embedding,
                            const HashParams& params);

HashCodeSet anchor_hash_codes(const AnchorEmbedding& embedding);

HashCodeSet hash_dataset(const Matrix& x, const AnchorSet& anchors,
                         const AnchorEmbedding& embedding,
                         const HashParams& params, int n_threads = 1);

// Median distance from a sample of up to 1000 instances to their nearest
// anchor, times sqrt(2).
double auto_sigma(const Matrix& x, const Matrix& centers);

void save_codes(const std::string& path, const HashCodeSet& codes);
HashCodeSet load_codes(const std::string& path);
void write_codes_csv(const std::string& path, const HashCodeSet& codes);

}  // namespace zshash
