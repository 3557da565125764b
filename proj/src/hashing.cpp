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

#include "zshash/hashing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <thread>

#include "zshash/kernels.hpp"

namespace zshash {

namespace {

constexpr std::size_t words_for(int length) {
    return (static_cast<std::size_t>(length) + 63) / 64;
}

// Squared distances from one instance to every anchor, then the shifted
// weights exp(-(d^2 - d^2_min)/sigma^2). The shift is a common positive
// factor over the plain RBF weights, which the later renormalization
// absorbs; it keeps the largest weight at exactly 1 so far-away instances
// never underflow to an all-zero vector.
Vector shifted_weights(const double* x, const Matrix& anchors, double sigma,
                       std::vector<double>& dist_buf) {
    const std::size_t n = static_cast<std::size_t>(anchors.rows());
    const std::size_t d = static_cast<std::size_t>(anchors.cols());
    dist_buf.resize(n);
    kernels::l2_sqr_rows(x, anchors.data(), n, d, dist_buf.data());
    const double d2_min = *std::min_element(dist_buf.begin(), dist_buf.end());
    Vector w(static_cast<Index>(n));
    const double inv = 1.0 / (sigma * sigma);
    for (std::size_t q = 0; q < n; ++q)
        w(static_cast<Index>(q)) = std::exp(-(dist_buf[q] - d2_min) * inv);
    return w;
}

HashCode hash_one(const double* x, const AnchorSet& anchors,
                  const AnchorEmbedding& embedding, const HashParams& params,
                  std::vector<double>& dist_buf) {
    const Vector w = shifted_weights(x, anchors.centers, params.sigma, dist_buf);
    const Vector sparse = top_s_boost_renormalize(w, params.s, params.omega);
    return binarize(inductive_embed(sparse, embedding.m));
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4))
        throw DataError(path + ": truncated header");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return v;
}

}  // namespace

HashCode HashCode::zeros(int length) {
    HashCode code;
    code.length = length;
    code.words.assign(words_for(length), 0);
    return code;
}

int HashCode::sign(int j) const {
    const std::uint64_t word = words[static_cast<std::size_t>(j) / 64];
    return (word >> (static_cast<std::size_t>(j) % 64)) & 1u ? 1 : -1;
}

void HashCode::set_sign(int j, bool positive) {
    const std::uint64_t mask = std::uint64_t{1} << (static_cast<std::size_t>(j) % 64);
    auto& word = words[static_cast<std::size_t>(j) / 64];
    if (positive)
        word |= mask;
    else
        word &= ~mask;
}

HashCodeSet::HashCodeSet(std::size_t n, int length)
    : n_(n), words_(words_for(length)), length_(length),
      storage_(n * words_for(length), 0) {}

void HashCodeSet::assign(std::size_t i, const HashCode& code) {
    if (code.length != length_) throw DataError("code length mismatch");
    std::copy(code.words.begin(), code.words.end(), data(i));
}

HashCode HashCodeSet::get(std::size_t i) const {
    HashCode code = HashCode::zeros(length_);
    std::copy(data(i), data(i) + words_, code.words.begin());
    return code;
}

int HashCodeSet::sign(std::size_t i, int j) const {
    const std::uint64_t word = data(i)[static_cast<std::size_t>(j) / 64];
    return (word >> (static_cast<std::size_t>(j) % 64)) & 1u ? 1 : -1;
}

void validate_hash_params(const HashParams& params, Index n_anchors) {
    if (!(params.sigma > 0))
        throw std::invalid_argument("sigma must be resolved to a positive value");
    if (params.s < 1 || params.s > n_anchors)
        throw std::invalid_argument("s must lie in [1, n_anchors]");
    if (params.omega < 1) throw std::invalid_argument("omega must be >= 1");
}

Vector rbf_weights(const Vector& x, const Matrix& anchors, double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
    if (x.size() != anchors.cols())
        throw DataError("instance dimension does not match anchors");
    if (!x.allFinite()) throw DataError("non-finite instance");
    Vector w(anchors.rows());
    const double inv = 1.0 / (sigma * sigma);
    for (Index q = 0; q < anchors.rows(); ++q) {
        const double d2 = kernels::l2_sqr(x.data(), anchors.data() +
                                          static_cast<std::size_t>(q) *
                                          static_cast<std::size_t>(anchors.cols()),
                                          static_cast<std::size_t>(anchors.cols()));
        w(q) = std::exp(-d2 * inv);
    }
    return w;
}

Vector top_s_boost_renormalize(const Vector& weights, int s, double omega) {
    const Index n = weights.size();
    if (s < 1 || s > n) throw std::invalid_argument("s must lie in [1, n]");
    if (omega < 1) throw std::invalid_argument("omega must be >= 1");
    if ((weights.array() < 0).any())
        throw std::invalid_argument("weights must be non-negative");
    if (weights.maxCoeff() <= 0) throw NumericError("all weights are zero");

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return weights(a) > weights(b);
    });

    Vector out = Vector::Zero(n);
    double sum = 0.0;
    double factor = 1.0;
    for (int i = 0; i < s; ++i) {
        factor /= omega;  // rank i+1 gets omega^-(i+1)
        const double boosted = weights(order[static_cast<std::size_t>(i)]) * factor;
        out(order[static_cast<std::size_t>(i)]) = boosted;
        sum += boosted;
    }
    if (!(sum > 0)) throw NumericError("boosted weights vanished");
    out /= sum;
    return out;
}

Vector inductive_embed(const Vector& sparse_weights, const Matrix& m) {
    if (sparse_weights.size() != m.rows())
        throw DataError("weight count does not match embedding rows");
    if (std::abs(sparse_weights.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("weights must sum to 1");
    return m.transpose() * sparse_weights;
}

HashCode binarize(const Vector& m) {
    if (!m.allFinite()) throw NumericError("non-finite embedding");
    HashCode code = HashCode::zeros(static_cast<int>(m.size()));
    for (Index j = 0; j < m.size(); ++j)
        code.set_sign(static_cast<int>(j), m(j) >= 0);
    return code;
}

HashCode hash_seen_instance(const Vector& x, const AnchorSet& anchors,
                            const AnchorEmbedding& embedding,
                            const HashParams& params) {
    validate_hash_params(params, anchors.centers.rows());
    if (x.size() != anchors.centers.cols())
        throw DataError("instance dimension does not match anchors");
    if (anchors.centers.rows() != embedding.m.rows())
        throw DataError("anchor count does not match embedding rows");
    if (!x.allFinite()) throw DataError("non-finite instance");
    std::vector<double> dist_buf;
    return hash_one(x.data(), anchors, embedding, params, dist_buf);
}

HashCodeSet anchor_hash_codes(const AnchorEmbedding& embedding) {
    HashCodeSet codes(static_cast<std::size_t>(embedding.m.rows()),
                      embedding.code_length);
    for (Index q = 0; q < embedding.m.rows(); ++q)
        codes.assign(static_cast<std::size_t>(q),
                     binarize(embedding.m.row(q).transpose()));
    return codes;
}

HashCodeSet hash_dataset(const Matrix& x, const AnchorSet& anchors,
                         const AnchorEmbedding& embedding,
                         const HashParams& params, int n_threads) {
    validate_hash_params(params, anchors.centers.rows());
    if (x.cols() != anchors.centers.cols())
        throw DataError("instance dimension does not match anchors");
    if (anchors.centers.rows() != embedding.m.rows())
        throw DataError("anchor count does not match embedding rows");
    if (!x.allFinite()) throw DataError("non-finite feature");

    const std::size_t n = static_cast<std::size_t>(x.rows());
    const std::size_t dim = static_cast<std::size_t>(x.cols());
    HashCodeSet codes(n, embedding.code_length);

    auto worker = [&](std::size_t begin, std::size_t end) {
        std::vector<double> dist_buf;
        for (std::size_t i = begin; i < end; ++i)
            codes.assign(i, hash_one(x.data() + i * dim, anchors, embedding,
                                     params, dist_buf));
    };

    const std::size_t threads =
        std::min<std::size_t>(std::max(n_threads, 1), std::max<std::size_t>(n, 1));
    if (threads <= 1) {
        worker(0, n);
        return codes;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
    return codes;
}

double auto_sigma(const Matrix& x, const Matrix& centers) {
    if (x.rows() == 0) throw DataError("empty training set");
    if (x.cols() != centers.cols())
        throw DataError("instance dimension does not match anchors");
    const std::size_t n = static_cast<std::size_t>(x.rows());
    const std::size_t dim = static_cast<std::size_t>(x.cols());
    const std::size_t sample = std::min<std::size_t>(n, 1000);

    std::vector<double> nearest(sample);
    std::vector<double> dist_buf(static_cast<std::size_t>(centers.rows()));
    for (std::size_t i = 0; i < sample; ++i) {
        const std::size_t row = i * n / sample;  // even stride over the set
        kernels::l2_sqr_rows(x.data() + row * dim, centers.data(),
                             static_cast<std::size_t>(centers.rows()), dim,
                             dist_buf.data());
        nearest[i] = std::sqrt(*std::min_element(dist_buf.begin(), dist_buf.end()));
    }
    std::sort(nearest.begin(), nearest.end());
    const double median = sample % 2 == 1
                              ? nearest[sample / 2]
                              : 0.5 * (nearest[sample / 2 - 1] + nearest[sample / 2]);
    const double sigma = median * std::sqrt(2.0);
    if (!(sigma > 0))
        throw NumericError("auto sigma is zero; pass sigma explicitly");
    return sigma;
}

void save_codes(const std::string& path, const HashCodeSet& codes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write("ZSH1", 4);
    write_u32(out, static_cast<std::uint32_t>(codes.size()));
    write_u32(out, static_cast<std::uint32_t>(codes.length()));
    const std::size_t bytes = (static_cast<std::size_t>(codes.length()) + 7) / 8;
    std::vector<char> buf(bytes);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const std::uint64_t* words = codes.data(i);
        for (std::size_t k = 0; k < bytes; ++k)
            buf[k] = static_cast<char>((words[k / 8] >> (8 * (k % 8))) & 0xff);
        out.write(buf.data(), static_cast<std::streamsize>(bytes));
    }
    if (!out) throw DataError("write failed: " + path);
}

HashCodeSet load_codes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "ZSH1", 4) != 0)
        throw DataError(path + ": not a hash code file");
    const std::uint32_t n = read_u32(in, path);
    const std::uint32_t b = read_u32(in, path);
    if (b == 0) throw DataError(path + ": zero code length");

    HashCodeSet codes(n, static_cast<int>(b));
    const std::size_t bytes = (static_cast<std::size_t>(b) + 7) / 8;
    std::vector<char> buf(bytes);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!in.read(buf.data(), static_cast<std::streamsize>(bytes)))
            throw DataError(path + ": truncated code data");
        std::uint64_t* words = codes.data(i);
        for (std::size_t k = 0; k < bytes; ++k)
            words[k / 8] |= static_cast<std::uint64_t>(
                                static_cast<unsigned char>(buf[k]))
                            << (8 * (k % 8));
    }
    // Reject stray bits beyond the advertised length.
    const std::uint64_t pad_mask =
        b % 64 == 0 ? 0 : ~((std::uint64_t{1} << (b % 64)) - 1);
    if (pad_mask != 0)
        for (std::uint32_t i = 0; i < n; ++i)
            if (codes.data(i)[codes.words_per_code() - 1] & pad_mask)
                throw DataError(path + ": nonzero padding bits");
    return codes;
}

void write_codes_csv(const std::string& path, const HashCodeSet& codes) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        for (int j = 0; j < codes.length(); ++j) {
            if (j > 0) out << ',';
            out << codes.sign(i, j);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace zshash
