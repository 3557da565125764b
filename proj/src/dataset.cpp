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

#include "zshash/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "zshash/csv.hpp"

namespace zshash {

namespace {

// Fisher-Yates with an explicitly specified draw so the partition does not
// depend on the standard library's distribution implementation.
void seeded_shuffle(std::vector<int>& v, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(gen() % i);
        std::swap(v[i - 1], v[j]);
    }
}

void check_signatures(const Matrix& signatures, const std::string& what) {
    for (Index j = 0; j < signatures.cols(); ++j) {
        bool any_nonzero = false;
        for (Index i = 0; i < signatures.rows(); ++i) {
            const double v = signatures(i, j);
            if (!(v >= 0.0 && v <= 1.0)) {
                throw DataError(what + ": signature entry " + std::to_string(v) +
                                " outside [0,1] (class " + std::to_string(j) + ")");
            }
            if (v != 0.0) any_nonzero = true;
        }
        if (!any_nonzero)
            throw DataError(what + ": all-zero signature column for class " +
                            std::to_string(j));
    }
}

}  // namespace

void DatasetBundle::validate() const {
    if (features.rows() < 1 || features.cols() < 1)
        throw DataError("feature matrix must be at least 1x1");
    if (!features.allFinite()) throw DataError("non-finite feature");
    if (static_cast<Index>(labels.size()) != features.rows())
        throw DataError("label count " + std::to_string(labels.size()) +
                        " does not match instance count " +
                        std::to_string(features.rows()));
    for (const int label : labels) {
        if (label < 0 || label >= n_classes())
            throw DataError("label out of range: " + std::to_string(label) +
                            " with " + std::to_string(n_classes()) + " classes");
    }
    check_signatures(signatures, "signatures");
    if (!class_names.empty() &&
        class_names.size() != static_cast<std::size_t>(n_classes()))
        throw DataError("class_names size does not match class count");
}

DatasetBundle load_dataset(const std::string& features_path,
                           const std::string& labels_path,
                           const std::string& signatures_path,
                           bool zscore_features) {
    Matrix features = csv::read_matrix(features_path);
    const std::vector<long long> raw_labels = csv::read_int_column(labels_path);
    Matrix signatures = csv::read_matrix(signatures_path);

    if (!features.allFinite())
        throw DataError(features_path + ": non-finite feature");
    if (static_cast<Index>(raw_labels.size()) != features.rows())
        throw DataError(labels_path + ": " + std::to_string(raw_labels.size()) +
                        " labels for " + std::to_string(features.rows()) +
                        " feature rows");

    const long long n_columns = signatures.cols();
    for (const long long raw : raw_labels) {
        if (raw < 0 || raw >= n_columns)
            throw DataError(labels_path + ": label out of range: " +
                            std::to_string(raw) + " with " +
                            std::to_string(n_columns) + " signature columns");
    }

    // Dense remap, stable by first appearance in the labels file. Classes
    // that never appear lose their signature column.
    std::vector<int> remap(static_cast<std::size_t>(n_columns), -1);
    std::vector<int> kept_columns;
    std::vector<int> labels;
    labels.reserve(raw_labels.size());
    for (const long long raw : raw_labels) {
        int& slot = remap[static_cast<std::size_t>(raw)];
        if (slot < 0) {
            slot = static_cast<int>(kept_columns.size());
            kept_columns.push_back(static_cast<int>(raw));
        }
        labels.push_back(slot);
    }

    Matrix kept_signatures(signatures.rows(),
                           static_cast<Index>(kept_columns.size()));
    for (std::size_t j = 0; j < kept_columns.size(); ++j)
        kept_signatures.col(static_cast<Index>(j)) = signatures.col(kept_columns[j]);

    if (zscore_features) {
        for (Index j = 0; j < features.cols(); ++j) {
            const double mean = features.col(j).mean();
            const double var =
                (features.col(j).array() - mean).square().sum() /
                static_cast<double>(features.rows());
            const double sd = std::sqrt(var);
            features.col(j).array() -= mean;
            if (sd > 0) features.col(j) /= sd;
        }
    }

    DatasetBundle bundle{std::move(features), std::move(labels),
                         std::move(kept_signatures), {}};
    bundle.validate();
    return bundle;
}

void write_dataset(const std::string& dir, const DatasetBundle& bundle) {
    std::filesystem::create_directories(dir);
    csv::write_matrix(dir + "/features.csv", bundle.features);
    csv::write_int_column(dir + "/labels.csv", bundle.labels);
    csv::write_matrix(dir + "/signatures.csv", bundle.signatures);
}

SeenUnseenSplit split_seen_unseen(const DatasetBundle& bundle,
                                  const std::vector<int>& unseen_class_ids) {
    const int n = bundle.n_classes();
    std::set<int> unseen_set(unseen_class_ids.begin(), unseen_class_ids.end());
    if (unseen_set.empty()) throw std::invalid_argument("unseen class set is empty");
    for (const int id : unseen_set) {
        if (id < 0 || id >= n)
            throw std::invalid_argument("unseen class id out of range: " +
                                        std::to_string(id));
    }
    if (static_cast<int>(unseen_set.size()) >= n)
        throw std::invalid_argument("unseen classes must be a strict subset");

    SeenUnseenSplit split;
    std::vector<int> class_to_side(n);  // 0 = seen, 1 = unseen
    std::vector<int> class_to_local(n, -1);
    for (int c = 0; c < n; ++c) {
        if (unseen_set.count(c)) {
            class_to_side[c] = 1;
            class_to_local[c] = static_cast<int>(split.unseen_class_ids.size());
            split.unseen_class_ids.push_back(c);
        } else {
            class_to_side[c] = 0;
            class_to_local[c] = static_cast<int>(split.seen_class_ids.size());
            split.seen_class_ids.push_back(c);
        }
    }

    auto build_side = [&](const std::vector<int>& ids) {
        DatasetBundle side;
        std::vector<Index> rows;
        for (Index i = 0; i < bundle.n_instances(); ++i) {
            const int c = bundle.labels[static_cast<std::size_t>(i)];
            if (std::binary_search(ids.begin(), ids.end(), c)) rows.push_back(i);
        }
        side.features.resize(static_cast<Index>(rows.size()), bundle.dim());
        side.labels.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            side.features.row(static_cast<Index>(r)) = bundle.features.row(rows[r]);
            side.labels.push_back(
                class_to_local[bundle.labels[static_cast<std::size_t>(rows[r])]]);
        }
        side.signatures.resize(bundle.signatures.rows(),
                               static_cast<Index>(ids.size()));
        for (std::size_t j = 0; j < ids.size(); ++j)
            side.signatures.col(static_cast<Index>(j)) = bundle.signatures.col(ids[j]);
        if (!bundle.class_names.empty()) {
            for (const int id : ids)
                side.class_names.push_back(
                    bundle.class_names[static_cast<std::size_t>(id)]);
        }
        return side;
    };

    split.seen = build_side(split.seen_class_ids);
    split.unseen = build_side(split.unseen_class_ids);
    return split;
}

DatasetBundle merge_split(const SeenUnseenSplit& split) {
    const int n_total = static_cast<int>(split.seen_class_ids.size() +
                                         split.unseen_class_ids.size());
    DatasetBundle merged;
    const Index n_seen_rows = split.seen.n_instances();
    const Index n_rows = n_seen_rows + split.unseen.n_instances();
    merged.features.resize(n_rows, split.seen.dim());
    merged.features.topRows(n_seen_rows) = split.seen.features;
    merged.features.bottomRows(split.unseen.n_instances()) = split.unseen.features;

    merged.labels.reserve(static_cast<std::size_t>(n_rows));
    for (const int local : split.seen.labels)
        merged.labels.push_back(split.seen_class_ids[static_cast<std::size_t>(local)]);
    for (const int local : split.unseen.labels)
        merged.labels.push_back(
            split.unseen_class_ids[static_cast<std::size_t>(local)]);

    merged.signatures.resize(split.seen.signatures.rows(), n_total);
    for (std::size_t j = 0; j < split.seen_class_ids.size(); ++j)
        merged.signatures.col(split.seen_class_ids[j]) =
            split.seen.signatures.col(static_cast<Index>(j));
    for (std::size_t j = 0; j < split.unseen_class_ids.size(); ++j)
        merged.signatures.col(split.unseen_class_ids[j]) =
            split.unseen.signatures.col(static_cast<Index>(j));
    return merged;
}

std::pair<std::vector<int>, std::vector<int>> split_query_database(
    std::size_t n, double query_fraction, std::uint64_t seed) {
    if (!(query_fraction > 0.0 && query_fraction < 1.0))
        throw std::invalid_argument("query_fraction must lie in (0,1)");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    seeded_shuffle(order, seed);
    const std::size_t n_query = static_cast<std::size_t>(
        std::lround(query_fraction * static_cast<double>(n)));
    std::vector<int> query(order.begin(), order.begin() + n_query);
    std::vector<int> database(order.begin() + n_query, order.end());
    std::sort(query.begin(), query.end());
    std::sort(database.begin(), database.end());
    return {std::move(query), std::move(database)};
}

SeenUnseenSplit generate_synthetic(int n_seen, int n_unseen, int per_class,
                                   int d, int a, double cluster_spread,
                                   std::uint64_t seed) {
    if (n_seen < 1 || n_unseen < 1 || per_class < 1 || d < 1 || a < 1)
        throw std::invalid_argument("synthetic counts must all be >= 1");
    if (d < n_seen)
        throw std::invalid_argument(
            "feature dimension must be >= number of seen classes (got d=" +
            std::to_string(d) + ", n_seen=" + std::to_string(n_seen) + ")");
    if (n_seen < 2)
        throw std::invalid_argument("need at least two seen classes to blend from");

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Random binary seen signatures, column j = class j. Each class gets a
    // planted identity bit so no two classes are forced to collide, and the
    // remaining positions are sparse random bits that vary per seed.
    Matrix s_seen = Matrix::Zero(a, n_seen);
    const Index exclusive = std::max<Index>(1, a / (2 * n_seen));
    const Index tail_start = std::min<Index>(a, n_seen * exclusive);
    for (Index j = 0; j < n_seen; ++j) {
        for (Index r = 0; r < exclusive; ++r)
            s_seen((j * exclusive + r) % a, j) = 1.0;
        for (Index i = tail_start; i < a; ++i)
            if ((gen() & 3u) == 0) s_seen(i, j) = 1.0;
    }

    // Linear map from signature space to feature space; class means are
    // its images, so signature mixtures map to feature-mean mixtures.
    Matrix map(d, a);
    const double scale = 1.0 / std::sqrt(static_cast<double>(a));
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < a; ++j) map(i, j) = gauss(gen) * scale;

    // Each unseen class blends a distinct consecutive pair of seen classes.
    Matrix s_unseen(a, n_unseen);
    for (int u = 0; u < n_unseen; ++u) {
        const int p = (2 * u) % n_seen;
        const int q = (2 * u + 1) % n_seen;
        const double t =
            0.3 + 0.4 * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
        s_unseen.col(u) = t * s_seen.col(p) + (1.0 - t) * s_seen.col(q);
    }

    auto sample_bundle = [&](const Matrix& sigs) {
        DatasetBundle bundle;
        const int n_classes = static_cast<int>(sigs.cols());
        bundle.features.resize(static_cast<Index>(n_classes) * per_class, d);
        bundle.labels.reserve(bundle.features.rows());
        for (int c = 0; c < n_classes; ++c) {
            const Vector mean = map * sigs.col(c);
            for (int k = 0; k < per_class; ++k) {
                const Index row = static_cast<Index>(c) * per_class + k;
                for (Index j = 0; j < d; ++j)
                    bundle.features(row, j) = mean(j) + cluster_spread * gauss(gen);
                bundle.labels.push_back(c);
            }
        }
        bundle.signatures = sigs;
        return bundle;
    };

    SeenUnseenSplit split;
    split.seen = sample_bundle(s_seen);
    split.unseen = sample_bundle(s_unseen);
    for (int c = 0; c < n_seen; ++c) split.seen_class_ids.push_back(c);
    for (int u = 0; u < n_unseen; ++u) split.unseen_class_ids.push_back(n_seen + u);
    split.seen.validate();
    split.unseen.validate();
    return split;
}

}  // namespace zshash
