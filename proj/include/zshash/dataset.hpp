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
#include <utility>
#include <vector>

#include "zshash/types.hpp"

namespace zshash {

// Instances, their dense class labels, and the per-class attribute
// signatures. Immutable after construction; share freely across threads.
struct DatasetBundle {
    Matrix features;          // N x d, one instance per row
    std::vector<int> labels;  // length N, values in [0, n_classes)
    Matrix signatures;        // a x n_classes, entries in [0, 1]
    std::vector<std::string> class_names;  // optional, empty or n_classes

    Index n_instances() const { return features.rows(); }
    Index dim() const { return features.cols(); }
    int n_classes() const { return static_cast<int>(signatures.cols()); }
    int attr_dim() const { return static_cast<int>(signatures.rows()); }

    // Checks the cross-field invariants; throws DataError on violation.
    void validate() const;
};

struct SeenUnseenSplit {
    DatasetBundle seen;
    DatasetBundle unseen;
    std::vector<int> seen_class_ids;    // original class ids, ascending
    std::vector<int> unseen_class_ids;  // original class ids, ascending
};

// Loads and validates the three CSV files. Raw labels index signature
// columns; they are remapped to a dense [0, n) range ordered by first
// appearance, and signature columns of classes with no instances are
// dropped.
DatasetBundle load_dataset(const std::string& features_path,
                           const std::string& labels_path,
                           const std::string& signatures_path,
                           bool zscore_features = false);

// Writes features.csv / labels.csv / signatures.csv under dir.
void write_dataset(const std::string& dir, const DatasetBundle& bundle);

// Moves every instance and signature column of the given classes to the
// unseen side. Deterministic; instance order is preserved on each side.
SeenUnseenSplit split_seen_unseen(const DatasetBundle& bundle,
                                  const std::vector<int>& unseen_class_ids);

// Inverse of split_seen_unseen up to instance order (seen block first).
DatasetBundle merge_split(const SeenUnseenSplit& split);

// Seeded uniform partition into round(query_fraction * n) query indices
// and the remaining database indices, both ascending.
std::pair<std::vector<int>, std::vector<int>> split_query_database(
    std::size_t n, double query_fraction, std::uint64_t seed);

// Synthetic seen/unseen data with planted structure: seen classes get
// random binary signatures and Gaussian clusters around linear images of
// those signatures; each unseen class blends two seen classes, in both
// signature and feature space.
SeenUnseenSplit generate_synthetic(int n_seen, int n_unseen, int per_class,
                                   int d, int a, double cluster_spread,
                                   std::uint64_t seed);

}  // namespace zshash
