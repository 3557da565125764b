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

#include "zshash/defaults.hpp"
#include "zshash/types.hpp"

namespace zshash {

// One learned cluster center per seen class, with the anchor-to-class
// binding. Immutable after fitting.
struct AnchorSet {
    Matrix centers;                    // n_s x d
    std::vector<int> class_of_anchor;  // bijection anchor index -> class
    std::vector<int> assignments;      // per-instance cluster index
    double beta = defaults::kBeta;
    int iterations = 0;
    // Objective value after the initial assignment and after every
    // subsequent update round; non-increasing by construction.
    std::vector<double> objective_history;
};

// Greedy farthest-point seeding: first center is a uniformly random data
// point, each next one is the data point maximizing its distance to the
// nearest already-chosen center (ties to the lowest index).
Matrix farthest_point_init(const Matrix& x, int k, std::uint64_t seed);

// Label-penalized k-means with k = number of classes: assigning instance n
// to cluster q costs ||x_n - mu_q||^2 plus beta when q differs from the
// instance's label. Alternates assignment and mean updates until the
// assignments stop changing, the relative objective improvement drops
// below tol, or max_iter rounds.
AnchorSet penalized_kmeans(const Matrix& x, const std::vector<int>& labels,
                           double beta, int max_iter, double tol,
                           std::uint64_t seed);

// Same, starting from explicit initial centers.
AnchorSet penalized_kmeans_from(const Matrix& x, const std::vector<int>& labels,
                                double beta, int max_iter, double tol,
                                Matrix initial_centers);

// Squared-distance clustering objective with the label penalty.
double kmeans_objective(const Matrix& x, const std::vector<int>& labels,
                        const Matrix& centers,
                        const std::vector<int>& assignments, double beta);

// Row c = arithmetic mean of the instances labeled c. Throws DataError if
// a class has no instances.
Matrix class_means(const Matrix& x, const std::vector<int>& labels);

// Bijection anchor -> class minimizing the total Euclidean distance
// between matched (center, class mean) pairs (optimal assignment, not
// greedy nearest).
std::vector<int> assign_anchors_to_classes(const Matrix& centers,
                                           const Matrix& means);

// Permutes the anchors so that row c is the anchor of class c; the
// bijection becomes the identity and per-instance assignments are remapped.
AnchorSet reorder_by_class(const AnchorSet& set);

void save_anchor_set(const std::string& csv_path,
                     const std::string& sidecar_path, const AnchorSet& set);
AnchorSet load_anchor_set(const std::string& csv_path,
                          const std::string& sidecar_path);

}  // namespace zshash
