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

#include <string>

#include "zshash/defaults.hpp"
#include "zshash/types.hpp"

namespace zshash {

enum class EmbedderKind { KernelPCA, Isomap, LLE };

std::string embedder_kind_name(EmbedderKind kind);
EmbedderKind parse_embedder_kind(const std::string& name);

struct EmbedderSpec {
    EmbedderKind kind = EmbedderKind::KernelPCA;
    // Bandwidth of the RBF kernel; 0 selects the median pairwise distance.
    double kernel_bandwidth = 0.0;
    int n_neighbors = defaults::kEmbedderNeighbors;
};

// Low-dimensional coordinates of the anchors, one row per anchor. Every
// inductive formula downstream is a weighted combination of these rows.
struct AnchorEmbedding {
    Matrix m;
    int code_length = 0;
    EmbedderSpec embedder;  // with kernel_bandwidth resolved to its numeric value
};

double median_pairwise_distance(const Matrix& points);

// RBF kernel, double centering, top-b spectral coordinates scaled by the
// square roots of the eigenvalues. Non-positive directions become zero
// columns (with a warning on stderr).
Matrix kernel_pca(const Matrix& points, double bandwidth, int b);

// Symmetrized k-NN graph, geodesic distances by all-pairs shortest path,
// classical MDS. Disconnected components are bridged through their closest
// inter-component pair until one component remains.
Matrix isomap(const Matrix& points, int n_neighbors, int b);

// Locally linear reconstruction weights with a regularized local Gram
// matrix; coordinates are the bottom non-constant eigenvectors of
// (I-W)^T (I-W). Requires b < n.
Matrix lle(const Matrix& points, int n_neighbors, int b);

AnchorEmbedding embed_anchors(const Matrix& centers, const EmbedderSpec& spec,
                              int b);

void save_embedding(const std::string& csv_path,
                    const std::string& sidecar_path,
                    const AnchorEmbedding& embedding);
AnchorEmbedding load_embedding(const std::string& csv_path,
                               const std::string& sidecar_path);

}  // namespace zshash
