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
#include <vector>

#include "zshash/defaults.hpp"
#include "zshash/embedding.hpp"
#include "zshash/hashing.hpp"
#include "zshash/types.hpp"

namespace zshash {

struct ZslHyperparams {
    double gamma = defaults::kAwaPreset.gamma;
    double lambda = defaults::kAwaPreset.lambda;
    double alpha() const { return gamma * lambda; }
};

// Bilinear attribute predictor: instance x of an unseen class scores
// x^T V s against each candidate signature s.
struct ZslModel {
    Matrix v;  // d x a
    ZslHyperparams hyper;
};

// Seen-anchor embedding plus one synthesized embedding row per unseen
// class.
struct ExtendedAnchorSet {
    AnchorEmbedding base;
    Matrix unseen_embeddings;  // n_u x b
    std::vector<int> unseen_class_ids;
};

// Closed-form ridge fit of V: (X^T X + gamma I)^-1 X^T Y S^T (S S^T +
// lambda I)^-1. X is N x d, Y is N x n_s with entries in {-1,+1}, S is
// a x n_s (one signature column per seen class).
ZslModel fit_eszsl(const Matrix& x, const Matrix& y, const Matrix& s,
                   double gamma, double lambda);

// |XVS - Y|_F^2 + gamma |VS|_F^2 + lambda |XV|_F^2 + gamma lambda |V|_F^2
double eszsl_objective(const Matrix& v, const Matrix& x, const Matrix& y,
                       const Matrix& s, double gamma, double lambda);
Matrix eszsl_gradient(const Matrix& v, const Matrix& x, const Matrix& y,
                      const Matrix& s, double gamma, double lambda);

// Raw bilinear scores x^T V S'; may be negative.
Vector score_unseen(const Vector& x, const ZslModel& model,
                    const Matrix& s_unseen);

double cosine_class_similarity(const Vector& a_i, const Vector& a_j);

// Similarity-weighted average of ALL seen anchor embeddings; no top-s
// truncation here.
Vector synthesize_unseen_anchor(const Vector& a_new, const Matrix& s_seen,
                                const AnchorEmbedding& m);

// Synthesizes one embedding per column of s_unseen. Empty ids default to
// 0..n_u-1.
ExtendedAnchorSet extend_anchor_set(const AnchorEmbedding& base,
                                    const Matrix& s_seen,
                                    const Matrix& s_unseen,
                                    std::vector<int> unseen_class_ids = {});

// Scores against the unseen signatures, shifts the kept top-s scores into
// positive territory when needed, then reuses the shared boost and
// renormalization path before the weighted embedding and sign step. s is
// clamped to the number of unseen classes.
HashCode hash_unseen_instance(const Vector& x_u, const ZslModel& model,
                              const ExtendedAnchorSet& ext,
                              const Matrix& s_unseen,
                              const HashParams& params);

HashCodeSet hash_unseen_dataset(const Matrix& x_u, const ZslModel& model,
                                const ExtendedAnchorSet& ext,
                                const Matrix& s_unseen,
                                const HashParams& params, int n_threads = 1);

void save_zsl_model(const std::string& csv_path,
                    const std::string& sidecar_path, const ZslModel& model);
ZslModel load_zsl_model(const std::string& csv_path,
                        const std::string& sidecar_path);

// The extended set serializes as the base rows followed by the unseen
// rows in one CSV, with a manifest naming the boundary and the class ids.
void save_extended_set(const std::string& csv_path,
                       const std::string& manifest_path,
                       const ExtendedAnchorSet& ext);
ExtendedAnchorSet load_extended_set(const std::string& csv_path,
                                    const std::string& manifest_path);

}  // namespace zshash
