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
#include <ostream>
#include <string>
#include <vector>

#include "zshash/anchors.hpp"
#include "zshash/dataset.hpp"
#include "zshash/embedding.hpp"
#include "zshash/eval.hpp"
#include "zshash/hashing.hpp"
#include "zshash/zsl.hpp"

namespace zshash {

struct KmeansConfig {
    double beta = defaults::kBeta;
    int max_iter = defaults::kKmeansMaxIter;
    double tol = defaults::kKmeansTol;
    std::uint64_t seed = 7;
};

struct EvalConfig {
    int radius = defaults::kRadius;
    double query_fraction = defaults::kQueryFraction;
    std::uint64_t split_seed = 11;
};

// Whether the 30-trial loop keeps the seen/unseen class split fixed and
// only re-draws the query/database partition, or re-draws both.
enum class TrialMode { Fixed, Resplit };

std::string trial_mode_name(TrialMode mode);
TrialMode parse_trial_mode(const std::string& name);

struct ExperimentConfig {
    int bits = 8;
    EmbedderSpec embedder;
    HashParams hash;
    KmeansConfig kmeans;
    ZslHyperparams zsl;
    EvalConfig eval;
    int n_trials = 1;
    TrialMode trial_mode = TrialMode::Fixed;
    // Fixed mode: these classes are held out (empty = take them from the
    // provided split). Resplit mode: n_unseen classes drawn per trial.
    std::vector<int> unseen_class_ids;
    int n_unseen = 0;
    std::uint64_t class_seed = 13;
    int n_threads = 1;
    std::string data_dir;
    std::string out_dir;
};

// Plain-text key=value config; '#' starts a comment. Unknown keys are
// rejected.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

struct TrainedModel {
    AnchorSet anchors;        // reordered so anchor c belongs to class c
    AnchorEmbedding embedding;
    ZslModel zsl;
    ExperimentConfig config;  // sigma and bandwidth resolved
    Matrix signatures_seen;   // a x n_s
    std::vector<int> seen_class_ids;  // global ids, ascending
};

// penalized k-means -> optimal anchor/class matching -> anchor embedding
// -> closed-form attribute predictor. Deterministic per config seeds.
TrainedModel train(const DatasetBundle& seen, const ExperimentConfig& config,
                   std::vector<int> seen_class_ids = {});

// Runs config.n_trials full trials and streams the metrics CSV (header,
// one row per trial, one mean row) to out. Per-trial seeds derive from the
// configured bases plus the trial index.
void run_experiment(const SeenUnseenSplit& split,
                    const ExperimentConfig& config, std::ostream& out);

void save_model(const std::string& dir, const TrainedModel& model);
TrainedModel load_model(const std::string& dir);

}  // namespace zshash
