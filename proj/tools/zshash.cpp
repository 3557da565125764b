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

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zshash/csv.hpp"
#include "zshash/pipeline.hpp"

namespace {

using zshash::DataError;
using zshash::NumericError;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
}

std::vector<int> to_int_labels(const std::vector<long long>& raw) {
    std::vector<int> labels;
    labels.reserve(raw.size());
    for (const long long v : raw) labels.push_back(static_cast<int>(v));
    return labels;
}

// Config-file keys that may also arrive as flags; flags win because they
// are applied after the file is read.
using Overrides = std::vector<std::pair<std::string, std::string>>;

void add_override_flags(CLI::App* cmd, Overrides* pending) {
    const struct {
        const char* flag;
        const char* key;
        const char* desc;
    } specs[] = {
        {"--bits", "bits", "code length in bits (default 8)"},
        {"--embedder", "embedder", "kernel_pca|isomap|lle (default kernel_pca)"},
        {"--bandwidth", "bandwidth",
         "RBF kernel bandwidth, or 'median' (default median)"},
        {"--neighbors", "neighbors",
         "neighborhood size of the graph embedders (default 5)"},
        {"--sigma", "sigma", "hashing weight width, or 'auto' (default auto)"},
        {"--s", "s", "number of nearest anchors kept (default 5)"},
        {"--omega", "omega", "rank boost base (default 5)"},
        {"--beta", "beta", "label penalty of the clustering step (default 0.9)"},
        {"--kmeans-max-iter", "kmeans_max_iter",
         "clustering iteration cap (default 300)"},
        {"--kmeans-tol", "kmeans_tol",
         "relative objective tolerance (default 1e-7)"},
        {"--kmeans-seed", "kmeans_seed", "clustering seed (default 7)"},
        {"--gamma", "gamma", "feature-side regularizer (default 10)"},
        {"--lambda", "lambda", "signature-side regularizer (default 100)"},
        {"--preset", "preset",
         "regularizer preset: awa (10,100) or sun (0.01,1)"},
        {"--radius", "radius", "Hamming lookup radius (default 2)"},
        {"--query-fraction", "query_fraction",
         "query share of the retrieval split (default 0.25)"},
        {"--split-seed", "split_seed", "query/database split seed (default 11)"},
        {"--trials", "n_trials", "number of trials (default 1)"},
        {"--trial-mode", "trial_mode", "fixed|resplit (default fixed)"},
        {"--unseen-ids", "unseen_ids",
         "comma-separated class ids held out as unseen"},
        {"--n-unseen", "n_unseen",
         "number of classes drawn as unseen per trial (resplit mode)"},
        {"--class-seed", "class_seed", "unseen class draw seed (default 13)"},
        {"--threads", "threads", "worker threads for hashing (default 1)"},
        {"--data", "data_dir", "dataset directory"},
    };
    for (const auto& spec : specs) {
        const std::string key = spec.key;
        cmd->add_option_function<std::string>(
            spec.flag,
            [pending, key](const std::string& value) {
                pending->emplace_back(key, value);
            },
            spec.desc);
    }
}

zshash::ExperimentConfig resolve_config(const std::string& config_path,
                                        const Overrides& pending) {
    zshash::ExperimentConfig config;
    if (!config_path.empty()) config = zshash::parse_config_file(config_path);
    for (const auto& [key, value] : pending)
        zshash::apply_config_entry(config, key, value);
    return config;
}

zshash::DatasetBundle load_dataset_dir(const std::string& dir) {
    return zshash::load_dataset(dir + "/features.csv", dir + "/labels.csv",
                                dir + "/signatures.csv");
}

void setup_synth(CLI::App& app) {
    auto* cmd = app.add_subcommand("synth", "write a synthetic dataset");
    struct Args {
        std::string out;
        int seen = 8, unseen = 2, per_class = 50, dim = 32, attrs = 16;
        double spread = 0.1;
        std::uint64_t seed = 1;
    };
    auto args = std::make_shared<Args>();
    cmd->add_option("--out", args->out, "output directory")->required();
    cmd->add_option("--seen", args->seen, "seen classes (default 8)");
    cmd->add_option("--unseen", args->unseen, "unseen classes (default 2)");
    cmd->add_option("--per-class", args->per_class,
                    "instances per class (default 50)");
    cmd->add_option("--dim", args->dim, "feature dimension (default 32)");
    cmd->add_option("--attrs", args->attrs, "attribute dimension (default 16)");
    cmd->add_option("--spread", args->spread,
                    "cluster standard deviation (default 0.1)");
    cmd->add_option("--seed", args->seed, "generator seed (default 1)");
    cmd->callback([args] {
        const zshash::SeenUnseenSplit split = zshash::generate_synthetic(
            args->seen, args->unseen, args->per_class, args->dim, args->attrs,
            args->spread, args->seed);
        const zshash::DatasetBundle merged = zshash::merge_split(split);
        zshash::write_dataset(args->out, merged);

        nlohmann::json manifest;
        manifest["seen_class_ids"] = split.seen_class_ids;
        manifest["unseen_class_ids"] = split.unseen_class_ids;
        manifest["per_class"] = args->per_class;
        manifest["spread"] = args->spread;
        manifest["seed"] = args->seed;
        std::ofstream out(args->out + "/synth.json");
        if (!out) throw DataError("cannot write " + args->out + "/synth.json");
        out << manifest.dump(2) << '\n';

        std::cerr << "wrote " << merged.n_instances() << " instances, "
                  << merged.n_classes() << " classes (unseen:";
        for (const int id : split.unseen_class_ids) std::cerr << ' ' << id;
        std::cerr << ") to " << args->out << '\n';
    });
}

void setup_train(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "fit anchors, embedding, and the "
                                            "attribute predictor");
    struct Args {
        std::string out;
        std::string config_path;
        Overrides pending;
    };
    auto args = std::make_shared<Args>();
    cmd->add_option("--out", args->out, "model output directory")->required();
    cmd->add_option("--config", args->config_path, "key=value config file");
    add_override_flags(cmd, &args->pending);
    cmd->callback([args] {
        const zshash::ExperimentConfig config =
            resolve_config(args->config_path, args->pending);
        if (config.data_dir.empty())
            throw CLI::ValidationError("train", "--data is required");
        const zshash::DatasetBundle bundle = load_dataset_dir(config.data_dir);

        const auto start = std::chrono::steady_clock::now();
        zshash::TrainedModel model;
        if (config.unseen_class_ids.empty()) {
            model = zshash::train(bundle, config);
        } else {
            const zshash::SeenUnseenSplit split =
                zshash::split_seen_unseen(bundle, config.unseen_class_ids);
            model = zshash::train(split.seen, config, split.seen_class_ids);
        }
        zshash::save_model(args->out, model);
        std::cerr << "trained " << model.anchors.centers.rows() << " anchors ("
                  << model.config.bits << " bits, sigma "
                  << model.config.hash.sigma << ") in " << elapsed_ms(start)
                  << " ms -> " << args->out << '\n';
    });
}

void setup_hash(CLI::App& app) {
    auto* cmd = app.add_subcommand("hash", "hash a feature file with a "
                                           "trained model");
    struct Args {
        std::string model_dir, features_path, out, csv_out;
        bool unseen = false;
        int threads = 1;
    };
    auto args = std::make_shared<Args>();
    cmd->add_option("--model", args->model_dir, "model directory")->required();
    cmd->add_option("--features", args->features_path, "feature CSV, one "
                                                       "instance per row")
        ->required();
    cmd->add_option("--out", args->out, "output code file")->required();
    cmd->add_option("--csv", args->csv_out, "also write codes as a +1/-1 CSV");
    cmd->add_flag("--unseen", args->unseen,
                  "hash against the extended (unseen) anchors");
    cmd->add_option("--threads", args->threads, "worker threads (default 1)");
    cmd->callback([args] {
        const zshash::TrainedModel model = zshash::load_model(args->model_dir);
        const zshash::Matrix features = zshash::csv::read_matrix(args->features_path);

        const auto start = std::chrono::steady_clock::now();
        zshash::HashCodeSet codes;
        if (args->unseen) {
            const zshash::ExtendedAnchorSet ext = zshash::load_extended_set(
                args->model_dir + "/extended.csv",
                args->model_dir + "/extended.json");
            const zshash::Matrix s_unseen = zshash::csv::read_matrix(
                args->model_dir + "/signatures_unseen.csv");
            codes = zshash::hash_unseen_dataset(features, model.zsl, ext,
                                                s_unseen, model.config.hash,
                                                args->threads);
        } else {
            codes = zshash::hash_dataset(features, model.anchors,
                                         model.embedding, model.config.hash,
                                         args->threads);
        }
        const double ms = elapsed_ms(start);
        zshash::save_codes(args->out, codes);
        if (!args->csv_out.empty()) zshash::write_codes_csv(args->csv_out, codes);
        std::cerr << "hashed " << codes.size() << " instances to "
                  << codes.length() << "-bit codes in " << ms << " ms\n";
    });
}

void setup_extend(CLI::App& app) {
    auto* cmd = app.add_subcommand("extend", "synthesize anchors for unseen "
                                             "classes from their signatures");
    struct Args {
        std::string model_dir, signatures_path, ids;
    };
    auto args = std::make_shared<Args>();
    cmd->add_option("--model", args->model_dir, "model directory")->required();
    cmd->add_option("--signatures", args->signatures_path,
                    "unseen signature CSV (one class per column)")
        ->required();
    cmd->add_option("--ids", args->ids, "comma-separated class ids for the "
                                        "columns (default 0..n_u-1)");
    cmd->callback([args] {
        const zshash::TrainedModel model = zshash::load_model(args->model_dir);
        const zshash::Matrix s_unseen =
            zshash::csv::read_matrix(args->signatures_path);
        std::vector<int> ids;
        if (!args->ids.empty()) {
            zshash::ExperimentConfig scratch;
            zshash::apply_config_entry(scratch, "unseen_ids", args->ids);
            ids = scratch.unseen_class_ids;
        }
        const zshash::ExtendedAnchorSet ext = zshash::extend_anchor_set(
            model.embedding, model.signatures_seen, s_unseen, ids);
        zshash::save_extended_set(args->model_dir + "/extended.csv",
                                  args->model_dir + "/extended.json", ext);
        zshash::csv::write_matrix(args->model_dir + "/signatures_unseen.csv",
                                  s_unseen);
        std::cerr << "extended " << ext.base.m.rows() << " anchors with "
                  << ext.unseen_embeddings.rows() << " unseen classes\n";
    });
}

void setup_eval(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval", "retrieval metrics for code files");
    struct Args {
        std::string queries, query_labels, database, db_labels;
        std::string method = "zshash";
        int radius = zshash::defaults::kRadius;
        int s = zshash::defaults::kTopS;
        bool drop_empty = false;
    };
    auto args = std::make_shared<Args>();
    cmd->add_option("--queries", args->queries, "query code file")->required();
    cmd->add_option("--query-labels", args->query_labels, "query label CSV")
        ->required();
    cmd->add_option("--database", args->database, "database code file")
        ->required();
    cmd->add_option("--db-labels", args->db_labels, "database label CSV")
        ->required();
    cmd->add_option("--radius", args->radius, "lookup radius (default 2)");
    cmd->add_option("--method", args->method,
                    "method name echoed in the CSV row (default zshash)");
    cmd->add_option("--s", args->s, "s value echoed in the CSV row (default 5)");
    cmd->add_flag("--drop-empty", args->drop_empty,
                  "drop queries with empty retrieval from the precision "
                  "average instead of counting them as 0");
    cmd->callback([args] {
        const zshash::HashCodeSet queries = zshash::load_codes(args->queries);
        const zshash::HashCodeSet database = zshash::load_codes(args->database);
        const std::vector<int> query_labels =
            to_int_labels(zshash::csv::read_int_column(args->query_labels));
        const std::vector<int> db_labels =
            to_int_labels(zshash::csv::read_int_column(args->db_labels));

        const zshash::RetrievalMetrics lookup =
            zshash::lookup_metrics(queries, query_labels, database, db_labels,
                                   args->radius, args->drop_empty);
        zshash::MetricsRow row;
        row.method = args->method;
        row.code_length = queries.length();
        row.s = args->s;
        row.radius = args->radius;
        row.precision = lookup.precision;
        row.recall = lookup.recall;
        row.f1 = lookup.f1;
        row.map = zshash::mean_average_precision(queries, query_labels,
                                                 database, db_labels);
        // The anchor-assignment accuracies need model artifacts that this
        // subcommand does not see.
        row.accuracy_train = std::nan("");
        row.accuracy_test = std::nan("");
        zshash::write_metrics_header(std::cout);
        zshash::write_metrics_row(std::cout, row);
        if (lookup.n_empty_retrievals > 0)
            std::cerr << lookup.n_empty_retrievals
                      << " queries retrieved nothing at radius " << args->radius
                      << '\n';
        if (lookup.n_skipped_recall > 0)
            std::cerr << lookup.n_skipped_recall
                      << " queries had no same-class database items and were "
                         "skipped for recall\n";
    });
}

void setup_run(CLI::App& app) {
    auto* cmd = app.add_subcommand("run", "train, extend, hash, and evaluate "
                                          "over repeated trials");
    struct Args {
        std::string config_path;
        Overrides pending;
    };
    auto args = std::make_shared<Args>();
    cmd->add_option("--config", args->config_path, "key=value config file");
    add_override_flags(cmd, &args->pending);
    cmd->callback([args] {
        zshash::ExperimentConfig config =
            resolve_config(args->config_path, args->pending);
        if (config.data_dir.empty())
            throw CLI::ValidationError("run", "--data is required");
        const zshash::DatasetBundle bundle = load_dataset_dir(config.data_dir);

        std::vector<int> unseen_ids = config.unseen_class_ids;
        if (unseen_ids.empty()) {
            if (config.trial_mode != zshash::TrialMode::Resplit ||
                config.n_unseen < 1)
                throw CLI::ValidationError(
                    "run", "either unseen_ids or resplit mode with n_unseen "
                           "must be configured");
            // Nominal split; resplit mode redraws per trial anyway.
            std::vector<int> all(static_cast<std::size_t>(bundle.n_classes()));
            std::iota(all.begin(), all.end(), 0);
            unseen_ids.assign(all.end() - config.n_unseen, all.end());
        }
        const zshash::SeenUnseenSplit split =
            zshash::split_seen_unseen(bundle, unseen_ids);
        zshash::run_experiment(split, config, std::cout);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zero-shot hashing toolkit: class-anchored binary codes for "
                 "seen and unseen classes"};
    app.require_subcommand(1);
    setup_synth(app);
    setup_train(app);
    setup_hash(app);
    setup_extend(app);
    setup_eval(app);
    setup_run(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
