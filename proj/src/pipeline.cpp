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

#include "zshash/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "zshash/csv.hpp"

namespace zshash {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw std::invalid_argument(key + ": not a number: '" + value + "'");
    return out;
}

long long parse_int(const std::string& key, const std::string& value) {
    long long out = 0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw std::invalid_argument(key + ": not an integer: '" + value + "'");
    return out;
}

std::vector<int> parse_id_list(const std::string& key, const std::string& value) {
    std::vector<int> ids;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ','))
        ids.push_back(static_cast<int>(parse_int(key, trim(item))));
    return ids;
}

// Label matrix for the closed-form fit: +1 at the instance's class, -1
// elsewhere.
Matrix one_hot_pm1(const std::vector<int>& labels, int n_classes) {
    Matrix y = Matrix::Constant(static_cast<Index>(labels.size()), n_classes, -1.0);
    for (std::size_t i = 0; i < labels.size(); ++i)
        y(static_cast<Index>(i), labels[i]) = 1.0;
    return y;
}

HashCodeSet subset_codes(const HashCodeSet& codes, const std::vector<int>& idx) {
    HashCodeSet out(idx.size(), codes.length());
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy(codes.data(static_cast<std::size_t>(idx[i])),
                  codes.data(static_cast<std::size_t>(idx[i])) +
                      codes.words_per_code(),
                  out.data(i));
    return out;
}

HashCodeSet concat_codes(const HashCodeSet& a, const HashCodeSet& b) {
    if (a.length() != b.length()) throw DataError("code length mismatch");
    HashCodeSet out(a.size() + b.size(), a.length());
    std::copy(a.data(0), a.data(0) + a.size() * a.words_per_code(), out.data(0));
    std::copy(b.data(0), b.data(0) + b.size() * b.words_per_code(),
              out.data(a.size()));
    return out;
}

std::vector<int> draw_unseen_ids(int n_classes, int n_unseen,
                                 std::uint64_t seed) {
    std::vector<int> order(static_cast<std::size_t>(n_classes));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 gen(seed);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(gen() % i)]);
    order.resize(static_cast<std::size_t>(n_unseen));
    std::sort(order.begin(), order.end());
    return order;
}

struct TrialResult {
    MetricsRow row;
};

TrialResult run_trial(const SeenUnseenSplit& split,
                      const ExperimentConfig& config, int trial) {
    ExperimentConfig cfg = config;
    cfg.kmeans.seed = config.kmeans.seed + static_cast<std::uint64_t>(trial);

    TrainedModel model = train(split.seen, cfg, split.seen_class_ids);
    const ExtendedAnchorSet ext =
        extend_anchor_set(model.embedding, split.seen.signatures,
                          split.unseen.signatures, split.unseen_class_ids);

    const HashCodeSet seen_codes =
        hash_dataset(split.seen.features, model.anchors, model.embedding,
                     model.config.hash, config.n_threads);
    const HashCodeSet unseen_codes =
        hash_unseen_dataset(split.unseen.features, model.zsl, ext,
                            split.unseen.signatures, model.config.hash,
                            config.n_threads);

    // Assignment accuracy among seen anchors for training instances, and
    // among the synthesized unseen anchors for unseen instances.
    const HashCodeSet seen_anchor_codes = anchor_hash_codes(model.embedding);
    const AccuracyReport train_report = anchor_assignment_accuracy(
        seen_codes, split.seen.labels, seen_anchor_codes,
        model.anchors.class_of_anchor);

    HashCodeSet unseen_anchor_codes(
        static_cast<std::size_t>(ext.unseen_embeddings.rows()),
        ext.base.code_length);
    for (Index q = 0; q < ext.unseen_embeddings.rows(); ++q)
        unseen_anchor_codes.assign(
            static_cast<std::size_t>(q),
            binarize(ext.unseen_embeddings.row(q).transpose()));
    std::vector<int> identity(split.unseen_class_ids.size());
    std::iota(identity.begin(), identity.end(), 0);
    const AccuracyReport test_report = anchor_assignment_accuracy(
        unseen_codes, split.unseen.labels, unseen_anchor_codes, identity);

    // Quarter/three-quarter retrieval over all instances, seen block
    // first, labeled with the original class ids.
    const HashCodeSet all_codes = concat_codes(seen_codes, unseen_codes);
    std::vector<int> all_labels;
    all_labels.reserve(all_codes.size());
    for (const int local : split.seen.labels)
        all_labels.push_back(split.seen_class_ids[static_cast<std::size_t>(local)]);
    for (const int local : split.unseen.labels)
        all_labels.push_back(
            split.unseen_class_ids[static_cast<std::size_t>(local)]);

    const auto [query_idx, db_idx] = split_query_database(
        all_codes.size(), config.eval.query_fraction,
        config.eval.split_seed + static_cast<std::uint64_t>(trial));
    const HashCodeSet queries = subset_codes(all_codes, query_idx);
    const HashCodeSet database = subset_codes(all_codes, db_idx);
    std::vector<int> query_labels, db_labels;
    for (const int i : query_idx)
        query_labels.push_back(all_labels[static_cast<std::size_t>(i)]);
    for (const int i : db_idx)
        db_labels.push_back(all_labels[static_cast<std::size_t>(i)]);

    const RetrievalMetrics lookup = lookup_metrics(
        queries, query_labels, database, db_labels, config.eval.radius);
    const double map =
        mean_average_precision(queries, query_labels, database, db_labels);

    TrialResult result;
    result.row.method = embedder_kind_name(config.embedder.kind);
    result.row.code_length = config.bits;
    result.row.s = config.hash.s;
    result.row.radius = config.eval.radius;
    result.row.precision = lookup.precision;
    result.row.recall = lookup.recall;
    result.row.f1 = lookup.f1;
    result.row.map = map;
    result.row.accuracy_train = train_report.accuracy;
    result.row.accuracy_test = test_report.accuracy;
    return result;
}

void write_run_row(std::ostream& out, const std::string& trial,
                   const std::string& mode, const MetricsRow& row) {
    out << trial << ',' << mode << ',';
    write_metrics_row(out, row);
}

}  // namespace

std::string trial_mode_name(TrialMode mode) {
    return mode == TrialMode::Fixed ? "fixed" : "resplit";
}

TrialMode parse_trial_mode(const std::string& name) {
    if (name == "fixed") return TrialMode::Fixed;
    if (name == "resplit") return TrialMode::Resplit;
    throw std::invalid_argument("unknown trial mode '" + name +
                                "' (expected fixed or resplit)");
}

void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "bits") {
        config.bits = static_cast<int>(parse_int(key, value));
    } else if (key == "embedder") {
        config.embedder.kind = parse_embedder_kind(value);
    } else if (key == "bandwidth") {
        config.embedder.kernel_bandwidth =
            value == "median" ? 0.0 : parse_double(key, value);
    } else if (key == "neighbors") {
        config.embedder.n_neighbors = static_cast<int>(parse_int(key, value));
    } else if (key == "sigma") {
        config.hash.sigma = value == "auto" ? 0.0 : parse_double(key, value);
    } else if (key == "s") {
        config.hash.s = static_cast<int>(parse_int(key, value));
    } else if (key == "omega") {
        config.hash.omega = parse_double(key, value);
    } else if (key == "beta") {
        config.kmeans.beta = parse_double(key, value);
    } else if (key == "kmeans_max_iter") {
        config.kmeans.max_iter = static_cast<int>(parse_int(key, value));
    } else if (key == "kmeans_tol") {
        config.kmeans.tol = parse_double(key, value);
    } else if (key == "kmeans_seed") {
        config.kmeans.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "gamma") {
        config.zsl.gamma = parse_double(key, value);
    } else if (key == "lambda") {
        config.zsl.lambda = parse_double(key, value);
    } else if (key == "preset") {
        if (value == "awa") {
            config.zsl.gamma = defaults::kAwaPreset.gamma;
            config.zsl.lambda = defaults::kAwaPreset.lambda;
        } else if (value == "sun") {
            config.zsl.gamma = defaults::kSunPreset.gamma;
            config.zsl.lambda = defaults::kSunPreset.lambda;
        } else {
            throw std::invalid_argument("preset must be awa or sun, got '" +
                                        value + "'");
        }
    } else if (key == "radius") {
        config.eval.radius = static_cast<int>(parse_int(key, value));
    } else if (key == "query_fraction") {
        config.eval.query_fraction = parse_double(key, value);
    } else if (key == "split_seed") {
        config.eval.split_seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "n_trials") {
        config.n_trials = static_cast<int>(parse_int(key, value));
    } else if (key == "trial_mode") {
        config.trial_mode = parse_trial_mode(value);
    } else if (key == "unseen_ids") {
        config.unseen_class_ids = parse_id_list(key, value);
    } else if (key == "n_unseen") {
        config.n_unseen = static_cast<int>(parse_int(key, value));
    } else if (key == "class_seed") {
        config.class_seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "threads") {
        config.n_threads = static_cast<int>(parse_int(key, value));
    } else if (key == "data_dir") {
        config.data_dir = value;
    } else if (key == "out_dir") {
        config.out_dir = value;
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file " + path);
    ExperimentConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.resize(hash_pos);
        const std::string entry = trim(line);
        if (entry.empty()) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": expected key=value");
        apply_config_entry(config, trim(entry.substr(0, eq)),
                           trim(entry.substr(eq + 1)));
    }
    return config;
}

TrainedModel train(const DatasetBundle& seen, const ExperimentConfig& config,
                   std::vector<int> seen_class_ids) {
    seen.validate();
    const int n_s = seen.n_classes();
    if (config.bits < 1 || config.bits > n_s)
        throw std::invalid_argument(
            "code length must lie in [1, n_seen_classes=" + std::to_string(n_s) +
            "]; got " + std::to_string(config.bits));
    if (seen_class_ids.empty()) {
        seen_class_ids.resize(static_cast<std::size_t>(n_s));
        std::iota(seen_class_ids.begin(), seen_class_ids.end(), 0);
    }
    if (static_cast<int>(seen_class_ids.size()) != n_s)
        throw DataError("seen class id count does not match class count");

    TrainedModel model;
    model.config = config;
    model.seen_class_ids = std::move(seen_class_ids);
    model.signatures_seen = seen.signatures;

    AnchorSet anchors =
        penalized_kmeans(seen.features, seen.labels, config.kmeans.beta,
                         config.kmeans.max_iter, config.kmeans.tol,
                         config.kmeans.seed);
    anchors.class_of_anchor = assign_anchors_to_classes(
        anchors.centers, class_means(seen.features, seen.labels));
    model.anchors = reorder_by_class(anchors);

    model.embedding =
        embed_anchors(model.anchors.centers, config.embedder, config.bits);
    model.config.embedder = model.embedding.embedder;

    model.zsl = fit_eszsl(seen.features, one_hot_pm1(seen.labels, n_s),
                          seen.signatures, config.zsl.gamma, config.zsl.lambda);

    model.config.hash.sigma =
        config.hash.sigma > 0
            ? config.hash.sigma
            : auto_sigma(seen.features, model.anchors.centers);
    validate_hash_params(model.config.hash, model.anchors.centers.rows());
    return model;
}

void run_experiment(const SeenUnseenSplit& split,
                    const ExperimentConfig& config, std::ostream& out) {
    if (config.n_trials < 1)
        throw std::invalid_argument("n_trials must be >= 1");
    if (split.unseen_class_ids.empty())
        throw DataError("experiment requires at least one unseen class");

    const std::string mode = trial_mode_name(config.trial_mode);
    const int n_classes = static_cast<int>(split.seen_class_ids.size() +
                                           split.unseen_class_ids.size());
    int n_unseen = config.n_unseen;
    if (n_unseen == 0)
        n_unseen = static_cast<int>(split.unseen_class_ids.size());

    DatasetBundle merged;
    if (config.trial_mode == TrialMode::Resplit) merged = merge_split(split);

    out << "trial,mode," << kMetricsCsvHeader << '\n';
    MetricsRow mean;
    for (int trial = 0; trial < config.n_trials; ++trial) {
        const auto start = std::chrono::steady_clock::now();

        TrialResult result;
        if (config.trial_mode == TrialMode::Resplit) {
            const std::vector<int> ids = draw_unseen_ids(
                n_classes, n_unseen,
                config.class_seed + static_cast<std::uint64_t>(trial));
            result = run_trial(split_seen_unseen(merged, ids), config, trial);
        } else {
            result = run_trial(split, config, trial);
        }
        write_run_row(out, std::to_string(trial), mode, result.row);

        if (trial == 0) {
            mean = result.row;
        } else {
            mean.precision += result.row.precision;
            mean.recall += result.row.recall;
            mean.f1 += result.row.f1;
            mean.map += result.row.map;
            mean.accuracy_train += result.row.accuracy_train;
            mean.accuracy_test += result.row.accuracy_test;
        }

        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
        std::cerr << "trial " << trial << " done in " << elapsed.count()
                  << " ms\n";
    }
    const double n = static_cast<double>(config.n_trials);
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    mean.map /= n;
    mean.accuracy_train /= n;
    mean.accuracy_test /= n;
    write_run_row(out, "mean", mode, mean);
}

void save_model(const std::string& dir, const TrainedModel& model) {
    std::filesystem::create_directories(dir);
    save_anchor_set(dir + "/anchors.csv", dir + "/anchors.json", model.anchors);
    save_embedding(dir + "/embedding.csv", dir + "/embedding.json",
                   model.embedding);
    save_zsl_model(dir + "/zsl_v.csv", dir + "/zsl.json", model.zsl);
    csv::write_matrix(dir + "/signatures_seen.csv", model.signatures_seen);

    nlohmann::json meta;
    meta["bits"] = model.config.bits;
    meta["sigma"] = model.config.hash.sigma;
    meta["s"] = model.config.hash.s;
    meta["omega"] = model.config.hash.omega;
    meta["beta"] = model.config.kmeans.beta;
    meta["kmeans_max_iter"] = model.config.kmeans.max_iter;
    meta["kmeans_tol"] = model.config.kmeans.tol;
    meta["kmeans_seed"] = model.config.kmeans.seed;
    meta["gamma"] = model.config.zsl.gamma;
    meta["lambda"] = model.config.zsl.lambda;
    meta["seen_class_ids"] = model.seen_class_ids;
    std::ofstream out(dir + "/model.json");
    if (!out) throw DataError("cannot write " + dir + "/model.json");
    out << meta.dump(2) << '\n';
}

TrainedModel load_model(const std::string& dir) {
    TrainedModel model;
    model.anchors = load_anchor_set(dir + "/anchors.csv", dir + "/anchors.json");
    model.embedding =
        load_embedding(dir + "/embedding.csv", dir + "/embedding.json");
    model.zsl = load_zsl_model(dir + "/zsl_v.csv", dir + "/zsl.json");
    model.signatures_seen = csv::read_matrix(dir + "/signatures_seen.csv");

    std::ifstream in(dir + "/model.json");
    if (!in) throw DataError("cannot open " + dir + "/model.json");
    nlohmann::json meta;
    try {
        in >> meta;
        model.config.bits = meta.at("bits").get<int>();
        model.config.hash.sigma = meta.at("sigma").get<double>();
        model.config.hash.s = meta.at("s").get<int>();
        model.config.hash.omega = meta.at("omega").get<double>();
        model.config.kmeans.beta = meta.at("beta").get<double>();
        model.config.kmeans.max_iter = meta.at("kmeans_max_iter").get<int>();
        model.config.kmeans.tol = meta.at("kmeans_tol").get<double>();
        model.config.kmeans.seed = meta.at("kmeans_seed").get<std::uint64_t>();
        model.config.zsl.gamma = meta.at("gamma").get<double>();
        model.config.zsl.lambda = meta.at("lambda").get<double>();
        model.seen_class_ids = meta.at("seen_class_ids").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(dir + "/model.json: " + e.what());
    }
    model.config.embedder = model.embedding.embedder;

    if (model.embedding.m.rows() != model.anchors.centers.rows())
        throw DataError(dir + ": embedding rows do not match anchors");
    if (model.signatures_seen.cols() != model.anchors.centers.rows())
        throw DataError(dir + ": signatures do not match anchor count");
    if (model.zsl.v.rows() != model.anchors.centers.cols() ||
        model.zsl.v.cols() != model.signatures_seen.rows())
        throw DataError(dir + ": V shape does not match features/attributes");
    return model;
}

}  // namespace zshash
