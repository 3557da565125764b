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

#include "zshash/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "zshash/kernels.hpp"

namespace zshash {

namespace {

void check_labeled_codes(const HashCodeSet& codes,
                         const std::vector<int>& labels, const char* what) {
    if (labels.size() != codes.size())
        throw DataError(std::string(what) + ": label count does not match codes");
}

std::vector<std::size_t> per_class_counts(const std::vector<int>& labels) {
    std::vector<std::size_t> counts;
    for (const int label : labels) {
        if (label < 0) throw DataError("negative class label");
        if (static_cast<std::size_t>(label) >= counts.size())
            counts.resize(static_cast<std::size_t>(label) + 1, 0);
        ++counts[static_cast<std::size_t>(label)];
    }
    return counts;
}

double format_guard(double v) { return v == 0.0 ? 0.0 : v; }  // flush -0

}  // namespace

int hamming_distance(const HashCode& c1, const HashCode& c2) {
    if (c1.length != c2.length) throw DataError("hash code length mismatch");
    return static_cast<int>(
        kernels::hamming(c1.words.data(), c2.words.data(), c1.words.size()));
}

std::vector<std::size_t> radius_lookup(const HashCode& query,
                                       const HashCodeSet& database,
                                       int radius) {
    if (query.length != database.length())
        throw DataError("hash code length mismatch");
    if (radius < 0) throw std::invalid_argument("radius must be >= 0");
    std::vector<std::size_t> hits;
    const std::size_t words = database.words_per_code();
    for (std::size_t i = 0; i < database.size(); ++i)
        if (kernels::hamming(query.words.data(), database.data(i), words) <=
            static_cast<std::uint32_t>(radius))
            hits.push_back(i);
    return hits;
}

RetrievalMetrics lookup_metrics(const HashCodeSet& queries,
                                const std::vector<int>& query_labels,
                                const HashCodeSet& database,
                                const std::vector<int>& db_labels, int radius,
                                bool drop_empty_queries) {
    if (queries.length() != database.length())
        throw DataError("query and database code lengths differ");
    check_labeled_codes(queries, query_labels, "queries");
    check_labeled_codes(database, db_labels, "database");

    const std::vector<std::size_t> db_counts = per_class_counts(db_labels);

    RetrievalMetrics metrics;
    metrics.radius = radius;
    metrics.n_queries = queries.size();

    double precision_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t precision_terms = 0;
    std::size_t recall_terms = 0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const HashCode query = queries.get(i);
        const std::vector<std::size_t> retrieved =
            radius_lookup(query, database, radius);
        const int label = query_labels[i];
        std::size_t relevant = 0;
        for (const std::size_t j : retrieved)
            if (db_labels[j] == label) ++relevant;

        if (retrieved.empty()) {
            ++metrics.n_empty_retrievals;
            if (!drop_empty_queries) ++precision_terms;  // contributes 0
        } else {
            precision_sum +=
                static_cast<double>(relevant) / static_cast<double>(retrieved.size());
            ++precision_terms;
        }

        const std::size_t positives =
            static_cast<std::size_t>(label) < db_counts.size()
                ? db_counts[static_cast<std::size_t>(label)]
                : 0;
        if (positives == 0) {
            ++metrics.n_skipped_recall;
        } else {
            recall_sum +=
                static_cast<double>(relevant) / static_cast<double>(positives);
            ++recall_terms;
        }
    }

    metrics.precision =
        precision_terms > 0 ? precision_sum / static_cast<double>(precision_terms)
                            : 0.0;
    metrics.recall =
        recall_terms > 0 ? recall_sum / static_cast<double>(recall_terms) : 0.0;
    const double pr = metrics.precision + metrics.recall;
    metrics.f1 = pr > 0 ? 2.0 * metrics.precision * metrics.recall / pr : 0.0;
    return metrics;
}

double mean_average_precision(const HashCodeSet& queries,
                              const std::vector<int>& query_labels,
                              const HashCodeSet& database,
                              const std::vector<int>& db_labels) {
    if (queries.length() != database.length())
        throw DataError("query and database code lengths differ");
    check_labeled_codes(queries, query_labels, "queries");
    check_labeled_codes(database, db_labels, "database");
    if (database.size() == 0) throw DataError("empty database");

    const std::size_t n_db = database.size();
    const std::size_t words = database.words_per_code();
    std::vector<std::uint32_t> dist(n_db);
    std::vector<std::size_t> order(n_db);

    double ap_sum = 0.0;
    std::size_t scored_queries = 0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const int label = query_labels[i];
        std::size_t positives = 0;
        for (const int db_label : db_labels)
            if (db_label == label) ++positives;
        if (positives == 0) continue;

        const HashCode query = queries.get(i);
        for (std::size_t j = 0; j < n_db; ++j)
            dist[j] = kernels::hamming(query.words.data(), database.data(j), words);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return dist[a] < dist[b];
                         });

        double ap = 0.0;
        std::size_t hits = 0;
        for (std::size_t rank = 1; rank <= n_db; ++rank) {
            if (db_labels[order[rank - 1]] == label) {
                ++hits;
                ap += static_cast<double>(hits) / static_cast<double>(rank);
            }
        }
        ap_sum += ap / static_cast<double>(positives);
        ++scored_queries;
    }
    return scored_queries > 0 ? ap_sum / static_cast<double>(scored_queries) : 0.0;
}

AccuracyReport anchor_assignment_accuracy(
    const HashCodeSet& codes, const std::vector<int>& labels,
    const HashCodeSet& anchor_codes,
    const std::vector<int>& class_of_anchor) {
    if (codes.length() != anchor_codes.length())
        throw DataError("instance and anchor code lengths differ");
    check_labeled_codes(codes, labels, "codes");
    const std::size_t n_anchors = anchor_codes.size();
    if (class_of_anchor.size() != n_anchors)
        throw DataError("class_of_anchor size does not match anchor codes");
    std::vector<char> seen_class(n_anchors, 0);
    for (const int c : class_of_anchor) {
        if (c < 0 || static_cast<std::size_t>(c) >= n_anchors ||
            seen_class[static_cast<std::size_t>(c)])
            throw DataError("class_of_anchor is not a bijection");
        seen_class[static_cast<std::size_t>(c)] = 1;
    }

    AccuracyReport report;
    report.n_instances = codes.size();
    report.confusion = Matrix::Zero(static_cast<Index>(n_anchors),
                                    static_cast<Index>(n_anchors));
    const std::size_t words = codes.words_per_code();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const int label = labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= n_anchors)
            throw DataError("label outside the anchor class range");
        std::size_t best = 0;
        std::uint32_t best_dist =
            kernels::hamming(codes.data(i), anchor_codes.data(0), words);
        for (std::size_t q = 1; q < n_anchors; ++q) {
            const std::uint32_t d =
                kernels::hamming(codes.data(i), anchor_codes.data(q), words);
            if (d < best_dist) {
                best_dist = d;
                best = q;
            }
        }
        const int assigned_class = class_of_anchor[best];
        report.confusion(label, assigned_class) += 1.0;
        if (assigned_class == label) ++correct;
    }
    report.accuracy = report.n_instances > 0
                          ? static_cast<double>(correct) /
                                static_cast<double>(report.n_instances)
                          : 0.0;
    return report;
}

const char* const kMetricsCsvHeader =
    "method,code_length,s,radius,precision,recall,f1,map,accuracy_train,"
    "accuracy_test";

void write_metrics_header(std::ostream& out) { out << kMetricsCsvHeader << '\n'; }

void write_metrics_row(std::ostream& out, const MetricsRow& row) {
    char buf[64];
    out << row.method << ',' << row.code_length << ',' << row.s << ','
        << row.radius;
    const double values[] = {row.precision, row.recall,         row.f1,
                             row.map,       row.accuracy_train, row.accuracy_test};
    for (const double v : values) {
        std::snprintf(buf, sizeof(buf), "%.10g", format_guard(v));
        out << ',' << buf;
    }
    out << '\n';
}

}  // namespace zshash
