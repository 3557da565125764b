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

#include <ostream>
#include <string>
#include <vector>

#include "zshash/hashing.hpp"
#include "zshash/types.hpp"

namespace zshash {

struct RetrievalMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double map = 0.0;
    int radius = 0;
    std::size_t n_queries = 0;
    // Queries whose class is absent from the database (no recall
    // denominator) and queries that retrieved nothing at the radius.
    std::size_t n_skipped_recall = 0;
    std::size_t n_empty_retrievals = 0;
};

struct AccuracyReport {
    double accuracy = 0.0;
    std::size_t n_instances = 0;
    // confusion(true_class, assigned_class); row sums are the per-class
    // instance counts.
    Matrix confusion;
};

int hamming_distance(const HashCode& c1, const HashCode& c2);

// Every database index within the given Hamming radius, ascending.
std::vector<std::size_t> radius_lookup(const HashCode& query,
                                       const HashCodeSet& database,
                                       int radius);

// Macro-averaged precision and recall over queries at the fixed radius.
// An empty retrieval contributes precision 0 unless drop_empty_queries is
// set, in which case the query is left out of the precision average.
RetrievalMetrics lookup_metrics(const HashCodeSet& queries,
                                const std::vector<int>& query_labels,
                                const HashCodeSet& database,
                                const std::vector<int>& db_labels, int radius,
                                bool drop_empty_queries = false);

// Ranks the full database per query by ascending Hamming distance (ties
// by ascending index) and averages AP over queries with at least one
// same-class database item.
double mean_average_precision(const HashCodeSet& queries,
                              const std::vector<int>& query_labels,
                              const HashCodeSet& database,
                              const std::vector<int>& db_labels);

// Assigns each code to the nearest anchor code (ties toward the lower
// anchor index) and scores the anchor's class against the label.
AccuracyReport anchor_assignment_accuracy(
    const HashCodeSet& codes, const std::vector<int>& labels,
    const HashCodeSet& anchor_codes, const std::vector<int>& class_of_anchor);

// One metrics CSV row; the header is fixed to
// method,code_length,s,radius,precision,recall,f1,map,accuracy_train,accuracy_test
struct MetricsRow {
    std::string method;
    int code_length = 0;
    int s = 0;
    int radius = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double map = 0.0;
    double accuracy_train = 0.0;
    double accuracy_test = 0.0;
};

extern const char* const kMetricsCsvHeader;

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRow& row);

}  // namespace zshash
