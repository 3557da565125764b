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

#include "zshash/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "zshash/csv.hpp"
#include "zshash/kernels.hpp"

namespace zshash {

namespace {

int count_classes(const std::vector<int>& labels) {
    int n = 0;
    for (const int label : labels) {
        if (label < 0) throw DataError("negative class label");
        n = std::max(n, label + 1);
    }
    return n;
}

// Assignment step: per-instance argmin of squared distance plus the label
// penalty, ties to the lowest cluster index.
std::vector<int> assign_step(const Matrix& x, const std::vector<int>& labels,
                             const Matrix& centers, double beta,
                             std::vector<double>& dist_buf) {
    const std::size_t k = static_cast<std::size_t>(centers.rows());
    const std::size_t dim = static_cast<std::size_t>(x.cols());
    std::vector<int> assignments(static_cast<std::size_t>(x.rows()));
    dist_buf.resize(k);
    for (Index n = 0; n < x.rows(); ++n) {
        kernels::l2_sqr_rows(x.data() + static_cast<std::size_t>(n) * dim,
                             centers.data(), k, dim, dist_buf.data());
        const int y = labels[static_cast<std::size_t>(n)];
        int best = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < k; ++q) {
            const double cost = dist_buf[q] + (static_cast<int>(q) == y ? 0.0 : beta);
            if (cost < best_cost) {
                best_cost = cost;
                best = static_cast<int>(q);
            }
        }
        assignments[static_cast<std::size_t>(n)] = best;
    }
    return assignments;
}

// Mean update; an emptied cluster falls back to the mean of its own class
// so the anchor-per-class structure survives.
Matrix mean_step(const Matrix& x, const std::vector<int>& assignments, int k,
                 const Matrix& fallback_class_means) {
    Matrix centers = Matrix::Zero(k, x.cols());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (Index n = 0; n < x.rows(); ++n) {
        const int q = assignments[static_cast<std::size_t>(n)];
        centers.row(q) += x.row(n);
        ++counts[static_cast<std::size_t>(q)];
    }
    for (int q = 0; q < k; ++q) {
        if (counts[static_cast<std::size_t>(q)] > 0) {
            centers.row(q) /= static_cast<double>(counts[static_cast<std::size_t>(q)]);
        } else {
            centers.row(q) = fallback_class_means.row(q);
        }
    }
    return centers;
}

}  // namespace

Matrix farthest_point_init(const Matrix& x, int k, std::uint64_t seed) {
    const Index n = x.rows();
    if (k < 1 || n < k) throw DataError("fewer data points than clusters");
    std::mt19937_64 gen(seed);
    std::vector<Index> chosen;
    chosen.push_back(static_cast<Index>(gen() % static_cast<std::uint64_t>(n)));

    const std::size_t dim = static_cast<std::size_t>(x.cols());
    std::vector<double> min_dist(static_cast<std::size_t>(n),
                                 std::numeric_limits<double>::infinity());
    while (static_cast<int>(chosen.size()) < k) {
        const double* last =
            x.data() + static_cast<std::size_t>(chosen.back()) * dim;
        Index best = -1;
        double best_dist = -1.0;
        for (Index i = 0; i < n; ++i) {
            const double d = kernels::l2_sqr(
                x.data() + static_cast<std::size_t>(i) * dim, last, dim);
            auto& md = min_dist[static_cast<std::size_t>(i)];
            md = std::min(md, d);
            if (md > best_dist) {
                best_dist = md;
                best = i;
            }
        }
        chosen.push_back(best);
    }

    Matrix centers(k, x.cols());
    for (int q = 0; q < k; ++q) centers.row(q) = x.row(chosen[static_cast<std::size_t>(q)]);
    return centers;
}

double kmeans_objective(const Matrix& x, const std::vector<int>& labels,
                        const Matrix& centers,
                        const std::vector<int>& assignments, double beta) {
    const std::size_t dim = static_cast<std::size_t>(x.cols());
    double obj = 0.0;
    for (Index n = 0; n < x.rows(); ++n) {
        const int q = assignments[static_cast<std::size_t>(n)];
        obj += kernels::l2_sqr(x.data() + static_cast<std::size_t>(n) * dim,
                               centers.data() + static_cast<std::size_t>(q) * dim,
                               dim);
        if (q != labels[static_cast<std::size_t>(n)]) obj += beta;
    }
    return obj;
}

AnchorSet penalized_kmeans_from(const Matrix& x, const std::vector<int>& labels,
                                double beta, int max_iter, double tol,
                                Matrix initial_centers) {
    if (x.rows() == 0) throw DataError("empty input");
    if (static_cast<Index>(labels.size()) != x.rows())
        throw DataError("label count does not match instance count");
    const int k = count_classes(labels);
    if (k < 2) throw DataError("need at least two classes");
    if (x.rows() < k) throw DataError("fewer instances than classes");
    if (beta < 0) throw std::invalid_argument("beta must be >= 0");
    if (initial_centers.rows() != k || initial_centers.cols() != x.cols())
        throw DataError("initial centers have wrong shape");

    const Matrix fallback = class_means(x, labels);

    AnchorSet set;
    set.beta = beta;
    set.centers = std::move(initial_centers);
    std::vector<double> dist_buf;
    set.assignments = assign_step(x, labels, set.centers, beta, dist_buf);
    double obj = kmeans_objective(x, labels, set.centers, set.assignments, beta);
    set.objective_history.push_back(obj);

    for (int iter = 0; iter < max_iter; ++iter) {
        set.centers = mean_step(x, set.assignments, k, fallback);
        std::vector<int> next = assign_step(x, labels, set.centers, beta, dist_buf);
        const double next_obj =
            kmeans_objective(x, labels, set.centers, next, beta);
        set.objective_history.push_back(next_obj);
        set.iterations = iter + 1;
        const bool unchanged = (next == set.assignments);
        set.assignments = std::move(next);
        if (unchanged) break;
        if (std::abs(obj - next_obj) < tol * std::max(1.0, std::abs(obj))) {
            obj = next_obj;
            break;
        }
        obj = next_obj;
    }

    // Provisional identity binding: cluster q is penalty-tied to class q.
    // Callers refine it with assign_anchors_to_classes.
    set.class_of_anchor.resize(static_cast<std::size_t>(k));
    for (int q = 0; q < k; ++q) set.class_of_anchor[static_cast<std::size_t>(q)] = q;
    return set;
}

AnchorSet penalized_kmeans(const Matrix& x, const std::vector<int>& labels,
                           double beta, int max_iter, double tol,
                           std::uint64_t seed) {
    const int k = count_classes(labels);
    return penalized_kmeans_from(x, labels, beta, max_iter, tol,
                                 farthest_point_init(x, k, seed));
}

Matrix class_means(const Matrix& x, const std::vector<int>& labels) {
    const int n_classes = count_classes(labels);
    Matrix means = Matrix::Zero(n_classes, x.cols());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (Index n = 0; n < x.rows(); ++n) {
        const int c = labels[static_cast<std::size_t>(n)];
        means.row(c) += x.row(n);
        ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < n_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw DataError("class " + std::to_string(c) + " has no instances");
        means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    return means;
}

std::vector<int> assign_anchors_to_classes(const Matrix& centers,
                                           const Matrix& means) {
    if (centers.rows() != means.rows() || centers.cols() != means.cols())
        throw DataError("centers and class means must have identical shape");
    const int n = static_cast<int>(centers.rows());
    const std::size_t dim = static_cast<std::size_t>(centers.cols());

    Matrix cost(n, n);
    for (int q = 0; q < n; ++q)
        for (int c = 0; c < n; ++c)
            cost(q, c) = std::sqrt(kernels::l2_sqr(
                centers.data() + static_cast<std::size_t>(q) * dim,
                means.data() + static_cast<std::size_t>(c) * dim, dim));

    // Hungarian method with potentials, O(n^3). 1-indexed work arrays.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // col -> row
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> min_v(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = match[static_cast<std::size_t>(j0)];
            double delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < min_v[static_cast<std::size_t>(j)]) {
                    min_v[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (min_v[static_cast<std::size_t>(j)] < delta) {
                    delta = min_v[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    min_v[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> anchor_to_class(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        anchor_to_class[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] =
            j - 1;
    return anchor_to_class;
}

AnchorSet reorder_by_class(const AnchorSet& set) {
    const int n = static_cast<int>(set.centers.rows());
    AnchorSet out = set;
    std::vector<int> anchor_of_class(static_cast<std::size_t>(n), -1);
    for (int q = 0; q < n; ++q) {
        const int c = set.class_of_anchor[static_cast<std::size_t>(q)];
        if (c < 0 || c >= n || anchor_of_class[static_cast<std::size_t>(c)] != -1)
            throw DataError("class_of_anchor is not a bijection");
        anchor_of_class[static_cast<std::size_t>(c)] = q;
    }
    for (int c = 0; c < n; ++c) {
        out.centers.row(c) = set.centers.row(anchor_of_class[static_cast<std::size_t>(c)]);
        out.class_of_anchor[static_cast<std::size_t>(c)] = c;
    }
    for (std::size_t i = 0; i < set.assignments.size(); ++i)
        out.assignments[i] =
            set.class_of_anchor[static_cast<std::size_t>(set.assignments[i])];
    return out;
}

void save_anchor_set(const std::string& csv_path,
                     const std::string& sidecar_path, const AnchorSet& set) {
    csv::write_matrix(csv_path, set.centers);
    nlohmann::json sidecar;
    sidecar["class_of_anchor"] = set.class_of_anchor;
    sidecar["beta"] = set.beta;
    sidecar["iterations"] = set.iterations;
    std::ofstream out(sidecar_path);
    if (!out) throw DataError("cannot write " + sidecar_path);
    out << sidecar.dump(2) << '\n';
}

AnchorSet load_anchor_set(const std::string& csv_path,
                          const std::string& sidecar_path) {
    AnchorSet set;
    set.centers = csv::read_matrix(csv_path);
    std::ifstream in(sidecar_path);
    if (!in) throw DataError("cannot open " + sidecar_path);
    nlohmann::json sidecar;
    try {
        in >> sidecar;
        set.class_of_anchor = sidecar.at("class_of_anchor").get<std::vector<int>>();
        set.beta = sidecar.at("beta").get<double>();
        set.iterations = sidecar.at("iterations").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(sidecar_path + ": " + e.what());
    }
    if (set.class_of_anchor.size() != static_cast<std::size_t>(set.centers.rows()))
        throw DataError(sidecar_path + ": class_of_anchor size mismatch");
    return set;
}

}  // namespace zshash
