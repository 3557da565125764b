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

#include "zshash/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "zshash/csv.hpp"

namespace zshash {

namespace {

// Fixed sign convention: the entry of largest magnitude in each column is
// made positive (first such entry on ties).
void fix_column_signs(Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < m.rows(); ++i) {
            const double a = std::abs(m(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (m(arg, j) < 0) m.col(j) = -m.col(j);
    }
}

Matrix squared_distance_matrix(const Matrix& points) {
    const Index n = points.rows();
    Matrix d2(n, n);
    for (Index i = 0; i < n; ++i) {
        d2(i, i) = 0.0;
        for (Index j = i + 1; j < n; ++j) {
            const double d = (points.row(i) - points.row(j)).squaredNorm();
            d2(i, j) = d;
            d2(j, i) = d;
        }
    }
    return d2;
}

Matrix double_center(const Matrix& k) {
    const Index n = k.rows();
    const Vector row_mean = k.rowwise().mean();
    const double total_mean = row_mean.mean();
    Matrix centered(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            centered(i, j) = k(i, j) - row_mean(i) - row_mean(j) + total_mean;
    return centered;
}

// Top-b spectral coordinates of a symmetric matrix, columns scaled by
// sqrt(eigenvalue); eigenvalues at or below the positivity threshold yield
// zero columns.
Matrix top_spectral_coords(const Matrix& sym, int b, const char* label) {
    const Index n = sym.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NumericError(std::string(label) + ": eigendecomposition failed");
    const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
    const double lambda_max = values(n - 1);
    const double tol = 1e-9 * std::max(lambda_max, 0.0);

    Matrix coords = Matrix::Zero(n, b);
    int padded = 0;
    for (int j = 0; j < b; ++j) {
        const double lambda = values(n - 1 - j);
        if (lambda > tol) {
            coords.col(j) = solver.eigenvectors().col(n - 1 - j) * std::sqrt(lambda);
        } else {
            ++padded;
        }
    }
    if (padded > 0)
        std::cerr << label << ": only " << (b - padded) << " of " << b
                  << " requested directions carry positive spectrum; "
                  << "remaining columns zero-padded\n";
    fix_column_signs(coords);
    return coords;
}

// k nearest neighbors of row i by Euclidean distance, self excluded, ties
// broken toward the lower index.
std::vector<Index> nearest_neighbors(const Matrix& d2, Index i, int k) {
    const Index n = d2.rows();
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(n) - 1);
    for (Index j = 0; j < n; ++j)
        if (j != i) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index c) {
        return d2(i, a) < d2(i, c);
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

std::vector<int> graph_components(const Matrix& adj) {
    const Index n = adj.rows();
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    int n_comp = 0;
    std::vector<Index> stack;
    for (Index start = 0; start < n; ++start) {
        if (comp[static_cast<std::size_t>(start)] != -1) continue;
        stack.push_back(start);
        comp[static_cast<std::size_t>(start)] = n_comp;
        while (!stack.empty()) {
            const Index v = stack.back();
            stack.pop_back();
            for (Index w = 0; w < n; ++w) {
                if (adj(v, w) < std::numeric_limits<double>::infinity() && v != w &&
                    comp[static_cast<std::size_t>(w)] == -1) {
                    comp[static_cast<std::size_t>(w)] = n_comp;
                    stack.push_back(w);
                }
            }
        }
        ++n_comp;
    }
    return comp;
}

void check_embed_args(const Matrix& points, int b, Index min_extra) {
    if (points.rows() < 2) throw DataError("need at least two points to embed");
    if (b < 1) throw std::invalid_argument("code length must be positive");
    if (b > points.rows() - min_extra)
        throw std::invalid_argument("code length exceeds what " +
                                    std::to_string(points.rows()) +
                                    " points support");
}

}  // namespace

std::string embedder_kind_name(EmbedderKind kind) {
    switch (kind) {
        case EmbedderKind::KernelPCA: return "kernel_pca";
        case EmbedderKind::Isomap: return "isomap";
        case EmbedderKind::LLE: return "lle";
    }
    throw std::invalid_argument("unknown embedder kind");
}

EmbedderKind parse_embedder_kind(const std::string& name) {
    if (name == "kernel_pca" || name == "kpca") return EmbedderKind::KernelPCA;
    if (name == "isomap") return EmbedderKind::Isomap;
    if (name == "lle") return EmbedderKind::LLE;
    throw std::invalid_argument("unknown embedder '" + name +
                                "' (expected kernel_pca, isomap, or lle)");
}

double median_pairwise_distance(const Matrix& points) {
    const Index n = points.rows();
    if (n < 2) throw DataError("median distance needs at least two points");
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            dists.push_back((points.row(i) - points.row(j)).norm());
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    if (m % 2 == 1) return dists[m / 2];
    return 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
}

Matrix kernel_pca(const Matrix& points, double bandwidth, int b) {
    check_embed_args(points, b, 0);
    if (!(bandwidth > 0)) throw std::invalid_argument("bandwidth must be positive");
    const Matrix d2 = squared_distance_matrix(points);
    const Matrix kernel = (-d2 / (bandwidth * bandwidth)).array().exp();
    return top_spectral_coords(double_center(kernel), b, "kernel_pca");
}

Matrix isomap(const Matrix& points, int n_neighbors, int b) {
    check_embed_args(points, b, 0);
    const Index n = points.rows();
    if (n_neighbors < 1 || n_neighbors >= n)
        throw std::invalid_argument("n_neighbors must be in [1, n_points)");

    const Matrix d2 = squared_distance_matrix(points);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    Matrix geo = Matrix::Constant(n, n, kInf);
    for (Index i = 0; i < n; ++i) {
        geo(i, i) = 0.0;
        for (const Index j : nearest_neighbors(d2, i, n_neighbors)) {
            const double d = std::sqrt(d2(i, j));
            geo(i, j) = d;
            geo(j, i) = d;
        }
    }

    // Bridge components through the globally closest cross-component pair.
    for (;;) {
        const std::vector<int> comp = graph_components(geo);
        if (*std::max_element(comp.begin(), comp.end()) == 0) break;
        Index bi = -1, bj = -1;
        double best = kInf;
        for (Index i = 0; i < n; ++i)
            for (Index j = i + 1; j < n; ++j)
                if (comp[static_cast<std::size_t>(i)] !=
                        comp[static_cast<std::size_t>(j)] &&
                    d2(i, j) < best) {
                    best = d2(i, j);
                    bi = i;
                    bj = j;
                }
        geo(bi, bj) = std::sqrt(best);
        geo(bj, bi) = geo(bi, bj);
    }

    for (Index k = 0; k < n; ++k)
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                if (geo(i, k) + geo(k, j) < geo(i, j))
                    geo(i, j) = geo(i, k) + geo(k, j);

    const Matrix gram = -0.5 * double_center(geo.array().square().matrix());
    return top_spectral_coords(gram, b, "isomap");
}

Matrix lle(const Matrix& points, int n_neighbors, int b) {
    check_embed_args(points, b, 1);
    const Index n = points.rows();
    if (n_neighbors < 1 || n_neighbors >= n)
        throw std::invalid_argument("n_neighbors must be in [1, n_points)");
    const int k = n_neighbors;

    const Matrix d2 = squared_distance_matrix(points);
    Matrix w = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        const std::vector<Index> nbrs = nearest_neighbors(d2, i, k);
        Eigen::MatrixXd z(k, points.cols());
        for (int r = 0; r < k; ++r)
            z.row(r) = points.row(nbrs[static_cast<std::size_t>(r)]) - points.row(i);
        const Eigen::MatrixXd gram = z * z.transpose();

        double reg = defaults::kLleRegularizer * gram.trace() / k;
        if (reg <= 0) reg = defaults::kLleRegularizer;
        Eigen::VectorXd wi;
        bool solved = false;
        for (int attempt = 0; attempt < 3; ++attempt) {
            Eigen::MatrixXd g = gram;
            g.diagonal().array() += reg;
            Eigen::LLT<Eigen::MatrixXd> llt(g);
            if (llt.info() == Eigen::Success) {
                wi = llt.solve(Eigen::VectorXd::Ones(k));
                const double sum = wi.sum();
                if (std::isfinite(sum) && std::abs(sum) > 1e-12) {
                    wi /= sum;
                    solved = true;
                    break;
                }
            }
            reg *= 10.0;
        }
        if (!solved)
            throw NumericError("lle: local Gram matrix singular at point " +
                               std::to_string(i));
        for (int r = 0; r < k; ++r) w(i, nbrs[static_cast<std::size_t>(r)]) = wi(r);
    }

    const Matrix residual = Matrix::Identity(n, n) - w;
    const Matrix cost = residual.transpose() * residual;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cost);
    if (solver.info() != Eigen::Success)
        throw NumericError("lle: eigendecomposition failed");

    // Skip the constant bottom eigenvector; take the next b.
    Matrix coords(n, b);
    for (int j = 0; j < b; ++j) coords.col(j) = solver.eigenvectors().col(j + 1);
    fix_column_signs(coords);
    return coords;
}

AnchorEmbedding embed_anchors(const Matrix& centers, const EmbedderSpec& spec,
                              int b) {
    if (b < 1 || b > centers.rows())
        throw std::invalid_argument(
            "code length must lie in [1, n_anchors]; got " + std::to_string(b));
    if (spec.kernel_bandwidth < 0)
        throw std::invalid_argument("bandwidth must be positive or 0 (median)");

    bool all_identical = true;
    for (Index i = 1; i < centers.rows() && all_identical; ++i)
        all_identical = (centers.row(i) == centers.row(0));
    if (all_identical) throw DataError("degenerate input: all anchors identical");

    AnchorEmbedding out;
    out.embedder = spec;
    out.code_length = b;
    switch (spec.kind) {
        case EmbedderKind::KernelPCA: {
            const double bw = spec.kernel_bandwidth > 0
                                  ? spec.kernel_bandwidth
                                  : median_pairwise_distance(centers);
            if (!(bw > 0))
                throw DataError("median pairwise distance is zero; set bandwidth");
            out.embedder.kernel_bandwidth = bw;
            out.m = kernel_pca(centers, bw, b);
            break;
        }
        case EmbedderKind::Isomap:
            out.m = isomap(centers, spec.n_neighbors, b);
            break;
        case EmbedderKind::LLE:
            out.m = lle(centers, spec.n_neighbors, b);
            break;
    }
    if (!out.m.allFinite()) throw NumericError("embedding produced non-finite values");
    return out;
}

void save_embedding(const std::string& csv_path,
                    const std::string& sidecar_path,
                    const AnchorEmbedding& embedding) {
    csv::write_matrix(csv_path, embedding.m);
    nlohmann::json sidecar;
    sidecar["embedder"] = embedder_kind_name(embedding.embedder.kind);
    sidecar["kernel_bandwidth"] = embedding.embedder.kernel_bandwidth;
    sidecar["n_neighbors"] = embedding.embedder.n_neighbors;
    sidecar["code_length"] = embedding.code_length;
    std::ofstream out(sidecar_path);
    if (!out) throw DataError("cannot write " + sidecar_path);
    out << sidecar.dump(2) << '\n';
}

AnchorEmbedding load_embedding(const std::string& csv_path,
                               const std::string& sidecar_path) {
    AnchorEmbedding embedding;
    embedding.m = csv::read_matrix(csv_path);
    std::ifstream in(sidecar_path);
    if (!in) throw DataError("cannot open " + sidecar_path);
    nlohmann::json sidecar;
    try {
        in >> sidecar;
        embedding.embedder.kind =
            parse_embedder_kind(sidecar.at("embedder").get<std::string>());
        embedding.embedder.kernel_bandwidth =
            sidecar.at("kernel_bandwidth").get<double>();
        embedding.embedder.n_neighbors = sidecar.at("n_neighbors").get<int>();
        embedding.code_length = sidecar.at("code_length").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(sidecar_path + ": " + e.what());
    }
    if (embedding.code_length != embedding.m.cols())
        throw DataError(sidecar_path + ": code_length disagrees with matrix");
    return embedding;
}

}  // namespace zshash
