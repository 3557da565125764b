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

#include "zshash/zsl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <Eigen/Dense>
#include <json.hpp>

#include "zshash/csv.hpp"

namespace zshash {

namespace {

void check_fit_shapes(const Matrix& x, const Matrix& y, const Matrix& s) {
    if (x.rows() != y.rows())
        throw DataError("instance count differs between X and Y");
    if (y.cols() != s.cols())
        throw DataError("class count differs between Y and S");
    if (x.rows() == 0) throw DataError("empty training set");
    if (!x.allFinite() || !y.allFinite() || !s.allFinite())
        throw DataError("non-finite training input");
}

HashCode hash_unseen_one(const Vector& scores, const ExtendedAnchorSet& ext,
                         int s, double omega) {
    const Index n_u = scores.size();
    const int s_eff = static_cast<int>(std::min<Index>(s, n_u));

    Vector sparse = Vector::Zero(n_u);
    if (scores.maxCoeff() == scores.minCoeff()) {
        // Degenerate tie across every class: uniform over the kept set,
        // which the index tie rule makes the first s_eff classes.
        for (int i = 0; i < s_eff; ++i) sparse(i) = 1.0 / s_eff;
    } else {
        std::vector<Index> order(static_cast<std::size_t>(n_u));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            return scores(a) > scores(b);
        });
        double min_kept = scores(order[0]);
        for (int i = 1; i < s_eff; ++i)
            min_kept = std::min(min_kept, scores(order[static_cast<std::size_t>(i)]));
        // Rank order survives the shift, so the shared path sees the same
        // top-s set it would have picked from the raw scores.
        const double shift = min_kept <= 0 ? 1e-6 - min_kept : 0.0;
        Vector kept = Vector::Zero(n_u);
        for (int i = 0; i < s_eff; ++i) {
            const Index idx = order[static_cast<std::size_t>(i)];
            kept(idx) = scores(idx) + shift;
        }
        sparse = top_s_boost_renormalize(kept, s_eff, omega);
    }
    return binarize(inductive_embed(sparse, ext.unseen_embeddings));
}

}  // namespace

ZslModel fit_eszsl(const Matrix& x, const Matrix& y, const Matrix& s,
                   double gamma, double lambda) {
    check_fit_shapes(x, y, s);
    if (gamma < 0 || lambda < 0)
        throw std::invalid_argument("gamma and lambda must be >= 0");
    if (((y.array() != 1.0) && (y.array() != -1.0)).any())
        throw DataError("label matrix entries must be -1 or +1");

    const Index d = x.cols();
    const Index a = s.rows();
    Eigen::MatrixXd feature_gram = x.transpose() * x;
    feature_gram.diagonal().array() += gamma;
    Eigen::MatrixXd signature_gram = s * s.transpose();
    signature_gram.diagonal().array() += lambda;

    Eigen::LLT<Eigen::MatrixXd> llt_x(feature_gram);
    if (llt_x.info() != Eigen::Success)
        throw NumericError("feature Gram matrix is singular; increase gamma");
    Eigen::LLT<Eigen::MatrixXd> llt_s(signature_gram);
    if (llt_s.info() != Eigen::Success)
        throw NumericError("signature Gram matrix is singular; increase lambda");

    const Eigen::MatrixXd rhs = x.transpose() * (y * s.transpose());  // d x a
    const Eigen::MatrixXd z = llt_x.solve(rhs);
    ZslModel model;
    model.v = llt_s.solve(z.transpose()).transpose();  // (B^-1 Z^T)^T = Z B^-1
    model.hyper = ZslHyperparams{gamma, lambda};
    if (model.v.rows() != d || model.v.cols() != a || !model.v.allFinite())
        throw NumericError("closed-form solve produced a malformed V");
    return model;
}

double eszsl_objective(const Matrix& v, const Matrix& x, const Matrix& y,
                       const Matrix& s, double gamma, double lambda) {
    check_fit_shapes(x, y, s);
    if (v.rows() != x.cols() || v.cols() != s.rows())
        throw DataError("V shape does not match X and S");
    const Matrix xv = x * v;
    const Matrix vs = v * s;
    const double fit = (xv * s - y).squaredNorm();
    return fit + gamma * vs.squaredNorm() + lambda * xv.squaredNorm() +
           gamma * lambda * v.squaredNorm();
}

Matrix eszsl_gradient(const Matrix& v, const Matrix& x, const Matrix& y,
                      const Matrix& s, double gamma, double lambda) {
    check_fit_shapes(x, y, s);
    if (v.rows() != x.cols() || v.cols() != s.rows())
        throw DataError("V shape does not match X and S");
    const Matrix residual = x * v * s - y;
    return 2.0 * (x.transpose() * residual * s.transpose() +
                  gamma * v * (s * s.transpose()) +
                  lambda * (x.transpose() * x) * v + gamma * lambda * v);
}

Vector score_unseen(const Vector& x, const ZslModel& model,
                    const Matrix& s_unseen) {
    if (x.size() != model.v.rows())
        throw DataError("instance dimension does not match V");
    if (model.v.cols() != s_unseen.rows())
        throw DataError("attribute dimension does not match V");
    return s_unseen.transpose() * (model.v.transpose() * x);
}

double cosine_class_similarity(const Vector& a_i, const Vector& a_j) {
    if (a_i.size() != a_j.size())
        throw DataError("attribute vectors differ in length");
    const double ni = a_i.norm();
    const double nj = a_j.norm();
    if (ni == 0 || nj == 0) throw DataError("zero-norm attribute vector");
    return a_i.dot(a_j) / (ni * nj);
}

Vector synthesize_unseen_anchor(const Vector& a_new, const Matrix& s_seen,
                                const AnchorEmbedding& m) {
    if (a_new.size() != s_seen.rows())
        throw DataError("attribute dimension does not match seen signatures");
    if (m.m.rows() != s_seen.cols())
        throw DataError("embedding rows do not match seen class count");

    const Index n_s = s_seen.cols();
    Vector w(n_s);
    for (Index q = 0; q < n_s; ++q)
        w(q) = cosine_class_similarity(a_new, s_seen.col(q));
    const double total = w.sum();
    if (!(total > 0))
        throw DataError("signature has no positive similarity to any seen class");
    return m.m.transpose() * (w / total);
}

ExtendedAnchorSet extend_anchor_set(const AnchorEmbedding& base,
                                    const Matrix& s_seen,
                                    const Matrix& s_unseen,
                                    std::vector<int> unseen_class_ids) {
    if (s_seen.rows() != s_unseen.rows() && s_unseen.cols() > 0)
        throw DataError("seen and unseen signatures differ in attribute dimension");
    const Index n_u = s_unseen.cols();
    if (unseen_class_ids.empty()) {
        unseen_class_ids.resize(static_cast<std::size_t>(n_u));
        std::iota(unseen_class_ids.begin(), unseen_class_ids.end(), 0);
    }
    if (static_cast<Index>(unseen_class_ids.size()) != n_u)
        throw DataError("class id count does not match unseen signature count");

    ExtendedAnchorSet ext;
    ext.base = base;
    ext.unseen_class_ids = std::move(unseen_class_ids);
    ext.unseen_embeddings.resize(n_u, base.code_length);
    for (Index i = 0; i < n_u; ++i)
        ext.unseen_embeddings.row(i) =
            synthesize_unseen_anchor(s_unseen.col(i), s_seen, base).transpose();
    return ext;
}

HashCode hash_unseen_instance(const Vector& x_u, const ZslModel& model,
                              const ExtendedAnchorSet& ext,
                              const Matrix& s_unseen,
                              const HashParams& params) {
    if (ext.unseen_embeddings.rows() < 1)
        throw DataError("no unseen classes to hash against");
    if (s_unseen.cols() != ext.unseen_embeddings.rows())
        throw DataError("unseen signature count does not match extended set");
    if (params.s < 1) throw std::invalid_argument("s must be >= 1");
    if (params.omega < 1) throw std::invalid_argument("omega must be >= 1");
    return hash_unseen_one(score_unseen(x_u, model, s_unseen), ext, params.s,
                           params.omega);
}

HashCodeSet hash_unseen_dataset(const Matrix& x_u, const ZslModel& model,
                                const ExtendedAnchorSet& ext,
                                const Matrix& s_unseen,
                                const HashParams& params, int n_threads) {
    if (ext.unseen_embeddings.rows() < 1)
        throw DataError("no unseen classes to hash against");
    if (s_unseen.cols() != ext.unseen_embeddings.rows())
        throw DataError("unseen signature count does not match extended set");
    if (params.s < 1) throw std::invalid_argument("s must be >= 1");
    if (params.omega < 1) throw std::invalid_argument("omega must be >= 1");
    if (x_u.cols() != model.v.rows())
        throw DataError("instance dimension does not match V");

    const std::size_t n = static_cast<std::size_t>(x_u.rows());
    HashCodeSet codes(n, ext.base.code_length);
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Vector scores = score_unseen(
                x_u.row(static_cast<Index>(i)).transpose(), model, s_unseen);
            codes.assign(i, hash_unseen_one(scores, ext, params.s, params.omega));
        }
    };
    const std::size_t threads =
        std::min<std::size_t>(std::max(n_threads, 1), std::max<std::size_t>(n, 1));
    if (threads <= 1) {
        worker(0, n);
        return codes;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
    return codes;
}

void save_zsl_model(const std::string& csv_path,
                    const std::string& sidecar_path, const ZslModel& model) {
    csv::write_matrix(csv_path, model.v);
    nlohmann::json sidecar;
    sidecar["gamma"] = model.hyper.gamma;
    sidecar["lambda"] = model.hyper.lambda;
    std::ofstream out(sidecar_path);
    if (!out) throw DataError("cannot write " + sidecar_path);
    out << sidecar.dump(2) << '\n';
}

ZslModel load_zsl_model(const std::string& csv_path,
                        const std::string& sidecar_path) {
    ZslModel model;
    model.v = csv::read_matrix(csv_path);
    std::ifstream in(sidecar_path);
    if (!in) throw DataError("cannot open " + sidecar_path);
    nlohmann::json sidecar;
    try {
        in >> sidecar;
        model.hyper.gamma = sidecar.at("gamma").get<double>();
        model.hyper.lambda = sidecar.at("lambda").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(sidecar_path + ": " + e.what());
    }
    return model;
}

void save_extended_set(const std::string& csv_path,
                       const std::string& manifest_path,
                       const ExtendedAnchorSet& ext) {
    Matrix all(ext.base.m.rows() + ext.unseen_embeddings.rows(),
               ext.base.m.cols());
    all.topRows(ext.base.m.rows()) = ext.base.m;
    all.bottomRows(ext.unseen_embeddings.rows()) = ext.unseen_embeddings;
    csv::write_matrix(csv_path, all);

    nlohmann::json manifest;
    manifest["n_seen"] = ext.base.m.rows();
    manifest["code_length"] = ext.base.code_length;
    manifest["embedder"] = embedder_kind_name(ext.base.embedder.kind);
    manifest["kernel_bandwidth"] = ext.base.embedder.kernel_bandwidth;
    manifest["n_neighbors"] = ext.base.embedder.n_neighbors;
    manifest["unseen_class_ids"] = ext.unseen_class_ids;
    std::ofstream out(manifest_path);
    if (!out) throw DataError("cannot write " + manifest_path);
    out << manifest.dump(2) << '\n';
}

ExtendedAnchorSet load_extended_set(const std::string& csv_path,
                                    const std::string& manifest_path) {
    const Matrix all = csv::read_matrix(csv_path);
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open " + manifest_path);
    nlohmann::json manifest;
    ExtendedAnchorSet ext;
    Index n_seen = 0;
    try {
        in >> manifest;
        n_seen = manifest.at("n_seen").get<Index>();
        ext.base.code_length = manifest.at("code_length").get<int>();
        ext.base.embedder.kind =
            parse_embedder_kind(manifest.at("embedder").get<std::string>());
        ext.base.embedder.kernel_bandwidth =
            manifest.at("kernel_bandwidth").get<double>();
        ext.base.embedder.n_neighbors = manifest.at("n_neighbors").get<int>();
        ext.unseen_class_ids =
            manifest.at("unseen_class_ids").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(manifest_path + ": " + e.what());
    }
    if (n_seen < 0 || n_seen > all.rows())
        throw DataError(manifest_path + ": n_seen out of range");
    if (static_cast<Index>(ext.unseen_class_ids.size()) != all.rows() - n_seen)
        throw DataError(manifest_path + ": class ids do not match row count");
    if (ext.base.code_length != all.cols())
        throw DataError(manifest_path + ": code_length disagrees with matrix");
    ext.base.m = all.topRows(n_seen);
    ext.unseen_embeddings = all.bottomRows(all.rows() - n_seen);
    return ext;
}

}  // namespace zshash
