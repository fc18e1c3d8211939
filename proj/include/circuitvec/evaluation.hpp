#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "circuitvec/graph.hpp"
#include "circuitvec/io.hpp"
#include "circuitvec/rng.hpp"
#include "circuitvec/skipgram.hpp"

namespace circuitvec {

/// Micro-averaged F1 from globally pooled counts: 2TP / (2TP + FP + FN).
/// Degenerate all-empty case scores 0.
inline double micro_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
    std::size_t denom = 2 * tp + fp + fn;
    if (denom == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

/// One binary one-vs-rest model: linear weights over the embedding plus bias.
struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    bool all_negative = false;  // no positive training rows: predicts nothing
};

/// Loss and gradient of L2-regularized mean logistic loss at (weights, bias).
/// The bias is not regularized.
struct LogisticGradient {
    double loss = 0.0;
    std::vector<double> d_weights;
    double d_bias = 0.0;
};

inline LogisticGradient logistic_loss_gradient(std::span<const double* const> rows,
                                               std::span<const signed char> targets,
                                               std::size_t dim, const std::vector<double>& weights,
                                               double bias, double l2_lambda) {
    LogisticGradient grad;
    grad.d_weights.assign(dim, 0.0);
    const double inv_m = 1.0 / static_cast<double>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* x = rows[i];
        double z = bias;
        for (std::size_t j = 0; j < dim; ++j) z += weights[j] * x[j];
        double y = targets[i] > 0 ? 1.0 : -1.0;
        grad.loss += softplus(-y * z) * inv_m;
        double coef = -y * sigmoid(-y * z) * inv_m;
        for (std::size_t j = 0; j < dim; ++j) grad.d_weights[j] += coef * x[j];
        grad.d_bias += coef;
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        grad.d_weights[j] += l2_lambda * weights[j];
        sq += weights[j] * weights[j];
    }
    grad.loss += 0.5 * l2_lambda * sq;
    return grad;
}

/// Full-batch gradient descent with a fixed step sized from the data's
/// curvature bound; stops at gradient sup-norm 1e-8 or 500 iterations.
inline LogisticModel fit_logistic(std::span<const double* const> rows,
                                  std::span<const signed char> targets, std::size_t dim,
                                  double l2_lambda) {
    LogisticModel model;
    model.weights.assign(dim, 0.0);
    bool any_positive = false;
    for (signed char t : targets)
        if (t > 0) any_positive = true;
    if (!any_positive) {
        model.all_negative = true;
        return model;
    }

    double max_sq = 0.0;
    for (const double* x : rows) {
        double sq = 1.0;  // bias coordinate
        for (std::size_t j = 0; j < dim; ++j) sq += x[j] * x[j];
        max_sq = std::max(max_sq, sq);
    }
    const double step = 1.0 / (0.25 * max_sq + l2_lambda);

    constexpr std::size_t kMaxIterations = 500;
    constexpr double kGradTolerance = 1e-8;
    for (std::size_t it = 0; it < kMaxIterations; ++it) {
        LogisticGradient grad =
            logistic_loss_gradient(rows, targets, dim, model.weights, model.bias, l2_lambda);
        double sup = std::abs(grad.d_bias);
        for (double gw : grad.d_weights) sup = std::max(sup, std::abs(gw));
        if (sup <= kGradTolerance) break;
        for (std::size_t j = 0; j < dim; ++j) model.weights[j] -= step * grad.d_weights[j];
        model.bias -= step * grad.d_bias;
    }
    return model;
}

inline bool predict_label(const LogisticModel& model, const double* x, std::size_t dim) {
    if (model.all_negative) return false;
    double z = model.bias;
    for (std::size_t j = 0; j < dim; ++j) z += model.weights[j] * x[j];
    return z >= 0.0;  // sigmoid(z) >= 0.5
}

/// Cross-validated multi-label classification outcome.
struct EvalReport {
    std::vector<double> fold_micro_f1;
    double mean_micro_f1 = 0.0;
    double labeled_fraction = 1.0;
    std::size_t fold_count = 0;
    std::size_t degenerate_label_folds = 0;  // label had no positives in a training fold
};

/// One-vs-rest logistic regression under seeded k-fold cross validation.
/// Evaluates on a seeded subsample of the labeled nodes (label_fraction of
/// them); per fold, pools TP/FP/FN across all labels into one Micro-F1.
inline EvalReport train_classifier(const EmbeddingMatrix& emb, const LabelSet& labels,
                                   double l2_lambda, std::size_t folds, double label_fraction,
                                   std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("train_classifier: folds must be >= 2");
    if (!(label_fraction > 0.0) || label_fraction > 1.0)
        throw std::invalid_argument("train_classifier: label_fraction must be in (0, 1]");

    std::vector<NodeId> nodes;
    for (NodeId v = 0; v < labels.node_count(); ++v)
        if (!labels.labels_of(v).empty()) nodes.push_back(v);
    if (nodes.size() < folds)
        throw std::invalid_argument("train_classifier: fewer labeled nodes than folds");

    SplitMix64 rng(seed);
    deterministic_shuffle(nodes, rng);
    std::size_t keep = static_cast<std::size_t>(
        std::llround(label_fraction * static_cast<double>(nodes.size())));
    keep = std::clamp<std::size_t>(keep, folds, nodes.size());
    nodes.resize(keep);

    const std::size_t dim = emb.dimensions();
    EvalReport report;
    report.fold_count = folds;
    report.labeled_fraction = label_fraction;

    for (std::size_t fold = 0; fold < folds; ++fold) {
        // Contiguous chunks of the shuffled order; sizes differ by at most 1.
        std::size_t begin = fold * nodes.size() / folds;
        std::size_t end = (fold + 1) * nodes.size() / folds;

        std::vector<const double*> train_rows;
        std::vector<NodeId> train_nodes, test_nodes;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (i >= begin && i < end)
                test_nodes.push_back(nodes[i]);
            else {
                train_nodes.push_back(nodes[i]);
                train_rows.push_back(emb.input_row(nodes[i]).data());
            }
        }

        std::size_t tp = 0, fp = 0, fn = 0;
        for (LabelId label = 0; label < labels.label_count(); ++label) {
            std::vector<signed char> targets(train_nodes.size());
            for (std::size_t i = 0; i < train_nodes.size(); ++i) {
                const auto& set = labels.labels_of(train_nodes[i]);
                targets[i] = std::binary_search(set.begin(), set.end(), label) ? 1 : -1;
            }
            LogisticModel model = fit_logistic(train_rows, targets, dim, l2_lambda);
            if (model.all_negative) ++report.degenerate_label_folds;
            for (NodeId v : test_nodes) {
                const auto& set = labels.labels_of(v);
                bool truth = std::binary_search(set.begin(), set.end(), label);
                bool predicted = predict_label(model, emb.input_row(v).data(), dim);
                if (predicted && truth)
                    ++tp;
                else if (predicted && !truth)
                    ++fp;
                else if (!predicted && truth)
                    ++fn;
            }
        }
        report.fold_micro_f1.push_back(micro_f1(tp, fp, fn));
    }
    report.mean_micro_f1 =
        std::accumulate(report.fold_micro_f1.begin(), report.fold_micro_f1.end(), 0.0) /
        static_cast<double>(folds);
    return report;
}

/// Per-dimension comparison of two embedding files.
struct StabilityReport {
    std::vector<double> per_dimension_max;
    double global_max = 0.0;
    std::size_t worst_dimension = 0;
    bool pass = false;
};

/// Aligns the two files by node name and reports the maximum absolute
/// per-dimension deviation. pass iff the global maximum is within tolerance
/// (0 by default: replay runs must agree exactly).
inline StabilityReport compare_runs(const EmbeddingFile& a, const EmbeddingFile& b,
                                    double tolerance = 0.0) {
    if (a.dimensions != b.dimensions || a.names.size() != b.names.size())
        throw std::invalid_argument("compare_runs: embedding shapes differ");
    std::unordered_map<std::string, std::size_t> index_b;
    for (std::size_t i = 0; i < b.names.size(); ++i) index_b.emplace(b.names[i], i);

    StabilityReport report;
    report.per_dimension_max.assign(a.dimensions, 0.0);
    for (std::size_t i = 0; i < a.names.size(); ++i) {
        auto it = index_b.find(a.names[i]);
        if (it == index_b.end())
            throw std::invalid_argument("compare_runs: node '" + a.names[i] +
                                        "' missing from second file");
        const auto& ra = a.rows[i];
        const auto& rb = b.rows[it->second];
        for (std::size_t j = 0; j < a.dimensions; ++j) {
            double dev = std::abs(ra[j] - rb[j]);
            if (dev > report.per_dimension_max[j]) report.per_dimension_max[j] = dev;
            if (dev > report.global_max) {
                report.global_max = dev;
                report.worst_dimension = j;
            }
        }
    }
    report.pass = report.global_max <= tolerance;
    return report;
}

inline StabilityReport compare_runs(const std::string& path_a, const std::string& path_b,
                                    double tolerance = 0.0) {
    auto in_a = detail::open_input(path_a);
    auto in_b = detail::open_input(path_b);
    EmbeddingFile a = read_embedding(in_a);
    EmbeddingFile b = read_embedding(in_b);
    return compare_runs(a, b, tolerance);
}

}  // namespace circuitvec
