#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "circuitvec/refinement.hpp"
#include "circuitvec/rng.hpp"

namespace circuitvec {

/// Training hyperparameters. Identical config plus identical neighborhoods
/// reproduce the embedding matrix bit for bit: every random choice below is
/// drawn from streams derived from seed.
struct TrainConfig {
    std::size_t dimensions = 128;
    std::size_t epochs = 5;
    double learning_rate = 0.025;
    double learning_rate_floor = 0.0001;  // linear decay never goes below this
    std::size_t negatives = 5;
    double noise_exponent = 0.75;
    std::uint64_t seed = 1;
};

namespace detail {
// Distinct stream tags so initialization, negative sampling and per-epoch
// shuffling never share a generator state.
inline constexpr std::uint64_t kInitStream = 0x696E697476656373ULL;
inline constexpr std::uint64_t kNegativeStream = 0x6E65676174697665ULL;
inline constexpr std::uint64_t kShuffleStream = 0x73687566666C6531ULL;
}  // namespace detail

/// Learned node representations: the published input vectors f(u) and the
/// context vectors used on the training side.
class EmbeddingMatrix {
public:
    EmbeddingMatrix(std::size_t node_count, std::size_t dimensions)
        : n_(node_count),
          d_(dimensions),
          input_(node_count * dimensions, 0.0),
          context_(node_count * dimensions, 0.0) {}

    /// Input rows uniform in [-0.5/d, 0.5/d) from the seeded stream, context
    /// rows zero.
    static EmbeddingMatrix seeded_init(std::size_t node_count, std::size_t dimensions,
                                       std::uint64_t seed) {
        EmbeddingMatrix emb(node_count, dimensions);
        SplitMix64 rng(seed ^ detail::kInitStream);
        const double inv_d = 1.0 / static_cast<double>(dimensions);
        for (double& x : emb.input_) x = (rng.next_double() - 0.5) * inv_d;
        return emb;
    }

    std::size_t node_count() const { return n_; }
    std::size_t dimensions() const { return d_; }

    std::span<double> input_row(NodeId v) { return {input_.data() + v * d_, d_}; }
    std::span<const double> input_row(NodeId v) const { return {input_.data() + v * d_, d_}; }
    std::span<double> context_row(NodeId v) { return {context_.data() + v * d_, d_}; }
    std::span<const double> context_row(NodeId v) const { return {context_.data() + v * d_, d_}; }

    bool all_finite() const {
        for (double x : input_)
            if (!std::isfinite(x)) return false;
        for (double x : context_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    std::size_t n_;
    std::size_t d_;
    std::vector<double> input_;
    std::vector<double> context_;
};

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow; -log sigmoid(x) == softplus(-x).
inline double softplus(double x) {
    if (x > 30.0) return x;
    return std::log1p(std::exp(x));
}

/// Model probability that w is observed in u's neighborhood:
/// sigmoid(context(w) . input(u)).
inline double positive_score(NodeId u, NodeId w, const EmbeddingMatrix& emb) {
    auto xu = emb.input_row(u);
    auto cw = emb.context_row(w);
    double dot = 0.0;
    for (std::size_t i = 0; i < xu.size(); ++i) dot += cw[i] * xu[i];
    return sigmoid(dot);
}

/// Ordered training pairs plus ingestion diagnostics.
struct PairList {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::size_t empty_neighborhoods = 0;
};

/// Emits (u, w) for each source u in ascending id order and each w in its
/// refined members (source excluded) in first-inclusion order. A pure
/// function of the input, so the training sequence is replayable.
inline PairList build_pairs(const std::vector<RefinedNeighborhood>& neighborhoods) {
    if (neighborhoods.empty()) throw std::invalid_argument("build_pairs: no neighborhoods");
    PairList out;
    for (const RefinedNeighborhood& nb : neighborhoods) {
        if (nb.members.empty()) {
            ++out.empty_neighborhoods;
            continue;
        }
        for (NodeId w : nb.members)
            if (w != nb.source) out.pairs.emplace_back(nb.source, w);
    }
    return out;
}

/// Draws negative nodes from the unigram noise distribution: frequency of
/// each node in the pair list raised to noise_exponent, normalized.
class NegativeSampler {
public:
    NegativeSampler(std::size_t node_count, const PairList& pairs, double noise_exponent,
                    std::uint64_t seed)
        : rng_(seed ^ detail::kNegativeStream) {
        std::vector<std::size_t> freq(node_count, 0);
        for (const auto& [u, w] : pairs.pairs) {
            ++freq[u];
            ++freq[w];
        }
        double total = 0.0;
        for (NodeId v = 0; v < node_count; ++v) {
            if (freq[v] == 0) continue;
            total += std::pow(static_cast<double>(freq[v]), noise_exponent);
            support_.push_back(v);
            cumulative_.push_back(total);
        }
    }

    bool empty() const { return support_.empty(); }

    NodeId sample() {
        if (support_.empty()) throw std::logic_error("negative sampler has empty support");
        double r = rng_.next_double() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
        if (it == cumulative_.end()) --it;
        return support_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

private:
    SplitMix64 rng_;
    std::vector<NodeId> support_;
    std::vector<double> cumulative_;
};

/// Loss and full gradient of one pair under negative sampling:
///   L = -log sigmoid(c_w . x_u) - sum_neg log sigmoid(-c_neg . x_u)
/// d_context holds one row gradient per entry of [w, negatives...], in that
/// order; duplicated targets each carry their own contribution.
struct PairGradient {
    double loss = 0.0;
    std::vector<double> d_input;
    std::vector<std::vector<double>> d_context;
};

inline PairGradient pair_loss_gradient(NodeId u, NodeId w, std::span<const NodeId> negatives,
                                       const EmbeddingMatrix& emb) {
    const std::size_t d = emb.dimensions();
    auto xu = emb.input_row(u);
    PairGradient grad;
    grad.d_input.assign(d, 0.0);
    grad.d_context.reserve(negatives.size() + 1);

    auto accumulate = [&](NodeId target, double label) {
        auto ct = emb.context_row(target);
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += ct[i] * xu[i];
        grad.loss += label > 0.5 ? softplus(-dot) : softplus(dot);
        double coef = sigmoid(dot) - label;  // dL/d(dot)
        std::vector<double> row(d);
        for (std::size_t i = 0; i < d; ++i) {
            row[i] = coef * xu[i];
            grad.d_input[i] += coef * ct[i];
        }
        grad.d_context.push_back(std::move(row));
    };

    accumulate(w, 1.0);
    for (NodeId neg : negatives) accumulate(neg, 0.0);
    return grad;
}

/// One SGD step on a single pair: draws cfg.negatives noise nodes from the
/// sampler, then applies the exact gradient of the pair loss at the current
/// parameters. Returns the pair loss before the update.
inline double sgd_step(std::pair<NodeId, NodeId> pair, EmbeddingMatrix& emb,
                       const TrainConfig& cfg, NegativeSampler& sampler, double learning_rate) {
    const auto [u, w] = pair;
    std::vector<NodeId> negatives(cfg.negatives);
    for (NodeId& neg : negatives) neg = sampler.sample();

    PairGradient grad = pair_loss_gradient(u, w, negatives, emb);
    if (!std::isfinite(grad.loss))
        throw std::runtime_error("skipgram: non-finite loss during training");

    const std::size_t d = emb.dimensions();
    auto apply_context = [&](NodeId target, const std::vector<double>& row) {
        auto ct = emb.context_row(target);
        for (std::size_t i = 0; i < d; ++i) ct[i] -= learning_rate * row[i];
    };
    apply_context(w, grad.d_context[0]);
    for (std::size_t j = 0; j < negatives.size(); ++j)
        apply_context(negatives[j], grad.d_context[j + 1]);
    auto xu = emb.input_row(u);
    for (std::size_t i = 0; i < d; ++i) xu[i] -= learning_rate * grad.d_input[i];
    return grad.loss;
}

/// Final matrix plus the per-epoch mean loss trace.
struct TrainResult {
    EmbeddingMatrix embedding;
    std::vector<double> epoch_mean_loss;
    std::size_t empty_neighborhoods = 0;
};

/// Trains embeddings over the refined neighborhoods. Sequential by contract:
/// the update order (a seeded shuffle per epoch) and the negative stream are
/// part of the reproducibility guarantee, so no parallel scheme is used.
inline TrainResult train(std::size_t node_count,
                         const std::vector<RefinedNeighborhood>& neighborhoods,
                         const TrainConfig& cfg) {
    if (cfg.dimensions < 1) throw std::invalid_argument("train: dimensions must be >= 1");
    PairList pairs = build_pairs(neighborhoods);
    TrainResult result{EmbeddingMatrix::seeded_init(node_count, cfg.dimensions, cfg.seed),
                       {},
                       pairs.empty_neighborhoods};
    if (cfg.epochs == 0 || pairs.pairs.empty()) return result;

    NegativeSampler sampler(node_count, pairs, cfg.noise_exponent, cfg.seed);
    const std::size_t total_steps = cfg.epochs * pairs.pairs.size();
    std::size_t step = 0;
    std::vector<std::size_t> order(pairs.pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        SplitMix64 shuffle_rng(cfg.seed ^ detail::kShuffleStream ^
                               static_cast<std::uint64_t>(epoch));
        std::iota(order.begin(), order.end(), std::size_t{0});
        deterministic_shuffle(order, shuffle_rng);

        double epoch_loss = 0.0;
        for (std::size_t idx : order) {
            double progress = static_cast<double>(step) / static_cast<double>(total_steps);
            double lr = cfg.learning_rate * (1.0 - progress);
            if (lr < cfg.learning_rate_floor) lr = cfg.learning_rate_floor;
            epoch_loss += sgd_step(pairs.pairs[idx], result.embedding, cfg, sampler, lr);
            ++step;
        }
        result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(pairs.pairs.size()));
    }
    if (!result.embedding.all_finite())
        throw std::runtime_error("skipgram: non-finite parameters after training");
    return result;
}

}  // namespace circuitvec
