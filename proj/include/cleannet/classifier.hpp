#pragma once

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <vector>

#include "cleannet/autodiff.hpp"
#include "cleannet/dataset.hpp"
#include "cleannet/detect.hpp"
#include "cleannet/error.hpp"
#include "cleannet/kmeans.hpp"
#include "cleannet/model.hpp"

namespace cleannet {

/// Downstream classifier over precomputed features: a single affine layer to
/// L logits by default, or one tanh hidden layer when `hidden` is nonzero.
struct ClassifierModel {
    std::size_t input_dim = 0;
    std::size_t class_count = 0;
    std::size_t hidden = 0;
    ParamStore params;

    static ClassifierModel init(std::size_t input_dim, std::size_t class_count, std::uint64_t seed,
                                std::size_t hidden = 0) {
        ClassifierModel m;
        m.input_dim = input_dim;
        m.class_count = class_count;
        m.hidden = hidden;
        Rng rng(seed);
        if (hidden > 0) {
            m.params.add("fc1.w", glorot_uniform(input_dim, hidden, {input_dim, hidden}, rng));
            m.params.add("fc1.b", Tensor::zeros({hidden}));
            m.params.add("fc2.w", glorot_uniform(hidden, class_count, {hidden, class_count}, rng));
            m.params.add("fc2.b", Tensor::zeros({class_count}));
        } else {
            m.params.add("fc.w", glorot_uniform(input_dim, class_count, {input_dim, class_count}, rng));
            m.params.add("fc.b", Tensor::zeros({class_count}));
        }
        return m;
    }

    /// Logits node [L] for one query row node [1 x d].
    NodeId build_logits(Graph& g, NodeId row) {
        NodeId z;
        if (hidden > 0) {
            NodeId h = g.tanh_act(g.affine(row, g.param(params, "fc1.w"), g.param(params, "fc1.b")));
            z = g.affine(h, g.param(params, "fc2.w"), g.param(params, "fc2.b"));
        } else {
            z = g.affine(row, g.param(params, "fc.w"), g.param(params, "fc.b"));
        }
        return g.reshape(z, {class_count});
    }

    /// Class probabilities p(y|x) for one feature vector.
    Tensor forward_probs(const Tensor& query) const {
        if (query.numel() != input_dim) throw DimensionError("classifier forward: feature width mismatch");
        auto& self = const_cast<ClassifierModel&>(*this);
        Graph g;
        NodeId row = g.constant(Tensor({std::size_t{1}, input_dim}, query.data));
        return g.value(g.softmax(self.build_logits(g, row)));
    }

    /// argmax class id (1-based); ties break toward the smaller class id.
    int predict(const Tensor& query) const {
        const Tensor p = forward_probs(query);
        std::size_t best = 0;
        for (std::size_t c = 1; c < p.numel(); ++c)
            if (p.at(c) > p.at(best)) best = c;
        return static_cast<int>(best) + 1;
    }

    /// The top-k predicted class ids, most probable first; ties break toward
    /// the smaller class id.
    std::vector<int> top_k(const Tensor& query, std::size_t k) const {
        const Tensor p = forward_probs(query);
        std::vector<int> order(p.numel());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p.at(a) > p.at(b); });
        std::vector<int> out;
        for (std::size_t i = 0; i < std::min(k, order.size()); ++i) out.push_back(order[i] + 1);
        return out;
    }

    double accuracy(const Tensor& features, const std::vector<int>& labels) const {
        if (features.rows() == 0) return 0.0;
        std::size_t hits = 0;
        for (std::size_t i = 0; i < features.rows(); ++i)
            if (predict(features.row_copy(i)) == labels[i]) ++hits;
        return static_cast<double>(hits) / static_cast<double>(features.rows());
    }
};

// ---------------------------------------------------------------------------
// CleanNet-driven sample weights (soft = clamped cosine, hard = threshold)
// ---------------------------------------------------------------------------

inline double soft_weight_from_score(double score) { return std::max(0.0, score); }

/// w_soft = max(0, cos(f_q(v), f_s(V_c))) in [0, 1].
inline double weight_soft(const FrozenScorer& scorer, const Tensor& query, int class_id) {
    return soft_weight_from_score(scorer.score(query, class_id));
}

/// w_hard = 1 iff cos >= delta; identical decision to detect() at the same delta.
inline double weight_hard(const FrozenScorer& scorer, const Tensor& query, int class_id, double delta) {
    return static_cast<double>(detect(scorer.score(query, class_id), delta));
}

enum class WeightMode { kNone, kSoft, kHard };

inline std::vector<double> compute_weights(const FrozenScorer& scorer, const NoisyDataset& ds, WeightMode mode,
                                           double delta) {
    std::vector<double> w(ds.size(), 1.0);
    if (mode == WeightMode::kNone) return w;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Tensor q = ds.features.row_copy(i);
        w[i] = mode == WeightMode::kSoft ? weight_soft(scorer, q, ds.noisy_labels[i])
                                         : weight_hard(scorer, q, ds.noisy_labels[i], delta);
    }
    return w;
}

// ---------------------------------------------------------------------------
// Weighted objective and training
// ---------------------------------------------------------------------------

/// Weighted negative log likelihood over a batch of rows:
/// mean_i w_i * (-log p(y_i | x_i)). Weights are data, not parameters.
inline NodeId build_weighted_nll(Graph& g, ClassifierModel& model, const Tensor& features,
                                 const std::vector<int>& labels, const std::vector<double>& weights,
                                 const std::vector<std::size_t>& rows) {
    if (rows.empty()) throw ContractError("build_weighted_nll: empty batch");
    std::vector<NodeId> terms;
    terms.reserve(rows.size());
    for (std::size_t i : rows) {
        NodeId row = g.constant(Tensor({std::size_t{1}, features.cols()},
                                       {features.row(i).begin(), features.row(i).end()}));
        NodeId logits = model.build_logits(g, row);
        NodeId nll = g.nll_softmax(logits, static_cast<std::size_t>(labels[i] - 1));
        terms.push_back(g.scale(nll, weights[i]));
    }
    return g.scale(g.add_n(terms), 1.0 / static_cast<double>(rows.size()));
}

struct ClassifierEpochStats {
    std::size_t epoch = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
    double eval_accuracy = -1.0;  // -1 when no eval set was given
};

struct ClassifierTrainLog {
    std::vector<ClassifierEpochStats> epochs;
    std::size_t clamped_logs = 0;
};

struct ClassifierTrainOpts {
    double lr = 0.1;
    double momentum = 0.9;
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
};

/// SGD training of the classifier on weighted NLL. With weights all one this
/// is plain cross-entropy training. Optionally reports accuracy on a clean
/// evaluation set (features + true labels) per epoch.
inline ClassifierTrainLog train_classifier(ClassifierModel& model, const NoisyDataset& train,
                                           const std::vector<double>& weights, const ClassifierTrainOpts& opts,
                                           const Tensor* eval_features = nullptr,
                                           const std::vector<int>* eval_labels = nullptr) {
    train.validate();
    if (train.size() == 0) throw ConfigError("train_classifier: empty training set");
    if (weights.size() != train.size()) throw DimensionError("train_classifier: weight count mismatch");
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ValidationError("train_classifier: weights must be finite and >= 0");

    ClassifierTrainLog log;
    Rng rng(opts.seed);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        rng.shuffle(order);
        ClassifierEpochStats stats;
        stats.epoch = epoch;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
            const std::size_t end = std::min(order.size(), start + opts.batch_size);
            std::vector<std::size_t> rows(order.begin() + start, order.begin() + end);
            Graph g;
            NodeId loss = build_weighted_nll(g, model, train.features, train.noisy_labels, weights, rows);
            const double lv = g.value(loss).item();
            if (!std::isfinite(lv))
                throw TrainingError("train_classifier: non-finite loss at epoch " + std::to_string(epoch));
            g.backward(loss, model.params);
            sgd_step(model.params, opts.lr, opts.momentum);
            stats.loss += lv;
            log.clamped_logs += g.log_clamp_count();
            ++batches;
        }
        stats.loss /= static_cast<double>(batches);
        stats.train_accuracy = model.accuracy(train.features, train.noisy_labels);
        if (eval_features && eval_labels) stats.eval_accuracy = model.accuracy(*eval_features, *eval_labels);
        log.epochs.push_back(stats);
    }
    if (log.clamped_logs > 0)
        std::cerr << "warning: train_classifier clamped log() on " << log.clamped_logs << " evaluations\n";
    return log;
}

// ---------------------------------------------------------------------------
// Classification-filtering baseline (weakly supervised): a sample is relevant
// iff its noisy class is within the classifier's top-K predictions.
// ---------------------------------------------------------------------------

inline DetectionReport baseline_classification_filtering(const ClassifierModel& clf, const NoisyDataset& ds,
                                                         std::size_t k,
                                                         const std::vector<int>* eval_labels = nullptr) {
    if (k > clf.class_count) {
        std::cerr << "warning: classification filtering: K=" << k << " exceeds class count; clamping to "
                  << clf.class_count << "\n";
        k = clf.class_count;
    }
    if (k == 0) throw ValidationError("classification filtering: K must be >= 1");
    std::vector<double> scores(ds.size(), 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto top = clf.top_k(ds.features.row_copy(i), k);
        const bool hit = std::find(top.begin(), top.end(), ds.noisy_labels[i]) != top.end();
        scores[i] = hit ? 1.0 : 0.0;
    }
    DetectionReport r = make_report("classification_filtering", scores,
                                    eval_labels ? *eval_labels : ds.verification, ds.noisy_labels, 0.5);
    return r;
}

/// Chooses K on a validation set by class-averaged error rate; ties break
/// toward the smaller K.
inline std::size_t select_filtering_k(const ClassifierModel& clf, const NoisyDataset& val) {
    double best_err = std::numeric_limits<double>::infinity();
    std::size_t best_k = 1;
    for (std::size_t k = 1; k <= clf.class_count; ++k) {
        const double err = baseline_classification_filtering(clf, val, k).errors.average;
        if (err < best_err) {
            best_err = err;
            best_k = k;
        }
    }
    return best_k;
}

// ---------------------------------------------------------------------------
// Alternating training (classifier -> CleanNet -> weighted classifier)
// ---------------------------------------------------------------------------

struct AltRoundMetrics {
    std::size_t round = 0;        // 0 = initial unweighted classifier
    double val_accuracy = 0.0;    // on the validation split
    double detection_error = -1.0;  // class-averaged, on validation verified labels (-1 for round 0)
    double delta = 0.0;
};

struct AltTrainResult {
    ClassifierModel classifier;
    CleanNetModel cleannet;
    ReferenceSets refs;
    std::vector<AltRoundMetrics> rounds;
    std::size_t best_round = 0;
};

struct AltTrainOpts {
    std::size_t max_rounds = 4;   // weighted rounds after the initial classifier
    std::size_t patience = 1;     // consecutive non-improving rounds tolerated; 0 = single round
    WeightMode mode = WeightMode::kSoft;
    bool warm_start_cleannet = true;  // reuse the previous round's CleanNet as initialization
    bool use_kmeans_refs = true;
    ClassifierTrainOpts classifier;
};

/// The alternating scheme: (1) train an unweighted classifier, (2) rebuild
/// reference sets and train CleanNet, (3) retrain the classifier with
/// CleanNet weights; repeat 2-3 until validation accuracy stops improving.
/// Features are fixed here (taking the place of refreshed conv features), so
/// step 2's refresh rebuilds the reference sets each round. Validation
/// accuracy uses `val_true_labels` when given (clean labels), otherwise the
/// validation split's noisy labels.
inline AltTrainResult alternating_train(const NoisyDataset& train, const NoisyDataset& val, const Hyperparams& hp,
                                        const AltTrainOpts& opts,
                                        const std::vector<int>* val_true_labels = nullptr) {
    const std::vector<int>& val_labels = val_true_labels ? *val_true_labels : val.noisy_labels;

    AltTrainResult res;
    res.classifier = ClassifierModel::init(train.dim(), static_cast<std::size_t>(train.class_count),
                                           hp.seed ^ 0x5a5a5a5aULL);
    std::vector<double> ones(train.size(), 1.0);
    train_classifier(res.classifier, train, ones, opts.classifier, &val.features, &val_labels);

    AltRoundMetrics base;
    base.round = 0;
    base.val_accuracy = res.classifier.accuracy(val.features, val_labels);
    res.rounds.push_back(base);

    res.cleannet = CleanNetModel::init(train.dim(), hp.dims, hp.seed);
    double best_acc = base.val_accuracy;
    res.best_round = 0;
    ClassifierModel best_classifier = res.classifier;
    CleanNetModel best_cleannet = res.cleannet;
    ReferenceSets best_refs;
    std::size_t non_improving = 0;

    for (std::size_t round = 1; round <= opts.max_rounds; ++round) {
        // step 2: refresh reference sets from the current features, train CleanNet
        res.refs = build_reference_sets(train, hp.ref_size, hp.seed + round, opts.use_kmeans_refs);
        if (!opts.warm_start_cleannet) res.cleannet = CleanNetModel::init(train.dim(), hp.dims, hp.seed + round);
        Hyperparams round_hp = hp;
        round_hp.seed = hp.seed + round;
        train_cleannet(res.cleannet, train, res.refs, round_hp);

        const FrozenScorer scorer = FrozenScorer::build(res.cleannet, res.refs);
        const auto val_scores = scorer.score_all(val);
        const double delta = select_threshold(val_scores, val.verification, val.noisy_labels, hp.rho);

        // step 3: fine-tune the classifier under CleanNet weights
        const auto weights = compute_weights(scorer, train, opts.mode, delta);
        ClassifierTrainOpts copts = opts.classifier;
        copts.seed = opts.classifier.seed + round;
        train_classifier(res.classifier, train, weights, copts, &val.features, &val_labels);

        AltRoundMetrics m;
        m.round = round;
        m.delta = delta;
        m.val_accuracy = res.classifier.accuracy(val.features, val_labels);
        std::vector<int> val_decisions(val_scores.size());
        for (std::size_t i = 0; i < val_scores.size(); ++i) val_decisions[i] = detect(val_scores[i], delta);
        m.detection_error = average_error_rate(val_decisions, val.verification, val.noisy_labels).average;
        res.rounds.push_back(m);

        if (m.val_accuracy > best_acc) {
            best_acc = m.val_accuracy;
            res.best_round = round;
            best_classifier = res.classifier;
            best_cleannet = res.cleannet;
            best_refs = res.refs;
            non_improving = 0;
        } else {
            ++non_improving;
        }
        if (non_improving >= opts.patience) break;  // patience 0: exactly one weighted round
    }

    if (res.best_round > 0) {
        res.classifier = std::move(best_classifier);
        res.cleannet = std::move(best_cleannet);
        res.refs = std::move(best_refs);
    }
    return res;
}

}  // namespace cleannet
