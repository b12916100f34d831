#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cleannet/classifier.hpp"
#include "cleannet/dataset.hpp"
#include "cleannet/detect.hpp"
#include "cleannet/error.hpp"
#include "cleannet/kmeans.hpp"
#include "cleannet/model.hpp"
#include "cleannet/rng.hpp"

namespace cleannet {

/// Generator spec for planted-label-noise feature data: isotropic Gaussian
/// clusters (unit within-class std) whose centroids are scaled so that the
/// mean inter-centroid distance equals `separation`. A `noise_rate` fraction
/// of samples receive a uniformly random wrong class label; a
/// `verified_fraction` of each class gets verification labels derived from
/// ground truth; classes in `held_out` keep every verification label hidden.
struct SyntheticSpec {
    std::size_t classes = 20;
    std::size_t dim = 32;
    std::size_t per_class = 200;
    double noise_rate = 0.25;
    double separation = 3.0;
    double verified_fraction = 0.3;
    std::vector<int> held_out;
    std::uint64_t seed = 1;

    void validate() const {
        if (classes < 1) throw ValidationError("SyntheticSpec: classes must be >= 1");
        if (per_class < 1) throw ValidationError("SyntheticSpec: per_class must be >= 1");
        if (!(noise_rate >= 0.0 && noise_rate < 1.0))
            throw ValidationError("SyntheticSpec: noise_rate must be in [0,1)");
        if (separation < 0.0) throw ValidationError("SyntheticSpec: separation must be >= 0");
        if (!(verified_fraction >= 0.0 && verified_fraction <= 1.0))
            throw ValidationError("SyntheticSpec: verified_fraction must be in [0,1]");
        for (int c : held_out)
            if (c < 1 || c > static_cast<int>(classes))
                throw ValidationError("SyntheticSpec: held-out class " + std::to_string(c) + " out of range");
    }

    std::string echo() const {
        std::ostringstream os;
        os << "classes=" << classes << " dim=" << dim << " per_class=" << per_class << " noise_rate=" << noise_rate
           << " separation=" << separation << " verified_fraction=" << verified_fraction << " seed=" << seed
           << " held_out=";
        if (held_out.empty()) os << "-";
        for (std::size_t i = 0; i < held_out.size(); ++i) os << (i ? "," : "") << held_out[i];
        return os.str();
    }
};

struct SyntheticData {
    NoisyDataset ds;
    std::vector<int> true_labels;  // ground truth, 1-based
    Tensor centroids;              // [L x d]

    /// Ground-truth relevance of the noisy label (1 correct / 0 mislabeled)
    /// for every sample; what a perfect verifier would produce.
    std::vector<int> true_relevance() const {
        std::vector<int> out(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) out[i] = ds.noisy_labels[i] == true_labels[i] ? 1 : 0;
        return out;
    }
};

inline SyntheticData generate_dataset(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t l = spec.classes, d = spec.dim, n = l * spec.per_class;

    // centroids at the requested mean pairwise distance (within-class std is 1)
    Tensor centroids = Tensor::zeros({l, d});
    for (double& v : centroids.data) v = rng.gaussian();
    if (l > 1) {
        double dist_sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < l; ++a)
            for (std::size_t b = a + 1; b < l; ++b) {
                dist_sum += std::sqrt(detail::sq_dist(centroids.row(a), centroids.row(b)));
                ++pairs;
            }
        const double mean_dist = dist_sum / static_cast<double>(pairs);
        const double scale = mean_dist > 0.0 ? spec.separation / mean_dist : 0.0;
        for (double& v : centroids.data) v *= scale;
    } else {
        for (double& v : centroids.data) v = 0.0;
    }

    SyntheticData out;
    out.centroids = centroids;
    out.ds.class_count = static_cast<int>(l);
    out.ds.features = Tensor::zeros({n, d});
    out.ds.noisy_labels.resize(n);
    out.ds.verification.assign(n, kUnverified);
    out.true_labels.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const int cls = static_cast<int>(i / spec.per_class) + 1;
        out.true_labels[i] = cls;
        const auto c = centroids.row(static_cast<std::size_t>(cls - 1));
        for (std::size_t j = 0; j < d; ++j) out.ds.features.at(i, j) = c[j] + rng.gaussian();
        int label = cls;
        if (l > 1 && rng.uniform() < spec.noise_rate) {
            // uniformly random wrong label
            const std::size_t other = rng.below(l - 1);
            label = static_cast<int>(other) + 1;
            if (label >= cls) ++label;
        }
        out.ds.noisy_labels[i] = label;
    }

    // per-class verification labels from ground truth
    const std::set<int> held(spec.held_out.begin(), spec.held_out.end());
    for (int cls = 1; cls <= static_cast<int>(l); ++cls) {
        const auto members = out.ds.indices_of_class(cls);
        const auto want =
            static_cast<std::size_t>(std::llround(spec.verified_fraction * static_cast<double>(members.size())));
        const auto picks = rng.sample_without_replacement(members.size(), std::min(want, members.size()));
        if (held.count(cls)) continue;  // rng draws above keep the stream identical across maskings
        for (std::size_t p : picks) {
            const std::size_t i = members[p];
            out.ds.verification[i] = out.ds.noisy_labels[i] == out.true_labels[i] ? kVerifiedRelevant
                                                                                  : kVerifiedMislabeled;
        }
    }
    out.ds.validate();
    return out;
}

/// Copy of a dataset with the verification labels of `n_holdout` randomly
/// chosen classes masked to -1. The original is untouched; the masked class
/// list is returned through `masked_out` when given.
inline NoisyDataset make_transfer_split(const NoisyDataset& ds, std::size_t n_holdout, std::uint64_t seed,
                                        std::vector<int>* masked_out = nullptr) {
    if (n_holdout >= static_cast<std::size_t>(ds.class_count))
        throw ConfigError("make_transfer_split: n_holdout must be < class count");
    Rng rng(seed);
    const auto picks = rng.sample_without_replacement(static_cast<std::size_t>(ds.class_count), n_holdout);
    std::set<int> masked;
    for (std::size_t p : picks) masked.insert(static_cast<int>(p) + 1);
    NoisyDataset out = ds;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (masked.count(out.noisy_labels[i])) out.verification[i] = kUnverified;
    if (masked_out) masked_out->assign(masked.begin(), masked.end());
    return out;
}

// ---------------------------------------------------------------------------
// End-to-end experiments
// ---------------------------------------------------------------------------

struct BenchConfig {
    Hyperparams hp;                  // CleanNet training knobs (K included)
    ClassifierTrainOpts classifier;  // downstream classifier knobs
    double f_train = 0.8, f_val = 0.1, f_test = 0.1;

    BenchConfig() {
        hp.ref_size = 10;
        hp.epochs = 25;
        classifier.epochs = 15;
    }
};

struct MethodErrors {
    std::string method;
    double overall = 0.0;    // class-averaged error over all classes (test split, ground truth)
    double verified = -1.0;  // over classes with visible verification labels
    double held_out = -1.0;  // over held-out classes (-1 when none)
};

struct DetectionExperimentReport {
    SyntheticSpec spec;
    double delta = 0.0;            // CleanNet threshold chosen on validation
    std::size_t filtering_k = 0;   // top-K chosen on validation
    std::vector<MethodErrors> methods;
    double noise_rate_realized = 0.0;

    const MethodErrors& method(const std::string& name) const {
        for (const auto& m : methods)
            if (m.method == name) return m;
        throw LookupError("no method '" + name + "' in report");
    }
};

namespace detail {

/// Splits class-averaged errors of a report into overall / verified-only /
/// held-out-only groups.
inline MethodErrors group_errors(const std::string& name, const ErrorRates& rates, const std::set<int>& held) {
    MethodErrors m;
    m.method = name;
    m.overall = rates.average;
    double sv = 0.0, sh = 0.0;
    std::size_t nv = 0, nh = 0;
    for (const auto& [cid, err] : rates.per_class) {
        if (held.count(cid)) {
            sh += err;
            ++nh;
        } else {
            sv += err;
            ++nv;
        }
    }
    m.verified = nv ? sv / static_cast<double>(nv) : -1.0;
    m.held_out = nh ? sh / static_cast<double>(nh) : -1.0;
    return m;
}

}  // namespace detail

/// Full detection pipeline on one generated dataset: k-means reference sets,
/// CleanNet training, threshold selection on the validation split's visible
/// verification labels, then evaluation of CleanNet and the three paper
/// baselines on the test split against hidden ground truth.
inline DetectionExperimentReport run_detection_experiment(const SyntheticSpec& spec, const BenchConfig& cfg) {
    SyntheticData data = generate_dataset(spec);
    Hyperparams hp = cfg.hp;
    hp.seed = spec.seed;

    const SplitResult split = split_dataset(data.ds, cfg.f_train, cfg.f_val, cfg.f_test, spec.seed ^ 0x9e3779b9ULL);
    auto pick_labels = [&](const std::vector<std::size_t>& idx) {
        std::vector<int> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(data.true_labels[i]);
        return out;
    };
    const std::vector<int> test_true = pick_labels(split.test_idx);
    std::vector<int> test_relevance(split.test_idx.size());
    for (std::size_t i = 0; i < split.test_idx.size(); ++i)
        test_relevance[i] = split.test.noisy_labels[i] == test_true[i] ? 1 : 0;

    const ReferenceSets refs = build_reference_sets(split.train, hp.ref_size, spec.seed);
    CleanNetModel model = CleanNetModel::init(data.ds.dim(), hp.dims, spec.seed);
    train_cleannet(model, split.train, refs, hp);
    const FrozenScorer scorer = FrozenScorer::build(model, refs);

    DetectionExperimentReport report;
    report.spec = spec;
    {
        std::size_t mislabeled = 0;
        for (std::size_t i = 0; i < data.ds.size(); ++i)
            if (data.ds.noisy_labels[i] != data.true_labels[i]) ++mislabeled;
        report.noise_rate_realized = static_cast<double>(mislabeled) / static_cast<double>(data.ds.size());
    }
    const std::set<int> held(spec.held_out.begin(), spec.held_out.end());

    // CleanNet
    const auto val_scores = scorer.score_all(split.val);
    report.delta = select_threshold(val_scores, split.val.verification, split.val.noisy_labels, hp.rho);
    DetectionReport rep_cn = detect_with_cleannet(scorer, split.test, report.delta, &test_relevance);
    report.methods.push_back(detail::group_errors("cleannet", rep_cn.errors, held));

    // naive
    DetectionReport rep_naive = baseline_naive(split.test, &test_relevance);
    report.methods.push_back(detail::group_errors("naive", rep_naive.errors, held));

    // average baseline, with its own threshold from the validation split
    const auto val_avg_scores = average_baseline_scores(split.val, refs);
    const double delta_avg = select_threshold(val_avg_scores, split.val.verification, split.val.noisy_labels, hp.rho);
    DetectionReport rep_avg = baseline_average(split.test, refs, delta_avg, &test_relevance);
    report.methods.push_back(detail::group_errors("average", rep_avg.errors, held));

    // classification filtering, K selected on the validation split
    ClassifierModel clf = ClassifierModel::init(data.ds.dim(), static_cast<std::size_t>(data.ds.class_count),
                                                spec.seed ^ 0x5a5a5a5aULL);
    std::vector<double> ones(split.train.size(), 1.0);
    ClassifierTrainOpts copts = cfg.classifier;
    copts.seed = spec.seed;
    train_classifier(clf, split.train, ones, copts);
    report.filtering_k = select_filtering_k(clf, split.val);
    DetectionReport rep_filt = baseline_classification_filtering(clf, split.test, report.filtering_k, &test_relevance);
    report.methods.push_back(detail::group_errors("classification_filtering", rep_filt.errors, held));

    return report;
}

struct ClassificationExperimentReport {
    SyntheticSpec spec;
    double delta = 0.0;
    double acc_unweighted = 0.0;
    double acc_hard = 0.0;
    double acc_soft = 0.0;
};

/// Trains unweighted / hard-weighted / soft-weighted classifiers on the same
/// noisy training split (same seeds) and evaluates top-1 accuracy on the
/// clean test split (ground-truth labels).
inline ClassificationExperimentReport run_classification_experiment(const SyntheticSpec& spec,
                                                                    const BenchConfig& cfg) {
    SyntheticData data = generate_dataset(spec);
    Hyperparams hp = cfg.hp;
    hp.seed = spec.seed;

    const SplitResult split = split_dataset(data.ds, cfg.f_train, cfg.f_val, cfg.f_test, spec.seed ^ 0x9e3779b9ULL);
    std::vector<int> test_true;
    test_true.reserve(split.test_idx.size());
    for (std::size_t i : split.test_idx) test_true.push_back(data.true_labels[i]);

    const ReferenceSets refs = build_reference_sets(split.train, hp.ref_size, spec.seed);
    CleanNetModel model = CleanNetModel::init(data.ds.dim(), hp.dims, spec.seed);
    train_cleannet(model, split.train, refs, hp);
    const FrozenScorer scorer = FrozenScorer::build(model, refs);

    const auto val_scores = scorer.score_all(split.val);
    const double delta = select_threshold(val_scores, split.val.verification, split.val.noisy_labels, hp.rho);

    ClassificationExperimentReport report;
    report.spec = spec;
    report.delta = delta;

    ClassifierTrainOpts copts = cfg.classifier;
    copts.seed = spec.seed;
    for (WeightMode mode : {WeightMode::kNone, WeightMode::kHard, WeightMode::kSoft}) {
        ClassifierModel clf = ClassifierModel::init(data.ds.dim(), static_cast<std::size_t>(data.ds.class_count),
                                                    spec.seed ^ 0x5a5a5a5aULL);
        const auto weights = compute_weights(scorer, split.train, mode, delta);
        train_classifier(clf, split.train, weights, copts);
        const double acc = clf.accuracy(split.test.features, test_true);
        if (mode == WeightMode::kNone) report.acc_unweighted = acc;
        if (mode == WeightMode::kHard) report.acc_hard = acc;
        if (mode == WeightMode::kSoft) report.acc_soft = acc;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report rendering (TSV + human-readable summary)
// ---------------------------------------------------------------------------

inline std::string format_detection_experiment(const DetectionExperimentReport& r) {
    std::ostringstream os;
    os << "# spec\t" << r.spec.echo() << '\n';
    os << "# delta\t" << r.delta << "\tfiltering_k\t" << r.filtering_k << "\trealized_noise\t"
       << r.noise_rate_realized << '\n';
    os << "method\toverall_error\tverified_classes_error\theld_out_classes_error\n";
    for (const auto& m : r.methods) {
        os << m.method << '\t' << m.overall << '\t';
        if (m.verified >= 0.0) os << m.verified;
        else os << "-";
        os << '\t';
        if (m.held_out >= 0.0) os << m.held_out;
        else os << "-";
        os << '\n';
    }
    return os.str();
}

inline std::string format_classification_experiment(const ClassificationExperimentReport& r) {
    std::ostringstream os;
    os << "# spec\t" << r.spec.echo() << '\n';
    os << "# delta\t" << r.delta << '\n';
    os << "weighting\tclean_test_accuracy\n";
    os << "none\t" << r.acc_unweighted << '\n';
    os << "hard\t" << r.acc_hard << '\n';
    os << "soft\t" << r.acc_soft << '\n';
    return os.str();
}

}  // namespace cleannet
