#pragma once

#include <cstdint>
#include <iostream>
#include <map>
#include <vector>

#include "cleannet/error.hpp"
#include "cleannet/rng.hpp"
#include "cleannet/tensor.hpp"

namespace cleannet {

/// Verification label values: relevant, mislabeled, unverified.
constexpr int kVerifiedRelevant = 1;
constexpr int kVerifiedMislabeled = 0;
constexpr int kUnverified = -1;

/// Feature matrix plus noisy class labels and human verification labels.
/// Class ids are 1-based in [1, class_count]; verification labels are
/// 1 (label correct), 0 (mislabeled) or -1 (not verified).
struct NoisyDataset {
    Tensor features;                   // [n x d]
    std::vector<int> noisy_labels;     // y_i in [1, L]
    std::vector<int> verification;     // l_i in {-1, 0, 1}
    int class_count = 0;

    std::size_t size() const { return features.rank() == 2 ? features.rows() : 0; }
    std::size_t dim() const { return features.rank() == 2 ? features.cols() : 0; }

    void validate() const {
        const std::size_t n = size();
        if (noisy_labels.size() != n || verification.size() != n)
            throw ValidationError("NoisyDataset: label sequences do not match feature rows");
        if (class_count < 1) throw ValidationError("NoisyDataset: class_count must be >= 1");
        for (std::size_t i = 0; i < n; ++i) {
            if (noisy_labels[i] < 1 || noisy_labels[i] > class_count)
                throw ValidationError("NoisyDataset: class id out of range at sample " + std::to_string(i));
            const int l = verification[i];
            if (l != -1 && l != 0 && l != 1)
                throw ValidationError("NoisyDataset: bad verification label at sample " + std::to_string(i));
        }
    }

    /// Indices of samples with a given noisy class.
    std::vector<std::size_t> indices_of_class(int class_id) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < size(); ++i)
            if (noisy_labels[i] == class_id) out.push_back(i);
        return out;
    }

    NoisyDataset subset(const std::vector<std::size_t>& idx) const {
        NoisyDataset out;
        out.class_count = class_count;
        out.features = Tensor::zeros({idx.size(), dim()});
        out.noisy_labels.reserve(idx.size());
        out.verification.reserve(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const auto src = features.row(idx[r]);
            std::copy(src.begin(), src.end(), out.features.data.begin() + r * dim());
            out.noisy_labels.push_back(noisy_labels[idx[r]]);
            out.verification.push_back(verification[idx[r]]);
        }
        return out;
    }
};

/// K representative feature vectors for one class (rows of `vectors`).
struct ReferenceSet {
    int class_id = 0;
    Tensor vectors;  // [K x d]

    std::size_t k() const { return vectors.rows(); }

    void validate() const {
        if (vectors.rank() != 2 || vectors.rows() == 0)
            throw ValidationError("ReferenceSet: at least one row required");
        for (std::size_t i = 0; i < vectors.rows(); ++i)
            if (norm(vectors.row(i)) == 0.0)
                throw ValidationError("ReferenceSet: zero-norm row " + std::to_string(i));
    }
};

using ReferenceSets = std::map<int, ReferenceSet>;

/// Layer widths of the CleanNet model. Zeros mean "derive from d":
/// h = d, e = ceil(d/2), a1 = d.
struct ModelDims {
    std::size_t hidden = 0;  // reference-encoder hidden width h
    std::size_t embed = 0;   // embedding width e (class embedding == bottleneck)
    std::size_t ae_hidden = 0;

    ModelDims resolved(std::size_t d) const {
        ModelDims r = *this;
        if (r.hidden == 0) r.hidden = d;
        if (r.embed == 0) r.embed = (d + 1) / 2;
        if (r.ae_hidden == 0) r.ae_hidden = d;
        return r;
    }
};

/// Training hyperparameters. omega < 0 selects the automatic setting
/// (#verified-relevant / #verified-mislabeled on the training set).
struct Hyperparams {
    double rho = 0.1;      // cosine margin
    double omega = -1.0;   // negative-sample weight; < 0 -> auto
    double beta = 0.1;     // reconstruction weight
    double gamma = 0.1;    // unsupervised weight
    std::size_t ref_size = 50;  // K
    ModelDims dims;
    double lr = 0.05;
    double momentum = 0.9;
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double unverified_fraction = 0.5;
    std::uint64_t seed = 1;

    bool omega_auto() const { return omega < 0.0; }

    void validate() const {
        if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("Hyperparams: rho must be in (0,1)");
        if (!omega_auto() && !(omega > 0.0)) throw ValidationError("Hyperparams: omega must be positive");
        if (beta < 0.0 || gamma < 0.0) throw ValidationError("Hyperparams: beta and gamma must be >= 0");
        if (!(unverified_fraction >= 0.0 && unverified_fraction <= 1.0))
            throw ValidationError("Hyperparams: unverified_fraction must be in [0,1]");
        if (ref_size == 0) throw ValidationError("Hyperparams: ref_size must be >= 1");
        if (batch_size == 0) throw ValidationError("Hyperparams: batch_size must be >= 1");
    }
};

struct SplitResult {
    NoisyDataset train, val, test;
    std::vector<std::size_t> train_idx, val_idx, test_idx;
};

/// Deterministic shuffled partition into train/val/test. Fractions must be
/// nonnegative and sum to 1; boundaries are rounded so the partition is
/// exact (no overlap, full cover).
inline SplitResult split_dataset(const NoisyDataset& ds, double f_train, double f_val, double f_test,
                                 std::uint64_t seed) {
    if (f_train < 0.0 || f_val < 0.0 || f_test < 0.0)
        throw ValidationError("split_dataset: fractions must be nonnegative");
    if (std::abs(f_train + f_val + f_test - 1.0) > 1e-9)
        throw ValidationError("split_dataset: fractions must sum to 1");
    const std::size_t n = ds.size();
    Rng rng(seed);
    std::vector<std::size_t> order = rng.permutation(n);
    const auto b1 = static_cast<std::size_t>(std::llround(f_train * static_cast<double>(n)));
    const auto b2 = static_cast<std::size_t>(std::llround((f_train + f_val) * static_cast<double>(n)));

    SplitResult out;
    out.train_idx.assign(order.begin(), order.begin() + b1);
    out.val_idx.assign(order.begin() + b1, order.begin() + b2);
    out.test_idx.assign(order.begin() + b2, order.end());
    if ((f_train > 0.0 && out.train_idx.empty()) || (f_val > 0.0 && out.val_idx.empty()) ||
        (f_test > 0.0 && out.test_idx.empty()))
        std::cerr << "warning: split_dataset produced an empty split for a nonzero fraction (n=" << n << ")\n";
    out.train = ds.subset(out.train_idx);
    out.val = ds.subset(out.val_idx);
    out.test = ds.subset(out.test_idx);
    return out;
}

/// Resolves the automatic negative-sample weight on a training set:
/// ratio of verified-relevant to verified-mislabeled counts. Falls back to
/// 1 when either count is zero.
inline double resolve_omega(const Hyperparams& hp, const NoisyDataset& train) {
    if (!hp.omega_auto()) return hp.omega;
    std::size_t rel = 0, mis = 0;
    for (int l : train.verification) {
        if (l == kVerifiedRelevant) ++rel;
        if (l == kVerifiedMislabeled) ++mis;
    }
    if (rel == 0 || mis == 0) return 1.0;
    return static_cast<double>(rel) / static_cast<double>(mis);
}

}  // namespace cleannet
