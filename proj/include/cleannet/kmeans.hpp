#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cleannet/dataset.hpp"
#include "cleannet/error.hpp"
#include "cleannet/rng.hpp"
#include "cleannet/tensor.hpp"

namespace cleannet {

struct KMeansResult {
    Tensor centroids;  // [K x d]
    std::vector<std::size_t> assignments;
    double inertia = 0.0;                  // total within-cluster squared distance
    std::vector<double> inertia_history;   // one entry per Lloyd iteration
    std::size_t iterations = 0;
};

namespace detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

/// k-means++ seeding: first centroid uniform, then proportional to squared
/// distance from the nearest already-chosen centroid.
inline std::vector<std::size_t> kmeanspp_seeds(const Tensor& pts, std::size_t k, Rng& rng) {
    const std::size_t m = pts.rows();
    std::vector<std::size_t> seeds;
    seeds.reserve(k);
    seeds.push_back(rng.below(m));
    std::vector<double> d2(m);
    for (std::size_t i = 0; i < m; ++i) d2[i] = sq_dist(pts.row(i), pts.row(seeds[0]));
    while (seeds.size() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t next;
        if (total <= 0.0) {
            next = rng.below(m);  // all remaining points coincide with a centroid
        } else {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            next = m - 1;
            for (std::size_t i = 0; i < m; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    next = i;
                    break;
                }
            }
        }
        seeds.push_back(next);
        for (std::size_t i = 0; i < m; ++i) d2[i] = std::min(d2[i], sq_dist(pts.row(i), pts.row(next)));
    }
    return seeds;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Runs until the assignment
/// vector reaches a fixpoint or max_iter iterations. Empty clusters are
/// re-seeded to the point currently farthest from its centroid, so no
/// centroid can end up zero-norm when the inputs have no zero rows.
inline KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100) {
    if (points.rank() != 2 || points.rows() == 0) throw DimensionError("kmeans: nonempty [m x d] input required");
    const std::size_t m = points.rows(), d = points.cols();
    if (k == 0) throw ValidationError("kmeans: k must be >= 1");
    if (k > m) k = m;

    Rng rng(seed);
    KMeansResult res;
    res.centroids = Tensor::zeros({k, d});
    const auto seeds = detail::kmeanspp_seeds(points, k, rng);
    for (std::size_t c = 0; c < k; ++c) {
        const auto src = points.row(seeds[c]);
        std::copy(src.begin(), src.end(), res.centroids.data.begin() + c * d);
    }
    res.assignments.assign(m, 0);

    std::vector<std::size_t> counts(k, 0);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // assignment step
        bool changed = (iter == 0);
        double inertia = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t bi = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double dist = detail::sq_dist(points.row(i), res.centroids.row(c));
                if (dist < best) {
                    best = dist;
                    bi = c;
                }
            }
            if (res.assignments[i] != bi) changed = true;
            res.assignments[i] = bi;
            inertia += best;
        }
        res.inertia_history.push_back(inertia);
        res.inertia = inertia;
        res.iterations = iter + 1;
        if (!changed && iter > 0) break;

        // update step
        std::fill(res.centroids.data.begin(), res.centroids.data.end(), 0.0);
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t i = 0; i < m; ++i) {
            const auto p = points.row(i);
            const std::size_t c = res.assignments[i];
            ++counts[c];
            for (std::size_t j = 0; j < d; ++j) res.centroids.at(c, j) += p[j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < d; ++j) res.centroids.at(c, j) /= static_cast<double>(counts[c]);
        }
        // re-seed empty clusters with the point farthest from its centroid
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            double worst = -1.0;
            std::size_t wi = 0;
            for (std::size_t i = 0; i < m; ++i) {
                if (counts[res.assignments[i]] <= 1) continue;
                const double dist = detail::sq_dist(points.row(i), res.centroids.row(res.assignments[i]));
                if (dist > worst) {
                    worst = dist;
                    wi = i;
                }
            }
            const auto src = points.row(wi);
            std::copy(src.begin(), src.end(), res.centroids.data.begin() + c * d);
            --counts[res.assignments[wi]];
            res.assignments[wi] = c;
            counts[c] = 1;
        }
    }

    // final inertia against the returned centroids
    double inertia = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const double dist = detail::sq_dist(points.row(i), res.centroids.row(c));
            if (dist < best) {
                best = dist;
                bi = c;
            }
        }
        res.assignments[i] = bi;
        inertia += best;
    }
    res.inertia = inertia;
    res.inertia_history.push_back(inertia);
    return res;
}

/// Reference set built from a class's feature vectors via K-means centroids.
/// When the class has at most K vectors, the vectors themselves are returned
/// (K lowers to m; no padding by duplication).
inline ReferenceSet kmeans_select(const Tensor& class_features, int class_id, std::size_t k, std::uint64_t seed,
                                  std::size_t max_iter = 100) {
    if (class_features.rank() != 2 || class_features.rows() == 0)
        throw DimensionError("kmeans_select: nonempty [m x d] input required");
    if (k == 0) throw ValidationError("kmeans_select: K must be >= 1");
    if (class_features.rows() <= k) return ReferenceSet{class_id, class_features};
    KMeansResult km = kmeans(class_features, k, seed, max_iter);
    return ReferenceSet{class_id, std::move(km.centroids)};
}

/// Reference set of min(K, m) rows sampled without replacement. When K >= m
/// all rows are kept in their original order.
inline ReferenceSet random_select(const Tensor& class_features, int class_id, std::size_t k, std::uint64_t seed) {
    if (class_features.rank() != 2 || class_features.rows() == 0)
        throw DimensionError("random_select: nonempty [m x d] input required");
    const std::size_t m = class_features.rows(), d = class_features.cols();
    if (k >= m) return ReferenceSet{class_id, class_features};
    Rng rng(seed);
    const auto idx = rng.sample_without_replacement(m, k);
    Tensor out = Tensor::zeros({k, d});
    for (std::size_t r = 0; r < k; ++r) {
        const auto src = class_features.row(idx[r]);
        std::copy(src.begin(), src.end(), out.data.begin() + r * d);
    }
    return ReferenceSet{class_id, std::move(out)};
}

/// One reference set per class present in the dataset, built on that class's
/// (noisy) members. Per-class seeds derive from the run seed and class id.
inline ReferenceSets build_reference_sets(const NoisyDataset& ds, std::size_t k, std::uint64_t seed,
                                          bool use_kmeans = true) {
    ReferenceSets refs;
    for (int c = 1; c <= ds.class_count; ++c) {
        const auto idx = ds.indices_of_class(c);
        if (idx.empty()) continue;
        Tensor rows = Tensor::zeros({idx.size(), ds.dim()});
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const auto src = ds.features.row(idx[r]);
            std::copy(src.begin(), src.end(), rows.data.begin() + r * ds.dim());
        }
        const std::uint64_t class_seed = seed * 1000003ULL + static_cast<std::uint64_t>(c);
        refs[c] = use_kmeans ? kmeans_select(rows, c, k, class_seed) : random_select(rows, c, k, class_seed);
    }
    return refs;
}

}  // namespace cleannet
