#pragma once

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cleannet/dataset.hpp"
#include "cleannet/error.hpp"
#include "cleannet/io.hpp"
#include "cleannet/model.hpp"
#include "cleannet/tensor.hpp"

namespace cleannet {

/// Thresholded relevance decision: 1 iff the score reaches delta.
inline int detect(double score, double delta) { return score >= delta ? 1 : 0; }

/// Frozen CleanNet ready for scoring: class embeddings are computed once
/// from the frozen parameters and cached; queries are embedded on demand.
/// Safe to share across threads once built.
class FrozenScorer {
public:
    static FrozenScorer build(const CleanNetModel& model, const ReferenceSets& refs) {
        FrozenScorer s;
        s.model_ = model;
        for (const auto& [cid, rs] : refs) s.embeddings_[cid] = s.model_.reference_embedding(rs.vectors);
        return s;
    }

    const Tensor& class_embedding(int class_id) const {
        auto it = embeddings_.find(class_id);
        if (it == embeddings_.end()) throw LookupError("no reference set for class " + std::to_string(class_id));
        return it->second;
    }

    bool has_class(int class_id) const { return embeddings_.count(class_id) != 0; }

    /// cos(f_q(v), f_s(V_c)) in [-1, 1].
    double score(const Tensor& query, int class_id) const {
        const Tensor& cls = class_embedding(class_id);
        const Tensor phi = model_.encode_query(query).first;
        return cosine_similarity(phi.data, cls.data);
    }

    std::vector<double> score_all(const NoisyDataset& ds) const {
        std::vector<double> out(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) out[i] = score(ds.features.row_copy(i), ds.noisy_labels[i]);
        return out;
    }

    const CleanNetModel& model() const { return model_; }

private:
    CleanNetModel model_;
    std::map<int, Tensor> embeddings_;
};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct ErrorRates {
    std::map<int, double> per_class;            // class id -> error rate
    std::map<int, std::size_t> per_class_count; // verified samples evaluated
    std::vector<int> excluded_classes;          // no verified samples
    double average = 0.0;                       // unweighted mean over classes
    std::size_t classes_evaluated = 0;
};

/// Binary detection error per class over verified samples (l in {0,1}),
/// averaged without weighting by class size. Classes with no verified
/// samples are excluded and listed.
inline ErrorRates average_error_rate(const std::vector<int>& decisions, const std::vector<int>& labels,
                                     const std::vector<int>& class_ids) {
    if (decisions.size() != labels.size() || labels.size() != class_ids.size())
        throw DimensionError("average_error_rate: sequence lengths differ");
    std::map<int, std::pair<std::size_t, std::size_t>> tally;  // class -> (wrong, total)
    std::map<int, bool> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        seen[class_ids[i]] = true;
        if (labels[i] != 0 && labels[i] != 1) continue;  // unverified samples are not counted
        auto& [wrong, total] = tally[class_ids[i]];
        ++total;
        if (decisions[i] != labels[i]) ++wrong;
    }
    ErrorRates out;
    double sum = 0.0;
    for (const auto& [cid, wt] : tally) {
        const double err = static_cast<double>(wt.first) / static_cast<double>(wt.second);
        out.per_class[cid] = err;
        out.per_class_count[cid] = wt.second;
        sum += err;
    }
    for (const auto& [cid, _] : seen)
        if (!tally.count(cid)) out.excluded_classes.push_back(cid);
    out.classes_evaluated = out.per_class.size();
    out.average = out.classes_evaluated ? sum / static_cast<double>(out.classes_evaluated) : 0.0;
    return out;
}

/// Grid search for the detection threshold over delta in {-1.00, -0.99, ...,
/// 1.00}, minimizing the class-averaged error rate on a validation set; ties
/// break toward the smallest delta. If the validation labels carry only one
/// value the search is meaningless: a warning is printed and `fallback`
/// (conventionally the margin rho) is returned.
inline double select_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                               const std::vector<int>& class_ids, double fallback = 0.1) {
    bool has_pos = false, has_neg = false;
    for (int l : labels) {
        if (l == 1) has_pos = true;
        if (l == 0) has_neg = true;
    }
    if (!has_pos || !has_neg) {
        std::cerr << "warning: select_threshold: validation set lacks both label values; using delta=" << fallback
                  << "\n";
        return fallback;
    }
    double best_delta = -1.0, best_err = std::numeric_limits<double>::infinity();
    std::vector<int> decisions(scores.size());
    for (int step = -100; step <= 100; ++step) {
        const double delta = static_cast<double>(step) / 100.0;
        for (std::size_t i = 0; i < scores.size(); ++i) decisions[i] = detect(scores[i], delta);
        const double err = average_error_rate(decisions, labels, class_ids).average;
        if (err < best_err) {
            best_err = err;
            best_delta = delta;
        }
    }
    return best_delta;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct DetectionReport {
    std::string method;
    double delta = 0.0;
    std::vector<std::size_t> sample_index;
    std::vector<int> class_ids;
    std::vector<double> scores;
    std::vector<int> decisions;
    std::vector<int> labels;  // verification labels used for metrics (may be -1)
    ErrorRates errors;

    void recompute(double new_delta) {
        delta = new_delta;
        for (std::size_t i = 0; i < scores.size(); ++i) decisions[i] = detect(scores[i], new_delta);
        errors = average_error_rate(decisions, labels, class_ids);
    }
};

inline DetectionReport make_report(const std::string& method, const std::vector<double>& scores,
                                   const std::vector<int>& labels, const std::vector<int>& class_ids,
                                   double delta) {
    DetectionReport r;
    r.method = method;
    r.scores = scores;
    r.labels = labels;
    r.class_ids = class_ids;
    r.sample_index.resize(scores.size());
    std::iota(r.sample_index.begin(), r.sample_index.end(), std::size_t{0});
    r.decisions.resize(scores.size());
    r.recompute(delta);
    return r;
}

/// CleanNet detection over a dataset with a frozen scorer.
inline DetectionReport detect_with_cleannet(const FrozenScorer& scorer, const NoisyDataset& ds, double delta,
                                            const std::vector<int>* eval_labels = nullptr) {
    const auto scores = scorer.score_all(ds);
    return make_report("cleannet", scores, eval_labels ? *eval_labels : ds.verification, ds.noisy_labels, delta);
}

// ---------------------------------------------------------------------------
// No-supervision baselines
// ---------------------------------------------------------------------------

/// Treats every class label as correct.
inline DetectionReport baseline_naive(const NoisyDataset& ds, const std::vector<int>* eval_labels = nullptr) {
    std::vector<double> scores(ds.size(), 1.0);
    return make_report("naive", scores, eval_labels ? *eval_labels : ds.verification, ds.noisy_labels, -1.0);
}

/// Scores a query by cosine against the plain mean of its class's reference
/// vectors (no learned encoder).
inline double average_baseline_score(const Tensor& query, const ReferenceSet& rs) {
    const std::size_t k = rs.vectors.rows(), d = rs.vectors.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto row = rs.vectors.row(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(k);
    if (norm(mean) == 0.0) throw NumericError("average baseline: zero-norm reference mean");
    return cosine_similarity(query.data, mean);
}

inline std::vector<double> average_baseline_scores(const NoisyDataset& ds, const ReferenceSets& refs) {
    std::vector<double> out(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto it = refs.find(ds.noisy_labels[i]);
        if (it == refs.end()) throw LookupError("average baseline: no reference set for class " +
                                                std::to_string(ds.noisy_labels[i]));
        out[i] = average_baseline_score(ds.features.row_copy(i), it->second);
    }
    return out;
}

inline DetectionReport baseline_average(const NoisyDataset& ds, const ReferenceSets& refs, double delta,
                                        const std::vector<int>* eval_labels = nullptr) {
    return make_report("average", average_baseline_scores(ds, refs),
                       eval_labels ? *eval_labels : ds.verification, ds.noisy_labels, delta);
}

// ---------------------------------------------------------------------------
// Serialization: TSV rows plus a '#'-prefixed summary block.
// ---------------------------------------------------------------------------

inline std::string format_detection_report(const DetectionReport& r) {
    std::ostringstream out;
    out << "# method\t" << r.method << "\n";
    out << "sample_index\tclass\tscore\tdecision\tverification_label\n";
    char buf[40];
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", r.scores[i]);
        out << r.sample_index[i] << '\t' << r.class_ids[i] << '\t' << buf << '\t' << r.decisions[i] << '\t'
            << r.labels[i] << '\n';
    }
    std::snprintf(buf, sizeof buf, "%.17g", r.delta);
    out << "# delta\t" << buf << "\n";
    for (const auto& [cid, err] : r.errors.per_class) {
        std::snprintf(buf, sizeof buf, "%.17g", err);
        out << "# class_error\t" << cid << '\t' << buf << '\t' << r.errors.per_class_count.at(cid) << '\n';
    }
    for (int cid : r.errors.excluded_classes) out << "# class_excluded\t" << cid << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", r.errors.average);
    out << "# average_error\t" << buf << '\n';
    return out.str();
}

inline void save_detection_report(const std::string& path, const DetectionReport& r) {
    detail::write_file(path, format_detection_report(r));
}

/// Parses the row section of a report file (summary lines are re-derived).
inline DetectionReport load_detection_report(const std::string& path) {
    const std::string buf = detail::read_file(path);
    std::istringstream in(buf);
    std::string line;
    DetectionReport r;
    double delta = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# method", 0) == 0) {
            std::istringstream ls(line);
            std::string hash, key;
            ls >> hash >> key >> r.method;
            continue;
        }
        if (line.rfind("# delta", 0) == 0) {
            std::istringstream ls(line);
            std::string hash, key, val;
            ls >> hash >> key >> val;
            delta = detail::parse_double(val, "report delta");
            continue;
        }
        if (line[0] == '#' || line.rfind("sample_index", 0) == 0) continue;
        std::istringstream ls(line);
        std::size_t idx;
        int cid, dec, lab;
        std::string score;
        if (!(ls >> idx >> cid >> score >> dec >> lab))
            throw FormatError("detection report " + path + ": bad row '" + line + "'");
        r.sample_index.push_back(idx);
        r.class_ids.push_back(cid);
        r.scores.push_back(detail::parse_double(score, "report score"));
        r.decisions.push_back(dec);
        r.labels.push_back(lab);
    }
    r.recompute(delta);
    return r;
}

}  // namespace cleannet
