#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "cleannet/autodiff.hpp"
#include "cleannet/dataset.hpp"
#include "cleannet/error.hpp"
#include "cleannet/kmeans.hpp"
#include "cleannet/rng.hpp"
#include "cleannet/tensor.hpp"

namespace cleannet {

/// The CleanNet network: an attention reference-set encoder producing one
/// class embedding per reference set, and a query autoencoder whose
/// bottleneck is the query embedding. All parameters are shared across
/// classes; that sharing is what lets verification knowledge transfer to
/// classes that were never verified.
///
/// Reference side        v_i --mlp--> h_i --attention--> h --out--> phi_s
/// Query side            v --ae--> phi_q --ae--> r(v)
struct CleanNetModel {
    std::size_t input_dim = 0;
    ModelDims dims;  // resolved widths
    ParamStore params;

    static CleanNetModel init(std::size_t input_dim, const ModelDims& dims, std::uint64_t seed) {
        CleanNetModel m;
        m.input_dim = input_dim;
        m.dims = dims.resolved(input_dim);
        const std::size_t d = input_dim, h = m.dims.hidden, e = m.dims.embed, a = m.dims.ae_hidden;
        Rng rng(seed);
        auto dense = [&](const std::string& name, std::size_t in, std::size_t out) {
            m.params.add(name + ".w", glorot_uniform(in, out, {in, out}, rng));
            m.params.add(name + ".b", Tensor::zeros({out}));
        };
        dense("ref_mlp.l1", d, h);
        dense("ref_mlp.l2", h, h);
        dense("attn", h, h);
        m.params.add("attn.u", glorot_uniform(h, 1, {h}, rng));
        dense("ref_out", h, e);
        dense("ae.l1", d, a);
        dense("ae.l2", a, e);
        dense("ae.l3", e, a);
        dense("ae.l4", a, d);
        return m;
    }

    // ---- graph builders -----------------------------------------------

    NodeId dense_layer(Graph& g, NodeId x, const std::string& name, bool with_tanh = true) {
        NodeId y = g.affine(x, g.param(params, name + ".w"), g.param(params, name + ".b"));
        return with_tanh ? g.tanh_act(y) : y;
    }

    /// Projects reference rows [K x d] to hidden representations [K x h].
    NodeId build_hidden_rows(Graph& g, NodeId refs) {
        NodeId h1 = dense_layer(g, refs, "ref_mlp.l1");
        return dense_layer(g, h1, "ref_mlp.l2");
    }

    /// Attention weights over hidden rows [K x h]: softmax of
    /// tanh(W h_i + b)^T u. Returns a simplex point of length K.
    NodeId build_attention(Graph& g, NodeId hidden_rows) {
        NodeId proj = dense_layer(g, hidden_rows, "attn");
        NodeId logits = g.matvec(proj, g.param(params, "attn.u"));
        return g.softmax(logits);
    }

    /// Class embedding phi_s [e] of a reference set node [K x d]. Invariant
    /// under row permutation and row duplication of the reference set.
    NodeId build_reference_embedding(Graph& g, NodeId refs) {
        NodeId hidden = build_hidden_rows(g, refs);
        NodeId alpha = build_attention(g, hidden);
        NodeId pooled = g.tmatvec(hidden, alpha);  // sum_i alpha_i h_i
        NodeId row = g.reshape(pooled, {std::size_t{1}, g.value(pooled).numel()});
        NodeId out = dense_layer(g, row, "ref_out", /*with_tanh=*/false);
        return g.reshape(out, {g.value(out).numel()});
    }

    /// Query embedding phi_q [e] and reconstruction r [d] for one query row
    /// node [1 x d]. The bottleneck activation is the query embedding; the
    /// final layer is linear so arbitrary feature values can be reconstructed.
    std::pair<NodeId, NodeId> build_query(Graph& g, NodeId query_row) {
        NodeId h1 = dense_layer(g, query_row, "ae.l1");
        NodeId mid = dense_layer(g, h1, "ae.l2");
        NodeId h3 = dense_layer(g, mid, "ae.l3");
        NodeId rec = dense_layer(g, h3, "ae.l4", /*with_tanh=*/false);
        NodeId phi = g.reshape(mid, {g.value(mid).numel()});
        NodeId r = g.reshape(rec, {g.value(rec).numel()});
        return {phi, r};
    }

    // ---- frozen evaluation helpers -------------------------------------
    // These build throwaway forward-only graphs; backward is never called,
    // so the parameters are read but never written and the methods are
    // const. The cast below reflects that the graph API registers
    // parameters mutably for the training path.

    /// Attention weights for a hidden-row matrix, as plain values.
    Tensor attention_weights(const Tensor& hidden_rows) const {
        auto& self = const_cast<CleanNetModel&>(*this);
        Graph g;
        return g.value(self.build_attention(g, g.constant(hidden_rows)));
    }

    /// Class embedding for a reference set, as plain values.
    Tensor reference_embedding(const Tensor& ref_vectors) const {
        auto& self = const_cast<CleanNetModel&>(*this);
        Graph g;
        Tensor out = g.value(self.build_reference_embedding(g, g.constant(ref_vectors)));
        if (norm(out.data) == 0.0) throw NumericError("reference embedding is zero-norm; cosine undefined");
        return out;
    }

    /// Query embedding and reconstruction for one feature vector.
    std::pair<Tensor, Tensor> encode_query(const Tensor& query) const {
        if (query.numel() != input_dim) throw DimensionError("encode_query: feature width mismatch");
        auto& self = const_cast<CleanNetModel&>(*this);
        Graph g;
        NodeId row = g.constant(Tensor({std::size_t{1}, input_dim}, query.data));
        auto [phi, rec] = self.build_query(g, row);
        return {g.value(phi), g.value(rec)};
    }
};

// ---------------------------------------------------------------------------
// Loss terms (all built on a cosine node so gradients flow into both encoders)
// ---------------------------------------------------------------------------

/// Supervised margin cosine loss on a cosine node:
///   l = 1  ->  1 - cos
///   l = 0  ->  omega * max(0, cos - rho)
///   l = -1 ->  0
inline NodeId build_supervised_cos_loss(Graph& g, NodeId cos_node, int l, double omega, double rho) {
    switch (l) {
        case kVerifiedRelevant:
            return g.shift(g.scale(cos_node, -1.0), 1.0);
        case kVerifiedMislabeled:
            return g.scale(g.hinge(cos_node, rho), omega);
        case kUnverified:
            return g.constant(Tensor::scalar(0.0));
        default:
            throw ValidationError("supervised cosine loss: verification label must be -1, 0 or 1");
    }
}

/// Self-reinforcing unsupervised loss: queries already at or above the
/// margin are pulled further toward the class embedding (1 - cos); queries
/// below it are ignored. The pseudo-verification gate is evaluated on the
/// current cosine value and does not itself carry gradient.
inline NodeId build_unsup_cos_loss(Graph& g, NodeId cos_node, double rho) {
    const bool pseudo_relevant = g.value(cos_node).item() >= rho;
    if (!pseudo_relevant) return g.constant(Tensor::scalar(0.0));
    return g.shift(g.scale(cos_node, -1.0), 1.0);
}

/// A mini-batch of queries: one feature row, noisy class id and verification
/// label per sample. Every class id present must have a reference set.
struct QueryBatch {
    Tensor features;  // [B x d]
    std::vector<int> class_ids;
    std::vector<int> verification;

    std::size_t size() const { return features.rank() == 2 ? features.rows() : 0; }
};

struct LossBreakdown {
    double total = 0.0;
    double cos_term = 0.0;    // mean supervised cosine loss
    double recon_term = 0.0;  // mean reconstruction error (unweighted by beta)
    double unsup_term = 0.0;  // mean unsupervised cosine loss (unweighted by gamma)
};

/// Total training objective over one batch, as a graph node:
///   mean_i [ L_cos_i + beta * L_r_i + t_i * gamma * L_unsup_i ]
/// with t_i = 1 iff sample i is unverified. The reconstruction term applies
/// to every query regardless of its verification label. Class embeddings are
/// rebuilt from the current parameters for every class present in the batch,
/// so gradients reach the reference encoder.
inline NodeId build_total_loss(Graph& g, CleanNetModel& model, const QueryBatch& batch, const ReferenceSets& refs,
                               double omega, const Hyperparams& hp, LossBreakdown* breakdown = nullptr) {
    const std::size_t b = batch.size();
    if (b == 0) throw ContractError("build_total_loss: empty batch");
    if (batch.class_ids.size() != b || batch.verification.size() != b)
        throw DimensionError("build_total_loss: batch label sequences do not match rows");

    std::map<int, NodeId> class_embedding;
    for (int c : batch.class_ids) {
        if (class_embedding.count(c)) continue;
        auto it = refs.find(c);
        if (it == refs.end()) throw LookupError("build_total_loss: no reference set for class " + std::to_string(c));
        class_embedding[c] = model.build_reference_embedding(g, g.constant(it->second.vectors));
    }

    std::vector<NodeId> terms;
    terms.reserve(b);
    double cos_sum = 0.0, recon_sum = 0.0, unsup_sum = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        NodeId row = g.constant(Tensor({std::size_t{1}, batch.features.cols()},
                                       {batch.features.row(i).begin(), batch.features.row(i).end()}));
        auto [phi_q, rec] = model.build_query(g, row);
        NodeId vq = g.constant(batch.features.row_copy(i));
        NodeId recon = g.squared_distance(vq, rec);
        NodeId cos_node = g.cosine(phi_q, class_embedding.at(batch.class_ids[i]));

        const int l = batch.verification[i];
        NodeId sup = build_supervised_cos_loss(g, cos_node, l, omega, hp.rho);
        NodeId term = g.add(sup, g.scale(recon, hp.beta));
        cos_sum += g.value(sup).item();
        recon_sum += g.value(recon).item();
        if (l == kUnverified && hp.gamma != 0.0) {
            NodeId unsup = build_unsup_cos_loss(g, cos_node, hp.rho);
            unsup_sum += g.value(unsup).item();
            term = g.add(term, g.scale(unsup, hp.gamma));
        }
        terms.push_back(term);
    }
    NodeId total = g.scale(g.add_n(terms), 1.0 / static_cast<double>(b));
    if (breakdown) {
        breakdown->total = g.value(total).item();
        breakdown->cos_term = cos_sum / static_cast<double>(b);
        breakdown->recon_term = recon_sum / static_cast<double>(b);
        breakdown->unsup_term = unsup_sum / static_cast<double>(b);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpochStats {
    std::size_t epoch = 0;
    double loss = 0.0;
    double cos_term = 0.0;
    double recon_term = 0.0;
    double unsup_term = 0.0;
};

struct CleanNetTrainLog {
    std::vector<EpochStats> epochs;
    double omega = 0.0;  // resolved negative-sample weight
};

/// Draws one training batch: ceil(B*(1-uf)) verified and floor(B*uf)
/// unverified queries; when one pool cannot fill its quota the deficit is
/// covered from the other, keeping the batch size fixed.
inline QueryBatch draw_mixed_batch(const NoisyDataset& ds, const std::vector<std::size_t>& verified_pool,
                                   const std::vector<std::size_t>& unverified_pool, std::size_t batch_size,
                                   double unverified_fraction, Rng& rng) {
    const std::size_t b = std::min(batch_size, verified_pool.size() + unverified_pool.size());
    std::size_t want_ver =
        static_cast<std::size_t>(std::ceil(static_cast<double>(b) * (1.0 - unverified_fraction)));
    if (want_ver > b) want_ver = b;
    const std::size_t want_unver = b - want_ver;

    std::size_t take_ver = std::min(want_ver, verified_pool.size());
    std::size_t take_unver = std::min(want_unver, unverified_pool.size());
    take_unver = std::min(unverified_pool.size(), take_unver + (b - take_ver - take_unver));
    take_ver = std::min(verified_pool.size(), take_ver + (b - take_ver - take_unver));

    std::vector<std::size_t> chosen;
    chosen.reserve(b);
    for (std::size_t i : rng.sample_without_replacement(verified_pool.size(), take_ver))
        chosen.push_back(verified_pool[i]);
    for (std::size_t i : rng.sample_without_replacement(unverified_pool.size(), take_unver))
        chosen.push_back(unverified_pool[i]);

    QueryBatch batch;
    batch.features = Tensor::zeros({chosen.size(), ds.dim()});
    batch.class_ids.reserve(chosen.size());
    batch.verification.reserve(chosen.size());
    for (std::size_t r = 0; r < chosen.size(); ++r) {
        const auto src = ds.features.row(chosen[r]);
        std::copy(src.begin(), src.end(), batch.features.data.begin() + r * ds.dim());
        batch.class_ids.push_back(ds.noisy_labels[chosen[r]]);
        batch.verification.push_back(ds.verification[chosen[r]]);
    }
    return batch;
}

/// Trains CleanNet with SGD+momentum on mixed verified/unverified batches.
/// Deterministic given the seed in `hp`. Requires at least one verified
/// sample (otherwise the supervised term is vacuous).
inline CleanNetTrainLog train_cleannet(CleanNetModel& model, const NoisyDataset& train, const ReferenceSets& refs,
                                       const Hyperparams& hp) {
    hp.validate();
    train.validate();
    if (train.size() == 0) throw ConfigError("train_cleannet: empty training set");

    std::vector<std::size_t> verified_pool, unverified_pool;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train.verification[i] == kUnverified)
            unverified_pool.push_back(i);
        else
            verified_pool.push_back(i);
    }
    if (verified_pool.empty())
        throw ConfigError("train_cleannet: no verified samples; the supervised objective is vacuous");
    for (int c : train.noisy_labels)
        if (!refs.count(c)) throw LookupError("train_cleannet: no reference set for class " + std::to_string(c));

    CleanNetTrainLog log;
    log.omega = resolve_omega(hp, train);
    Rng rng(hp.seed);
    const std::size_t batches_per_epoch =
        (train.size() + hp.batch_size - 1) / hp.batch_size;

    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        EpochStats stats;
        stats.epoch = epoch;
        for (std::size_t bi = 0; bi < batches_per_epoch; ++bi) {
            QueryBatch batch =
                draw_mixed_batch(train, verified_pool, unverified_pool, hp.batch_size, hp.unverified_fraction, rng);
            Graph g;
            LossBreakdown bd;
            NodeId loss = build_total_loss(g, model, batch, refs, log.omega, hp, &bd);
            if (!std::isfinite(bd.total))
                throw TrainingError("train_cleannet: non-finite loss at epoch " + std::to_string(epoch));
            g.backward(loss, model.params);
            sgd_step(model.params, hp.lr, hp.momentum);
            stats.loss += bd.total;
            stats.cos_term += bd.cos_term;
            stats.recon_term += bd.recon_term;
            stats.unsup_term += bd.unsup_term;
        }
        const double nb = static_cast<double>(batches_per_epoch);
        stats.loss /= nb;
        stats.cos_term /= nb;
        stats.recon_term /= nb;
        stats.unsup_term /= nb;
        log.epochs.push_back(stats);
    }
    return log;
}

}  // namespace cleannet
