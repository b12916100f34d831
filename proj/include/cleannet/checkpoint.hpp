#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "cleannet/classifier.hpp"
#include "cleannet/dataset.hpp"
#include "cleannet/io.hpp"
#include "cleannet/model.hpp"

namespace cleannet {

/// CleanNet model + hyperparameters + provenance as a checkpoint. Optimizer
/// velocity is transient state and is not persisted.
inline Checkpoint checkpoint_from_cleannet(const CleanNetModel& model, const Hyperparams& hp,
                                           long long trained_epochs = 0) {
    Checkpoint ckpt;
    ckpt.kind = "cleannet";
    ckpt.set_meta_int("input_dim", static_cast<long long>(model.input_dim));
    ckpt.set_meta_int("hidden", static_cast<long long>(model.dims.hidden));
    ckpt.set_meta_int("embed", static_cast<long long>(model.dims.embed));
    ckpt.set_meta_int("ae_hidden", static_cast<long long>(model.dims.ae_hidden));
    ckpt.set_meta_double("rho", hp.rho);
    ckpt.set_meta_double("omega", hp.omega);
    ckpt.set_meta_double("beta", hp.beta);
    ckpt.set_meta_double("gamma", hp.gamma);
    ckpt.set_meta_int("ref_size", static_cast<long long>(hp.ref_size));
    ckpt.set_meta_double("lr", hp.lr);
    ckpt.set_meta_double("momentum", hp.momentum);
    ckpt.set_meta_int("epochs", static_cast<long long>(hp.epochs));
    ckpt.set_meta_int("batch_size", static_cast<long long>(hp.batch_size));
    ckpt.set_meta_double("unverified_fraction", hp.unverified_fraction);
    ckpt.set_meta_int("seed", static_cast<long long>(hp.seed));
    ckpt.set_meta_int("trained_epochs", trained_epochs);
    for (const auto& p : model.params) ckpt.add_tensor(p.name, p.value);
    return ckpt;
}

inline std::pair<CleanNetModel, Hyperparams> cleannet_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.kind != "cleannet")
        throw FormatError("checkpoint kind '" + ckpt.kind + "' is not a cleannet checkpoint");
    Hyperparams hp;
    hp.rho = ckpt.get_meta_double("rho");
    hp.omega = ckpt.get_meta_double("omega");
    hp.beta = ckpt.get_meta_double("beta");
    hp.gamma = ckpt.get_meta_double("gamma");
    hp.ref_size = static_cast<std::size_t>(ckpt.get_meta_int("ref_size"));
    hp.lr = ckpt.get_meta_double("lr");
    hp.momentum = ckpt.get_meta_double("momentum");
    hp.epochs = static_cast<std::size_t>(ckpt.get_meta_int("epochs"));
    hp.batch_size = static_cast<std::size_t>(ckpt.get_meta_int("batch_size"));
    hp.unverified_fraction = ckpt.get_meta_double("unverified_fraction");
    hp.seed = static_cast<std::uint64_t>(ckpt.get_meta_int("seed"));
    hp.dims.hidden = static_cast<std::size_t>(ckpt.get_meta_int("hidden"));
    hp.dims.embed = static_cast<std::size_t>(ckpt.get_meta_int("embed"));
    hp.dims.ae_hidden = static_cast<std::size_t>(ckpt.get_meta_int("ae_hidden"));

    CleanNetModel model;
    model.input_dim = static_cast<std::size_t>(ckpt.get_meta_int("input_dim"));
    model.dims = hp.dims;
    for (const auto& [name, t] : ckpt.tensors) model.params.add(name, t);
    // sanity: the expected layer set must be present
    for (const char* name : {"ref_mlp.l1.w", "ref_mlp.l2.w", "attn.w", "attn.u", "ref_out.w", "ae.l1.w", "ae.l2.w",
                             "ae.l3.w", "ae.l4.w"})
        if (!model.params.contains(name)) throw FormatError("cleannet checkpoint: missing tensor '" + std::string(name) + "'");
    return {std::move(model), hp};
}

inline Checkpoint checkpoint_from_classifier(const ClassifierModel& model, std::uint64_t seed = 0,
                                             long long trained_epochs = 0) {
    Checkpoint ckpt;
    ckpt.kind = "classifier";
    ckpt.set_meta_int("input_dim", static_cast<long long>(model.input_dim));
    ckpt.set_meta_int("class_count", static_cast<long long>(model.class_count));
    ckpt.set_meta_int("hidden", static_cast<long long>(model.hidden));
    ckpt.set_meta_int("seed", static_cast<long long>(seed));
    ckpt.set_meta_int("trained_epochs", trained_epochs);
    for (const auto& p : model.params) ckpt.add_tensor(p.name, p.value);
    return ckpt;
}

inline ClassifierModel classifier_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.kind != "classifier")
        throw FormatError("checkpoint kind '" + ckpt.kind + "' is not a classifier checkpoint");
    ClassifierModel model;
    model.input_dim = static_cast<std::size_t>(ckpt.get_meta_int("input_dim"));
    model.class_count = static_cast<std::size_t>(ckpt.get_meta_int("class_count"));
    model.hidden = static_cast<std::size_t>(ckpt.get_meta_int("hidden"));
    for (const auto& [name, t] : ckpt.tensors) model.params.add(name, t);
    return model;
}

}  // namespace cleannet
