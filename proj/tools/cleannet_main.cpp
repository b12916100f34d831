// cleannet command-line pipeline: one verb per stage so experiments compose
// in shell scripts. Every subcommand takes --seed and produces byte-identical
// outputs for identical inputs and flags.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cleannet/cleannet.hpp"

namespace fs = std::filesystem;
using namespace cleannet;

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct HpFlags {
    Hyperparams hp;
    void attach(CLI::App* cmd) {
        cmd->add_option("--rho", hp.rho, "cosine margin");
        cmd->add_option("--omega", hp.omega, "negative-sample weight; negative value = auto");
        cmd->add_option("--beta", hp.beta, "reconstruction loss weight");
        cmd->add_option("--gamma", hp.gamma, "unsupervised loss weight");
        cmd->add_option("--k", hp.ref_size, "reference set size K");
        cmd->add_option("--lr", hp.lr, "learning rate");
        cmd->add_option("--momentum", hp.momentum, "SGD momentum");
        cmd->add_option("--epochs", hp.epochs, "training epochs");
        cmd->add_option("--batch", hp.batch_size, "mini-batch size");
        cmd->add_option("--unverified-fraction", hp.unverified_fraction, "fraction of each batch drawn unverified");
        cmd->add_option("--hidden", hp.dims.hidden, "reference encoder hidden width (0 = feature dim)");
        cmd->add_option("--embed", hp.dims.embed, "embedding width (0 = ceil(dim/2))");
        cmd->add_option("--ae-hidden", hp.dims.ae_hidden, "autoencoder hidden width (0 = feature dim)");
        cmd->add_option("--seed", hp.seed, "run seed");
    }
};

struct DataArgs {
    std::string features_path, labels_path;
    int classes = 0;  // 0 = infer from the label file
    bool l2_normalize = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--features", features_path, "feature file (FEAT binary)")->required();
        cmd->add_option("--labels", labels_path, "label TSV (sample, class, verification)")->required();
        cmd->add_option("--classes", classes, "class count (default: inferred from labels)");
        cmd->add_flag("--l2-normalize", l2_normalize, "L2-normalize feature rows after loading");
    }

    NoisyDataset load() const {
        NoisyDataset ds;
        ds.features = load_features(features_path);
        if (l2_normalize) l2_normalize_rows(ds.features);
        ds.class_count = classes > 0 ? classes : scan_class_count(labels_path);
        auto [noisy, ver] = load_labels(labels_path, ds.size(), ds.class_count);
        ds.noisy_labels = std::move(noisy);
        ds.verification = std::move(ver);
        ds.validate();
        return ds;
    }
};

void write_text(const std::string& path, const std::string& body) { detail::write_file(path, body); }

std::vector<int> load_true_labels(const std::string& path, std::size_t n, int classes) {
    // same record shape as a label file with verification fixed at -1 is not
    // required; truth files carry sample<TAB>class only
    const std::string buf = detail::read_file(path);
    std::istringstream in(buf);
    std::string line;
    std::vector<int> out(n, 0);
    std::vector<bool> seen(n, false);
    std::size_t lineno = 0, records = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long idx, y;
        if (!(ls >> idx >> y))
            throw ValidationError("truth file " + path + " line " + std::to_string(lineno) + ": bad record");
        if (idx < 0 || static_cast<std::size_t>(idx) >= n)
            throw ValidationError("truth file " + path + " line " + std::to_string(lineno) + ": index out of range");
        if (y < 1 || y > classes)
            throw ValidationError("truth file " + path + " line " + std::to_string(lineno) + ": class out of range");
        if (seen[static_cast<std::size_t>(idx)])
            throw ValidationError("truth file " + path + " line " + std::to_string(lineno) + ": duplicate index");
        seen[static_cast<std::size_t>(idx)] = true;
        out[static_cast<std::size_t>(idx)] = static_cast<int>(y);
        ++records;
    }
    if (records != n)
        throw ValidationError("truth file " + path + ": " + std::to_string(records) + " records, expected " +
                              std::to_string(n));
    return out;
}

void save_true_labels(const std::string& path, const std::vector<int>& truth) {
    std::ostringstream os;
    for (std::size_t i = 0; i < truth.size(); ++i) os << i << '\t' << truth[i] << '\n';
    write_text(path, os.str());
}

std::vector<double> load_weights(const std::string& path, std::size_t n) {
    const std::string buf = detail::read_file(path);
    std::istringstream in(buf);
    std::string line;
    std::vector<double> out(n, 1.0);
    std::vector<bool> seen(n, false);
    std::size_t lineno = 0, records = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long idx;
        std::string wtok;
        if (!(ls >> idx >> wtok))
            throw ValidationError("weight file " + path + " line " + std::to_string(lineno) + ": bad record");
        if (idx < 0 || static_cast<std::size_t>(idx) >= n)
            throw ValidationError("weight file " + path + " line " + std::to_string(lineno) + ": index out of range");
        if (seen[static_cast<std::size_t>(idx)])
            throw ValidationError("weight file " + path + " line " + std::to_string(lineno) + ": duplicate index");
        seen[static_cast<std::size_t>(idx)] = true;
        out[static_cast<std::size_t>(idx)] = detail::parse_double(wtok, "weight file " + path);
        ++records;
    }
    if (records != n)
        throw ValidationError("weight file " + path + ": " + std::to_string(records) + " records, expected " +
                              std::to_string(n));
    return out;
}

void save_weights(const std::string& path, const std::vector<double>& w) {
    std::ostringstream os;
    for (std::size_t i = 0; i < w.size(); ++i) os << i << '\t' << fmt_g(w[i]) << '\n';
    write_text(path, os.str());
}

std::string cleannet_log_tsv(const CleanNetTrainLog& log) {
    std::ostringstream os;
    os << "epoch\tloss\tcos\trecon\tunsup\n";
    for (const auto& e : log.epochs)
        os << e.epoch << '\t' << fmt_g(e.loss) << '\t' << fmt_g(e.cos_term) << '\t' << fmt_g(e.recon_term) << '\t'
           << fmt_g(e.unsup_term) << '\n';
    return os.str();
}

std::string classifier_log_tsv(const ClassifierTrainLog& log) {
    std::ostringstream os;
    os << "epoch\tloss\ttrain_accuracy\teval_accuracy\n";
    for (const auto& e : log.epochs) {
        os << e.epoch << '\t' << fmt_g(e.loss) << '\t' << fmt_g(e.train_accuracy) << '\t';
        if (e.eval_accuracy >= 0.0) os << fmt_g(e.eval_accuracy);
        else os << "-";
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------

int run_cli(int argc, char** argv) {
    CLI::App app{"CleanNet label-noise pipeline"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "print help for every subcommand");

    auto add_config = [](CLI::App* cmd) {
        cmd->set_config("--config", "", "key=value config file (flags take precedence)");
    };

    // ---- gen ------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a synthetic noisy-label dataset");
    add_config(gen);
    SyntheticSpec gen_spec;
    std::string gen_out;
    gen->add_option("--classes", gen_spec.classes, "number of classes")->required();
    gen->add_option("--dim", gen_spec.dim, "feature dimension")->required();
    gen->add_option("--per-class", gen_spec.per_class, "samples per class")->required();
    gen->add_option("--noise", gen_spec.noise_rate, "label noise rate in [0,1)");
    gen->add_option("--separation", gen_spec.separation, "mean inter-centroid distance / within-class std");
    gen->add_option("--verified-fraction", gen_spec.verified_fraction, "verified fraction per class");
    gen->add_option("--held-out", gen_spec.held_out, "class ids whose verification labels stay hidden");
    gen->add_option("--seed", gen_spec.seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory (features.bin, labels.tsv, truth.tsv)")->required();
    gen->callback([&] {
        const SyntheticData data = generate_dataset(gen_spec);
        fs::create_directories(gen_out);
        save_features((fs::path(gen_out) / "features.bin").string(), data.ds.features);
        save_labels((fs::path(gen_out) / "labels.tsv").string(), data.ds.noisy_labels, data.ds.verification);
        save_true_labels((fs::path(gen_out) / "truth.tsv").string(), data.true_labels);
        std::cout << "generated\t" << data.ds.size() << " samples\t" << gen_spec.classes << " classes\tdim "
                  << gen_spec.dim << "\n";
    });

    // ---- select-ref -------------------------------------------------------
    auto* sref = app.add_subcommand("select-ref", "build per-class reference sets (K-means or random)");
    add_config(sref);
    DataArgs sref_data;
    sref_data.attach(sref);
    std::string sref_method = "kmeans", sref_out;
    std::size_t sref_k = 50;
    std::uint64_t sref_seed = 1;
    sref->add_option("--method", sref_method, "kmeans | random")->check(CLI::IsMember({"kmeans", "random"}));
    sref->add_option("--k", sref_k, "reference set size K");
    sref->add_option("--seed", sref_seed, "selection seed");
    sref->add_option("--out", sref_out, "output reference checkpoint")->required();
    sref->callback([&] {
        const NoisyDataset ds = sref_data.load();
        const ReferenceSets refs = build_reference_sets(ds, sref_k, sref_seed, sref_method == "kmeans");
        save_checkpoint(sref_out, checkpoint_from_reference_sets(refs));
        std::cout << "reference sets\t" << refs.size() << " classes\tK " << sref_k << "\t" << sref_method << "\n";
    });

    // ---- train-cleannet ---------------------------------------------------
    auto* tcn = app.add_subcommand("train-cleannet", "train the CleanNet joint embedding");
    add_config(tcn);
    DataArgs tcn_data;
    tcn_data.attach(tcn);
    HpFlags tcn_hp;
    tcn_hp.attach(tcn);
    std::string tcn_refs, tcn_out, tcn_log, tcn_init;
    tcn->add_option("--refs", tcn_refs, "reference checkpoint")->required();
    tcn->add_option("--out", tcn_out, "output model checkpoint")->required();
    tcn->add_option("--log", tcn_log, "per-epoch training log TSV");
    tcn->add_option("--init", tcn_init, "warm-start from an existing model checkpoint");
    tcn->callback([&] {
        const NoisyDataset ds = tcn_data.load();
        const ReferenceSets refs = reference_sets_from_checkpoint(load_checkpoint(tcn_refs));
        CleanNetModel model;
        if (!tcn_init.empty()) {
            model = cleannet_from_checkpoint(load_checkpoint(tcn_init)).first;
            if (model.input_dim != ds.dim()) throw ConfigError("--init model width does not match features");
        } else {
            model = CleanNetModel::init(ds.dim(), tcn_hp.hp.dims, tcn_hp.hp.seed);
        }
        const CleanNetTrainLog log = train_cleannet(model, ds, refs, tcn_hp.hp);
        Hyperparams saved = tcn_hp.hp;
        saved.omega = log.omega;  // persist the resolved weight
        save_checkpoint(tcn_out, checkpoint_from_cleannet(model, saved, static_cast<long long>(log.epochs.size())));
        if (!tcn_log.empty()) write_text(tcn_log, cleannet_log_tsv(log));
        if (!log.epochs.empty())
            std::cout << "trained\tepochs " << log.epochs.size() << "\tfinal_loss " << fmt_g(log.epochs.back().loss)
                      << "\tomega " << fmt_g(log.omega) << "\n";
        else
            std::cout << "trained\tepochs 0\n";
    });

    // ---- detect -----------------------------------------------------------
    auto* det = app.add_subcommand("detect", "score samples and threshold into relevant/mislabeled");
    add_config(det);
    DataArgs det_data;
    det_data.attach(det);
    std::string det_model, det_refs, det_out;
    double det_delta = 0.1;
    std::uint64_t det_seed = 1;
    det->add_option("--model", det_model, "cleannet checkpoint")->required();
    det->add_option("--refs", det_refs, "reference checkpoint")->required();
    det->add_option("--delta", det_delta, "decision threshold");
    det->add_option("--seed", det_seed, "unused; accepted for uniformity");
    det->add_option("--out", det_out, "detection report TSV")->required();
    det->callback([&] {
        const ReferenceSets refs = reference_sets_from_checkpoint(load_checkpoint(det_refs));
        auto [model, hp] = cleannet_from_checkpoint(load_checkpoint(det_model));
        DataArgs d = det_data;
        if (d.classes == 0 && !refs.empty()) d.classes = refs.rbegin()->first;
        const NoisyDataset ds = d.load();
        const FrozenScorer scorer = FrozenScorer::build(model, refs);
        const DetectionReport rep = detect_with_cleannet(scorer, ds, det_delta);
        save_detection_report(det_out, rep);
        std::cout << "detect\tdelta " << fmt_g(det_delta) << "\taverage_error " << fmt_g(rep.errors.average) << "\t("
                  << rep.errors.classes_evaluated << " classes with verified samples)\n";
    });

    // ---- select-threshold ---------------------------------------------------
    auto* sth = app.add_subcommand("select-threshold", "grid-search delta on a labeled validation set");
    add_config(sth);
    DataArgs sth_data;
    sth_data.attach(sth);
    std::string sth_model, sth_refs;
    std::uint64_t sth_seed = 1;
    sth->add_option("--model", sth_model, "cleannet checkpoint")->required();
    sth->add_option("--refs", sth_refs, "reference checkpoint")->required();
    sth->add_option("--seed", sth_seed, "unused; accepted for uniformity");
    sth->callback([&] {
        const ReferenceSets refs = reference_sets_from_checkpoint(load_checkpoint(sth_refs));
        auto [model, hp] = cleannet_from_checkpoint(load_checkpoint(sth_model));
        DataArgs d = sth_data;
        if (d.classes == 0 && !refs.empty()) d.classes = refs.rbegin()->first;
        const NoisyDataset ds = d.load();
        const FrozenScorer scorer = FrozenScorer::build(model, refs);
        const auto scores = scorer.score_all(ds);
        const double delta = select_threshold(scores, ds.verification, ds.noisy_labels, hp.rho);
        std::cout << "delta\t" << fmt_g(delta) << "\n";
    });

    // ---- weigh --------------------------------------------------------------
    auto* wgh = app.add_subcommand("weigh", "compute per-sample classifier weights (soft or hard)");
    add_config(wgh);
    DataArgs wgh_data;
    wgh_data.attach(wgh);
    std::string wgh_model, wgh_refs, wgh_mode = "soft", wgh_out;
    double wgh_delta = 0.1;
    std::uint64_t wgh_seed = 1;
    wgh->add_option("--model", wgh_model, "cleannet checkpoint")->required();
    wgh->add_option("--refs", wgh_refs, "reference checkpoint")->required();
    wgh->add_option("--mode", wgh_mode, "soft | hard")->check(CLI::IsMember({"soft", "hard"}));
    wgh->add_option("--delta", wgh_delta, "threshold for hard weighting");
    wgh->add_option("--seed", wgh_seed, "unused; accepted for uniformity");
    wgh->add_option("--out", wgh_out, "weight TSV")->required();
    wgh->callback([&] {
        const ReferenceSets refs = reference_sets_from_checkpoint(load_checkpoint(wgh_refs));
        auto [model, hp] = cleannet_from_checkpoint(load_checkpoint(wgh_model));
        DataArgs d = wgh_data;
        if (d.classes == 0 && !refs.empty()) d.classes = refs.rbegin()->first;
        const NoisyDataset ds = d.load();
        const FrozenScorer scorer = FrozenScorer::build(model, refs);
        const auto w = compute_weights(scorer, ds, wgh_mode == "soft" ? WeightMode::kSoft : WeightMode::kHard,
                                       wgh_delta);
        save_weights(wgh_out, w);
        double mean = 0.0;
        for (double v : w) mean += v;
        std::cout << "weights\t" << wgh_mode << "\tmean " << fmt_g(w.empty() ? 0.0 : mean / w.size()) << "\n";
    });

    // ---- train-classifier -----------------------------------------------------
    auto* tcl = app.add_subcommand("train-classifier", "train the downstream classifier on (weighted) noisy data");
    add_config(tcl);
    DataArgs tcl_data;
    tcl_data.attach(tcl);
    std::string tcl_weights, tcl_out, tcl_log, tcl_eval_features, tcl_eval_truth;
    ClassifierTrainOpts tcl_opts;
    std::size_t tcl_hidden = 0;
    tcl->add_option("--weights", tcl_weights, "weight TSV (default: all ones)");
    tcl->add_option("--lr", tcl_opts.lr, "learning rate");
    tcl->add_option("--momentum", tcl_opts.momentum, "SGD momentum");
    tcl->add_option("--epochs", tcl_opts.epochs, "training epochs");
    tcl->add_option("--batch", tcl_opts.batch_size, "mini-batch size");
    tcl->add_option("--seed", tcl_opts.seed, "run seed");
    tcl->add_option("--hidden-layer", tcl_hidden, "hidden width (0 = linear classifier)");
    tcl->add_option("--eval-features", tcl_eval_features, "clean evaluation features");
    tcl->add_option("--eval-truth", tcl_eval_truth, "clean evaluation labels (truth TSV)");
    tcl->add_option("--out", tcl_out, "output classifier checkpoint")->required();
    tcl->add_option("--log", tcl_log, "per-epoch accuracy log TSV");
    tcl->callback([&] {
        const NoisyDataset ds = tcl_data.load();
        std::vector<double> w(ds.size(), 1.0);
        if (!tcl_weights.empty()) w = load_weights(tcl_weights, ds.size());
        ClassifierModel clf = ClassifierModel::init(ds.dim(), static_cast<std::size_t>(ds.class_count),
                                                    tcl_opts.seed, tcl_hidden);
        std::optional<Tensor> eval_features;
        std::vector<int> eval_truth;
        if (!tcl_eval_features.empty()) {
            eval_features = load_features(tcl_eval_features);
            if (tcl_data.l2_normalize) l2_normalize_rows(*eval_features);
            eval_truth = load_true_labels(tcl_eval_truth, eval_features->rows(), ds.class_count);
        }
        const ClassifierTrainLog log =
            train_classifier(clf, ds, w, tcl_opts, eval_features ? &*eval_features : nullptr,
                             eval_features ? &eval_truth : nullptr);
        save_checkpoint(tcl_out, checkpoint_from_classifier(clf, tcl_opts.seed,
                                                            static_cast<long long>(log.epochs.size())));
        if (!tcl_log.empty()) write_text(tcl_log, classifier_log_tsv(log));
        if (!log.epochs.empty()) {
            std::cout << "trained\tepochs " << log.epochs.size() << "\ttrain_accuracy "
                      << fmt_g(log.epochs.back().train_accuracy);
            if (log.epochs.back().eval_accuracy >= 0.0)
                std::cout << "\teval_accuracy " << fmt_g(log.epochs.back().eval_accuracy);
            std::cout << "\n";
        }
    });

    // ---- alt-train ---------------------------------------------------------
    auto* alt = app.add_subcommand("alt-train", "alternating classifier / CleanNet / weighted classifier loop");
    add_config(alt);
    DataArgs alt_data;
    alt_data.attach(alt);
    HpFlags alt_hp;
    alt_hp.attach(alt);
    AltTrainOpts alt_opts;
    std::string alt_truth, alt_outdir, alt_mode = "soft";
    double alt_val_fraction = 0.1;
    alt->add_option("--truth", alt_truth, "ground-truth labels for clean validation accuracy");
    alt->add_option("--val-fraction", alt_val_fraction, "fraction of the input held out for validation");
    alt->add_option("--rounds", alt_opts.max_rounds, "max weighted rounds");
    alt->add_option("--patience", alt_opts.patience, "non-improving rounds tolerated (0 = single round)");
    alt->add_option("--mode", alt_mode, "soft | hard")->check(CLI::IsMember({"soft", "hard"}));
    alt->add_flag("--fresh-cleannet", [&](std::int64_t) { alt_opts.warm_start_cleannet = false; },
                  "retrain CleanNet from scratch each round");
    alt->add_option("--classifier-epochs", alt_opts.classifier.epochs, "classifier epochs per round");
    alt->add_option("--classifier-lr", alt_opts.classifier.lr, "classifier learning rate");
    alt->add_option("--out", alt_outdir, "output directory")->required();
    alt->callback([&] {
        const NoisyDataset ds = alt_data.load();
        alt_opts.mode = alt_mode == "soft" ? WeightMode::kSoft : WeightMode::kHard;
        alt_opts.classifier.seed = alt_hp.hp.seed;
        const SplitResult split = split_dataset(ds, 1.0 - alt_val_fraction, alt_val_fraction, 0.0, alt_hp.hp.seed);
        std::optional<std::vector<int>> val_truth;
        if (!alt_truth.empty()) {
            const auto truth = load_true_labels(alt_truth, ds.size(), ds.class_count);
            std::vector<int> vt;
            vt.reserve(split.val_idx.size());
            for (std::size_t i : split.val_idx) vt.push_back(truth[i]);
            val_truth = std::move(vt);
        }
        const AltTrainResult res = alternating_train(split.train, split.val, alt_hp.hp, alt_opts,
                                                     val_truth ? &*val_truth : nullptr);
        fs::create_directories(alt_outdir);
        save_checkpoint((fs::path(alt_outdir) / "classifier.ckpt").string(),
                        checkpoint_from_classifier(res.classifier, alt_hp.hp.seed, 0));
        save_checkpoint((fs::path(alt_outdir) / "cleannet.ckpt").string(),
                        checkpoint_from_cleannet(res.cleannet, alt_hp.hp, 0));
        save_checkpoint((fs::path(alt_outdir) / "refs.ckpt").string(), checkpoint_from_reference_sets(res.refs));
        std::ostringstream os;
        os << "round\tval_accuracy\tdetection_error\tdelta\n";
        for (const auto& m : res.rounds) {
            os << m.round << '\t' << fmt_g(m.val_accuracy) << '\t';
            if (m.detection_error >= 0.0) os << fmt_g(m.detection_error);
            else os << "-";
            os << '\t' << fmt_g(m.delta) << '\n';
        }
        write_text((fs::path(alt_outdir) / "metrics.tsv").string(), os.str());
        std::cout << "alt-train\trounds " << (res.rounds.size() - 1) << "\tbest_round " << res.best_round
                  << "\tbest_val_accuracy " << fmt_g(res.rounds[res.best_round].val_accuracy) << "\n";
    });

    // ---- bench-detect ---------------------------------------------------------
    auto* bd = app.add_subcommand("bench-detect", "end-to-end synthetic detection experiment");
    add_config(bd);
    SyntheticSpec bd_spec;
    BenchConfig bd_cfg;
    std::string bd_out;
    std::size_t bd_holdout = 0;
    bd->add_option("--classes", bd_spec.classes, "number of classes");
    bd->add_option("--dim", bd_spec.dim, "feature dimension");
    bd->add_option("--per-class", bd_spec.per_class, "samples per class");
    bd->add_option("--noise", bd_spec.noise_rate, "label noise rate");
    bd->add_option("--separation", bd_spec.separation, "cluster separation");
    bd->add_option("--verified-fraction", bd_spec.verified_fraction, "verified fraction per class");
    bd->add_option("--held-out", bd_spec.held_out, "class ids to hold out");
    bd->add_option("--n-holdout", bd_holdout, "hold out N random classes instead of an explicit list");
    bd->add_option("--seed", bd_spec.seed, "run seed");
    bd->add_option("--k", bd_cfg.hp.ref_size, "reference set size K");
    bd->add_option("--epochs", bd_cfg.hp.epochs, "CleanNet epochs");
    bd->add_option("--out", bd_out, "report TSV (also printed)");
    bd->callback([&] {
        if (bd_holdout > 0) {
            if (bd_holdout >= bd_spec.classes) throw ConfigError("--n-holdout must be < --classes");
            Rng rng(bd_spec.seed ^ 0xabcdefULL);
            for (std::size_t p : rng.sample_without_replacement(bd_spec.classes, bd_holdout))
                bd_spec.held_out.push_back(static_cast<int>(p) + 1);
        }
        const DetectionExperimentReport rep = run_detection_experiment(bd_spec, bd_cfg);
        const std::string body = format_detection_experiment(rep);
        if (!bd_out.empty()) write_text(bd_out, body);
        std::cout << body;
    });

    // ---- bench-classify ---------------------------------------------------------
    auto* bc = app.add_subcommand("bench-classify", "end-to-end synthetic classification experiment");
    add_config(bc);
    SyntheticSpec bc_spec;
    BenchConfig bc_cfg;
    std::string bc_out;
    bc->add_option("--classes", bc_spec.classes, "number of classes");
    bc->add_option("--dim", bc_spec.dim, "feature dimension");
    bc->add_option("--per-class", bc_spec.per_class, "samples per class");
    bc->add_option("--noise", bc_spec.noise_rate, "label noise rate");
    bc->add_option("--separation", bc_spec.separation, "cluster separation");
    bc->add_option("--verified-fraction", bc_spec.verified_fraction, "verified fraction per class");
    bc->add_option("--seed", bc_spec.seed, "run seed");
    bc->add_option("--k", bc_cfg.hp.ref_size, "reference set size K");
    bc->add_option("--epochs", bc_cfg.hp.epochs, "CleanNet epochs");
    bc->add_option("--out", bc_out, "report TSV (also printed)");
    bc->callback([&] {
        const ClassificationExperimentReport rep = run_classification_experiment(bc_spec, bc_cfg);
        const std::string body = format_classification_experiment(rep);
        if (!bc_out.empty()) write_text(bc_out, body);
        std::cout << body;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::Normal);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << app.help();
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
