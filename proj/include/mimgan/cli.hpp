#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mimgan/mimgan.hpp"

namespace mimgan::cli {

inline constexpr const char* kVersion = "1.0.0";

namespace detail {

namespace fs = std::filesystem;
using nlohmann::json;

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Runs a subcommand body, times it, and writes the one manifest every run
// leaves beside its outputs. The manifest lists the produced files; its own
// duration field is the only non-reproducible byte in an output directory.
template <typename Body>
int run_with_manifest(const std::string& command, const std::string& out_dir, std::uint64_t seed,
                      json config, Body body) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    std::vector<std::string> outputs = body();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["command"] = command;
    manifest["config"] = std::move(config);
    manifest["seed"] = seed;
    manifest["version"] = std::string("mimgan ") + kVersion;
    manifest["outputs"] = outputs;
    manifest["duration_seconds"] = secs;
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << manifest.dump(2) << '\n';
    return 0;
}

struct DataArg {
    std::string kind;  // gauss | synth | csv
    std::string path;  // for csv
};

inline DataArg parse_data_arg(const std::string& s) {
    if (s == "gauss" || s == "synth") return {s, ""};
    if (s.rfind("csv:", 0) == 0) return {"csv", s.substr(4)};
    throw CLI::ValidationError("--data", "expected gauss, synth or csv:<path>, got '" + s + "'");
}

inline int missing_file(const std::string& path) {
    std::cerr << "mimgan: file not found: " << path << "\n";
    return 1;
}

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string out = ".";
};

inline void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "64-bit run seed")->envname("MIMGAN_SEED");
    cmd->add_option("--out", o.out, "output directory");
}

// ---- synth ---------------------------------------------------------------

struct SynthOpts {
    CommonOpts common;
    std::string data = "gauss";
    double mu = 4.0, sigma = 1.25;
    std::size_t n = 16000;
    std::size_t n_normal = 950, n_anomaly = 50, dim = 6;
    double separation = 3.0;
};

inline int run_synth(const SynthOpts& o) {
    const DataArg arg = parse_data_arg(o.data);
    if (arg.kind == "csv") throw CLI::ValidationError("--data", "synth cannot take csv input");
    TabularDataset ds =
        arg.kind == "gauss"
            ? sample_gaussian(o.mu, o.sigma, o.n, o.common.seed)
            : synth_anomaly_benchmark(o.n_normal, o.n_anomaly, o.dim, o.separation, o.common.seed);
    json cfg{{"data", o.data}, {"mu", o.mu},       {"sigma", o.sigma},
             {"n", o.n},       {"n_normal", o.n_normal}, {"n_anomaly", o.n_anomaly},
             {"dim", o.dim},   {"separation", o.separation}};
    return run_with_manifest("synth", o.common.out, o.common.seed, cfg, [&]() {
        const std::string path = (fs::path(o.common.out) / "dataset.csv").string();
        save_tabular_csv(ds, path);
        return std::vector<std::string>{path};
    });
}

// ---- train ---------------------------------------------------------------

struct TrainOpts {
    CommonOpts common;
    std::string objective = "mim";
    std::string data = "gauss";
    std::string label_col;
    std::size_t iters = 2000;
    std::size_t batch = 256;
    std::size_t hidden = 64;
    std::size_t latent = 8;
    std::string optimizer = "adam";
    double lr = 0.001;
    std::size_t d_steps = 1;
    double train_fraction = 0.8;
    double mu = 4.0, sigma = 1.25;
    std::size_t n = 16000;
    std::size_t n_normal = 950, n_anomaly = 50, dim = 6;
    double separation = 3.0;
};

inline GanConfig make_gan_config(const TrainOpts& o, std::size_t data_dim) {
    GanConfig cfg = GanConfig::defaults(objective_from_name(o.objective), data_dim, o.hidden,
                                        o.latent);
    cfg.batch_size = o.batch;
    cfg.iterations = o.iters;
    cfg.d_steps_per_g_step = o.d_steps;
    cfg.seed = o.common.seed;
    const OptimizerKind opt =
        o.optimizer == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
    cfg.gen_optimizer = cfg.disc_optimizer = opt;
    cfg.gen_lr = cfg.disc_lr = o.lr;
    return cfg;
}

inline int run_train(const TrainOpts& o) {
    const DataArg arg = parse_data_arg(o.data);
    if (arg.kind == "csv" && !fs::exists(arg.path)) return missing_file(arg.path);
    if (o.optimizer != "sgd" && o.optimizer != "adam")
        throw CLI::ValidationError("--optimizer", "expected sgd or adam");

    SplitRng seeds(o.common.seed);
    TabularDataset ds;
    if (arg.kind == "gauss")
        ds = sample_gaussian(o.mu, o.sigma, o.n, seeds.split(100).next_u64());
    else if (arg.kind == "synth")
        ds = synth_anomaly_benchmark(o.n_normal, o.n_anomaly, o.dim, o.separation,
                                     seeds.split(100).next_u64());
    else
        ds = load_tabular_csv(arg.path, o.label_col);

    // Labeled data follows the detection protocol: train on a fraction of the
    // normals, hold out the rest plus all anomalies, scale with train stats.
    std::optional<TabularDataset> test_split;
    std::optional<NormStats> stats;
    DenseMatrix train_features;
    if (ds.has_labels()) {
        auto [train_ds, test_ds] =
            split_train_test(ds, o.train_fraction, SplitMode::NormalOnlyTrain,
                             seeds.split(101).next_u64());
        stats = fit_minmax(train_ds);
        train_features = apply_minmax(train_ds, *stats).features;
        test_split = std::move(test_ds);
    } else if (arg.kind == "csv") {
        stats = fit_minmax(ds);
        train_features = apply_minmax(ds, *stats).features;
    } else {
        train_features = ds.features;  // raw 1-D task
    }

    const GanConfig cfg = make_gan_config(o, train_features.cols());
    TrainResult res = train_adversarial(cfg, train_features);

    json jcfg{{"objective", o.objective}, {"data", o.data},
              {"label_col", o.label_col}, {"iters", o.iters},
              {"batch", o.batch},         {"hidden", o.hidden},
              {"latent", o.latent},       {"optimizer", o.optimizer},
              {"lr", o.lr},               {"d_steps", o.d_steps},
              {"train_fraction", o.train_fraction}};
    const int rc = run_with_manifest("train", o.common.out, o.common.seed, jcfg, [&]() {
        std::vector<std::string> outputs;
        const fs::path dir(o.common.out);
        save_model(res.generator, (dir / "generator.json").string(), stats);
        save_model(res.discriminator, (dir / "discriminator.json").string(), stats);
        outputs.push_back((dir / "generator.json").string());
        outputs.push_back((dir / "discriminator.json").string());
        std::ofstream log(dir / "training_log.csv");
        res.log.to_csv(log);
        outputs.push_back((dir / "training_log.csv").string());
        if (test_split) {
            save_tabular_csv(*test_split, (dir / "test_split.csv").string());
            outputs.push_back((dir / "test_split.csv").string());
        }
        return outputs;
    });
    if (res.log.aborted) {
        std::cerr << "mimgan: training aborted: " << res.log.abort_reason << "\n";
        return 2;
    }
    return rc;
}

// ---- curves ----------------------------------------------------------------

struct CurvesOpts {
    CommonOpts common;
    std::vector<std::string> objectives = {"mim", "kl", "ls", "w"};
    std::vector<std::size_t> pretrain = {500, 1000, 1500};
    std::size_t g_iters = 1000;
    std::size_t batch = 256;
    std::size_t hidden = 64;
    std::size_t latent = 8;
    std::string optimizer = "sgd";
    double lr = 0.001;
    double mu = 4.0, sigma = 1.25;
    std::size_t n = 16000;
};

inline int run_curves(const CurvesOpts& o) {
    SplitRng seeds(o.common.seed);
    const TabularDataset ds = sample_gaussian(o.mu, o.sigma, o.n, seeds.split(100).next_u64());

    json jcfg{{"objectives", o.objectives}, {"d_pretrain", o.pretrain},
              {"g_iters", o.g_iters},       {"batch", o.batch},
              {"hidden", o.hidden},         {"latent", o.latent},
              {"optimizer", o.optimizer},   {"lr", o.lr}};
    return run_with_manifest("curves", o.common.out, o.common.seed, jcfg, [&]() {
        std::vector<std::string> outputs;
        for (const std::string& name : o.objectives) {
            for (std::size_t n_pre : o.pretrain) {
                GanConfig cfg = GanConfig::defaults(objective_from_name(name), ds.dim(), o.hidden,
                                                    o.latent);
                cfg.batch_size = o.batch;
                cfg.seed = o.common.seed;
                cfg.gen_optimizer = cfg.disc_optimizer =
                    o.optimizer == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
                cfg.gen_lr = cfg.disc_lr = o.lr;
                FixedDiscriminatorResult res =
                    train_generator_fixed_discriminator(cfg, ds.features, n_pre, o.g_iters);
                if (res.log.aborted)
                    std::cerr << "mimgan: curve " << name << " N=" << n_pre
                              << " aborted: " << res.log.abort_reason << "\n";
                const std::string path =
                    (fs::path(o.common.out) / ("curve_" + name + "_n" + std::to_string(n_pre) +
                                               ".csv")).string();
                std::ofstream f(path);
                res.log.to_csv(f);
                outputs.push_back(path);
            }
        }
        return outputs;
    });
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeOpts {
    CommonOpts common;
    std::string table = "upsilon";
    double p = -1.0, eps = 0.0, gamma = 1.0;
    bool single_point = false;
};

inline std::vector<std::string> write_upsilon_table(const AnalyzeOpts& o) {
    const std::string path = (fs::path(o.common.out) / "upsilon.csv").string();
    std::ofstream f(path);
    f << "p,eps,gamma,mim_exact,mim_approx,kl_exact,kl_approx\n";
    auto emit = [&](double p, double eps, double gamma) {
        const BinaryPerturbation bp(p, eps, gamma);
        f << fmt(p) << ',' << fmt(eps) << ',' << fmt(gamma) << ','
          << fmt(rare_event_proportion(ObjectiveKind::Mim, ProportionMode::Exact, bp)) << ','
          << fmt(rare_event_proportion(ObjectiveKind::Mim, ProportionMode::Approx, bp)) << ','
          << fmt(rare_event_proportion(ObjectiveKind::KlSaturating, ProportionMode::Exact, bp))
          << ','
          << fmt(rare_event_proportion(ObjectiveKind::KlSaturating, ProportionMode::Approx, bp))
          << '\n';
    };
    if (o.single_point) {
        emit(o.p, o.eps, o.gamma);
    } else {
        for (double p : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 5e-2})
            for (int e = -4; e <= 4; ++e)
                for (double gamma : {1.0, 1.5, 2.0}) emit(p, 0.05 * e, gamma);
    }
    return {path};
}

inline std::vector<std::string> write_stability_table(const AnalyzeOpts& o) {
    const std::string path = (fs::path(o.common.out) / "stability.csv").string();
    std::ofstream f(path);
    f << "scenario,eps,mim,kl_saturating,kl_nonsaturating\n";
    for (int i = 1; i <= 99; ++i) {
        const double e = 0.01 * i;
        f << "perfect," << fmt(e) << ','
          << fmt(stability_factor(ObjectiveKind::Mim, StabilityScenario::PerfectDiscriminator, e))
          << ','
          << fmt(stability_factor(ObjectiveKind::KlSaturating,
                                  StabilityScenario::PerfectDiscriminator, e))
          << ','
          << fmt(stability_factor(ObjectiveKind::KlNonSaturating,
                                  StabilityScenario::PerfectDiscriminator, e))
          << '\n';
    }
    for (int i = -45; i <= 45; ++i) {
        const double e = 0.01 * i;
        f << "worst," << fmt(e) << ','
          << fmt(stability_factor(ObjectiveKind::Mim, StabilityScenario::WorstDiscriminator, e))
          << ','
          << fmt(stability_factor(ObjectiveKind::KlSaturating,
                                  StabilityScenario::WorstDiscriminator, e))
          << ','
          << fmt(stability_factor(ObjectiveKind::KlNonSaturating,
                                  StabilityScenario::WorstDiscriminator, e))
          << '\n';
    }
    return {path};
}

inline std::vector<std::string> write_renyi_table(const AnalyzeOpts& o) {
    const std::string path = (fs::path(o.common.out) / "renyi.csv").string();
    std::ofstream f(path);
    f << "q,renyi_half,equilibrium,equilibrium_from_renyi\n";
    const DiscreteDist p({0.5, 0.5});
    for (int i = 1; i <= 19; ++i) {
        const double qv = 0.05 * i;
        const DiscreteDist q({qv, 1.0 - qv});
        const double r = renyi_divergence(p, q, 0.5);
        f << fmt(qv) << ',' << fmt(r) << ','
          << fmt(equilibrium_objective(ObjectiveKind::Mim, p, q)) << ','
          << fmt(two_sqrt_e() * std::exp(-0.5 * r)) << '\n';
    }
    return {path};
}

inline int run_analyze(const AnalyzeOpts& o) {
    json jcfg{{"table", o.table}};
    if (o.single_point) {
        jcfg["p"] = o.p;
        jcfg["eps"] = o.eps;
        jcfg["gamma"] = o.gamma;
    }
    return run_with_manifest("analyze", o.common.out, o.common.seed, jcfg, [&]() {
        if (o.table == "upsilon") return write_upsilon_table(o);
        if (o.table == "stability") return write_stability_table(o);
        if (o.table == "renyi") return write_renyi_table(o);
        throw CLI::ValidationError("--table", "expected upsilon, stability or renyi");
    });
}

// ---- detect ----------------------------------------------------------------

struct DetectOpts {
    CommonOpts common;
    std::string gen_path;
    std::string disc_path;
    std::string data;
    std::string label_col;
    double lambda = 0.1;
    double eta = 0.05;
    double inv_lr = 0.003;
    std::size_t inv_iters = 500;
    std::string gamma_threshold = "auto";
};

inline int run_detect(const DetectOpts& o) {
    if (!fs::exists(o.gen_path)) return missing_file(o.gen_path);
    if (!fs::exists(o.disc_path)) return missing_file(o.disc_path);
    const DataArg arg = parse_data_arg(o.data);
    if (arg.kind != "csv")
        throw CLI::ValidationError("--data", "detect scores a csv:<path> test set");
    if (!fs::exists(arg.path)) return missing_file(arg.path);

    const SavedModel gen = load_model(o.gen_path);
    const SavedModel disc = load_model(o.disc_path);
    TabularDataset test = load_tabular_csv(arg.path, o.label_col);
    if (gen.norm) test = apply_minmax(test, *gen.norm);

    AnomalyConfig cfg;
    cfg.lambda = o.lambda;
    cfg.eta = o.eta;
    cfg.inversion_lr = o.inv_lr;
    cfg.inversion_iters = o.inv_iters;
    cfg.validate();

    std::vector<ScoredSample> scored =
        score_dataset(test, gen.model, disc.model, cfg, o.common.seed);
    double gamma;
    if (o.gamma_threshold == "auto")
        gamma = resolve_auto_threshold(scored);
    else
        gamma = std::stod(o.gamma_threshold);
    scored = classify(std::move(scored), gamma);

    json jcfg{{"gen", o.gen_path},   {"disc", o.disc_path}, {"data", o.data},
              {"label_col", o.label_col}, {"lambda", o.lambda},  {"eta", o.eta},
              {"inv_lr", o.inv_lr},  {"inv_iters", o.inv_iters},
              {"gamma_threshold", o.gamma_threshold}};
    return run_with_manifest("detect", o.common.out, o.common.seed, jcfg, [&]() {
        const fs::path dir(o.common.out);
        const std::string scores_path = (dir / "scores.csv").string();
        write_score_report_csv(scored, scores_path);

        std::size_t flagged = 0;
        for (const auto& s : scored) flagged += (s.decision == 1);
        json summary;
        summary["threshold"] = gamma;
        summary["threshold_mode"] = o.gamma_threshold == "auto" ? "auto" : "fixed";
        summary["samples"] = scored.size();
        summary["flagged"] = flagged;
        summary["config"] = jcfg;
        const std::string summary_path = (dir / "summary.json").string();
        std::ofstream sf(summary_path);
        sf << summary.dump(2) << '\n';
        return std::vector<std::string>{scores_path, summary_path};
    });
}

// ---- eval ------------------------------------------------------------------

struct EvalOpts {
    CommonOpts common;
    std::string scores_path;
};

inline int run_eval(const EvalOpts& o) {
    if (!fs::exists(o.scores_path)) return missing_file(o.scores_path);
    const std::vector<ScoredSample> scored = read_score_report_csv(o.scores_path);
    std::vector<double> scores;
    std::vector<int> labels, decisions;
    for (const auto& s : scored) {
        if (s.truth != 0 && s.truth != 1)
            throw std::runtime_error("cli: eval needs ground truth for every sample; sample " +
                                     std::to_string(s.id) + " has none");
        scores.push_back(s.score);
        labels.push_back(s.truth);
        decisions.push_back(s.decision);
    }
    const RocCurve roc = roc_auc(scores, labels);
    const double f1 = f1_score(decisions, labels);

    json jcfg{{"scores", o.scores_path}};
    return run_with_manifest("eval", o.common.out, o.common.seed, jcfg, [&]() {
        const fs::path dir(o.common.out);
        const std::string roc_path = (dir / "roc.csv").string();
        std::ofstream rf(roc_path);
        rf << "fpr,tpr\n";
        for (const RocPoint& pt : roc.points) rf << fmt(pt.fpr) << ',' << fmt(pt.tpr) << '\n';

        json metrics{{"auc", roc.auc}, {"f1", f1}, {"samples", scored.size()}};
        const std::string metrics_path = (dir / "metrics.json").string();
        std::ofstream mf(metrics_path);
        mf << metrics.dump(2) << '\n';
        return std::vector<std::string>{roc_path, metrics_path};
    });
}

}  // namespace detail

// Parses argv (without the program name) and runs one subcommand.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.
inline int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"exponential-objective GAN toolkit: training, closed-form analysis, "
                 "and GAN-based anomaly detection"};
    app.require_subcommand(1);

    detail::SynthOpts synth;
    CLI::App* c_synth = app.add_subcommand("synth", "emit a synthetic dataset as CSV");
    detail::add_common(c_synth, synth.common);
    c_synth->add_option("--data", synth.data, "gauss or synth");
    c_synth->add_option("--mu", synth.mu);
    c_synth->add_option("--sigma", synth.sigma);
    c_synth->add_option("--n", synth.n);
    c_synth->add_option("--n-normal", synth.n_normal);
    c_synth->add_option("--n-anomaly", synth.n_anomaly);
    c_synth->add_option("--dim", synth.dim);
    c_synth->add_option("--separation", synth.separation);

    detail::TrainOpts train;
    CLI::App* c_train = app.add_subcommand("train", "adversarial training -> models + log");
    detail::add_common(c_train, train.common);
    c_train->add_option("--objective", train.objective)
        ->check(CLI::IsMember({"mim", "kl", "kl-ns", "ls", "w"}));
    c_train->add_option("--data", train.data, "gauss, synth or csv:<path>");
    c_train->add_option("--label-col", train.label_col);
    c_train->add_option("--iters", train.iters);
    c_train->add_option("--batch", train.batch);
    c_train->add_option("--hidden", train.hidden);
    c_train->add_option("--latent", train.latent);
    c_train->add_option("--optimizer", train.optimizer)->check(CLI::IsMember({"sgd", "adam"}));
    c_train->add_option("--lr", train.lr);
    c_train->add_option("--d-steps", train.d_steps);
    c_train->add_option("--train-fraction", train.train_fraction);
    c_train->add_option("--mu", train.mu);
    c_train->add_option("--sigma", train.sigma);
    c_train->add_option("--n", train.n);
    c_train->add_option("--n-normal", train.n_normal);
    c_train->add_option("--n-anomaly", train.n_anomaly);
    c_train->add_option("--dim", train.dim);
    c_train->add_option("--separation", train.separation);

    detail::CurvesOpts curves;
    CLI::App* c_curves =
        app.add_subcommand("curves", "fixed-discriminator generator curves per objective");
    detail::add_common(c_curves, curves.common);
    c_curves->add_option("--objective", curves.objectives, "objectives to run")
        ->check(CLI::IsMember({"mim", "kl", "kl-ns", "ls", "w"}));
    c_curves->add_option("--d-pretrain", curves.pretrain)
        ->check(CLI::IsMember(std::vector<std::size_t>{500, 1000, 1500}));
    c_curves->add_option("--g-iters", curves.g_iters);
    c_curves->add_option("--batch", curves.batch);
    c_curves->add_option("--hidden", curves.hidden);
    c_curves->add_option("--latent", curves.latent);
    c_curves->add_option("--optimizer", curves.optimizer)->check(CLI::IsMember({"sgd", "adam"}));
    c_curves->add_option("--lr", curves.lr);
    c_curves->add_option("--mu", curves.mu);
    c_curves->add_option("--sigma", curves.sigma);
    c_curves->add_option("--n", curves.n);

    detail::AnalyzeOpts analyze;
    CLI::App* c_analyze = app.add_subcommand("analyze", "closed-form tables as CSV");
    detail::add_common(c_analyze, analyze.common);
    c_analyze->add_option("--table", analyze.table)
        ->check(CLI::IsMember({"upsilon", "stability", "renyi"}));
    CLI::Option* opt_p = c_analyze->add_option("--p", analyze.p, "rare-atom probability");
    c_analyze->add_option("--eps", analyze.eps, "disturbance");
    c_analyze->add_option("--gamma", analyze.gamma, "perturbation exponent");

    detail::DetectOpts detect;
    CLI::App* c_detect = app.add_subcommand("detect", "score a test CSV with trained models");
    detail::add_common(c_detect, detect.common);
    c_detect->add_option("--gen", detect.gen_path)->required();
    c_detect->add_option("--disc", detect.disc_path)->required();
    c_detect->add_option("--data", detect.data, "csv:<path>")->required();
    c_detect->add_option("--label-col", detect.label_col);
    c_detect->add_option("--lambda", detect.lambda);
    c_detect->add_option("--eta", detect.eta);
    c_detect->add_option("--inv-lr", detect.inv_lr);
    c_detect->add_option("--inv-iters", detect.inv_iters);
    c_detect->add_option("--gamma-threshold", detect.gamma_threshold, "auto or a number");

    detail::EvalOpts eval;
    CLI::App* c_eval = app.add_subcommand("eval", "score report -> ROC CSV + AUC/F1 JSON");
    detail::add_common(c_eval, eval.common);
    c_eval->add_option("--scores", eval.scores_path)->required();

    std::vector<const char*> argv;
    argv.push_back("mimgan");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "mimgan: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*c_synth) return detail::run_synth(synth);
        if (*c_train) return detail::run_train(train);
        if (*c_curves) return detail::run_curves(curves);
        if (*c_analyze) {
            analyze.single_point = opt_p->count() > 0;
            return detail::run_analyze(analyze);
        }
        if (*c_detect) return detail::run_detect(detect);
        if (*c_eval) return detail::run_eval(eval);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "mimgan: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "mimgan: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace mimgan::cli
