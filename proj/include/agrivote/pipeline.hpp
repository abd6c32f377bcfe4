#pragma once

#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agrivote/ablation.hpp"
#include "agrivote/bench.hpp"
#include "agrivote/dataset.hpp"
#include "agrivote/ensemble.hpp"
#include "agrivote/figures.hpp"
#include "agrivote/fixture.hpp"
#include "agrivote/labels.hpp"
#include "agrivote/metrics.hpp"
#include "agrivote/models.hpp"
#include "agrivote/probability.hpp"
#include "agrivote/split.hpp"
#include "agrivote/trainer.hpp"

#include <json.hpp>

namespace agrivote {

/// Flat pipeline configuration. Defaults reproduce the standard recipe:
/// seed-42 70/15/15 split, three backbones, Adam 1e-3, batch 32, 10 epochs,
/// best-val checkpoints, equal + validation-weighted + two model-heavy
/// custom weighting schemes, 1000-sample warm benchmark.
struct PipelineConfig {
    std::string dataset_root;
    std::string output_dir = "run_output";
    std::uint64_t seed = 42;
    SplitRatios ratios;
    std::vector<std::string> archs{"resnet50", "efficientnetb0", "densenet121"};
    std::string provider = "random:42";
    std::uint64_t head_seed = 42;
    int epochs = 10;
    double learning_rate = 0.001;
    int batch_size = 32;
    CheckpointPolicy checkpoint_policy = CheckpointPolicy::BestVal;
    std::vector<std::string> schemes{"equal", "valweighted", "custom:0.5,0.5,2.0",
                                     "custom:2.0,0.5,0.5"};
    std::size_t bench_samples = 1000;
    std::size_t bench_warmup = 50;
    bool bench_enabled = true;
    bool parallel_train = false;

    TrainConfig train_config() const {
        TrainConfig cfg;
        cfg.learning_rate = learning_rate;
        cfg.batch_size = batch_size;
        cfg.epochs = epochs;
        cfg.checkpoint_policy = checkpoint_policy;
        return cfg;
    }
};

inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
    return nlohmann::json{
        {"dataset_root", cfg.dataset_root},
        {"output_dir", cfg.output_dir},
        {"seed", cfg.seed},
        {"ratio_train", cfg.ratios.train},
        {"ratio_val", cfg.ratios.val},
        {"ratio_test", cfg.ratios.test},
        {"archs", cfg.archs},
        {"provider", cfg.provider},
        {"head_seed", cfg.head_seed},
        {"epochs", cfg.epochs},
        {"learning_rate", cfg.learning_rate},
        {"batch_size", cfg.batch_size},
        {"checkpoint_policy", policy_name(cfg.checkpoint_policy)},
        {"schemes", cfg.schemes},
        {"bench_samples", cfg.bench_samples},
        {"bench_warmup", cfg.bench_warmup},
        {"bench_enabled", cfg.bench_enabled},
        {"parallel_train", cfg.parallel_train},
    };
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    try {
        cfg.dataset_root = j.value("dataset_root", cfg.dataset_root);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.ratios.train = j.value("ratio_train", cfg.ratios.train);
        cfg.ratios.val = j.value("ratio_val", cfg.ratios.val);
        cfg.ratios.test = j.value("ratio_test", cfg.ratios.test);
        cfg.archs = j.value("archs", cfg.archs);
        cfg.provider = j.value("provider", cfg.provider);
        cfg.head_seed = j.value("head_seed", cfg.head_seed);
        cfg.epochs = j.value("epochs", cfg.epochs);
        cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
        cfg.batch_size = j.value("batch_size", cfg.batch_size);
        if (j.contains("checkpoint_policy"))
            cfg.checkpoint_policy = policy_from_string(j.at("checkpoint_policy").get<std::string>());
        cfg.schemes = j.value("schemes", cfg.schemes);
        cfg.bench_samples = j.value("bench_samples", cfg.bench_samples);
        cfg.bench_warmup = j.value("bench_warmup", cfg.bench_warmup);
        cfg.bench_enabled = j.value("bench_enabled", cfg.bench_enabled);
        cfg.parallel_train = j.value("parallel_train", cfg.parallel_train);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad pipeline config: ") + e.what());
    }
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    try {
        return config_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, "bad config JSON in " + path.string() + ": " + e.what());
    }
}

/// Hash of the canonical (sorted-key) dump of every config field; changes iff
/// some field changes.
inline std::string config_hash(const PipelineConfig& cfg) {
    return content_hash(config_to_json(cfg).dump());
}

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

/// Stage failures rethrow as "[stage <name>] <original message>" with the
/// original error code preserved.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), "[stage " + stage + "] " + e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::IoError, "[stage " + stage + "] " + e.what());
    }
}

struct PipelineResult {
    std::filesystem::path output_dir;
    LabelRegistry registry;
    SplitManifest manifest;
    std::map<std::string, TrainHistory> histories;        // by arch tag
    std::map<std::string, double> member_test_accuracy;   // by arch tag
    double ensemble_test_accuracy = 0.0;                  // equal-weight full vote
    MetricsReport ensemble_report;
    CropReport crops;
    AblationGrid grid;
    std::vector<BenchmarkResult> bench_results;
    std::map<std::string, std::filesystem::path> artifacts;
};

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    // Validate inputs before touching the output directory so a bad config
    // leaves nothing behind.
    run_stage("scan", [&] {
        if (!std::filesystem::is_directory(cfg.dataset_root))
            raise(ErrorCode::IoError, "dataset root not found: " + cfg.dataset_root);
        require(!cfg.archs.empty(), ErrorCode::NoModels, "no architectures configured");
        for (const std::string& arch : cfg.archs) arch_from_string(arch);
        cfg.ratios.validate();
        cfg.train_config().validate();
        return 0;
    });

    PipelineResult result;
    result.output_dir = cfg.output_dir;
    const std::filesystem::path out = cfg.output_dir;
    std::filesystem::create_directories(out);

    // --- registry + split ---------------------------------------------------
    const DatasetListing listing = run_stage("scan", [&] { return scan_dataset(cfg.dataset_root); });
    result.registry = listing.registry;
    const std::string reg_hash = registry_hash(result.registry);
    run_stage("scan", [&] {
        save_registry(result.registry, out / "registry.csv");
        return 0;
    });
    result.artifacts["registry"] = out / "registry.csv";

    result.manifest = run_stage("split", [&] {
        return make_split(listing.files, cfg.ratios, cfg.seed, reg_hash,
                          result.registry.num_classes());
    });
    run_stage("split", [&] {
        save_manifest(result.manifest, out / "manifest.csv");
        return 0;
    });
    result.artifacts["manifest"] = out / "manifest.csv";

    // --- models + features ---------------------------------------------------
    const std::unique_ptr<WeightProvider> provider =
        run_stage("provider", [&] { return make_provider(cfg.provider); });

    std::vector<AdaptedModel> models;
    run_stage("build", [&] {
        for (std::size_t i = 0; i < cfg.archs.size(); ++i) {
            ModelSpec spec{arch_from_string(cfg.archs[i]), result.registry.num_classes(), true};
            // per-model head seed, independent of training order
            const std::uint64_t head_seed =
                mix_seed(cfg.head_seed, static_cast<std::uint64_t>(spec.arch));
            models.push_back(build_model(spec, head_seed, *provider));
        }
        return 0;
    });

    std::vector<AdaptedModel*> model_ptrs;
    for (AdaptedModel& model : models) model_ptrs.push_back(&model);
    const std::vector<FeatureDataset> train_features = run_stage("features", [&] {
        return extract_split_features(model_ptrs, result.manifest, Split::Train, cfg.dataset_root);
    });
    const std::vector<FeatureDataset> val_features = run_stage("features", [&] {
        return extract_split_features(model_ptrs, result.manifest, Split::Val, cfg.dataset_root);
    });
    const std::vector<FeatureDataset> test_features = run_stage("features", [&] {
        return extract_split_features(model_ptrs, result.manifest, Split::Test, cfg.dataset_root);
    });

    // --- training -------------------------------------------------------------
    run_stage("train", [&] {
        const TrainConfig train_cfg = cfg.train_config();
        const auto train_one = [&](std::size_t i) {
            return agrivote::train(models[i], train_features[i], val_features[i], train_cfg);
        };
        std::vector<TrainHistory> histories(models.size());
        if (cfg.parallel_train) {
            std::vector<std::future<TrainHistory>> futures;
            for (std::size_t i = 0; i < models.size(); ++i)
                futures.push_back(std::async(std::launch::async, train_one, i));
            for (std::size_t i = 0; i < models.size(); ++i) histories[i] = futures[i].get();
        } else {
            for (std::size_t i = 0; i < models.size(); ++i) histories[i] = train_one(i);
        }
        for (std::size_t i = 0; i < models.size(); ++i) {
            const std::string tag = models[i].tag();
            result.histories[tag] = histories[i];
            save_checkpoint(models[i], histories[i], train_cfg.checkpoint_policy,
                            out / "checkpoints" / (tag + ".ckpt.json"));
            write_file(out / "history" / (tag + "_history.csv"), history_to_csv(histories[i]));
            result.artifacts["checkpoint:" + tag] = out / "checkpoints" / (tag + ".ckpt.json");
            result.artifacts["history:" + tag] = out / "history" / (tag + "_history.csv");
        }
        return 0;
    });

    // --- probability caches on the test split ---------------------------------
    std::vector<ProbabilityMatrix> caches;
    run_stage("infer", [&] {
        for (std::size_t i = 0; i < models.size(); ++i) {
            ProbabilityMatrix matrix = probabilities_from_features(models[i], test_features[i]);
            caches.push_back(sorted_by_image_id(matrix));
            const std::filesystem::path path = out / "caches" / (models[i].tag() + ".probs.csv");
            save_cache(caches.back(), reg_hash, path);
            result.artifacts["cache:" + models[i].tag()] = path;
        }
        return 0;
    });
    const std::vector<int> truth = run_stage("infer", [&] {
        return truth_for_image_ids(result.manifest, caches.front().image_ids);
    });

    // --- ensemble + metrics ----------------------------------------------------
    const ProbabilityMatrix ensemble = run_stage("ensemble", [&] {
        ProbabilityMatrix vote = soft_vote(caches, make_scheme_equal(caches.size()));
        vote.model_tag = "ensemble-equal";
        save_cache(vote, reg_hash, out / "caches" / "ensemble_equal.probs.csv");
        result.artifacts["cache:ensemble-equal"] = out / "caches" / "ensemble_equal.probs.csv";
        return vote;
    });

    run_stage("metrics", [&] {
        const int C = result.registry.num_classes();
        for (std::size_t i = 0; i < models.size(); ++i)
            result.member_test_accuracy[models[i].tag()] =
                report(confusion(truth, predict(caches[i]), C)).overall_accuracy;
        result.ensemble_report = report(confusion(truth, predict(ensemble), C));
        result.ensemble_test_accuracy = result.ensemble_report.overall_accuracy;
        result.crops = crop_report(result.ensemble_report.confusion, result.registry);

        const std::vector<std::string> names = class_names(result.registry);
        write_file(out / "metrics_report.csv", report_to_csv(result.ensemble_report, names));
        write_file(out / "metrics_report.json",
                   report_to_json(result.ensemble_report, names).dump(2) + "\n");
        write_file(out / "confusion_matrix.csv",
                   confusion_to_csv(result.ensemble_report.confusion, names));
        write_file(out / "crop_report.csv", crop_report_to_csv(result.crops));
        result.artifacts["metrics_csv"] = out / "metrics_report.csv";
        result.artifacts["metrics_json"] = out / "metrics_report.json";
        result.artifacts["confusion"] = out / "confusion_matrix.csv";
        result.artifacts["crop_report"] = out / "crop_report.csv";
        return 0;
    });

    // --- ablation grid ----------------------------------------------------------
    run_stage("ablate", [&] {
        std::vector<NamedScheme> named;
        for (const std::string& text : cfg.schemes) {
            for (SchemeSpec spec : parse_scheme_list(text)) {
                if (spec.kind == SchemeKind::ValidationWeighted && spec.values.empty()) {
                    // fill from the recorded best validation accuracies, in percent
                    for (const AdaptedModel& model : models)
                        spec.values.push_back(result.histories[model.tag()].best_val_accuracy *
                                              100.0);
                }
                named.push_back({spec.name, make_scheme(spec, caches.size())});
            }
        }
        result.grid = run_grid(caches, truth, named);
        write_file(out / "ablation_grid.csv", grid_to_csv(result.grid));
        result.artifacts["grid"] = out / "ablation_grid.csv";
        return 0;
    });

    // --- benchmark ----------------------------------------------------------------
    if (cfg.bench_enabled) {
        run_stage("bench", [&] {
            const std::vector<ManifestEntry> test_entries =
                entries_for_split(result.manifest, Split::Test);
            const std::size_t samples = std::min(cfg.bench_samples, test_entries.size());
            std::vector<Tensor3> pool;
            pool.reserve(samples);
            for (std::size_t i = 0; i < samples; ++i)
                pool.push_back(
                    load_preprocessed(cfg.dataset_root, test_entries[i].relative_path));
            std::vector<BenchmarkResult> rows;
            for (const AdaptedModel& model : models)
                rows.push_back(bench_model(model, pool, samples, cfg.bench_warmup));
            rows.push_back(bench_ensemble(std::span<const AdaptedModel>(models), pool, samples,
                                          cfg.bench_warmup));
            result.bench_results = rows;
            write_file(out / "bench.csv", bench_to_csv(rows));
            result.artifacts["bench"] = out / "bench.csv";
            return 0;
        });
    }

    // --- figures + run summary -------------------------------------------------
    run_stage("figures", [&] {
        const FigurePaths paths = emit_figures(result.ensemble_report, result.grid,
                                               class_names(result.registry), out / "figures");
        result.artifacts["figure:confusion"] = paths.confusion_heatmap;
        result.artifacts["figure:comparison"] = paths.model_comparison;
        return 0;
    });

    run_stage("summary", [&] {
        nlohmann::json summary;
        summary["tool_version"] = kToolVersion;
        summary["config"] = config_to_json(cfg);
        summary["config_hash"] = config_hash(cfg);
        summary["seed"] = cfg.seed;
        summary["registry_hash"] = reg_hash;
        nlohmann::json seeds = nlohmann::json::object();
        for (const AdaptedModel& model : models)
            seeds[model.tag()] = model.head_seed;
        summary["head_seeds"] = seeds;
        nlohmann::json accs = nlohmann::json::object();
        for (const auto& [tag, acc] : result.member_test_accuracy) accs[tag] = acc;
        summary["member_test_accuracy"] = accs;
        summary["ensemble_test_accuracy"] = result.ensemble_test_accuracy;
        nlohmann::json artifact_list = nlohmann::json::object();
        for (const auto& [key, path] : result.artifacts) artifact_list[key] = path.string();
        summary["artifacts"] = artifact_list;
        write_file(out / "run_summary.json", summary.dump(2) + "\n");
        result.artifacts["summary"] = out / "run_summary.json";
        return 0;
    });

    return result;
}

}  // namespace agrivote
