// agrivote command-line tool: dataset splitting, head training, cached
// inference, ensemble voting, ablations, metrics, latency benchmarks, and
// the end-to-end pipeline.

#include <CLI11.hpp>

#include <agrivote/agrivote.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace agrivote;

SplitRatios parse_ratios(const std::string& text) {
    const auto parts = split_string(text, ',');
    require(parts.size() == 3, ErrorCode::BadRatios, "ratios must be <train>,<val>,<test>");
    SplitRatios ratios;
    ratios.train = parse_double(parts[0], "ratios");
    ratios.val = parse_double(parts[1], "ratios");
    ratios.test = parse_double(parts[2], "ratios");
    return ratios;
}

std::vector<ProbabilityMatrix> load_cache_files(const std::vector<std::string>& paths,
                                                std::string* registry_hash_out = nullptr) {
    std::vector<ProbabilityMatrix> matrices;
    std::string reg_hash;
    for (const std::string& path : paths) {
        ProbabilityCache cache = load_cache(path);
        if (matrices.empty()) {
            reg_hash = cache.registry_hash;
        } else {
            require(cache.registry_hash == reg_hash, ErrorCode::AlignmentError,
                    "caches were produced against different registries");
        }
        matrices.push_back(std::move(cache.matrix));
    }
    if (registry_hash_out != nullptr) *registry_hash_out = reg_hash;
    return matrices;
}

int cmd_make_fixture(const std::string& out_dir, int classes, int per_class, int size,
                     std::uint64_t seed, double noise, double jitter, bool generic_names) {
    FixtureSpec spec;
    spec.out_dir = out_dir;
    spec.images_per_class = per_class;
    spec.image_size = size;
    spec.seed = seed;
    spec.pixel_noise = noise;
    spec.image_jitter = jitter;
    if (generic_names || classes != 15) {
        for (int k = 0; k < classes; ++k) {
            char name[32];
            std::snprintf(name, sizeof(name), "Class_%02d", k);
            spec.class_names.emplace_back(name);
        }
    }
    const auto names = generate_fixture(spec);
    std::printf("wrote %d x %zu images under %s\n", per_class, names.size(), out_dir.c_str());
    return 0;
}

int cmd_split(const std::string& root, std::uint64_t seed, const std::string& ratios_text,
              const std::string& out, const std::string& registry_out) {
    const DatasetListing listing = scan_dataset(root);
    const std::string reg_hash = registry_hash(listing.registry);
    const SplitManifest manifest = make_split(listing.files, parse_ratios(ratios_text), seed,
                                              reg_hash, listing.registry.num_classes());
    save_manifest(manifest, out);
    if (!registry_out.empty()) save_registry(listing.registry, registry_out);
    std::size_t train = 0, val = 0, test = 0;
    for (const ManifestEntry& e : manifest.entries) {
        if (e.split == Split::Train) ++train;
        else if (e.split == Split::Val) ++val;
        else ++test;
    }
    std::printf("manifest %s: %zu train / %zu val / %zu test (registry %s)\n", out.c_str(), train,
                val, test, reg_hash.c_str());
    return 0;
}

int cmd_train(const std::string& arch, const std::string& manifest_path, const std::string& out,
              const std::string& root, const std::string& provider_desc, int epochs, double lr,
              int batch, const std::string& policy, std::uint64_t seed,
              const std::string& history_out) {
    const SplitManifest manifest = load_manifest(manifest_path);
    int num_classes = 0;
    for (const ManifestEntry& e : manifest.entries) num_classes = std::max(num_classes, e.class_id + 1);

    const auto provider = make_provider(provider_desc);
    AdaptedModel model = build_model({arch_from_string(arch), num_classes, true}, seed, *provider);

    const FeatureDataset train_set = extract_split_features(model, manifest, Split::Train, root);
    const FeatureDataset val_set = extract_split_features(model, manifest, Split::Val, root);

    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.batch_size = batch;
    cfg.checkpoint_policy = policy_from_string(policy);
    const TrainHistory history = train(model, train_set, val_set, cfg);

    save_checkpoint(model, history, cfg.checkpoint_policy, out);
    // history always lands on disk; default next to the checkpoint
    const std::string history_path =
        history_out.empty() ? fs::path(out).replace_extension().string() + "_history.csv"
                            : history_out;
    write_file(history_path, history_to_csv(history));
    std::printf("%s: best val accuracy %.4f at epoch %d -> %s (history %s)\n",
                model.tag().c_str(), history.best_val_accuracy, history.best_epoch, out.c_str(),
                history_path.c_str());
    return 0;
}

int cmd_infer_cache(const std::string& checkpoint_path, const std::string& manifest_path,
                    const std::string& root, const std::string& split_text,
                    const std::string& out) {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const SplitManifest manifest = load_manifest(manifest_path);
    AdaptedModel model = ckpt.model;
    const FeatureDataset data =
        extract_split_features(model, manifest, split_from_string(split_text), root);
    const ProbabilityMatrix matrix = probabilities_from_features(model, data);
    save_cache(matrix, manifest.registry_hash, out);
    std::printf("%s: cached %lld rows -> %s\n", model.tag().c_str(),
                static_cast<long long>(matrix.rows()), out.c_str());
    return 0;
}

int cmd_ensemble(const std::vector<std::string>& cache_paths, const std::string& scheme_text,
                 const std::string& out, const std::string& tag,
                 const std::string& predictions_out) {
    std::string reg_hash;
    const std::vector<ProbabilityMatrix> matrices = load_cache_files(cache_paths, &reg_hash);
    const std::vector<SchemeSpec> schemes = parse_scheme_list(scheme_text);
    require(schemes.size() == 1, ErrorCode::InvalidArgument,
            "ensemble takes exactly one scheme; use ablate for several");
    ProbabilityMatrix vote = soft_vote(matrices, make_scheme(schemes[0], matrices.size()));
    if (!tag.empty()) vote.model_tag = tag;
    save_cache(vote, reg_hash, out);
    if (!predictions_out.empty()) {
        const std::vector<int> labels = predict(vote);
        std::string csv = "image_id,predicted_class_id\n";
        for (std::size_t i = 0; i < labels.size(); ++i)
            csv += vote.image_ids[i] + "," + std::to_string(labels[i]) + "\n";
        write_file(predictions_out, csv);
    }
    std::printf("ensemble '%s' over %zu caches -> %s\n", vote.model_tag.c_str(), matrices.size(),
                out.c_str());
    return 0;
}

int cmd_metrics(const std::string& cache_path, const std::string& manifest_path,
                const std::string& registry_path, const std::string& out_dir) {
    const ProbabilityCache cache = load_cache(cache_path);
    const SplitManifest manifest = load_manifest(manifest_path);
    const LabelRegistry registry = load_registry(registry_path);
    require(cache.registry_hash == registry_hash(registry), ErrorCode::AlignmentError,
            "cache was produced against a different registry");

    const std::vector<int> truth = truth_for_image_ids(manifest, cache.matrix.image_ids);
    const MetricsReport rep =
        report(confusion(truth, predict(cache.matrix), registry.num_classes()));
    const CropReport crops = crop_report(rep.confusion, registry);

    const fs::path out = out_dir;
    fs::create_directories(out);
    const std::vector<std::string> names = class_names(registry);
    write_file(out / "metrics_report.csv", report_to_csv(rep, names));
    write_file(out / "metrics_report.json", report_to_json(rep, names).dump(2) + "\n");
    write_file(out / "confusion_matrix.csv", confusion_to_csv(rep.confusion, names));
    write_file(out / "crop_report.csv", crop_report_to_csv(crops));

    std::printf("accuracy %.4f | macro P/R/F1 %.3f/%.3f/%.3f | weighted F1 %.3f -> %s\n",
                rep.overall_accuracy, rep.macro_avg.precision, rep.macro_avg.recall,
                rep.macro_avg.f1, rep.weighted_avg.f1, out_dir.c_str());
    for (const CropEntry& entry : crops.per_crop)
        std::printf("  %-7s %2d classes %6lld images  %s\n", crop_name(entry.crop),
                    entry.num_classes, entry.num_images,
                    entry.accuracy ? (format_fixed(*entry.accuracy * 100.0, 2) + "%").c_str()
                                   : "undefined");
    return 0;
}

int cmd_ablate(const std::vector<std::string>& cache_paths, const std::string& truth_manifest,
               const std::string& schemes_text, const std::string& out) {
    const std::vector<ProbabilityMatrix> matrices = load_cache_files(cache_paths);
    const SplitManifest manifest = load_manifest(truth_manifest);
    const std::vector<int> truth = truth_for_image_ids(manifest, matrices.front().image_ids);

    std::vector<NamedScheme> named;
    for (const SchemeSpec& spec : parse_scheme_list(schemes_text))
        named.push_back({spec.name, make_scheme(spec, matrices.size())});
    const AblationGrid grid = run_grid(matrices, truth, named);
    write_file(out, grid_to_csv(grid));
    for (const GridRow& row : grid.rows)
        std::printf("%-40s %6.2f%%  gap %+.2f%%\n", row.config_name.c_str(),
                    row.test_accuracy * 100.0, row.gap_vs_full * 100.0);
    return 0;
}

int cmd_bench(const std::vector<std::string>& checkpoint_paths, const std::string& images_arg,
              const std::string& root, std::size_t samples, std::size_t warmup, bool concurrent,
              const std::string& out) {
    std::vector<AdaptedModel> models;
    for (const std::string& path : checkpoint_paths) models.push_back(load_checkpoint(path).model);
    require(!models.empty(), ErrorCode::NoModels, "no checkpoints given");

    // --images accepts a class-directory tree or a split manifest
    std::vector<std::string> relative_paths;
    fs::path image_root;
    if (fs::is_directory(images_arg)) {
        image_root = images_arg;
        for (const auto& [path, class_id] : scan_dataset(images_arg).files)
            relative_paths.push_back(path);
    } else {
        image_root = root;
        const SplitManifest manifest = load_manifest(images_arg);
        for (const ManifestEntry& e : entries_for_split(manifest, Split::Test))
            relative_paths.push_back(e.relative_path);
    }
    require(relative_paths.size() >= samples, ErrorCode::InsufficientSamples,
            "need " + std::to_string(samples) + " images, found " +
                std::to_string(relative_paths.size()));

    std::vector<Tensor3> pool;
    pool.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i)
        pool.push_back(load_preprocessed(image_root, relative_paths[i]));

    std::vector<BenchmarkResult> rows;
    for (const AdaptedModel& model : models)
        rows.push_back(bench_model(model, pool, samples, warmup));
    rows.push_back(bench_ensemble(std::span<const AdaptedModel>(models), pool, samples, warmup,
                                  concurrent));
    if (!out.empty()) write_file(out, bench_to_csv(rows));
    std::printf("%-24s %14s %6s\n", "model", "time(ms/image)", "fps");
    for (const BenchmarkResult& r : rows)
        std::printf("%-24s %14.3f %6d\n", r.model_tag.c_str(), r.mean_latency_ms, r.fps);
    if (concurrent)
        std::printf("note: concurrent ensemble timings are not comparable to sequential runs\n");
    return 0;
}

int cmd_report(const std::string& artifacts_dir, const std::string& out_dir) {
    const fs::path dir = artifacts_dir;
    const auto [cm, names] = parse_confusion_csv(read_file(dir / "confusion_matrix.csv"));
    const AblationGrid grid = parse_grid_csv(read_file(dir / "ablation_grid.csv"));
    const MetricsReport rep = report(cm);
    const FigurePaths paths =
        emit_figures(rep, grid, names, out_dir.empty() ? dir / "figures" : fs::path(out_dir));
    std::printf("figures: %s, %s\n", paths.confusion_heatmap.c_str(),
                paths.model_comparison.c_str());
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& dataset_root,
            const std::string& output_dir, const std::uint64_t* seed, bool parallel,
            bool no_bench) {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!dataset_root.empty()) cfg.dataset_root = dataset_root;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (seed != nullptr) cfg.seed = *seed;
    if (parallel) cfg.parallel_train = true;
    if (no_bench) cfg.bench_enabled = false;

    const PipelineResult result = run_pipeline(cfg);
    std::printf("run complete -> %s\n", result.output_dir.c_str());
    for (const auto& [tag, acc] : result.member_test_accuracy)
        std::printf("  %-16s test accuracy %6.2f%%\n", tag.c_str(), acc * 100.0);
    std::printf("  %-16s test accuracy %6.2f%%\n", "ensemble", result.ensemble_test_accuracy * 100.0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agrivote: ensemble image-classification pipeline toolkit"};
    app.require_subcommand(1);

    // make-fixture
    auto* fix = app.add_subcommand("make-fixture", "generate a synthetic class-tinted dataset");
    std::string fix_out = "fixture";
    int fix_classes = 15, fix_per_class = 30, fix_size = 64;
    std::uint64_t fix_seed = 7;
    double fix_noise = 0.25, fix_jitter = 0.10;
    bool fix_generic = false;
    fix->add_option("--out", fix_out, "output directory");
    fix->add_option("--classes", fix_classes, "number of classes");
    fix->add_option("--per-class", fix_per_class, "images per class");
    fix->add_option("--size", fix_size, "image edge length in pixels");
    fix->add_option("--seed", fix_seed, "fixture seed");
    fix->add_option("--noise", fix_noise, "per-pixel noise amplitude");
    fix->add_option("--jitter", fix_jitter, "per-image color jitter amplitude");
    fix->add_flag("--generic-names", fix_generic, "use Class_NN names instead of crop names");

    // split
    auto* split = app.add_subcommand("split", "build the deterministic split manifest");
    std::string split_root, split_out = "manifest.csv", split_registry = "registry.csv";
    std::string split_ratios = "0.7,0.15,0.15";
    std::uint64_t split_seed = 42;
    split->add_option("--dataset-root", split_root, "dataset root directory")->required();
    split->add_option("--seed", split_seed, "split seed");
    split->add_option("--ratios", split_ratios, "train,val,test fractions");
    split->add_option("--out", split_out, "manifest output path");
    split->add_option("--registry-out", split_registry, "registry output path");

    // train
    auto* train_cmd = app.add_subcommand("train", "train one classification head");
    std::string tr_arch, tr_manifest, tr_out, tr_root = ".", tr_provider = "random:42";
    std::string tr_policy = "bestval", tr_history;
    int tr_epochs = 10, tr_batch = 32;
    double tr_lr = 0.001;
    std::uint64_t tr_seed = 42;
    train_cmd->add_option("--arch", tr_arch, "resnet50|efficientnetb0|densenet121")->required();
    train_cmd->add_option("--manifest", tr_manifest, "split manifest path")->required();
    train_cmd->add_option("--out", tr_out, "checkpoint output path")->required();
    train_cmd->add_option("--dataset-root", tr_root, "dataset root directory");
    train_cmd->add_option("--provider", tr_provider, "weight provider descriptor");
    train_cmd->add_option("--epochs", tr_epochs, "training epochs");
    train_cmd->add_option("--lr", tr_lr, "learning rate");
    train_cmd->add_option("--batch", tr_batch, "batch size");
    train_cmd->add_option("--policy", tr_policy, "bestval|final");
    train_cmd->add_option("--seed", tr_seed, "head init seed");
    train_cmd->add_option("--history-out", tr_history, "history CSV output path");

    // infer-cache
    auto* infer = app.add_subcommand("infer-cache", "cache model probabilities for a split");
    std::string ic_ckpt, ic_manifest, ic_root = ".", ic_split = "test", ic_out;
    infer->add_option("--checkpoint", ic_ckpt, "checkpoint path")->required();
    infer->add_option("--manifest", ic_manifest, "split manifest path")->required();
    infer->add_option("--dataset-root", ic_root, "dataset root directory");
    infer->add_option("--split", ic_split, "train|val|test");
    infer->add_option("--out", ic_out, "cache output path")->required();

    // ensemble
    auto* ens = app.add_subcommand("ensemble", "soft-vote cached probabilities");
    std::vector<std::string> ens_caches;
    std::string ens_scheme = "equal", ens_out, ens_tag, ens_preds;
    ens->add_option("--caches", ens_caches, "cache files")->required()->delimiter(',');
    ens->add_option("--scheme", ens_scheme, "equal | valweighted:a1,a2,.. | custom:w1,w2,..");
    ens->add_option("--out", ens_out, "ensemble cache output path")->required();
    ens->add_option("--tag", ens_tag, "model tag for the output cache");
    ens->add_option("--predictions", ens_preds, "also write an image_id,prediction CSV");

    // ablate
    auto* abl = app.add_subcommand("ablate", "run the singleton/pair/scheme ablation grid");
    std::vector<std::string> abl_caches;
    std::string abl_truth, abl_schemes = "equal", abl_out = "grid.csv";
    abl->add_option("--caches", abl_caches, "cache files")->required()->delimiter(',');
    abl->add_option("--truth", abl_truth, "manifest providing true labels")->required();
    abl->add_option("--schemes", abl_schemes,
                    "e.g. equal,valweighted:<a1,a2,a3>,custom:<w1,w2,w3>");
    abl->add_option("--out", abl_out, "grid CSV output path");

    // metrics
    auto* met = app.add_subcommand("metrics", "per-class metrics, confusion, crop roll-up");
    std::string met_cache, met_manifest, met_registry, met_out = "metrics_out";
    met->add_option("--cache", met_cache, "probability cache to evaluate")->required();
    met->add_option("--manifest", met_manifest, "manifest providing true labels")->required();
    met->add_option("--registry", met_registry, "label registry path")->required();
    met->add_option("--out-dir", met_out, "output directory");

    // bench
    auto* ben = app.add_subcommand("bench", "per-image latency benchmark");
    std::vector<std::string> ben_ckpts;
    std::string ben_images, ben_root = ".", ben_out;
    std::size_t ben_samples = 1000, ben_warmup = 50;
    bool ben_concurrent = false;
    ben->add_option("--checkpoints", ben_ckpts, "checkpoint files")->required()->delimiter(',');
    ben->add_option("--images", ben_images, "image directory or split manifest")->required();
    ben->add_option("--dataset-root", ben_root, "root for manifest-relative paths");
    ben->add_option("--samples", ben_samples, "timed samples");
    ben->add_option("--warmup", ben_warmup, "untimed warmup iterations");
    ben->add_flag("--concurrent", ben_concurrent, "overlap member forwards (not Table-comparable)");
    ben->add_option("--out", ben_out, "bench CSV output path");

    // report
    auto* rep = app.add_subcommand("report", "emit figures from run artifacts");
    std::string rep_dir, rep_out;
    rep->add_option("--artifacts", rep_dir, "run output directory")->required();
    rep->add_option("--out-dir", rep_out, "figure output directory (default <artifacts>/figures)");

    // run
    auto* run = app.add_subcommand("run", "full pipeline: split, train, infer, ablate, report");
    std::string run_config, run_root, run_out;
    std::uint64_t run_seed = 42;
    bool run_parallel = false, run_no_bench = false;
    run->add_option("--config", run_config, "pipeline config JSON");
    run->add_option("--dataset-root", run_root, "dataset root directory");
    run->add_option("--out", run_out, "output directory");
    auto* run_seed_opt = run->add_option("--seed", run_seed, "split seed override");
    run->add_flag("--parallel-train", run_parallel, "train the heads in parallel");
    run->add_flag("--no-bench", run_no_bench, "skip the benchmark stage");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fix->parsed())
            return cmd_make_fixture(fix_out, fix_classes, fix_per_class, fix_size, fix_seed,
                                    fix_noise, fix_jitter, fix_generic);
        if (split->parsed())
            return cmd_split(split_root, split_seed, split_ratios, split_out, split_registry);
        if (train_cmd->parsed())
            return cmd_train(tr_arch, tr_manifest, tr_out, tr_root, tr_provider, tr_epochs, tr_lr,
                             tr_batch, tr_policy, tr_seed, tr_history);
        if (infer->parsed()) return cmd_infer_cache(ic_ckpt, ic_manifest, ic_root, ic_split, ic_out);
        if (ens->parsed()) return cmd_ensemble(ens_caches, ens_scheme, ens_out, ens_tag, ens_preds);
        if (abl->parsed()) return cmd_ablate(abl_caches, abl_truth, abl_schemes, abl_out);
        if (met->parsed()) return cmd_metrics(met_cache, met_manifest, met_registry, met_out);
        if (ben->parsed())
            return cmd_bench(ben_ckpts, ben_images, ben_root, ben_samples, ben_warmup,
                             ben_concurrent, ben_out);
        if (rep->parsed()) return cmd_report(rep_dir, rep_out);
        if (run->parsed())
            return cmd_run(run_config, run_root, run_out,
                           run_seed_opt->count() ? &run_seed : nullptr, run_parallel,
                           run_no_bench);
    } catch (const agrivote::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
