// samprio: fit models on core embeddings, rank a fine-tuning pool, and run
// the synthetic budget sweep.
//
// Exit status: 0 success, 1 usage or configuration error, 2 data or pipeline error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "samprio/samprio.hpp"

namespace fs = std::filesystem;
using namespace samprio;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

std::string out_path(const Config& c, const std::string& name) { return (fs::path(c.out_dir) / name).string(); }

void ensure_out_dir(const Config& c) {
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + c.out_dir + ": " + ec.message());
}

Corpus load_required(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("no ") + what + " embeddings path configured");
    return load_embeddings(path);
}

FittedModels load_models(const Config& c) {
    return {load_pca(out_path(c, "pca.bin")), load_predictor(out_path(c, "predictor.bin")),
            load_clusters(out_path(c, "clusters.bin"))};
}

int cmd_fit(const Config& c) {
    const Corpus core = load_required(c.core, "core");
    const Corpus ft = c.finetune.empty() ? Corpus{} : load_embeddings(c.finetune);
    const auto models = fit_models(core, ft, c.pipeline);
    ensure_out_dir(c);
    save_pca(models.pca, out_path(c, "pca.bin"));
    save_clusters(models.clusters, out_path(c, "clusters.bin"));
    save_predictor(models.predictor, out_path(c, "predictor.bin"));

    const auto evr = explained_variance_ratio(models.pca);
    double cum = 0;
    for (double v : evr) cum += v;
    std::printf("pca: %zu -> %zu components, explained variance %.4f\n", models.pca.input_dim(), models.pca.retained(), cum);
    std::printf("clusters: %zu core, %zu error\n", models.clusters.core_count(), models.clusters.error_count());
    for (std::size_t j = 0; j < models.clusters.member_count.size(); ++j)
        std::printf("  %s %zu: %zu members, p95 radius %.4f\n", models.clusters.is_error[j] ? "error" : "core", j,
                    models.clusters.member_count[j], models.clusters.p95_radius[j]);
    return 0;
}

int cmd_rank(const Config& c) {
    const Corpus ft = load_required(c.finetune, "fine-tuning");
    const auto models = load_models(c);
    const auto features = score_pool(models, ft, c.pipeline);
    ensure_out_dir(c);
    write_queue_csv(features.scores, c.strategy, out_path(c, "queue.csv"));
    std::printf("ranked %zu samples by %s -> %s\n", features.scores.size(), std::string(to_string(c.strategy)).c_str(),
                out_path(c, "queue.csv").c_str());
    return 0;
}

int cmd_simulate(const Config& c) {
    const auto result =
        run_budget_sweep(c.synthetic_spec(), c.sim.budgets, c.sim.strategies, c.sim.seeds, c.pipeline, c.sim.threads);
    ensure_out_dir(c);
    write_sweep_csv(result, out_path(c, "sweep.csv"));
    std::cout << write_report(result, out_path(c, "report.csv"), out_path(c, "summary.txt"));
    return 0;
}

int cmd_scatter(const Config& c) {
    Corpus core, ft;
    if (c.core.empty()) {
        // No embeddings configured: show the synthetic benchmark's latent space.
        auto data = generate_synthetic(c.synthetic_spec());
        core = std::move(data.core);
        ft = std::move(data.finetune);
    } else {
        core = load_embeddings(c.core);
        if (!c.finetune.empty()) ft = load_embeddings(c.finetune);
    }
    const auto models = fit_models(core, ft, c.pipeline);
    const auto points = scatter_view(core, ft, models, c.pipeline);
    ensure_out_dir(c);
    export_scatter(points, out_path(c, "scatter.csv"));
    std::printf("wrote %zu points -> %s\n", points.size(), out_path(c, "scatter.csv").c_str());
    return 0;
}

int cmd_report(const Config& c, const std::string& sweep) {
    const auto result = read_sweep_csv(sweep.empty() ? out_path(c, "sweep.csv") : sweep);
    ensure_out_dir(c);
    std::cout << write_report(result, out_path(c, "report.csv"), out_path(c, "summary.txt"));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Annotation prioritization for fine-tuning pools"};
    app.require_subcommand(0, 1);

    std::string config_path, dump_path, out_dir, core, finetune, strategy, sweep;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    auto* seed_opt = app.add_option("--seed", seed, "Master seed");
    app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--out-dir", out_dir, "Directory for all output files");
    app.add_option("--dump-config", dump_path, "Write the effective configuration to this file ('-' for stdout)");
    app.add_option("--set", overrides, "Override a configuration key (key=value), repeatable");

    auto* fit = app.add_subcommand("fit", "Fit PCA, IoU predictor and clusters on core embeddings");
    fit->add_option("--core", core, "Core embeddings (EMB1 or CSV)");
    fit->add_option("--finetune", finetune, "Fine-tuning embeddings joining the PCA fit");
    auto* rank = app.add_subcommand("rank", "Score and rank a fine-tuning pool with fitted models");
    rank->add_option("--finetune", finetune, "Fine-tuning embeddings (EMB1 or CSV)");
    rank->add_option("--strategy", strategy, "bps or mps");
    app.add_subcommand("simulate", "Run the synthetic budget sweep");
    auto* scatter = app.add_subcommand("scatter", "Export a 2-D PCA view with IoU per sample");
    scatter->add_option("--core", core, "Core embeddings; synthetic data when omitted");
    scatter->add_option("--finetune", finetune, "Fine-tuning embeddings");
    auto* report = app.add_subcommand("report", "Summarize an existing sweep.csv");
    report->add_option("--sweep", sweep, "Sweep file (default: <out-dir>/sweep.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    Config config;
    try {
        if (!config_path.empty()) config = load_config(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got \"" + kv + "\"");
            set_config_value(config, detail::trim(std::string_view(kv).substr(0, eq)),
                             detail::trim(std::string_view(kv).substr(eq + 1)));
        }
        if (*seed_opt) config.pipeline.seed = seed;
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (!core.empty()) config.core = core;
        if (!finetune.empty()) config.finetune = finetune;
        if (!strategy.empty()) set_config_value(config, "strategy", strategy);
        validate(config);

        if (!dump_path.empty()) {
            if (dump_path == "-") {
                std::cout << dump_config(config);
            } else {
                std::ofstream out(dump_path, std::ios::trunc);
                if (!(out << dump_config(config))) throw IoError("cannot write " + dump_path);
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }

    if (app.get_subcommands().empty()) {
        if (!dump_path.empty()) return 0;
        std::cerr << app.help();
        return kUsage;
    }

    try {
        if (*fit) return cmd_fit(config);
        if (*rank) return cmd_rank(config);
        if (app.got_subcommand("simulate")) return cmd_simulate(config);
        if (*scatter) return cmd_scatter(config);
        if (*report) return cmd_report(config, sweep);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
