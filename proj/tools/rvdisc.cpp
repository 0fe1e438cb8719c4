// rvdisc: simulate RV maps, build feature tables, train and evaluate the
// ship / reflector-array classifier.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "rvdisc/config.hpp"
#include "rvdisc/harness.hpp"
#include "rvdisc/rvmap_io.hpp"

namespace fs = std::filesystem;
using namespace rvdisc;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool paper_scale = false;
    std::string out_dir = "out";
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool quiet = false;

    Settings settings() const {
        Settings s = config.empty() ? Settings{} : load_settings(config);
        if (seed) s.plan.master_seed = *seed;
        if (paper_scale) s.plan.maps_per_condition = ExperimentPlan::kPaperMapsPerCondition;
        return s;
    }

    std::function<void(std::size_t, std::size_t)> progress() const {
        if (quiet) return {};
        return [](std::size_t done, std::size_t total) {
            if (done % 50 == 0 || done == total) std::fprintf(stderr, "\r%zu / %zu maps", done, total);
            if (done == total) std::fprintf(stderr, "\n");
        };
    }
};

void print_metrics(const gbdt::Metrics& m) {
    std::printf("accuracy %.4f  logloss %.4f  tp %zu tn %zu fp %zu fn %zu\n", m.accuracy, m.logloss,
                m.true_positive, m.true_negative, m.false_positive, m.false_negative);
}

nlohmann::json metrics_json(const gbdt::Metrics& m) {
    return {{"accuracy", m.accuracy},           {"logloss", m.logloss},
            {"true_positive", m.true_positive}, {"true_negative", m.true_negative},
            {"false_positive", m.false_positive}, {"false_negative", m.false_negative}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ship versus corner-reflector-array discrimination with frequency-agile radar"};
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    app.add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", c.seed, "master seed");
    app.add_flag("--paper-scale", c.paper_scale, "100 maps per condition");
    app.add_option("--out-dir", c.out_dir, "output directory");
    app.add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("-q,--quiet", c.quiet, "no progress output");

    auto* dump = app.add_subcommand("config", "print the effective config as JSON");

    auto* sim = app.add_subcommand("simulate", "one RV map to CSV, binary and PNG");
    std::string kind = "ship";
    double hs = 1.0, azimuth = 90.0;
    int trial = 0;
    bool save_echo = false;
    sim->add_option("--kind", kind, "ship or array")->check(CLI::IsMember({"ship", "array"}));
    sim->add_option("--hs", hs, "significant wave height, m");
    sim->add_option("--azimuth", azimuth, "azimuth, deg");
    sim->add_option("--trial", trial, "trial index");
    sim->add_flag("--save-echo", save_echo, "also write the raw pulse train");

    auto* ds = app.add_subcommand("dataset", "generate the feature table");
    bool save_maps = false;
    ds->add_flag("--save-maps", save_maps, "store every RV map under <out-dir>/maps");

    auto* tr = app.add_subcommand("train", "split a feature table and train the classifiers");
    std::string features_path;
    tr->add_option("--features", features_path, "feature CSV (default <out-dir>/features.csv)");
    bool pooled = false;
    tr->add_flag("--pooled", pooled, "one model over all wave heights");

    auto* ev = app.add_subcommand("eval", "evaluate a model on a feature table");
    std::string model_path;
    std::optional<double> eval_hs;
    ev->add_option("--model", model_path, "model JSON")->required();
    ev->add_option("--features", features_path, "feature CSV (default <out-dir>/test.csv)");
    ev->add_option("--hs", eval_hs, "restrict to one wave height");

    auto* rep = app.add_subcommand("report", "full experiment: accuracy CSV, plot and report JSON");
    bool no_cache = false;
    rep->add_flag("--no-cache", no_cache, "regenerate the dataset");
    rep->add_flag("--pooled", pooled, "one model over all wave heights");

    CLI11_PARSE(app, argc, argv);

    try {
        Settings s = c.settings();
        if (pooled) s.plan.pooled = true;
        const fs::path out(c.out_dir);

        if (*dump) {
            std::cout << to_json(s).dump(2) << '\n';
        } else if (*sim) {
            fs::create_directories(out);
            const Condition cond{hs, azimuth, target_kind_from_string(kind), trial};
            const SimulatedMap sm = simulate_map(s.pipeline, cond, s.plan.elevation, s.plan.master_seed);
            const std::string stem = (out / cond.id()).string();
            write_rvmap_csv(sm.map, stem + ".csv");
            write_rvmap_binary(sm.map, stem + ".rvmap");
            write_rvmap_png(sm.map, stem + ".png");
            if (save_echo) {
                const PulseTrain t = simulate_echo(s.pipeline, cond, s.plan.elevation, s.plan.master_seed);
                std::ofstream os(stem + ".rvpt", std::ios::binary);
                write_pulse_train(os, t);
            }
            const auto& f = sm.features;
            nlohmann::json j = {{"map_id", cond.id()},     {"label", f.label},   {"mwr", f.mwr},
                                {"ccf", f.ccf},            {"sigma_r", f.sigma_r}, {"sigma_v", f.sigma_v},
                                {"degenerate", f.degenerate}, {"point_count", f.point_count}};
            std::ofstream(stem + ".json") << j.dump(2) << '\n';
            std::cout << j.dump(2) << '\n';
        } else if (*ds) {
            fs::create_directories(out);
            const auto table =
                generate_dataset(s.plan, s.pipeline, {c.jobs, save_maps ? (out / "maps").string() : "", c.progress()});
            write_feature_csv(table, (out / "features.csv").string());
            std::printf("%zu rows (%zu degenerate) -> %s\n", table.size(), table.degenerate_count(),
                        (out / "features.csv").c_str());
        } else if (*tr) {
            fs::create_directories(out);
            const auto table = read_feature_csv(features_path.empty() ? (out / "features.csv").string() : features_path);
            const auto [train, test] =
                split_dataset(table, s.plan.split_ratio, derive_seed({s.plan.master_seed, 0x7370ULL}));
            write_feature_csv(train, (out / "train.csv").string());
            write_feature_csv(test, (out / "test.csv").string());
            std::vector<double> heights;
            for (const auto& r : table.rows)
                if (std::find(heights.begin(), heights.end(), r.hs) == heights.end()) heights.push_back(r.hs);
            fs::create_directories(out / "models");
            auto fit = [&](const FeatureTable& t, const std::string& name) {
                const auto model = gbdt::train(to_dataset(t), s.gbdt);
                gbdt::save(model, (out / "models" / name).string());
                std::printf("%s: %zu training rows\n", name.c_str(), t.size());
            };
            if (s.plan.pooled) {
                fit(train, "model_pooled.json");
            } else {
                for (double h : heights) {
                    char name[64];
                    std::snprintf(name, sizeof name, "model_hs%g.json", h);
                    fit(filter_hs(train, h), name);
                }
            }
        } else if (*ev) {
            FeatureTable table = read_feature_csv(features_path.empty() ? (out / "test.csv").string() : features_path);
            if (eval_hs) table = filter_hs(table, *eval_hs);
            const auto m = gbdt::evaluate(gbdt::load(model_path), to_dataset(table));
            print_metrics(m);
            fs::create_directories(out);
            std::ofstream((out / "eval.json").string()) << metrics_json(m).dump(2) << '\n';
        } else if (*rep) {
            RunOptions opt;
            opt.out_dir = c.out_dir;
            opt.use_cache = !no_cache;
            opt.jobs = c.jobs;
            opt.progress = c.progress();
            const auto r = run_experiment(s.plan, s.pipeline, s.gbdt, opt);
            std::printf("%zu rows, %zu degenerate, %s\n", r.rows, r.degenerate,
                        r.cache_hit ? "cached features" : "generated features");
            for (const auto& h : r.heights) {
                std::printf("hs %-4g ", h.hs);
                print_metrics(h.metrics);
            }
            std::printf("report -> %s\n", (out / "report.json").c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
