#pragma once

// Experiment driver: per-condition map simulation, bulk feature tables,
// stratified splitting, per-wave-height training and reporting.
//
// A condition is (hs, azimuth, class, trial). All randomness of a map comes
// from derive_seed(master_seed, hs bits, azimuth bits, class, trial), so rows
// can be generated in any order or in parallel and still match.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rvdisc/config.hpp"
#include "rvdisc/echo.hpp"
#include "rvdisc/features.hpp"
#include "rvdisc/gbdt.hpp"
#include "rvdisc/png.hpp"
#include "rvdisc/rvmap.hpp"
#include "rvdisc/rvmap_io.hpp"
#include "rvdisc/scene.hpp"

namespace rvdisc {

struct Condition {
    double hs = 1.0;
    double azimuth = 90.0;
    TargetKind kind = TargetKind::Ship;
    int trial = 0;

    std::string id() const {
        char buf[96];
        std::snprintf(buf, sizeof buf, "hs%g_az%g_%s_%04d", hs, azimuth, to_string(kind), trial);
        return buf;
    }

    std::string describe() const {
        char buf[128];
        std::snprintf(buf, sizeof buf, "(hs=%g, azimuth=%g, class=%s, trial=%d)", hs, azimuth, to_string(kind), trial);
        return buf;
    }
};

struct ConditionSeeds {
    std::uint64_t sea, hop, clutter, placement;
};

inline ConditionSeeds condition_seeds(std::uint64_t master, const Condition& c) {
    const std::uint64_t base =
        derive_seed({master, std::bit_cast<std::uint64_t>(c.hs), std::bit_cast<std::uint64_t>(c.azimuth),
                     static_cast<std::uint64_t>(class_label(c.kind)), static_cast<std::uint64_t>(c.trial)});
    return {derive_seed({base, 1}), derive_seed({base, 2}), derive_seed({base, 3}), derive_seed({base, 4})};
}

struct SimulatedMap {
    Condition condition;
    std::vector<ScattererState> scatterers;
    RVMap map;
    FeatureVector features;
};

/// Scatterer states of every rigid unit, one vector per unit.
inline std::vector<std::vector<ScattererState>> condition_scatterers(const PipelineConfig& cfg, const Condition& c,
                                                                     double elevation, const ConditionSeeds& seeds) {
    Rng rng = make_rng({seeds.placement});
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double centre = cfg.scene.range0 + cfg.scene.range_jitter * unit(rng);
    const double scale = 1.0 + cfg.scene.size_jitter * unit(rng);
    const TargetModel target = cfg.scene.target(c.kind, scale);
    const ObservationGeometry geom{centre, c.azimuth, elevation};
    const std::uint64_t sea_seed = seeds.sea;
    const double cpi = cfg.radar.cpi();
    const auto samples = static_cast<std::size_t>(cfg.radar.pulses);
    std::vector<AttitudeSeries> attitudes;
    for (std::size_t u = 0; u < target.units.size(); ++u)
        attitudes.push_back(
            generate_attitude({c.hs, sea_seed}, c.kind, static_cast<int>(u), cpi, samples, cfg.scene.attitude));
    const auto states = project_scatterers(target, geom, attitudes, cpi);
    std::vector<std::vector<ScattererState>> out;
    auto it = states.begin();
    for (const auto& unit : target.units) {
        out.emplace_back(it, it + static_cast<std::ptrdiff_t>(unit.points.size()));
        it += static_cast<std::ptrdiff_t>(unit.points.size());
    }
    return out;
}

/// Noisy pulse train for one condition. A reflector array is the sum of the
/// clean per-unit echoes; clutter is added once to the total.
inline PulseTrain simulate_echo(const PipelineConfig& cfg, const Condition& c, double elevation,
                                std::uint64_t master_seed, std::vector<ScattererState>* states_out = nullptr) {
    const auto seeds = condition_seeds(master_seed, c);
    const RadarParams p = cfg.radar_for_scene();
    const HopCode code = generate_hop_code(p, seeds.hop);
    const auto units = condition_scatterers(cfg, c, elevation, seeds);

    PulseTrain train = synthesize_clean(units.front(), p, code);
    for (std::size_t u = 1; u < units.size(); ++u) {
        const PulseTrain part = synthesize_clean(units[u], p, code);
        for (std::size_t i = 0; i < train.samples.size(); ++i) train.samples[i] += part.samples[i];
    }
    add_clutter(train, p.scr_db, seeds.clutter);
    if (states_out) {
        states_out->clear();
        for (const auto& u : units) states_out->insert(states_out->end(), u.begin(), u.end());
    }
    return train;
}

inline SimulatedMap simulate_map(const PipelineConfig& cfg, const Condition& c, double elevation,
                                 std::uint64_t master_seed) {
    SimulatedMap out;
    out.condition = c;
    try {
        const PulseTrain train = simulate_echo(cfg, c, elevation, master_seed, &out.scatterers);
        out.map = build_rv_map(train, cfg.velocity_grid(), cfg.map_options());
        out.map.label = class_label(c.kind);
        out.map.provenance = c.id();
        out.features = featurize(out.map, cfg.features);
    } catch (const std::exception& e) {
        throw std::runtime_error("condition " + c.describe() + ": " + e.what());
    }
    return out;
}

struct FeatureRow {
    std::string map_id;
    double hs = 0.0;
    double azimuth = 0.0;
    int trial = 0;
    FeatureVector features;
};

struct FeatureTable {
    std::vector<FeatureRow> rows;

    std::size_t size() const { return rows.size(); }
    std::size_t degenerate_count() const {
        return static_cast<std::size_t>(
            std::count_if(rows.begin(), rows.end(), [](const FeatureRow& r) { return r.features.degenerate; }));
    }
    bool operator==(const FeatureTable& o) const;
};

namespace detail {

inline bool same_row(const FeatureRow& a, const FeatureRow& b) {
    const auto& x = a.features;
    const auto& y = b.features;
    return a.map_id == b.map_id && a.hs == b.hs && a.azimuth == b.azimuth && a.trial == b.trial &&
           x.mwr == y.mwr && x.ccf == y.ccf && x.sigma_r == y.sigma_r && x.sigma_v == y.sigma_v &&
           x.extra == y.extra && x.label == y.label && x.degenerate == y.degenerate &&
           x.point_count == y.point_count;
}

}  // namespace detail

inline bool FeatureTable::operator==(const FeatureTable& o) const {
    return rows.size() == o.rows.size() && std::equal(rows.begin(), rows.end(), o.rows.begin(), detail::same_row);
}

/// Conditions in report order: hs, then azimuth, then class (ship first), then trial.
inline std::vector<Condition> plan_conditions(const ExperimentPlan& plan) {
    std::vector<Condition> out;
    out.reserve(plan.row_count());
    for (double hs : plan.wave_heights)
        for (double az : plan.azimuths)
            for (TargetKind k : {TargetKind::Ship, TargetKind::ReflectorArray})
                for (int t = 0; t < plan.maps_per_condition; ++t) out.push_back({hs, az, k, t});
    return out;
}

/// Runs `work(i)` for i in [0, n) on up to `jobs` threads. The first
/// exception (lowest index) is rethrown after all workers stop.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& work) {
    const auto workers = static_cast<std::size_t>(std::clamp<long>(jobs, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mu;
    std::size_t err_index = n;
    std::exception_ptr err;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                work(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < err_index) {
                    err_index = i;
                    err = std::current_exception();
                }
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

struct DatasetOptions {
    int jobs = 1;
    std::string maps_dir;  // when set, every map is written there as <map_id>.rvmap
    std::function<void(std::size_t done, std::size_t total)> progress;
};

inline FeatureTable generate_dataset(const ExperimentPlan& plan, const PipelineConfig& cfg,
                                     const DatasetOptions& opt = {}) {
    plan.validate();
    cfg.radar.validate();
    const auto conditions = plan_conditions(plan);
    if (!opt.maps_dir.empty()) std::filesystem::create_directories(opt.maps_dir);

    FeatureTable table;
    table.rows.resize(conditions.size());
    std::atomic<std::size_t> done{0};
    std::mutex progress_mu;
    parallel_for(conditions.size(), opt.jobs, [&](std::size_t i) {
        const Condition& c = conditions[i];
        const SimulatedMap sm = simulate_map(cfg, c, plan.elevation, plan.master_seed);
        if (!opt.maps_dir.empty())
            write_rvmap_binary(sm.map, (std::filesystem::path(opt.maps_dir) / (c.id() + ".rvmap")).string());
        table.rows[i] = {c.id(), c.hs, c.azimuth, c.trial, sm.features};
        const std::size_t d = ++done;
        if (opt.progress) {
            std::lock_guard<std::mutex> lock(progress_mu);
            opt.progress(d, conditions.size());
        }
    });
    return table;
}

// Feature CSV: header
//   map_id,hs,theta,label,mwr,ccf,sigma_r,sigma_v,degenerate_flag,trial,point_count[,extra_0,...]
// Numbers are written with 17 significant digits so a reload is exact.

inline constexpr const char* kFeatureHeader =
    "map_id,hs,theta,label,mwr,ccf,sigma_r,sigma_v,degenerate_flag,trial,point_count";

inline void write_feature_csv(const FeatureTable& t, std::ostream& os) {
    const std::size_t n_extra = t.rows.empty() ? 0 : t.rows.front().features.extra.size();
    os << kFeatureHeader;
    for (std::size_t e = 0; e < n_extra; ++e) os << ",extra_" << e;
    os << '\n';
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (const auto& r : t.rows) {
        const auto& f = r.features;
        if (f.extra.size() != n_extra) throw std::invalid_argument("write_feature_csv: ragged extra columns");
        os << r.map_id << ',' << num(r.hs) << ',' << num(r.azimuth) << ',' << f.label << ',' << num(f.mwr) << ','
           << num(f.ccf) << ',' << num(f.sigma_r) << ',' << num(f.sigma_v) << ',' << (f.degenerate ? 1 : 0) << ','
           << r.trial << ',' << f.point_count;
        for (double x : f.extra) os << ',' << num(x);
        os << '\n';
    }
}

inline void write_feature_csv(const FeatureTable& t, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_feature_csv(t, os);
}

inline FeatureTable read_feature_csv(std::istream& is, const std::string& name = "<stream>") {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(name + ": empty feature table");
    std::size_t n_cols = 1;
    for (char ch : line) n_cols += ch == ',';
    if (line.rfind(kFeatureHeader, 0) != 0)
        throw std::runtime_error(name + ": unexpected header");
    const std::size_t n_extra = n_cols - 11;

    FeatureTable t;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != n_cols)
            throw std::runtime_error(name + ":" + std::to_string(line_no) + ": expected " + std::to_string(n_cols) +
                                     " columns");
        try {
            FeatureRow r;
            r.map_id = cells[0];
            r.hs = std::stod(cells[1]);
            r.azimuth = std::stod(cells[2]);
            r.features.label = std::stoi(cells[3]);
            r.features.mwr = std::stod(cells[4]);
            r.features.ccf = std::stod(cells[5]);
            r.features.sigma_r = std::stod(cells[6]);
            r.features.sigma_v = std::stod(cells[7]);
            r.features.degenerate = std::stoi(cells[8]) != 0;
            r.trial = std::stoi(cells[9]);
            r.features.point_count = static_cast<std::size_t>(std::stoul(cells[10]));
            for (std::size_t e = 0; e < n_extra; ++e) r.features.extra.push_back(std::stod(cells[11 + e]));
            t.rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw std::runtime_error(name + ":" + std::to_string(line_no) + ": malformed number");
        }
    }
    return t;
}

inline FeatureTable read_feature_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return read_feature_csv(is, path);
}

inline gbdt::Dataset to_dataset(const FeatureTable& t) {
    gbdt::Dataset d;
    d.feature_names = FeatureVector::base_names();
    if (!t.rows.empty())
        for (std::size_t e = 0; e < t.rows.front().features.extra.size(); ++e)
            d.feature_names.push_back("extra_" + std::to_string(e));
    for (const auto& r : t.rows) {
        d.rows.push_back(r.features.values());
        d.labels.push_back(r.features.label);
    }
    return d;
}

inline FeatureTable filter_hs(const FeatureTable& t, double hs) {
    FeatureTable out;
    for (const auto& r : t.rows)
        if (r.hs == hs) out.rows.push_back(r);
    return out;
}

/// Stratified by (label, hs): each stratum of n rows contributes
/// floor(ratio * n) rows to train and the rest to test. Rows keep their
/// table order within each half.
inline std::pair<FeatureTable, FeatureTable> split_dataset(const FeatureTable& t, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split_dataset: ratio must lie in (0, 1)");
    std::map<std::pair<int, double>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < t.rows.size(); ++i) strata[{t.rows[i].features.label, t.rows[i].hs}].push_back(i);

    std::vector<char> in_train(t.rows.size(), 0);
    for (auto& [key, idx] : strata) {
        if (idx.size() < 2) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "split_dataset: stratum (label=%d, hs=%g) has fewer than 2 rows", key.first,
                          key.second);
            throw std::invalid_argument(buf);
        }
        Rng rng = make_rng({seed, 0x73706c6974ULL, static_cast<std::uint64_t>(key.first),
                            std::bit_cast<std::uint64_t>(key.second)});
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(idx.size()) + 1e-9));
        for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = 1;
    }
    FeatureTable train, test;
    for (std::size_t i = 0; i < t.rows.size(); ++i) (in_train[i] ? train : test).rows.push_back(t.rows[i]);
    return {std::move(train), std::move(test)};
}

struct FeatureSummary {
    double mean = 0.0, median = 0.0, stddev = 0.0;
};

inline FeatureSummary summarize(std::vector<double> xs) {
    FeatureSummary s;
    if (xs.empty()) return s;
    const auto n = static_cast<double>(xs.size());
    for (double x : xs) s.mean += x;
    s.mean /= n;
    for (double x : xs) s.stddev += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(s.stddev / n);
    std::sort(xs.begin(), xs.end());
    const std::size_t m = xs.size() / 2;
    s.median = xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
    return s;
}

/// Probability that a random positive scores above a random negative, ties
/// counted half.
inline double auc(const std::vector<double>& positive, const std::vector<double>& negative) {
    if (positive.empty() || negative.empty()) throw std::invalid_argument("auc: empty class");
    std::vector<double> neg = negative;
    std::sort(neg.begin(), neg.end());
    double acc = 0.0;
    for (double p : positive) {
        const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
        const auto hi = std::upper_bound(neg.begin(), neg.end(), p);
        acc += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
    }
    return acc / (static_cast<double>(positive.size()) * static_cast<double>(neg.size()));
}

struct HeightResult {
    double hs = 0.0;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::size_t degenerate = 0;
    gbdt::Metrics metrics;
};

struct RunReport {
    std::vector<HeightResult> heights;
    // feature name -> class name -> summary, over the whole table
    std::map<std::string, std::map<std::string, FeatureSummary>> features;
    std::size_t rows = 0;
    std::size_t degenerate = 0;
    bool pooled = false;
    bool cache_hit = false;
    double generation_seconds = 0.0;
    double training_seconds = 0.0;

    const HeightResult& at(double hs) const {
        for (const auto& h : heights)
            if (h.hs == hs) return h;
        throw std::out_of_range("report has no wave height " + std::to_string(hs));
    }

    /// Everything except timing and cache status.
    bool same_results(const RunReport& o) const;
};

inline nlohmann::json to_json(const RunReport& r, bool with_timing = true) {
    nlohmann::json j;
    j["rows"] = r.rows;
    j["degenerate_maps"] = r.degenerate;
    j["pooled"] = r.pooled;
    for (const auto& h : r.heights) {
        const auto& m = h.metrics;
        j["wave_heights"].push_back({{"hs", h.hs},
                                     {"accuracy", m.accuracy},
                                     {"logloss", m.logloss},
                                     {"true_positive", m.true_positive},
                                     {"true_negative", m.true_negative},
                                     {"false_positive", m.false_positive},
                                     {"false_negative", m.false_negative},
                                     {"train_rows", h.train_rows},
                                     {"test_rows", h.test_rows},
                                     {"degenerate_maps", h.degenerate}});
    }
    for (const auto& [name, by_class] : r.features)
        for (const auto& [cls, s] : by_class)
            j["features"][name][cls] = {{"mean", s.mean}, {"median", s.median}, {"std", s.stddev}};
    if (with_timing) {
        j["timing"] = {{"generation_seconds", r.generation_seconds}, {"training_seconds", r.training_seconds}};
        j["cache_hit"] = r.cache_hit;
    }
    return j;
}

inline bool RunReport::same_results(const RunReport& o) const { return to_json(*this, false) == to_json(o, false); }

/// Content hash of everything that determines the feature table.
inline std::string dataset_cache_key(const ExperimentPlan& plan, const PipelineConfig& cfg) {
    Settings s;
    s.pipeline = cfg;
    s.plan = plan;
    auto j = to_json(s);
    j.erase("gbdt");
    j["plan"].erase("split_ratio");
    j["plan"].erase("pooled");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

struct RunOptions {
    std::string out_dir;  // empty: nothing written, no cache
    bool use_cache = true;
    bool plot = true;
    int jobs = 1;
    std::string maps_dir;
    std::function<void(std::size_t, std::size_t)> progress;
};

/// Accuracy against wave height, one marker per height.
inline void write_accuracy_plot(const RunReport& r, const std::string& path) {
    const std::size_t w = 480, h = 320, margin = 40;
    png::Canvas cv(w, h);
    const png::Rgb axis{0, 0, 0}, grid{220, 220, 220}, ink{200, 30, 30};
    double hs_max = 0.0;
    for (const auto& x : r.heights) hs_max = std::max(hs_max, x.hs);
    hs_max = hs_max > 0.0 ? hs_max * 1.1 : 1.0;
    const double x0 = margin, x1 = w - margin / 2.0, y0 = h - margin, y1 = margin / 2.0;
    auto px = [&](double hs) { return x0 + (x1 - x0) * hs / hs_max; };
    auto py = [&](double acc) { return y0 + (y1 - y0) * (acc - 0.4) / 0.6; };  // 0.4 .. 1.0
    for (int k = 0; k <= 6; ++k) cv.line(x0, py(0.4 + 0.1 * k), x1, py(0.4 + 0.1 * k), grid);
    cv.line(x0, y0, x1, y0, axis);
    cv.line(x0, y0, x0, y1, axis);
    for (std::size_t i = 0; i < r.heights.size(); ++i) {
        const double ax = px(r.heights[i].hs), ay = py(std::clamp(r.heights[i].metrics.accuracy, 0.4, 1.0));
        cv.square(ax, ay, 3, ink);
        if (i > 0)
            cv.line(px(r.heights[i - 1].hs), py(std::clamp(r.heights[i - 1].metrics.accuracy, 0.4, 1.0)), ax, ay, ink, 2);
    }
    cv.save(path);
}

inline void write_accuracy_csv(const RunReport& r, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "hs,accuracy,logloss,true_positive,true_negative,false_positive,false_negative,train_rows,test_rows\n";
    char buf[256];
    for (const auto& h : r.heights) {
        const auto& m = h.metrics;
        std::snprintf(buf, sizeof buf, "%g,%.6f,%.6f,%zu,%zu,%zu,%zu,%zu,%zu\n", h.hs, m.accuracy, m.logloss,
                      m.true_positive, m.true_negative, m.false_positive, m.false_negative, h.train_rows,
                      h.test_rows);
        os << buf;
    }
}

/// Trains and evaluates on an existing table. One model per wave height
/// unless `pooled`. Models are written to `model_dir` when it is set.
inline RunReport evaluate_table(const FeatureTable& table, const ExperimentPlan& plan, const gbdt::Config& gcfg,
                                const std::string& model_dir = {}) {
    RunReport report;
    report.rows = table.size();
    report.degenerate = table.degenerate_count();
    report.pooled = plan.pooled;

    const auto names = FeatureVector::base_names();
    for (std::size_t f = 0; f < names.size(); ++f) {
        std::vector<double> ship, array;
        for (const auto& r : table.rows) (r.features.label == 1 ? ship : array).push_back(r.features.values()[f]);
        report.features[names[f]]["ship"] = summarize(ship);
        report.features[names[f]]["array"] = summarize(array);
    }

    const auto t0 = std::chrono::steady_clock::now();
    const auto [train, test] = split_dataset(table, plan.split_ratio, derive_seed({plan.master_seed, 0x7370ULL}));
    auto save_model = [&](const gbdt::Model& m, const std::string& name) {
        if (model_dir.empty()) return;
        std::filesystem::create_directories(model_dir);
        gbdt::save(m, (std::filesystem::path(model_dir) / name).string());
    };
    std::optional<gbdt::Model> pooled_model;
    if (plan.pooled) {
        pooled_model = gbdt::train(to_dataset(train), gcfg);
        save_model(*pooled_model, "model_pooled.json");
    }
    for (double hs : plan.wave_heights) {
        const FeatureTable tr = filter_hs(train, hs), te = filter_hs(test, hs);
        HeightResult h;
        h.hs = hs;
        h.train_rows = tr.size();
        h.test_rows = te.size();
        h.degenerate = filter_hs(table, hs).degenerate_count();
        if (plan.pooled) {
            h.metrics = gbdt::evaluate(*pooled_model, to_dataset(te));
        } else {
            const gbdt::Model m = gbdt::train(to_dataset(tr), gcfg);
            char name[64];
            std::snprintf(name, sizeof name, "model_hs%g.json", hs);
            save_model(m, name);
            h.metrics = gbdt::evaluate(m, to_dataset(te));
        }
        report.heights.push_back(h);
    }
    report.training_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

/// Generates (or loads from the content-addressed cache under out_dir) the
/// feature table, trains, evaluates and writes report.json,
/// accuracy_vs_hs.csv and accuracy_vs_hs.png.
inline RunReport run_experiment(const ExperimentPlan& plan, const PipelineConfig& cfg, const gbdt::Config& gcfg,
                                const RunOptions& opt = {}) {
    plan.validate();
    gcfg.validate();
    namespace fs = std::filesystem;
    const bool write = !opt.out_dir.empty();
    if (write) fs::create_directories(opt.out_dir);
    const fs::path cache = write ? fs::path(opt.out_dir) / "cache" / ("features-" + dataset_cache_key(plan, cfg) + ".csv")
                                 : fs::path();

    FeatureTable table;
    bool hit = false;
    const auto t0 = std::chrono::steady_clock::now();
    if (write && opt.use_cache && fs::exists(cache)) {
        table = read_feature_csv(cache.string());
        hit = table.size() == plan.row_count();
    }
    if (!hit) {
        table = generate_dataset(plan, cfg, {opt.jobs, opt.maps_dir, opt.progress});
        if (write) {
            fs::create_directories(cache.parent_path());
            write_feature_csv(table, cache.string());
        }
    }
    const double gen = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    RunReport report = evaluate_table(table, plan, gcfg, write ? (fs::path(opt.out_dir) / "models").string() : "");
    report.generation_seconds = gen;
    report.cache_hit = hit;
    if (write) {
        write_feature_csv(table, (fs::path(opt.out_dir) / "features.csv").string());
        write_accuracy_csv(report, (fs::path(opt.out_dir) / "accuracy_vs_hs.csv").string());
        std::ofstream((fs::path(opt.out_dir) / "report.json").string()) << to_json(report).dump(2) << '\n';
        if (opt.plot) write_accuracy_plot(report, (fs::path(opt.out_dir) / "accuracy_vs_hs.png").string());
    }
    return report;
}

}  // namespace rvdisc
