// Experiment orchestration: leave-one-out folds, on-disk run layout,
// evaluation over trained runs and ANOVA comparison between two runs.
//
// Run layout:
//   <run>/experiment.json                       resolved config
//   <run>/fold_<id>/router.json
//   <run>/fold_<id>/split.json
//   <run>/fold_<id>/group_<label>/checkpoint.json
//   <run>/records.csv, summary.json             written by evaluation
//
// Folds are independent; a worker pool trains them concurrently. All
// randomness is derived from per-fold seeds, so the worker count never
// changes results.
#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hrtfgroup/anova.hpp"
#include "hrtfgroup/evaluate.hpp"
#include "hrtfgroup/trainer.hpp"

namespace hrtfgroup {

struct ExperimentConfig {
    Strategy strategy = Strategy::Hybrid;
    double unseen_fraction = 0.2;
    GroupingParams grouping;
    TrainConfig train;
    std::vector<std::string> folds;  // empty = every subject
    std::size_t workers = 1;
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["strategy"] = to_string(c.strategy);
    j["unseen_fraction"] = c.unseen_fraction;
    j["de_threshold"] = c.grouping.de_threshold;
    j["de_band_hz"] = {c.grouping.de_band_lo_hz, c.grouping.de_band_hi_hz};
    j["train"] = to_json(c.train);
    j["folds"] = c.folds;
    j["workers"] = c.workers;
    return j;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("strategy")) c.strategy = strategy_from_string(j.at("strategy"));
    c.unseen_fraction = j.value("unseen_fraction", c.unseen_fraction);
    c.grouping.de_threshold = j.value("de_threshold", c.grouping.de_threshold);
    if (j.contains("de_band_hz")) {
        c.grouping.de_band_lo_hz = j.at("de_band_hz")[0].get<double>();
        c.grouping.de_band_hi_hz = j.at("de_band_hz")[1].get<double>();
    }
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
    if (j.contains("folds")) c.folds = j.at("folds").get<std::vector<std::string>>();
    c.workers = j.value("workers", c.workers);
    return c;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("missing file: " + path.string());
    nlohmann::json j;
    is >> j;
    return experiment_config_from_json(j);
}

// ---------------------------------------------------------------------------
// Model-set persistence
// ---------------------------------------------------------------------------

namespace detail {

inline void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    os << j.dump(2) << "\n";
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("missing file: " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed json " + path.string() + ": " + e.what());
    }
    return j;
}

inline nlohmann::json epoch_log_to_json(const std::vector<EpochLog>& log) {
    auto arr = nlohmann::json::array();
    for (const auto& e : log) {
        arr.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss},
                       {"val_lsd_db", e.val_lsd_db}});
    }
    return arr;
}

}  // namespace detail

inline void save_model_set(GroupedModelSet& set, const std::filesystem::path& fold_dir) {
    std::filesystem::create_directories(fold_dir);
    detail::write_json_file(to_json(set.router), fold_dir / "router.json");

    nlohmann::json split;
    split["fold_subject_id"] = set.plan.fold_subject_id;
    split["seed"] = set.plan.seed;
    split["seen"] = set.plan.seen_direction_indices;
    split["unseen"] = set.plan.unseen_direction_indices;
    split["training_subjects"] = set.training_subject_ids;
    detail::write_json_file(split, fold_dir / "split.json");

    for (auto& gm : set.groups) {
        const auto group_dir = fold_dir / (std::string("group_") + to_string(gm.id.label));
        std::filesystem::create_directories(group_dir);
        nlohmann::json j;
        j["format"] = "hrtfgroup-checkpoint-v1";
        j["strategy"] = to_string(gm.id.strategy);
        j["group"] = to_string(gm.id.label);
        j["direction_indices"] = gm.direction_indices;
        j["manifest"] = to_json(gm.manifest);
        j["manifest_hash"] = gm.manifest_hash;
        j["train_config"] = to_json(set.config);
        j["provenance"] = {{"fold_subject_id", set.fold_subject_id},
                           {"training_subjects", set.training_subject_ids}};
        j["vae"] = nn::to_json(gm.vae);
        j["dnn"] = nn::to_json(gm.dnn);
        j["vae_log"] = detail::epoch_log_to_json(gm.vae_log);
        j["dnn_log"] = detail::epoch_log_to_json(gm.dnn_log);
        detail::write_json_file(j, group_dir / "checkpoint.json");
    }
}

inline GroupedModelSet load_model_set(const std::filesystem::path& fold_dir,
                                      const MeasurementGrid& grid) {
    GroupedModelSet set;
    set.router = router_from_json(detail::read_json_file(fold_dir / "router.json"), grid);
    set.strategy = set.router.strategy;

    const auto split = detail::read_json_file(fold_dir / "split.json");
    set.plan.fold_subject_id = split.at("fold_subject_id").get<std::string>();
    set.plan.seed = split.at("seed").get<std::uint64_t>();
    set.plan.seen_direction_indices = split.at("seen").get<std::vector<std::size_t>>();
    set.plan.unseen_direction_indices = split.at("unseen").get<std::vector<std::size_t>>();
    set.training_subject_ids = split.at("training_subjects").get<std::vector<std::string>>();
    set.fold_subject_id = set.plan.fold_subject_id;

    for (std::size_t g = 0; g < set.router.n_groups(); ++g) {
        const auto label = set.router.labels[g];
        const auto path =
            fold_dir / (std::string("group_") + to_string(label)) / "checkpoint.json";
        const auto j = detail::read_json_file(path);
        if (j.value("format", "") != "hrtfgroup-checkpoint-v1") {
            throw DataError(path.string() + ": unknown checkpoint format");
        }
        GroupModel gm;
        gm.id = {strategy_from_string(j.at("strategy").get<std::string>()),
                 group_label_from_string(j.at("group").get<std::string>())};
        gm.direction_indices = j.at("direction_indices").get<std::vector<std::size_t>>();
        gm.manifest = preproc_manifest_from_json(j.at("manifest"));
        gm.manifest_hash = j.at("manifest_hash").get<std::string>();
        if (manifest_hash(gm.manifest) != gm.manifest_hash) {
            throw ConfigError(path.string() +
                              ": manifest hash mismatch (preprocessing statistics were "
                              "altered after training)");
        }
        set.config = train_config_from_json(j.at("train_config"));
        gm.vae = nn::Vae(set.config.bn_momentum, set.config.bn_epsilon);
        nn::vae_from_json(j.at("vae"), gm.vae);
        gm.dnn = nn::PredictorDnn(set.config.bn_momentum, set.config.bn_epsilon);
        nn::dnn_from_json(j.at("dnn"), gm.dnn);
        set.groups.push_back(std::move(gm));
    }
    return set;
}

// ---------------------------------------------------------------------------
// Run orchestration
// ---------------------------------------------------------------------------

inline std::vector<std::string> fold_subjects(const Dataset& dataset,
                                              const ExperimentConfig& cfg) {
    if (cfg.folds.empty()) {
        std::vector<std::string> all;
        for (const auto& s : dataset.subjects) all.push_back(s.id);
        return all;
    }
    for (const auto& id : cfg.folds) {
        if (dataset.find_subject(id) == nullptr) {
            throw ConfigError("fold subject not in dataset: " + id);
        }
    }
    return cfg.folds;
}

// Trains every requested fold and saves checkpoints under out_dir.
inline void run_training(const Dataset& dataset, const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir,
                         const std::function<void(const std::string&)>& log = {}) {
    dataset.validate();
    if (dataset.subjects.size() < 3) {
        throw ConfigError("run_training: need at least 3 subjects for leave-one-out");
    }
    std::filesystem::create_directories(out_dir);
    detail::write_json_file(to_json(cfg), out_dir / "experiment.json");

    const auto axis = FrequencyAxis::make();
    const auto db_cache = compute_db_hrtfs(dataset, axis);
    const auto folds = fold_subjects(dataset, cfg);

    std::mutex log_mutex;
    auto safe_log = [&](const std::string& msg) {
        if (!log) return;
        std::lock_guard<std::mutex> lock(log_mutex);
        log(msg);
    };

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= folds.size()) break;
            const auto& fold_id = folds[i];
            try {
                const auto plan =
                    make_split_plan(dataset.grid, fold_id, cfg.train.seed, cfg.unseen_fraction);
                auto set = train_grouped(dataset, cfg.strategy, cfg.train, fold_id, plan,
                                         db_cache, axis, cfg.grouping, safe_log);
                save_model_set(set, out_dir / ("fold_" + fold_id));
                safe_log("fold " + fold_id + ": done");
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = e.what();
            }
        }
    };

    const std::size_t n_workers = std::max<std::size_t>(1, cfg.workers);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw NumericalError("run_training: " + first_error);
}

struct RunEvaluation {
    std::vector<EvalRecord> records;
    Summary summary;
};

// Loads every fold under models_dir, evaluates against the dataset and
// writes records.csv + summary.json into out_dir.
inline RunEvaluation run_evaluation(const std::filesystem::path& models_dir,
                                    const Dataset& dataset,
                                    const std::filesystem::path& out_dir) {
    dataset.validate();
    const auto exp_cfg = load_experiment_config(models_dir / "experiment.json");
    const auto folds = fold_subjects(dataset, exp_cfg);

    const auto axis = FrequencyAxis::make();
    const auto db_cache = compute_db_hrtfs(dataset, axis);

    RunEvaluation out;
    for (const auto& fold_id : folds) {
        const auto fold_dir = models_dir / ("fold_" + fold_id);
        if (!std::filesystem::exists(fold_dir)) {
            throw DataError("missing checkpoint directory: " + fold_dir.string());
        }
        auto set = load_model_set(fold_dir, dataset.grid);
        auto records = evaluate_fold(set, dataset, set.plan, db_cache);
        out.records.insert(out.records.end(), records.begin(), records.end());
    }
    out.summary = summarize(out.records);

    std::filesystem::create_directories(out_dir);
    write_records_csv(out.records, out_dir / "records.csv");
    nlohmann::json sj = to_json(out.summary);
    sj["strategy"] = to_string(exp_cfg.strategy);
    sj["n_folds"] = folds.size();
    detail::write_json_file(sj, out_dir / "summary.json");
    return out;
}

// ---------------------------------------------------------------------------
// Between-run comparison
// ---------------------------------------------------------------------------

inline nlohmann::json anova_to_json(const AnovaResult& r) {
    return {{"f_stat", r.infinite_f ? nlohmann::json("inf") : nlohmann::json(r.f_stat)},
            {"df_between", r.df_between},
            {"df_within", r.df_within},
            {"p_value", r.p_value},
            {"infinite_f", r.infinite_f}};
}

// One-way ANOVA between the per-record LSDs of two runs, overall and per
// seen/unseen condition.
inline nlohmann::json compare_runs(const std::filesystem::path& run_a,
                                   const std::filesystem::path& run_b) {
    const auto rec_a = read_records_csv(run_a / "records.csv");
    const auto rec_b = read_records_csv(run_b / "records.csv");

    auto collect = [](const std::vector<EvalRecord>& recs, int want_seen) {
        std::vector<double> out;
        for (const auto& r : recs) {
            if (want_seen < 0 || static_cast<int>(r.seen) == want_seen) out.push_back(r.lsd_db);
        }
        return out;
    };

    nlohmann::json j;
    j["run_a"] = run_a.string();
    j["run_b"] = run_b.string();
    for (const auto& [key, want] : std::vector<std::pair<std::string, int>>{
             {"overall", -1}, {"seen", 1}, {"unseen", 0}}) {
        const auto a = collect(rec_a, want);
        const auto b = collect(rec_b, want);
        nlohmann::json entry;
        entry["mean_lsd_a"] = a.empty() ? 0.0
                                        : std::accumulate(a.begin(), a.end(), 0.0) /
                                              static_cast<double>(a.size());
        entry["mean_lsd_b"] = b.empty() ? 0.0
                                        : std::accumulate(b.begin(), b.end(), 0.0) /
                                              static_cast<double>(b.size());
        entry["anova"] = anova_to_json(one_way_anova(a, b));
        j[key] = entry;
    }
    return j;
}

}  // namespace hrtfgroup
