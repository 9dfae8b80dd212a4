// Fold evaluation and aggregation: per-direction LSD records for the
// held-out subject, tagged by group, side and seen/unseen, plus the
// table-shaped summaries and CSV emission.
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrtfgroup/dataset_io.hpp"
#include "hrtfgroup/lsd.hpp"
#include "hrtfgroup/trainer.hpp"

namespace hrtfgroup {

struct EvalRecord {
    std::string subject_id;
    std::size_t direction_index = 0;
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    GroupId group{Strategy::SL, GroupLabel::LeftFront};
    bool ipsilateral = false;
    bool seen = false;
    double lsd_db = 0.0;
};

// Batch-predicts each group's directions for the held-out subject and
// scores them against the measured responses.
inline std::vector<EvalRecord> evaluate_fold(GroupedModelSet& models, const Dataset& dataset,
                                             const SplitPlan& plan,
                                             const std::vector<Matrix>& db_cache) {
    const Subject* held_out = dataset.find_subject(models.fold_subject_id);
    if (held_out == nullptr) {
        throw std::invalid_argument("evaluate_fold: held-out subject not in dataset");
    }
    const std::size_t subject_index =
        static_cast<std::size_t>(held_out - dataset.subjects.data());
    const Matrix& truth_db = db_cache[subject_index];

    std::vector<EvalRecord> records;
    for (std::size_t g = 0; g < models.groups.size(); ++g) {
        GroupModel& gm = models.groups[g];
        const auto& dirs = gm.direction_indices;
        if (dirs.empty()) continue;

        const AnthroProfile norm_profile = normalize_anthro(
            AnthroProfile{held_out->anthro_raw, false}, gm.manifest.anthro_stats);
        Matrix inputs(dirs.size(), kModelInputDim);
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            const auto in30 = build_model_input(norm_profile, dataset.grid.directions[dirs[i]]);
            std::copy(in30.begin(), in30.end(), inputs.data() + i * kModelInputDim);
        }
        const auto pred = gm.dnn.forward(inputs, nn::Mode::Eval);
        const Matrix& decoded = gm.vae.decoder().forward(pred.mean, nn::Mode::Eval);

        for (std::size_t i = 0; i < dirs.size(); ++i) {
            const std::size_t d = dirs[i];
            const auto pred_db = inverse_minmax(decoded.row(i), gm.manifest.minmax);
            EvalRecord rec;
            rec.subject_id = held_out->id;
            rec.direction_index = d;
            rec.azimuth_deg = dataset.grid.directions[d].azimuth_deg;
            rec.elevation_deg = dataset.grid.directions[d].elevation_deg;
            rec.group = gm.id;
            rec.ipsilateral = is_ipsilateral(rec.azimuth_deg);
            rec.seen = plan.is_seen(d);
            rec.lsd_db = lsd(truth_db.row(d), pred_db);
            records.push_back(std::move(rec));
        }
    }
    std::sort(records.begin(), records.end(), [](const EvalRecord& a, const EvalRecord& b) {
        return a.direction_index < b.direction_index;
    });
    return records;
}

struct MeanAccumulator {
    double sum = 0.0;
    std::size_t count = 0;
    void add(double v) {
        sum += v;
        ++count;
    }
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

struct Summary {
    MeanAccumulator overall, seen, unseen;
    std::map<std::string, MeanAccumulator> per_side;          // "<side>/<seen|unseen>"
    std::map<std::string, MeanAccumulator> per_group;         // "<group>/<seen|unseen>"
    std::size_t n_records = 0;
};

inline Summary summarize(const std::vector<EvalRecord>& records) {
    Summary s;
    s.n_records = records.size();
    for (const auto& r : records) {
        const char* cond = r.seen ? "seen" : "unseen";
        s.overall.add(r.lsd_db);
        (r.seen ? s.seen : s.unseen).add(r.lsd_db);
        s.per_side[std::string(r.ipsilateral ? "ipsilateral" : "contralateral") + "/" + cond]
            .add(r.lsd_db);
        s.per_group[std::string(to_string(r.group.label)) + "/" + cond].add(r.lsd_db);
    }
    return s;
}

inline nlohmann::json to_json(const Summary& s) {
    nlohmann::json j;
    j["n_records"] = s.n_records;
    j["overall_mean_lsd"] = s.overall.mean();
    j["seen_mean_lsd"] = s.seen.mean();
    j["unseen_mean_lsd"] = s.unseen.mean();
    nlohmann::json side;
    for (const auto& [k, v] : s.per_side) side[k] = {{"mean_lsd", v.mean()}, {"n", v.count}};
    j["per_side"] = side;
    nlohmann::json group;
    for (const auto& [k, v] : s.per_group) group[k] = {{"mean_lsd", v.mean()}, {"n", v.count}};
    j["per_group"] = group;
    return j;
}

inline const char* kRecordsCsvHeader =
    "subject_id,direction_index,azimuth_deg,elevation_deg,group,side,seen,lsd_db";

inline void write_records_csv(const std::vector<EvalRecord>& records,
                              const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    os << kRecordsCsvHeader << "\n";
    for (const auto& r : records) {
        os << r.subject_id << ',' << r.direction_index << ',' << format_double(r.azimuth_deg)
           << ',' << format_double(r.elevation_deg) << ',' << to_string(r.group.label) << ','
           << (r.ipsilateral ? "ipsilateral" : "contralateral") << ','
           << (r.seen ? "seen" : "unseen") << ',' << format_double(r.lsd_db) << "\n";
    }
}

inline std::vector<EvalRecord> read_records_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("missing file: " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != kRecordsCsvHeader) {
        throw DataError(path.string() + ": unexpected records header");
    }
    std::vector<EvalRecord> records;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto toks = detail::split_csv_line(line);
        if (toks.size() != 8) {
            throw DataError(path.string() + " line " + std::to_string(line_no) +
                            ": expected 8 fields");
        }
        EvalRecord r;
        r.subject_id = toks[0];
        r.direction_index = static_cast<std::size_t>(
            detail::parse_double(toks[1], "records line " + std::to_string(line_no)));
        r.azimuth_deg = detail::parse_double(toks[2], "records");
        r.elevation_deg = detail::parse_double(toks[3], "records");
        r.group.label = group_label_from_string(toks[4]);
        r.ipsilateral = toks[5] == "ipsilateral";
        r.seen = toks[6] == "seen";
        r.lsd_db = detail::parse_double(toks[7], "records");
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace hrtfgroup
