// Direction grouping: SL quadrants, the diffraction-effect (DE) mask over
// contralateral directions, the hybrid of the two, and the router that
// dispatches directions to per-group models.
//
// Boundary conventions (fixed): azimuth 0 belongs to the left (ipsilateral)
// side; elevation 90 belongs to the back.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrtfgroup/error.hpp"
#include "hrtfgroup/geometry.hpp"
#include "hrtfgroup/matrix.hpp"
#include "hrtfgroup/preproc.hpp"

namespace hrtfgroup {

enum class Strategy { SL, DE, Hybrid, Global };

enum class GroupLabel { LeftFront, LeftBack, RightFront, RightBack, Inner, Outer, All };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::SL: return "sl";
        case Strategy::DE: return "de";
        case Strategy::Hybrid: return "hybrid";
        case Strategy::Global: return "global";
    }
    return "?";
}

inline Strategy strategy_from_string(const std::string& s) {
    if (s == "sl") return Strategy::SL;
    if (s == "de") return Strategy::DE;
    if (s == "hybrid") return Strategy::Hybrid;
    if (s == "global") return Strategy::Global;
    throw ConfigError("unknown strategy: " + s);
}

inline const char* to_string(GroupLabel g) {
    switch (g) {
        case GroupLabel::LeftFront: return "left_front";
        case GroupLabel::LeftBack: return "left_back";
        case GroupLabel::RightFront: return "right_front";
        case GroupLabel::RightBack: return "right_back";
        case GroupLabel::Inner: return "inner";
        case GroupLabel::Outer: return "outer";
        case GroupLabel::All: return "all";
    }
    return "?";
}

inline GroupLabel group_label_from_string(const std::string& s) {
    for (GroupLabel g : {GroupLabel::LeftFront, GroupLabel::LeftBack, GroupLabel::RightFront,
                         GroupLabel::RightBack, GroupLabel::Inner, GroupLabel::Outer,
                         GroupLabel::All}) {
        if (s == to_string(g)) return g;
    }
    throw ConfigError("unknown group label: " + s);
}

struct GroupId {
    Strategy strategy;
    GroupLabel label;

    bool operator==(const GroupId&) const = default;
    auto operator<=>(const GroupId&) const = default;
};

// Quadrant by azimuth sign (<= 0 left) and elevation threshold (< 90 front).
inline GroupLabel sl_group(const Direction& d) {
    const bool left = d.azimuth_deg <= 0.0;
    const bool front = d.elevation_deg < 90.0;
    if (left) return front ? GroupLabel::LeftFront : GroupLabel::LeftBack;
    return front ? GroupLabel::RightFront : GroupLabel::RightBack;
}

// Per-direction inner/outer decision over the contralateral grid, derived
// from training subjects only.
struct DeMask {
    std::vector<std::uint8_t> inner;  // indexed by grid direction index; contralateral only
    std::vector<std::uint8_t> defined;
    double threshold = 0.5;
    double band_lo_hz = 200.0;
    double band_hi_hz = 500.0;
    std::vector<std::string> source_subject_ids;

    bool is_inner(std::size_t direction_index) const {
        if (direction_index >= defined.size() || !defined[direction_index]) {
            throw std::invalid_argument("DeMask: undefined (ipsilateral) direction " +
                                        std::to_string(direction_index));
        }
        return inner[direction_index] != 0;
    }
};

// For each contralateral direction: average over training subjects of the
// mean normalized bin value over axis bins with center in [band_lo, band_hi];
// Inner iff that average exceeds the threshold.
//
// normalized_hrtfs: one 1250 x n_bins matrix per training subject, rows in
// grid order, values already min-max normalized to [0, 1].
inline DeMask compute_de_mask(const MeasurementGrid& grid, const FrequencyAxis& axis,
                              const std::vector<Matrix>& normalized_hrtfs,
                              std::vector<std::string> source_subject_ids = {},
                              double threshold = 0.5, double band_lo_hz = 200.0,
                              double band_hi_hz = 500.0) {
    if (normalized_hrtfs.empty()) {
        throw std::invalid_argument("compute_de_mask: no training subjects");
    }
    std::vector<std::size_t> band_bins;
    for (std::size_t k = 0; k < axis.centers_hz.size(); ++k) {
        if (axis.centers_hz[k] >= band_lo_hz && axis.centers_hz[k] <= band_hi_hz) {
            band_bins.push_back(k);
        }
    }
    if (band_bins.empty()) {
        throw ConfigError("compute_de_mask: no frequency bins in band [" +
                          std::to_string(band_lo_hz) + ", " + std::to_string(band_hi_hz) + "] Hz");
    }

    DeMask mask;
    mask.threshold = threshold;
    mask.band_lo_hz = band_lo_hz;
    mask.band_hi_hz = band_hi_hz;
    mask.source_subject_ids = std::move(source_subject_ids);
    mask.inner.assign(grid.directions.size(), 0);
    mask.defined.assign(grid.directions.size(), 0);

    for (std::size_t d = 0; d < grid.directions.size(); ++d) {
        if (is_ipsilateral(grid.directions[d].azimuth_deg)) continue;
        double acc = 0.0;
        for (const auto& subject_hrtfs : normalized_hrtfs) {
            double band_mean = 0.0;
            const auto row = subject_hrtfs.row(d);
            for (std::size_t k : band_bins) band_mean += row[k];
            acc += band_mean / static_cast<double>(band_bins.size());
        }
        acc /= static_cast<double>(normalized_hrtfs.size());
        mask.defined[d] = 1;
        mask.inner[d] = acc > threshold ? 1 : 0;
    }
    return mask;
}

inline GroupLabel de_group(const Direction& d, const DeMask& mask, std::size_t direction_index) {
    if (is_ipsilateral(d.azimuth_deg)) {
        throw std::invalid_argument("de_group: direction is ipsilateral (azimuth " +
                                    std::to_string(d.azimuth_deg) + ")");
    }
    return mask.is_inner(direction_index) ? GroupLabel::Inner : GroupLabel::Outer;
}

// SL on the ipsilateral side, DE on the contralateral side.
inline GroupLabel hybrid_group(const Direction& d, const DeMask& mask,
                               std::size_t direction_index) {
    if (is_ipsilateral(d.azimuth_deg)) return sl_group(d);
    return de_group(d, mask, direction_index);
}

struct Router {
    Strategy strategy = Strategy::SL;
    std::optional<DeMask> de_mask;
    std::vector<GroupLabel> labels;                       // one per group
    std::vector<std::vector<std::size_t>> group_indices;  // direction indices per group
    std::vector<int> direction_to_group;                  // -1 outside the router's domain

    std::size_t n_groups() const { return labels.size(); }

    int group_of(std::size_t direction_index) const {
        return direction_to_group[direction_index];
    }

    GroupId group_id(std::size_t group) const { return {strategy, labels[group]}; }
};

// Builds the per-group direction index sets and enforces that they
// partition the router's domain (the full grid, or the contralateral half
// for the DE strategy).
inline Router build_router(Strategy strategy, const MeasurementGrid& grid,
                           std::optional<DeMask> mask = std::nullopt) {
    if ((strategy == Strategy::DE || strategy == Strategy::Hybrid) && !mask.has_value()) {
        throw ConfigError("build_router: DE/hybrid strategies require a DE mask");
    }

    Router router;
    router.strategy = strategy;
    router.de_mask = std::move(mask);

    switch (strategy) {
        case Strategy::SL:
            router.labels = {GroupLabel::LeftFront, GroupLabel::LeftBack, GroupLabel::RightFront,
                             GroupLabel::RightBack};
            break;
        case Strategy::DE:
            router.labels = {GroupLabel::Inner, GroupLabel::Outer};
            break;
        case Strategy::Hybrid:
            router.labels = {GroupLabel::LeftFront, GroupLabel::LeftBack, GroupLabel::Inner,
                             GroupLabel::Outer};
            break;
        case Strategy::Global:
            router.labels = {GroupLabel::All};
            break;
    }

    std::map<GroupLabel, std::size_t> slot;
    for (std::size_t g = 0; g < router.labels.size(); ++g) slot[router.labels[g]] = g;

    router.group_indices.resize(router.labels.size());
    router.direction_to_group.assign(grid.directions.size(), -1);

    for (std::size_t d = 0; d < grid.directions.size(); ++d) {
        const Direction& dir = grid.directions[d];
        std::optional<GroupLabel> label;
        switch (strategy) {
            case Strategy::SL:
                label = sl_group(dir);
                break;
            case Strategy::DE:
                if (!is_ipsilateral(dir.azimuth_deg)) {
                    label = de_group(dir, *router.de_mask, d);
                }
                break;
            case Strategy::Hybrid:
                label = hybrid_group(dir, *router.de_mask, d);
                break;
            case Strategy::Global:
                label = GroupLabel::All;
                break;
        }
        if (!label) continue;
        auto it = slot.find(*label);
        if (it == slot.end()) throw NumericalError("build_router: label outside strategy");
        router.group_indices[it->second].push_back(d);
        router.direction_to_group[d] = static_cast<int>(it->second);
    }

    // partition check over the router's domain
    std::size_t covered = 0;
    for (const auto& g : router.group_indices) covered += g.size();
    std::size_t domain = 0;
    for (std::size_t d = 0; d < grid.directions.size(); ++d) {
        const bool in_domain =
            strategy != Strategy::DE || !is_ipsilateral(grid.directions[d].azimuth_deg);
        if (in_domain) {
            ++domain;
            if (router.direction_to_group[d] < 0) {
                throw NumericalError("build_router: direction " + std::to_string(d) +
                                     " not covered");
            }
        } else if (router.direction_to_group[d] >= 0) {
            throw NumericalError("build_router: direction " + std::to_string(d) +
                                 " outside domain was assigned");
        }
    }
    if (covered != domain) throw NumericalError("build_router: partition violated");
    return router;
}

inline nlohmann::json to_json(const Router& router) {
    nlohmann::json j;
    j["strategy"] = to_string(router.strategy);
    if (router.de_mask) {
        j["de_threshold"] = router.de_mask->threshold;
        j["de_band_hz"] = {router.de_mask->band_lo_hz, router.de_mask->band_hi_hz};
        j["de_source_subjects"] = router.de_mask->source_subject_ids;
    }
    auto labels = nlohmann::json::array();
    for (auto l : router.labels) labels.push_back(to_string(l));
    j["groups"] = labels;
    auto assignment = nlohmann::json::array();
    for (int g : router.direction_to_group) {
        assignment.push_back(g < 0 ? nlohmann::json(nullptr)
                                   : nlohmann::json(to_string(router.labels[g])));
    }
    j["direction_groups"] = assignment;
    return j;
}

inline Router router_from_json(const nlohmann::json& j, const MeasurementGrid& grid) {
    Router router;
    router.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    router.labels.clear();
    for (const auto& l : j.at("groups")) {
        router.labels.push_back(group_label_from_string(l.get<std::string>()));
    }
    if (j.contains("de_threshold")) {
        DeMask mask;
        mask.threshold = j.at("de_threshold").get<double>();
        mask.band_lo_hz = j.at("de_band_hz")[0].get<double>();
        mask.band_hi_hz = j.at("de_band_hz")[1].get<double>();
        mask.source_subject_ids = j.at("de_source_subjects").get<std::vector<std::string>>();
        mask.inner.assign(grid.directions.size(), 0);
        mask.defined.assign(grid.directions.size(), 0);
        const auto& assignment = j.at("direction_groups");
        for (std::size_t d = 0; d < grid.directions.size(); ++d) {
            if (assignment[d].is_null()) continue;
            const auto label = group_label_from_string(assignment[d].get<std::string>());
            if (label == GroupLabel::Inner || label == GroupLabel::Outer) {
                mask.defined[d] = 1;
                mask.inner[d] = label == GroupLabel::Inner ? 1 : 0;
            }
        }
        router.de_mask = std::move(mask);
    }

    std::map<GroupLabel, std::size_t> slot;
    for (std::size_t g = 0; g < router.labels.size(); ++g) slot[router.labels[g]] = g;
    router.group_indices.assign(router.labels.size(), {});
    router.direction_to_group.assign(grid.directions.size(), -1);
    const auto& assignment = j.at("direction_groups");
    if (assignment.size() != grid.directions.size()) {
        throw DataError("router json: direction_groups size mismatch");
    }
    for (std::size_t d = 0; d < grid.directions.size(); ++d) {
        if (assignment[d].is_null()) continue;
        const auto label = group_label_from_string(assignment[d].get<std::string>());
        auto it = slot.find(label);
        if (it == slot.end()) throw DataError("router json: label not in group list");
        router.group_indices[it->second].push_back(d);
        router.direction_to_group[d] = static_cast<int>(it->second);
    }
    return router;
}

}  // namespace hrtfgroup
