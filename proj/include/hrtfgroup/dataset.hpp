// Subjects and datasets: 27 anthropometric parameters plus left-ear HRIRs
// (1250 directions x 200 samples at 44.1 kHz) per subject.
#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "hrtfgroup/error.hpp"
#include "hrtfgroup/geometry.hpp"
#include "hrtfgroup/matrix.hpp"

namespace hrtfgroup {

inline constexpr std::size_t kAnthroParams = 27;  // 17 torso/head + 10 left pinna
inline constexpr std::size_t kHrirLength = 200;
inline constexpr double kSampleRateHz = 44100.0;

struct Subject {
    std::string id;
    std::vector<double> anthro_raw;  // 27 values
    Matrix hrirs;                    // 1250 x 200, rows in grid order

    void validate() const {
        if (anthro_raw.size() != kAnthroParams) {
            throw DataError("subject " + id + ": expected 27 anthro parameters, got " +
                            std::to_string(anthro_raw.size()));
        }
        for (std::size_t i = 0; i < anthro_raw.size(); ++i) {
            if (!std::isfinite(anthro_raw[i])) {
                throw DataError("subject " + id + ": non-finite anthro parameter " +
                                std::to_string(i + 1));
            }
        }
        if (hrirs.rows() != kGridDirections || hrirs.cols() != kHrirLength) {
            throw DataError("subject " + id + ": expected 1250x200 HRIR matrix, got " +
                            std::to_string(hrirs.rows()) + "x" + std::to_string(hrirs.cols()));
        }
    }

    bool operator==(const Subject&) const = default;
};

struct Dataset {
    std::vector<Subject> subjects;
    MeasurementGrid grid;
    double sample_rate_hz = kSampleRateHz;

    void validate() const {
        if (grid.directions.size() != kGridDirections) {
            throw DataError("dataset grid must have 1250 directions");
        }
        std::set<std::string> ids;
        for (const auto& s : subjects) {
            s.validate();
            if (!ids.insert(s.id).second) throw DataError("duplicate subject id: " + s.id);
        }
    }

    const Subject* find_subject(const std::string& id) const {
        for (const auto& s : subjects) {
            if (s.id == id) return &s;
        }
        return nullptr;
    }

    bool operator==(const Dataset&) const = default;
};

}  // namespace hrtfgroup
