// Synthetic spherical-head dataset generator: a desk-scale stand-in for a
// measured HRIR database. Per direction the magnitude response is composed
// of a proximity gain, a first-order head-shadow shelf (cutoff from the
// subject's head radius), a low-band diffraction boost on head-shadowed
// contralateral directions, an elevation-dependent pinna notch, and a mild
// torso ripple. HRIRs are minimum-phase reconstructions of that magnitude.
//
// All constants live in SyntheticConfig and are versioned; subjects are
// deterministic functions of (seed, subject index).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrtfgroup/dataset.hpp"
#include "hrtfgroup/fft.hpp"
#include "hrtfgroup/geometry.hpp"
#include "hrtfgroup/rng.hpp"

namespace hrtfgroup {

struct AnthroParamSpec {
    const char* name;
    double mean;
    double std;
};

struct SyntheticConfig {
    std::string version = "synth-v1";

    // 17 torso/head parameters followed by 10 left-pinna parameters.
    // Units: centimeters except the two pinna angles (degrees).
    std::array<AnthroParamSpec, kAnthroParams> params{{
        {"head_width", 14.5, 0.95},
        {"head_height", 21.5, 1.10},
        {"head_depth", 19.5, 1.00},
        {"pinna_offset_down", 3.0, 0.35},
        {"pinna_offset_back", 0.5, 0.30},
        {"neck_width", 11.5, 0.85},
        {"neck_height", 6.3, 0.70},
        {"neck_depth", 10.5, 0.90},
        {"torso_top_width", 31.0, 2.30},
        {"torso_top_height", 13.0, 1.50},
        {"torso_top_depth", 23.5, 2.00},
        {"shoulder_width", 45.5, 2.60},
        {"head_offset_forward", 3.0, 0.60},
        {"height", 172.0, 8.50},
        {"seated_height", 88.5, 4.20},
        {"head_circumference", 57.5, 1.60},
        {"shoulder_circumference", 109.0, 6.00},
        {"cavum_concha_height", 1.90, 0.18},
        {"cymba_concha_height", 0.68, 0.12},
        {"cavum_concha_width", 1.58, 0.18},
        {"fossa_height", 1.51, 0.22},
        {"pinna_height", 6.41, 0.51},
        {"pinna_width", 2.92, 0.27},
        {"intertragal_incisure_width", 0.53, 0.14},
        {"cavum_concha_depth", 1.20, 0.23},
        {"pinna_rotation_angle", 24.0, 6.50},
        {"pinna_flare_angle", 28.5, 6.80},
    }};

    double speed_of_sound = 343.0;   // m/s
    double proximity_gain_db = 8.0;  // broadband ipsilateral/contralateral tilt
    double shadow_max_db = 12.0;     // high-frequency loss at full shadow
    double bright_max_db = 34.0;     // low-band diffraction boost at the pole
    double bright_onset_deg = 138.0; // incidence angle where the boost ramps up
    double bright_ramp_deg = 30.0;
    double bright_center_hz = 360.0; // band-pass profile of the boost
    double bright_width_hz = 230.0;
    double notch_base_hz = 6500.0;
    double notch_elevation_slope = 0.009;  // per degree of mirrored elevation
    double notch_depth_db = 14.0;
    double notch_rel_width = 0.18;
    double ripple_amp_db = 1.1;
    double ripple_tau_ms = 0.35;
    double trait_z_clamp = 2.5;
};

namespace detail {

inline double smoothstep01(double x) {
    x = std::min(1.0, std::max(0.0, x));
    return x * x * (3.0 - 2.0 * x);
}

struct SubjectTraits {
    double head_radius_m;
    double shadow_cutoff_hz;
    double shadow_db;
    double bright_db;
    double notch_center_scale;
    double notch_depth_db;
    double notch_elevation_shift_deg;
    double ripple_tau_s;
    double broadband_gain_db;
};

inline SubjectTraits derive_traits(const std::vector<double>& anthro,
                                   const SyntheticConfig& cfg) {
    auto z = [&](std::size_t i) {
        const double raw = (anthro[i] - cfg.params[i].mean) / cfg.params[i].std;
        return std::min(cfg.trait_z_clamp, std::max(-cfg.trait_z_clamp, raw));
    };
    SubjectTraits t;
    t.head_radius_m = anthro[0] / 200.0;  // half of head width, cm -> m
    t.shadow_cutoff_hz =
        cfg.speed_of_sound / (2.0 * 3.141592653589793238462643383279502884 * t.head_radius_m);
    t.shadow_db = cfg.shadow_max_db * (1.0 + 0.08 * z(2));     // head depth
    t.bright_db = cfg.bright_max_db * (1.0 + 0.05 * z(15));    // head circumference
    t.notch_center_scale = 1.0 - 0.08 * z(17);                 // cavum concha height
    t.notch_depth_db = cfg.notch_depth_db * (1.0 + 0.15 * z(24));  // cavum concha depth
    t.notch_elevation_shift_deg = 2.0 * z(25);                 // pinna rotation
    t.ripple_tau_s = (cfg.ripple_tau_ms + 0.02 * z(14)) * 1e-3;    // seated height
    t.broadband_gain_db = 0.4 * z(11);                         // shoulder width
    return t;
}

// Composite log-magnitude model in dB at frequency f for one direction.
inline double synthetic_magnitude_db(double f_hz, double azimuth_deg, double elevation_deg,
                                     const SubjectTraits& t, const SyntheticConfig& cfg) {
    // incidence angle from the left-ear axis: 0 = at the ear, 180 = fully shadowed
    const double cos_inc = std::min(1.0, std::max(-1.0, -std::sin(azimuth_deg * kDegToRad)));
    const double inc_deg = std::acos(cos_inc) / kDegToRad;

    const double prox = cfg.proximity_gain_db * cos_inc + t.broadband_gain_db;

    const double u = (inc_deg - 90.0) / 90.0;
    const double fc = t.shadow_cutoff_hz;
    const double shadow =
        -t.shadow_db * smoothstep01(u) * (f_hz * f_hz) / (f_hz * f_hz + fc * fc);

    const double ub = (inc_deg - cfg.bright_onset_deg) / cfg.bright_ramp_deg;
    const double bw = (f_hz - cfg.bright_center_hz) / cfg.bright_width_hz;
    const double bright = t.bright_db * smoothstep01(ub) / (1.0 + bw * bw * bw * bw);

    // pinna notch: front/back mirrored elevation, washed out under shadow
    double mirrored = elevation_deg <= 90.0 ? elevation_deg : 180.0 - elevation_deg;
    mirrored += t.notch_elevation_shift_deg;
    const double fn = std::max(2500.0, cfg.notch_base_hz *
                                           (1.0 + cfg.notch_elevation_slope * mirrored) *
                                           t.notch_center_scale);
    const double nw = (f_hz - fn) / (cfg.notch_rel_width * fn);
    const double notch =
        -t.notch_depth_db * (1.0 - 0.9 * smoothstep01(u)) * std::exp(-nw * nw);

    const double tau = t.ripple_tau_s * (1.0 + 0.3 * std::sin(elevation_deg * kDegToRad));
    const double ripple = cfg.ripple_amp_db *
                          std::cos(2.0 * 3.141592653589793238462643383279502884 * f_hz * tau) *
                          (f_hz * f_hz) / (f_hz * f_hz + 700.0 * 700.0);

    return prox + shadow + bright + notch + ripple;
}

}  // namespace detail

inline nlohmann::json to_json(const SyntheticConfig& cfg) {
    nlohmann::json j;
    j["version"] = cfg.version;
    auto params = nlohmann::json::array();
    for (const auto& p : cfg.params) {
        params.push_back({{"name", p.name}, {"mean", p.mean}, {"std", p.std}});
    }
    j["params"] = params;
    j["speed_of_sound"] = cfg.speed_of_sound;
    j["proximity_gain_db"] = cfg.proximity_gain_db;
    j["shadow_max_db"] = cfg.shadow_max_db;
    j["bright_max_db"] = cfg.bright_max_db;
    j["bright_onset_deg"] = cfg.bright_onset_deg;
    j["bright_ramp_deg"] = cfg.bright_ramp_deg;
    j["bright_center_hz"] = cfg.bright_center_hz;
    j["bright_width_hz"] = cfg.bright_width_hz;
    j["notch_base_hz"] = cfg.notch_base_hz;
    j["notch_elevation_slope"] = cfg.notch_elevation_slope;
    j["notch_depth_db"] = cfg.notch_depth_db;
    j["notch_rel_width"] = cfg.notch_rel_width;
    j["ripple_amp_db"] = cfg.ripple_amp_db;
    j["ripple_tau_ms"] = cfg.ripple_tau_ms;
    j["trait_z_clamp"] = cfg.trait_z_clamp;
    return j;
}

inline Dataset generate_synthetic_dataset(int n_subjects, std::uint64_t seed,
                                          const SyntheticConfig& cfg = {}) {
    if (n_subjects < 1) {
        throw std::invalid_argument("generate_synthetic_dataset: n_subjects must be >= 1");
    }

    Dataset dataset;
    dataset.grid = build_cipic_grid();
    dataset.sample_rate_hz = kSampleRateHz;
    dataset.subjects.reserve(static_cast<std::size_t>(n_subjects));

    const std::size_t n_half = kDftSize / 2 + 1;  // 257 magnitude bins
    const double delta_f = kSampleRateHz / static_cast<double>(kDftSize);

    double peak = 0.0;
    for (int s = 0; s < n_subjects; ++s) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(s)));

        Subject subject;
        {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "s%03d", s + 1);
            subject.id = buf;
        }
        subject.anthro_raw.resize(kAnthroParams);
        for (std::size_t i = 0; i < kAnthroParams; ++i) {
            subject.anthro_raw[i] = cfg.params[i].mean + cfg.params[i].std * rng.normal();
        }
        const auto traits = detail::derive_traits(subject.anthro_raw, cfg);

        subject.hrirs = Matrix(kGridDirections, kHrirLength);
        std::vector<double> magnitude(n_half);
        for (std::size_t d = 0; d < kGridDirections; ++d) {
            const Direction& dir = dataset.grid.directions[d];
            for (std::size_t k = 0; k < n_half; ++k) {
                const double f = static_cast<double>(k) * delta_f;
                const double db = detail::synthetic_magnitude_db(f, dir.azimuth_deg,
                                                                 dir.elevation_deg, traits, cfg);
                magnitude[k] = std::pow(10.0, db / 20.0);
            }
            const auto hrir = minimum_phase_signal(magnitude, kDftSize, kHrirLength);
            auto row = subject.hrirs.row(d);
            for (std::size_t n = 0; n < kHrirLength; ++n) {
                row[n] = hrir[n];
                peak = std::max(peak, std::abs(hrir[n]));
            }
        }
        dataset.subjects.push_back(std::move(subject));
    }

    // common scale so max |sample| <= 1; a shared factor shifts every dB
    // value equally and so leaves every downstream normalized quantity intact
    if (peak > 0.0) {
        const double scale = 1.0 / peak;
        for (auto& subject : dataset.subjects) {
            for (double& v : subject.hrirs.storage()) v *= scale;
        }
    }

    dataset.validate();
    return dataset;
}

}  // namespace hrtfgroup
