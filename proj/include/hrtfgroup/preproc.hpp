// Deterministic transforms from raw measurements to model-ready tensors:
// sigmoid anthro normalization, the HRIR -> log-magnitude HRTF chain
// (512-pt DFT, constant-Q smoothing, dB, 173 log-spaced bins in
// 200..15000 Hz), min-max normalization, and the manifest freezing the
// fitted statistics.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hrtfgroup/dataset.hpp"
#include "hrtfgroup/error.hpp"
#include "hrtfgroup/fft.hpp"
#include "hrtfgroup/geometry.hpp"

namespace hrtfgroup {

inline constexpr std::size_t kHrtfBins = 173;
inline constexpr std::size_t kDftSize = 512;
inline constexpr double kQFactor = 8.0;
inline constexpr double kFreqLoHz = 200.0;
inline constexpr double kFreqHiHz = 15000.0;
inline constexpr std::size_t kModelInputDim = 30;  // 27 anthro + xyz

// ---------------------------------------------------------------------------
// Anthropometric normalization
// ---------------------------------------------------------------------------

struct AnthroStats {
    std::vector<double> mean;  // 27
    std::vector<double> std;   // 27, population standard deviation

    bool operator==(const AnthroStats&) const = default;
};

struct AnthroProfile {
    std::vector<double> values;
    bool normalized = false;
};

// Per-parameter sample mean and population standard deviation across
// subjects. Parameters with zero spread are rejected.
inline AnthroStats fit_anthro_stats(const std::vector<std::vector<double>>& profiles) {
    if (profiles.size() < 2) throw std::invalid_argument("fit_anthro_stats: need >= 2 profiles");
    const std::size_t dim = profiles.front().size();
    for (const auto& p : profiles) {
        if (p.size() != dim) throw std::invalid_argument("fit_anthro_stats: ragged profiles");
    }
    AnthroStats stats;
    stats.mean.assign(dim, 0.0);
    stats.std.assign(dim, 0.0);
    const double n = static_cast<double>(profiles.size());
    for (const auto& p : profiles) {
        for (std::size_t i = 0; i < dim; ++i) stats.mean[i] += p[i];
    }
    for (std::size_t i = 0; i < dim; ++i) stats.mean[i] /= n;
    for (const auto& p : profiles) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = p[i] - stats.mean[i];
            stats.std[i] += d * d;
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        stats.std[i] = std::sqrt(stats.std[i] / n);
        if (!(stats.std[i] > 0.0)) {
            throw NumericalError("fit_anthro_stats: degenerate parameter " + std::to_string(i) +
                                 " (zero standard deviation)");
        }
    }
    return stats;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// f'_i = sigmoid((f_i - mu_i) / sigma_i); outputs strictly in (0, 1).
inline AnthroProfile normalize_anthro(const AnthroProfile& profile, const AnthroStats& stats) {
    if (profile.normalized) throw std::invalid_argument("normalize_anthro: already normalized");
    if (profile.values.size() != stats.mean.size()) {
        throw std::invalid_argument("normalize_anthro: dimension mismatch");
    }
    AnthroProfile out;
    out.normalized = true;
    out.values.resize(profile.values.size());
    for (std::size_t i = 0; i < profile.values.size(); ++i) {
        out.values[i] = sigmoid((profile.values[i] - stats.mean[i]) / stats.std[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frequency axis and the HRIR -> HRTF chain
// ---------------------------------------------------------------------------

struct FrequencyAxis {
    std::vector<double> centers_hz;
    double f_lo = kFreqLoHz;
    double f_hi = kFreqHiHz;

    // centers[k] = f_lo * (f_hi / f_lo)^(k / (n-1))
    static FrequencyAxis make(std::size_t n_bins = kHrtfBins, double f_lo = kFreqLoHz,
                              double f_hi = kFreqHiHz) {
        if (n_bins < 2 || !(f_lo > 0.0) || !(f_hi > f_lo)) {
            throw ConfigError("FrequencyAxis: invalid parameters");
        }
        FrequencyAxis axis;
        axis.f_lo = f_lo;
        axis.f_hi = f_hi;
        axis.centers_hz.resize(n_bins);
        const double ratio = f_hi / f_lo;
        for (std::size_t k = 0; k < n_bins; ++k) {
            axis.centers_hz[k] =
                f_lo * std::pow(ratio, static_cast<double>(k) / static_cast<double>(n_bins - 1));
        }
        axis.centers_hz.front() = f_lo;
        axis.centers_hz.back() = f_hi;
        return axis;
    }

    bool operator==(const FrequencyAxis&) const = default;
};

struct Hrtf {
    enum class Units { Db, Normalized };
    std::vector<double> bins;
    Units units = Units::Db;
    std::size_t direction_index = 0;
    std::string subject_id;
};

struct PreprocConfig {
    std::size_t dft_size = kDftSize;
    double q_factor = kQFactor;
    std::size_t n_bins = kHrtfBins;
    double f_lo = kFreqLoHz;
    double f_hi = kFreqHiHz;
    bool per_bin_minmax = false;
    double sample_rate_hz = kSampleRateHz;
};

// Constant-Q smoothing of a power spectrum evaluated at the DFT bin centers:
// mean power over bins whose centers lie in [f (1 - 1/2Q), f (1 + 1/2Q)].
// The band always contains the bin itself.
inline std::vector<double> constant_q_smooth_power(std::span<const double> power, double q) {
    const std::size_t n = power.size();
    std::vector<double> out(n);
    const double half = 1.0 / (2.0 * q);
    for (std::size_t k = 0; k < n; ++k) {
        const double fk = static_cast<double>(k);
        auto lo = static_cast<std::int64_t>(std::ceil(fk * (1.0 - half)));
        auto hi = static_cast<std::int64_t>(std::floor(fk * (1.0 + half)));
        lo = std::max<std::int64_t>(lo, 0);
        hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(n) - 1);
        if (hi < lo) {  // cannot happen for bin-centered bands; keep nearest bin
            lo = hi = static_cast<std::int64_t>(k);
        }
        double acc = 0.0;
        for (std::int64_t j = lo; j <= hi; ++j) acc += power[static_cast<std::size_t>(j)];
        out[k] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

// Full chain: zero-pad to dft_size, magnitude spectrum, constant-Q power
// smoothing, dB, then linear interpolation in (log f, dB) onto the axis.
inline std::vector<double> hrir_to_hrtf_db(std::span<const double> hrir,
                                           const FrequencyAxis& axis,
                                           const PreprocConfig& config = {}) {
    if (hrir.size() != kHrirLength) {
        throw std::invalid_argument("hrir_to_hrtf_db: expected 200 samples");
    }
    bool all_zero = true;
    for (double v : hrir) {
        if (!std::isfinite(v)) throw std::invalid_argument("hrir_to_hrtf_db: non-finite sample");
        if (v != 0.0) all_zero = false;
    }
    if (all_zero) throw NumericalError("hrir_to_hrtf_db: all-zero HRIR");

    const auto mag = magnitude_spectrum(hrir, config.dft_size);
    std::vector<double> power(mag.size());
    for (std::size_t k = 0; k < mag.size(); ++k) power[k] = mag[k] * mag[k];
    const auto smoothed = constant_q_smooth_power(power, config.q_factor);

    std::vector<double> db(smoothed.size());
    for (std::size_t k = 0; k < smoothed.size(); ++k) {
        db[k] = 10.0 * std::log10(std::max(smoothed[k], 1e-300));
    }

    const double delta_f = config.sample_rate_hz / static_cast<double>(config.dft_size);
    std::vector<double> out(axis.centers_hz.size());
    for (std::size_t i = 0; i < axis.centers_hz.size(); ++i) {
        const double f = axis.centers_hz[i];
        auto j = static_cast<std::size_t>(f / delta_f);
        j = std::max<std::size_t>(j, 1);  // stay off the DC bin: log f
        j = std::min(j, db.size() - 2);
        const double fj = static_cast<double>(j) * delta_f;
        const double fj1 = static_cast<double>(j + 1) * delta_f;
        const double w = (std::log(f) - std::log(fj)) / (std::log(fj1) - std::log(fj));
        out[i] = (1.0 - w) * db[j] + w * db[j + 1];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Min-max normalization
// ---------------------------------------------------------------------------

struct MinMax {
    // One entry when global, one per bin when per-bin fitting is enabled.
    std::vector<double> min_db;
    std::vector<double> max_db;

    bool per_bin() const { return min_db.size() > 1; }
    double lo(std::size_t bin) const { return min_db[per_bin() ? bin : 0]; }
    double hi(std::size_t bin) const { return max_db[per_bin() ? bin : 0]; }
    double span(std::size_t bin) const { return hi(bin) - lo(bin); }

    bool operator==(const MinMax&) const = default;
};

// Elementwise min/max over all bins of all training HRTFs (global scalar
// pair by default).
inline MinMax fit_minmax(const std::vector<std::vector<double>>& db_hrtfs,
                         bool per_bin = false) {
    if (db_hrtfs.empty()) throw std::invalid_argument("fit_minmax: empty training set");
    const std::size_t dim = db_hrtfs.front().size();
    MinMax mm;
    const std::size_t slots = per_bin ? dim : 1;
    mm.min_db.assign(slots, std::numeric_limits<double>::infinity());
    mm.max_db.assign(slots, -std::numeric_limits<double>::infinity());
    for (const auto& h : db_hrtfs) {
        if (h.size() != dim) throw std::invalid_argument("fit_minmax: ragged HRTFs");
        for (std::size_t i = 0; i < dim; ++i) {
            if (!std::isfinite(h[i])) throw std::invalid_argument("fit_minmax: non-finite value");
            const std::size_t s = per_bin ? i : 0;
            mm.min_db[s] = std::min(mm.min_db[s], h[i]);
            mm.max_db[s] = std::max(mm.max_db[s], h[i]);
        }
    }
    for (std::size_t s = 0; s < slots; ++s) {
        if (!(mm.max_db[s] > mm.min_db[s])) {
            throw NumericalError("fit_minmax: degenerate range (min == max)");
        }
    }
    return mm;
}

// v' = (v - min) / (max - min), clamped to [0, 1]; sets *clamped when any
// input fell outside the fitted range.
inline std::vector<double> apply_minmax(std::span<const double> db_hrtf, const MinMax& mm,
                                        bool* clamped = nullptr) {
    std::vector<double> out(db_hrtf.size());
    bool any_clamp = false;
    for (std::size_t i = 0; i < db_hrtf.size(); ++i) {
        double v = (db_hrtf[i] - mm.lo(i)) / mm.span(i);
        if (v < 0.0) {
            v = 0.0;
            any_clamp = true;
        } else if (v > 1.0) {
            v = 1.0;
            any_clamp = true;
        }
        out[i] = v;
    }
    if (clamped) *clamped = any_clamp;
    return out;
}

inline std::vector<double> inverse_minmax(std::span<const double> normalized, const MinMax& mm) {
    std::vector<double> out(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        out[i] = normalized[i] * mm.span(i) + mm.lo(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model input assembly
// ---------------------------------------------------------------------------

// [27 normalized anthro values, x, y, z]
inline std::array<double, kModelInputDim> build_model_input(const AnthroProfile& profile,
                                                            const Direction& direction) {
    if (!profile.normalized) throw std::invalid_argument("build_model_input: profile not normalized");
    if (profile.values.size() != kAnthroParams) {
        throw std::invalid_argument("build_model_input: expected 27 anthro values");
    }
    std::array<double, kModelInputDim> out{};
    for (std::size_t i = 0; i < kAnthroParams; ++i) out[i] = profile.values[i];
    out[27] = direction.cartesian.x;
    out[28] = direction.cartesian.y;
    out[29] = direction.cartesian.z;
    return out;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct PreprocManifest {
    AnthroStats anthro_stats;
    MinMax minmax;
    FrequencyAxis axis;
    PreprocConfig config;

    bool operator==(const PreprocManifest& o) const {
        return anthro_stats == o.anthro_stats && minmax == o.minmax && axis == o.axis &&
               config.dft_size == o.config.dft_size && config.q_factor == o.config.q_factor &&
               config.n_bins == o.config.n_bins && config.f_lo == o.config.f_lo &&
               config.f_hi == o.config.f_hi && config.per_bin_minmax == o.config.per_bin_minmax;
    }
};

inline nlohmann::json to_json(const PreprocManifest& m) {
    nlohmann::json j;
    j["version"] = 1;
    j["anthro_mean"] = m.anthro_stats.mean;
    j["anthro_std"] = m.anthro_stats.std;
    j["min_db"] = m.minmax.min_db;
    j["max_db"] = m.minmax.max_db;
    j["axis"] = {{"n_bins", m.axis.centers_hz.size()}, {"f_lo", m.axis.f_lo}, {"f_hi", m.axis.f_hi}};
    j["q_factor"] = m.config.q_factor;
    j["dft_size"] = m.config.dft_size;
    j["per_bin_minmax"] = m.config.per_bin_minmax;
    j["sample_rate_hz"] = m.config.sample_rate_hz;
    return j;
}

inline PreprocManifest preproc_manifest_from_json(const nlohmann::json& j) {
    PreprocManifest m;
    m.anthro_stats.mean = j.at("anthro_mean").get<std::vector<double>>();
    m.anthro_stats.std = j.at("anthro_std").get<std::vector<double>>();
    m.minmax.min_db = j.at("min_db").get<std::vector<double>>();
    m.minmax.max_db = j.at("max_db").get<std::vector<double>>();
    m.config.q_factor = j.at("q_factor").get<double>();
    m.config.dft_size = j.at("dft_size").get<std::size_t>();
    m.config.per_bin_minmax = j.at("per_bin_minmax").get<bool>();
    m.config.sample_rate_hz = j.value("sample_rate_hz", kSampleRateHz);
    m.config.n_bins = j.at("axis").at("n_bins").get<std::size_t>();
    m.config.f_lo = j.at("axis").at("f_lo").get<double>();
    m.config.f_hi = j.at("axis").at("f_hi").get<double>();
    m.axis = FrequencyAxis::make(m.config.n_bins, m.config.f_lo, m.config.f_hi);
    return m;
}

// FNV-1a over the canonical JSON serialization; ties checkpoints to the
// exact preprocessing statistics they were trained with.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string manifest_hash(const PreprocManifest& m) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json(m).dump())));
    return std::string(buf);
}

}  // namespace hrtfgroup
