#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hrtfgroup/preproc.hpp"
#include "hrtfgroup/rng.hpp"

using namespace hrtfgroup;

namespace {

// independent two-pass mean / population-std oracle
std::pair<std::vector<double>, std::vector<double>> stats_oracle(
    const std::vector<std::vector<double>>& profiles) {
    const std::size_t dim = profiles.front().size();
    std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        for (const auto& p : profiles) mean[i] += p[i];
        mean[i] /= static_cast<double>(profiles.size());
        for (const auto& p : profiles) sd[i] += (p[i] - mean[i]) * (p[i] - mean[i]);
        sd[i] = std::sqrt(sd[i] / static_cast<double>(profiles.size()));
    }
    return {mean, sd};
}

std::vector<double> impulse_hrir(std::size_t delay = 0, double amplitude = 1.0) {
    std::vector<double> h(kHrirLength, 0.0);
    h[delay] = amplitude;
    return h;
}

}  // namespace

TEST_CASE("anthro stats: two-point case") {
    std::vector<std::vector<double>> profiles = {{0.0}, {2.0}};
    const auto stats = fit_anthro_stats(profiles);
    CHECK(stats.mean[0] == 1.0);
    CHECK(stats.std[0] == 1.0);  // population std
}

TEST_CASE("anthro stats: degenerate parameter rejected with index") {
    std::vector<std::vector<double>> profiles = {{1.0, 3.0}, {1.0, 4.0}, {1.0, 5.0}};
    CHECK_THROWS_WITH(fit_anthro_stats(profiles), Catch::Matchers::ContainsSubstring("0"));
    CHECK_THROWS_AS(fit_anthro_stats(profiles), NumericalError);
    CHECK_THROWS_AS(fit_anthro_stats({{1.0}}), std::invalid_argument);
}

TEST_CASE("anthro stats match the two-pass oracle") {
    Rng rng(17);
    std::vector<std::vector<double>> profiles(35, std::vector<double>(kAnthroParams));
    for (auto& p : profiles) {
        for (auto& v : p) v = 10.0 + 3.0 * rng.normal();
    }
    const auto stats = fit_anthro_stats(profiles);
    const auto [mean, sd] = stats_oracle(profiles);
    for (std::size_t i = 0; i < kAnthroParams; ++i) {
        CHECK(stats.mean[i] == Catch::Approx(mean[i]).margin(1e-12));
        CHECK(stats.std[i] == Catch::Approx(sd[i]).margin(1e-12));
    }
}

TEST_CASE("sigmoid normalization values") {
    AnthroStats stats;
    stats.mean = {5.0};
    stats.std = {2.0};

    auto at = [&](double raw) {
        return normalize_anthro(AnthroProfile{{raw}, false}, stats).values[0];
    };
    CHECK(at(5.0) == 0.5);
    CHECK(at(7.0) == Catch::Approx(0.73106).margin(5e-6));       // sigmoid(1)
    CHECK(at(3.0) == Catch::Approx(0.26894).margin(5e-6));       // sigmoid(-1)
    CHECK(at(7.0) == Catch::Approx(1.0 / (1.0 + std::exp(-1.0))).margin(1e-15));
}

TEST_CASE("sigmoid normalization symmetry and monotonicity") {
    AnthroStats stats;
    stats.mean = {1.0};
    stats.std = {0.7};
    Rng rng(21);
    double prev_x = -1e9, prev_y = -1.0;
    for (int i = 0; i < 300; ++i) {
        const double x = rng.uniform(-20.0, 20.0);
        const double up = normalize_anthro(AnthroProfile{{1.0 + x}, false}, stats).values[0];
        const double dn = normalize_anthro(AnthroProfile{{1.0 - x}, false}, stats).values[0];
        CHECK(up + dn == Catch::Approx(1.0).margin(1e-12));
        CHECK(up > 0.0);
        CHECK(up < 1.0);
        if (x > prev_x) {
            // collect one monotone pair per iteration
            if (prev_y >= 0.0) CHECK(up > prev_y);
        }
        prev_x = x;
        prev_y = up;
    }
    CHECK_THROWS_AS(
        normalize_anthro(normalize_anthro(AnthroProfile{{1.0}, false}, stats), stats),
        std::invalid_argument);
}

TEST_CASE("frequency axis: endpoints and log spacing") {
    const auto axis = FrequencyAxis::make();
    REQUIRE(axis.centers_hz.size() == 173);
    CHECK(std::abs(axis.centers_hz.front() - 200.0) / 200.0 < 1e-9);
    CHECK(std::abs(axis.centers_hz.back() - 15000.0) / 15000.0 < 1e-9);
    for (std::size_t k = 0; k < axis.centers_hz.size(); ++k) {
        const double expect = 200.0 * std::pow(15000.0 / 200.0, static_cast<double>(k) / 172.0);
        CHECK(std::abs(axis.centers_hz[k] - expect) / expect < 1e-6);
        if (k > 0) CHECK(axis.centers_hz[k] > axis.centers_hz[k - 1]);
    }
}

TEST_CASE("hrir chain: unit impulse is flat 0 dB") {
    const auto axis = FrequencyAxis::make();
    const auto db = hrir_to_hrtf_db(impulse_hrir(), axis);
    REQUIRE(db.size() == 173);
    for (double v : db) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("hrir chain: delay invariance") {
    const auto axis = FrequencyAxis::make();
    const auto a = hrir_to_hrtf_db(impulse_hrir(0), axis);
    const auto b = hrir_to_hrtf_db(impulse_hrir(10), axis);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-9);
}

TEST_CASE("hrir chain: scaling shifts dB uniformly") {
    const auto axis = FrequencyAxis::make();
    const auto half = hrir_to_hrtf_db(impulse_hrir(0, 0.5), axis);
    for (double v : half) CHECK(v == Catch::Approx(-6.0206).margin(1e-4));
    for (double v : half) CHECK(v == Catch::Approx(20.0 * std::log10(0.5)).margin(1e-9));

    Rng rng(5);
    std::vector<double> hrir(kHrirLength);
    for (auto& v : hrir) v = rng.normal();
    const auto base = hrir_to_hrtf_db(hrir, axis);
    for (double c : {0.5, 2.0, 10.0}) {
        auto scaled = hrir;
        for (auto& v : scaled) v *= c;
        const auto out = hrir_to_hrtf_db(scaled, axis);
        const double shift = 20.0 * std::log10(c);
        for (std::size_t k = 0; k < out.size(); ++k) {
            CHECK(std::abs(out[k] - base[k] - shift) < 1e-9);
        }
    }
}

TEST_CASE("hrir chain: degenerate and malformed inputs") {
    const auto axis = FrequencyAxis::make();
    CHECK_THROWS_AS(hrir_to_hrtf_db(std::vector<double>(kHrirLength, 0.0), axis),
                    NumericalError);
    CHECK_THROWS_AS(hrir_to_hrtf_db(std::vector<double>(199, 1.0), axis),
                    std::invalid_argument);
}

TEST_CASE("constant-Q smoothing preserves constants") {
    std::vector<double> power(257, 3.75);
    const auto smoothed = constant_q_smooth_power(power, 8.0);
    for (double v : smoothed) CHECK(v == Catch::Approx(3.75).margin(1e-15));
}

TEST_CASE("min-max: fit, endpoints, clamping, round trip") {
    const std::vector<std::vector<double>> toy = {{0.0, 10.0}, {-5.0, 5.0}};
    const auto mm = fit_minmax(toy);
    CHECK(mm.lo(0) == -5.0);
    CHECK(mm.hi(0) == 10.0);

    bool clamped = false;
    const auto lo = apply_minmax(std::vector<double>{-5.0, 10.0}, mm, &clamped);
    CHECK(lo[0] == 0.0);
    CHECK(lo[1] == 1.0);
    CHECK_FALSE(clamped);

    const auto below = apply_minmax(std::vector<double>{-6.0, 0.0}, mm, &clamped);
    CHECK(below[0] == 0.0);
    CHECK(clamped);

    CHECK_THROWS_AS(fit_minmax({{2.0, 2.0}, {2.0, 2.0}}), NumericalError);
}

TEST_CASE("min-max round trip and scan oracle") {
    Rng rng(31);
    std::vector<std::vector<double>> training(40, std::vector<double>(173));
    double lo = 1e300, hi = -1e300;
    for (auto& h : training) {
        for (auto& v : h) {
            v = rng.uniform(-40.0, 20.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const auto mm = fit_minmax(training);
    CHECK(mm.lo(0) == lo);
    CHECK(mm.hi(0) == hi);

    for (const auto& h : training) {
        const auto norm = apply_minmax(h, mm);
        const auto back = inverse_minmax(norm, mm);
        for (std::size_t k = 0; k < h.size(); ++k) {
            CHECK(std::abs(back[k] - h[k]) < 1e-12);
            CHECK(norm[k] >= 0.0);
            CHECK(norm[k] <= 1.0);
        }
    }
}

TEST_CASE("model input assembly") {
    AnthroStats stats;
    stats.mean.assign(kAnthroParams, 0.0);
    stats.std.assign(kAnthroParams, 1.0);
    std::vector<double> raw(kAnthroParams);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = 0.1 * static_cast<double>(i);
    const auto profile = normalize_anthro(AnthroProfile{raw, false}, stats);

    const auto front = Direction::from_angles(0.0, 0.0);
    const auto in30 = build_model_input(profile, front);
    REQUIRE(in30.size() == 30);
    CHECK(in30[27] == Catch::Approx(1.0).margin(1e-15));
    CHECK(in30[28] == Catch::Approx(0.0).margin(1e-15));
    CHECK(in30[29] == Catch::Approx(0.0).margin(1e-15));

    const auto other = build_model_input(profile, Direction::from_angles(45.0, 120.0));
    for (std::size_t i = 0; i < kAnthroParams; ++i) CHECK(in30[i] == other[i]);

    CHECK_THROWS_AS(build_model_input(AnthroProfile{raw, false}, front), std::invalid_argument);
}

TEST_CASE("preproc manifest: json round trip and hash sensitivity") {
    PreprocManifest m;
    m.anthro_stats.mean.assign(kAnthroParams, 1.25);
    m.anthro_stats.std.assign(kAnthroParams, 0.5);
    m.minmax.min_db = {-31.5};
    m.minmax.max_db = {18.25};
    m.axis = FrequencyAxis::make();

    const auto j = to_json(m);
    const auto back = preproc_manifest_from_json(j);
    CHECK(back == m);
    CHECK(manifest_hash(back) == manifest_hash(m));

    auto tweaked = m;
    tweaked.minmax.max_db = {18.250000001};
    CHECK(manifest_hash(tweaked) != manifest_hash(m));
}
