#include <catch_amalgamated.hpp>

#include <cmath>

#include "hrtfgroup/geometry.hpp"
#include "hrtfgroup/rng.hpp"

using namespace hrtfgroup;

TEST_CASE("interaural-polar to cartesian: axis cases") {
    auto v = interaural_polar_to_cartesian(0.0, 0.0, 1.0);
    CHECK(v.x == Catch::Approx(1.0).margin(1e-15));
    CHECK(v.y == Catch::Approx(0.0).margin(1e-15));
    CHECK(v.z == Catch::Approx(0.0).margin(1e-15));

    v = interaural_polar_to_cartesian(0.0, 90.0, 1.0);
    CHECK(v.x == Catch::Approx(0.0).margin(1e-15));
    CHECK(v.y == Catch::Approx(0.0).margin(1e-15));
    CHECK(v.z == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("interaural-polar to cartesian: off-axis against trig oracle") {
    // (-80, 90, 1): x = cos(-80)cos(90), y = sin(-80), z = cos(-80)sin(90)
    const auto v = interaural_polar_to_cartesian(-80.0, 90.0, 1.0);
    CHECK(v.x == Catch::Approx(0.0).margin(1e-12));
    CHECK(v.y == Catch::Approx(-0.98481).margin(1e-5));
    CHECK(v.z == Catch::Approx(0.17365).margin(1e-5));
    CHECK(v.y == Catch::Approx(std::sin(-80.0 * kDegToRad)).margin(1e-15));
    CHECK(v.z == Catch::Approx(std::cos(-80.0 * kDegToRad)).margin(1e-15));
}

TEST_CASE("interaural-polar to cartesian: rejects bad input") {
    CHECK_THROWS_AS(interaural_polar_to_cartesian(std::nan(""), 0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        interaural_polar_to_cartesian(0.0, std::numeric_limits<double>::infinity(), 1.0),
        std::invalid_argument);
    CHECK_THROWS_AS(interaural_polar_to_cartesian(0.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(interaural_polar_to_cartesian(0.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("cartesian coordinates are random-direction consistent") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        const double az = rng.uniform(-80.0, 80.0);
        const double el = rng.uniform(-45.0, 230.625);
        const double r = rng.uniform(0.1, 3.0);
        const auto v = interaural_polar_to_cartesian(az, el, r);
        const double norm2 = v.x * v.x + v.y * v.y + v.z * v.z;
        CHECK(norm2 == Catch::Approx(r * r).margin(1e-9));
    }
}

TEST_CASE("cipic grid layout") {
    const auto grid = build_cipic_grid();

    REQUIRE(grid.azimuths.size() == 25);
    REQUIRE(grid.elevations.size() == 50);
    REQUIRE(grid.directions.size() == 1250);

    CHECK(grid.azimuths.front() == -80.0);
    CHECK(grid.azimuths[1] == -65.0);
    CHECK(grid.azimuths[2] == -55.0);
    CHECK(grid.azimuths[3] == -45.0);
    CHECK(grid.azimuths.back() == 80.0);

    CHECK(grid.elevations.front() == -45.0);
    for (std::size_t k = 1; k < grid.elevations.size(); ++k) {
        CHECK(grid.elevations[k] - grid.elevations[k - 1] == 5.625);
    }
    CHECK(grid.elevations.back() == Catch::Approx(230.625).margin(1e-12));
}

TEST_CASE("grid directions carry consistent cartesian fields") {
    const auto grid = build_cipic_grid();
    for (const auto& d : grid.directions) {
        const auto v = interaural_polar_to_cartesian(d.azimuth_deg, d.elevation_deg, d.radius);
        CHECK(std::abs(v.x - d.cartesian.x) < 1e-9);
        CHECK(std::abs(v.y - d.cartesian.y) < 1e-9);
        CHECK(std::abs(v.z - d.cartesian.z) < 1e-9);
        const double n2 = d.cartesian.x * d.cartesian.x + d.cartesian.y * d.cartesian.y +
                          d.cartesian.z * d.cartesian.z;
        CHECK(std::abs(n2 - d.radius * d.radius) < 1e-9);
    }
}

TEST_CASE("build_cipic_grid is pure") {
    const auto a = build_cipic_grid();
    const auto b = build_cipic_grid();
    CHECK(a == b);
}

TEST_CASE("grid indexing round-trips") {
    const auto grid = build_cipic_grid();
    for (std::size_t ai : {std::size_t{0}, std::size_t{12}, std::size_t{24}}) {
        for (std::size_t ei : {std::size_t{0}, std::size_t{24}, std::size_t{49}}) {
            const auto d = grid.index_of(ai, ei);
            CHECK(grid.azimuth_index(d) == ai);
            CHECK(grid.elevation_index(d) == ei);
            CHECK(grid.directions[d].azimuth_deg == grid.azimuths[ai]);
            CHECK(grid.directions[d].elevation_deg == grid.elevations[ei]);
        }
    }
}

TEST_CASE("angle from the contralateral pole") {
    const auto near_pole = Direction::from_angles(80.0, 90.0);
    const auto far_pole = Direction::from_angles(-80.0, 0.0);
    CHECK(angle_from_contralateral_pole_deg(near_pole) == Catch::Approx(10.0).margin(1e-9));
    CHECK(angle_from_contralateral_pole_deg(far_pole) == Catch::Approx(170.0).margin(1e-9));
}
