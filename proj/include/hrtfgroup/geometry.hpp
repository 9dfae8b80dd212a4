// Interaural-polar directions and the fixed CIPIC-style measurement grid:
// 25 azimuths x 50 elevations = 1250 directions, azimuth-major order.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hrtfgroup {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
    bool operator==(const Vec3&) const = default;
};

inline constexpr double kDegToRad = 3.141592653589793238462643383279502884 / 180.0;

// (x, y, z) = (R cos(theta) cos(phi), R sin(theta), R cos(theta) sin(phi)),
// theta = azimuth, phi = elevation. +x front, +z up, +y toward the right
// ear, so the left ear looks along -y.
inline Vec3 interaural_polar_to_cartesian(double azimuth_deg, double elevation_deg,
                                          double radius) {
    if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg) || !std::isfinite(radius)) {
        throw std::invalid_argument("interaural_polar_to_cartesian: non-finite input");
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("interaural_polar_to_cartesian: radius must be positive");
    }
    const double theta = azimuth_deg * kDegToRad;
    const double phi = elevation_deg * kDegToRad;
    return {radius * std::cos(theta) * std::cos(phi),
            radius * std::sin(theta),
            radius * std::cos(theta) * std::sin(phi)};
}

struct Direction {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double radius = 1.0;
    Vec3 cartesian;

    static Direction from_angles(double azimuth_deg, double elevation_deg, double radius = 1.0) {
        Direction d;
        d.azimuth_deg = azimuth_deg;
        d.elevation_deg = elevation_deg;
        d.radius = radius;
        d.cartesian = interaural_polar_to_cartesian(azimuth_deg, elevation_deg, radius);
        return d;
    }

    bool operator==(const Direction&) const = default;
};

inline constexpr std::size_t kGridAzimuths = 25;
inline constexpr std::size_t kGridElevations = 50;
inline constexpr std::size_t kGridDirections = kGridAzimuths * kGridElevations;
inline constexpr double kElevationStepDeg = 360.0 / 64.0;  // 5.625

struct MeasurementGrid {
    std::vector<double> azimuths;
    std::vector<double> elevations;
    std::vector<Direction> directions;  // azimuth-major: index = ai * 50 + ei

    std::size_t index_of(std::size_t azimuth_index, std::size_t elevation_index) const {
        return azimuth_index * elevations.size() + elevation_index;
    }
    std::size_t azimuth_index(std::size_t direction_index) const {
        return direction_index / elevations.size();
    }
    std::size_t elevation_index(std::size_t direction_index) const {
        return direction_index % elevations.size();
    }

    bool operator==(const MeasurementGrid&) const = default;
};

// -80, -65, -55, -45, then every 5 deg to +45, +55, +65, +80; elevations
// -45 + k * 5.625 for k = 0..49. All directions at unit radius.
inline MeasurementGrid build_cipic_grid() {
    MeasurementGrid grid;
    grid.azimuths = {-80.0, -65.0, -55.0};
    for (int a = -45; a <= 45; a += 5) grid.azimuths.push_back(static_cast<double>(a));
    grid.azimuths.push_back(55.0);
    grid.azimuths.push_back(65.0);
    grid.azimuths.push_back(80.0);

    grid.elevations.reserve(kGridElevations);
    for (std::size_t k = 0; k < kGridElevations; ++k) {
        grid.elevations.push_back(-45.0 + static_cast<double>(k) * kElevationStepDeg);
    }

    grid.directions.reserve(kGridDirections);
    for (double az : grid.azimuths) {
        for (double el : grid.elevations) {
            grid.directions.push_back(Direction::from_angles(az, el, 1.0));
        }
    }
    return grid;
}

// Left-ear convention: azimuth <= 0 is ipsilateral, > 0 contralateral.
inline bool is_ipsilateral(double azimuth_deg) { return azimuth_deg <= 0.0; }

// Angle in degrees between a direction and the contralateral pole
// (+90 deg azimuth, the axis through the right ear). cos = sin(azimuth).
inline double angle_from_contralateral_pole_deg(const Direction& d) {
    const double s = std::sin(d.azimuth_deg * kDegToRad);
    const double c = std::min(1.0, std::max(-1.0, s));
    return std::acos(c) / kDegToRad;
}

}  // namespace hrtfgroup
