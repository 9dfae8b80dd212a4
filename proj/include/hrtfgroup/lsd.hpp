// Log-spectral distance between two dB magnitude responses:
// sqrt of the mean squared dB difference over bins k1..k2.
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace hrtfgroup {

inline double lsd(std::span<const double> h_db, std::span<const double> h_hat_db,
                  std::size_t k1 = 0, std::size_t k2 = SIZE_MAX) {
    if (h_db.size() != h_hat_db.size() || h_db.empty()) {
        throw std::invalid_argument("lsd: size mismatch");
    }
    if (k2 == SIZE_MAX) k2 = h_db.size() - 1;
    if (k1 > k2 || k2 >= h_db.size()) throw std::invalid_argument("lsd: bad bin range");
    double acc = 0.0;
    for (std::size_t k = k1; k <= k2; ++k) {
        if (!std::isfinite(h_db[k]) || !std::isfinite(h_hat_db[k])) {
            throw std::invalid_argument("lsd: non-finite input");
        }
        const double d = h_db[k] - h_hat_db[k];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(k2 - k1 + 1));
}

}  // namespace hrtfgroup
