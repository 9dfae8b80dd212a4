// Radix-2 FFT and the spectral helpers built on it: magnitude spectra of
// zero-padded real signals and minimum-phase reconstruction via the real
// cepstrum. Sizes must be powers of two.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "hrtfgroup/error.hpp"

namespace hrtfgroup {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT. inverse=true applies the conjugate
// transform including the 1/N factor.
inline void fft_inplace(std::vector<std::complex<double>>& x, bool inverse = false) {
    const std::size_t n = x.size();
    if (!is_power_of_two(n)) throw ConfigError("fft size must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }

    const double pi = 3.141592653589793238462643383279502884;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = x[i + k];
                const std::complex<double> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& v : x) v *= inv_n;
    }
}

// Magnitude of the n-point DFT of a real signal zero-padded to length n.
// Returns the n/2 + 1 non-redundant bins.
inline std::vector<double> magnitude_spectrum(std::span<const double> signal, std::size_t n) {
    if (signal.size() > n) throw ConfigError("signal longer than dft size");
    std::vector<std::complex<double>> buf(n, {0.0, 0.0});
    for (std::size_t i = 0; i < signal.size(); ++i) buf[i] = {signal[i], 0.0};
    fft_inplace(buf);
    std::vector<double> mag(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) mag[k] = std::abs(buf[k]);
    return mag;
}

// Minimum-phase signal with the given magnitude spectrum (n/2 + 1 bins over
// an n-point grid), computed by folding the real cepstrum. Magnitudes must
// be strictly positive.
inline std::vector<double> minimum_phase_signal(std::span<const double> half_magnitude,
                                                std::size_t n, std::size_t out_len) {
    if (half_magnitude.size() != n / 2 + 1) throw ConfigError("bad magnitude length");

    std::vector<std::complex<double>> buf(n);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double m = half_magnitude[k];
        if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("non-positive magnitude bin");
        buf[k] = {std::log(m), 0.0};
    }
    for (std::size_t k = n / 2 + 1; k < n; ++k) buf[k] = buf[n - k];

    fft_inplace(buf, /*inverse=*/true);  // real cepstrum

    // fold anti-causal part onto the causal part
    std::vector<std::complex<double>> cep(n, {0.0, 0.0});
    cep[0] = buf[0];
    cep[n / 2] = buf[n / 2];
    for (std::size_t i = 1; i < n / 2; ++i) cep[i] = buf[i] + buf[n - i];

    fft_inplace(cep);
    for (auto& v : cep) v = std::exp(v);
    fft_inplace(cep, /*inverse=*/true);

    std::vector<double> out(out_len, 0.0);
    const std::size_t copy = std::min(out_len, n);
    for (std::size_t i = 0; i < copy; ++i) out[i] = cep[i].real();
    return out;
}

}  // namespace hrtfgroup
