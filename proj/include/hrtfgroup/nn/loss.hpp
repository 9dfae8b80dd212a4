// Loss functions with hand-derived gradients.
//
// VAE: mean-squared reconstruction error plus beta * KL(q(z|x) || N(0, I)),
// the KL summed over latent dims and averaged over the batch.
// DNN: MSE between predicted and target (mean, log-variance) pairs plus
// lambda * the dB log-spectral distance between the decoded prediction and
// the target, both denormalized through the training min-max.
#pragma once

#include <cmath>
#include <vector>

#include "hrtfgroup/error.hpp"
#include "hrtfgroup/matrix.hpp"
#include "hrtfgroup/nn/models.hpp"
#include "hrtfgroup/preproc.hpp"

namespace hrtfgroup::nn {

struct VaeLoss {
    double value = 0.0;
    double mse = 0.0;
    double kl = 0.0;
    Matrix grad_recon;
    Matrix grad_mean;
    Matrix grad_log_var;
};

inline VaeLoss vae_loss(const Matrix& reconstruction, const Matrix& target,
                        const LatentGaussian& latent, double beta) {
    if (reconstruction.rows() != target.rows() || reconstruction.cols() != target.cols()) {
        throw std::invalid_argument("vae_loss: shape mismatch");
    }
    const std::size_t n = reconstruction.rows();
    const std::size_t d = reconstruction.cols();
    const double inv_nd = 1.0 / static_cast<double>(n * d);
    const double inv_n = 1.0 / static_cast<double>(n);

    VaeLoss out;
    out.grad_recon = Matrix(n, d);
    for (std::size_t i = 0; i < reconstruction.size(); ++i) {
        const double r = reconstruction.data()[i] - target.data()[i];
        out.mse += r * r;
        out.grad_recon.data()[i] = 2.0 * r * inv_nd;
    }
    out.mse *= inv_nd;

    const std::size_t ld = latent.mean.cols();
    out.grad_mean = Matrix(n, ld);
    out.grad_log_var = Matrix(n, ld);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < ld; ++c) {
            const double m = latent.mean(r, c);
            const double lv = latent.log_var(r, c);
            out.kl += -0.5 * (1.0 + lv - m * m - std::exp(lv));
            out.grad_mean(r, c) = beta * m * inv_n;
            out.grad_log_var(r, c) = beta * (-0.5) * (1.0 - std::exp(lv)) * inv_n;
        }
    }
    out.kl *= inv_n;
    out.value = out.mse + beta * out.kl;
    return out;
}

struct DnnLoss {
    double value = 0.0;
    double latent_mse = 0.0;
    double lsd_db = 0.0;  // batch-mean LSD of the decoded prediction
    Matrix grad_pred_mean;     // direct latent-MSE term only
    Matrix grad_pred_log_var;
    Matrix grad_decoded;       // feeds the frozen decoder's backward pass
};

// predicted/target: (mean, log_var) pairs; decoded: decoder output on the
// predicted mean; target_hrtf: normalized target. The two MinMax arguments
// must describe the same normalization or the scales are incomparable.
inline DnnLoss dnn_loss(const LatentGaussian& predicted, const LatentGaussian& target,
                        const Matrix& decoded, const Matrix& target_hrtf, double lambda_lsd,
                        const MinMax& decoded_minmax, const MinMax& target_minmax) {
    if (!(decoded_minmax == target_minmax)) {
        throw ConfigError("dnn_loss: decoded and target normalizations differ");
    }
    const std::size_t n = predicted.mean.rows();
    const std::size_t ld = predicted.mean.cols();
    if (target.mean.rows() != n || decoded.rows() != n || target_hrtf.rows() != n) {
        throw std::invalid_argument("dnn_loss: batch size mismatch");
    }
    const std::size_t d = decoded.cols();
    const double inv_latent = 1.0 / static_cast<double>(n * 2 * ld);
    const double inv_n = 1.0 / static_cast<double>(n);

    DnnLoss out;
    out.grad_pred_mean = Matrix(n, ld);
    out.grad_pred_log_var = Matrix(n, ld);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < ld; ++c) {
            const double dm = predicted.mean(r, c) - target.mean(r, c);
            const double dv = predicted.log_var(r, c) - target.log_var(r, c);
            out.latent_mse += dm * dm + dv * dv;
            out.grad_pred_mean(r, c) = 2.0 * dm * inv_latent;
            out.grad_pred_log_var(r, c) = 2.0 * dv * inv_latent;
        }
    }
    out.latent_mse *= inv_latent;

    // differentiable LSD on denormalized dB values; the normalization is
    // affine so the dB difference is span * (decoded - target)
    out.grad_decoded = Matrix(n, d);
    constexpr double kSqrtGuard = 1e-12;
    for (std::size_t r = 0; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = decoded_minmax.span(c) * (decoded(r, c) - target_hrtf(r, c));
            acc += diff * diff;
        }
        const double mean_sq = acc / static_cast<double>(d);
        const double lsd_r = std::sqrt(mean_sq + kSqrtGuard);
        out.lsd_db += lsd_r;
        const double scale = lambda_lsd * inv_n / (lsd_r * static_cast<double>(d));
        for (std::size_t c = 0; c < d; ++c) {
            const double span = decoded_minmax.span(c);
            out.grad_decoded(r, c) = scale * span * span * (decoded(r, c) - target_hrtf(r, c));
        }
    }
    out.lsd_db *= inv_n;
    out.value = out.latent_mse + lambda_lsd * out.lsd_db;
    return out;
}

}  // namespace hrtfgroup::nn
