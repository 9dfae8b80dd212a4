// The two networks. VAE: encoder 173 -> 128 -> 64 -> 32 (Dense+BN+ReLU)
// with two linear 32 -> 32 heads for the latent mean and log-variance;
// decoder 32 -> 32 -> 64 -> 128 -> 173 with a sigmoid output layer.
// Predictor DNN: shared trunk 30 -> 64 -> 64, then separate mean and
// log-variance branches 64 -> 128 -> 128 -> 32 (linear outputs).
#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "hrtfgroup/nn/layers.hpp"

namespace hrtfgroup::nn {

inline constexpr std::size_t kHrtfDim = 173;
inline constexpr std::size_t kLatentDim = 32;
inline constexpr std::size_t kInputDim = 30;

struct LatentGaussian {
    Matrix mean;     // n x 32
    Matrix log_var;  // n x 32
};

class VaeEncoder {
public:
    VaeEncoder(double bn_momentum = 0.1, double bn_epsilon = 1e-5)
        : blocks_{DenseBnRelu(kHrtfDim, 128, "enc.l1", bn_momentum, bn_epsilon),
                  DenseBnRelu(128, 64, "enc.l2", bn_momentum, bn_epsilon),
                  DenseBnRelu(64, kLatentDim, "enc.l3", bn_momentum, bn_epsilon)},
          mean_head_(kLatentDim, kLatentDim, "enc.mean"),
          log_var_head_(kLatentDim, kLatentDim, "enc.log_var") {}

    void init(Rng& rng) {
        for (auto& b : blocks_) b.dense.init(rng);
        mean_head_.init(rng);
        log_var_head_.init(rng);
    }

    LatentGaussian forward(const Matrix& x, Mode mode) {
        const Matrix* h = &x;
        for (auto& b : blocks_) h = &b.forward(*h, mode);
        return {mean_head_.forward(*h), log_var_head_.forward(*h)};
    }

    Matrix backward(const Matrix& grad_mean, const Matrix& grad_log_var, bool frozen = false) {
        Matrix grad_h = mean_head_.backward(grad_mean, frozen);
        const Matrix grad_h2 = log_var_head_.backward(grad_log_var, frozen);
        for (std::size_t i = 0; i < grad_h.size(); ++i) grad_h.data()[i] += grad_h2.data()[i];
        for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
            grad_h = it->backward(grad_h, frozen);
        }
        return grad_h;
    }

    std::vector<DenseBnRelu>& blocks() { return blocks_; }
    DenseLayer& mean_head() { return mean_head_; }
    DenseLayer& log_var_head() { return log_var_head_; }

    double min_abs_preact() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& b : blocks_) m = std::min(m, b.min_abs_preact());
        return m;
    }

private:
    std::vector<DenseBnRelu> blocks_;
    DenseLayer mean_head_;
    DenseLayer log_var_head_;
};

class VaeDecoder {
public:
    VaeDecoder(double bn_momentum = 0.1, double bn_epsilon = 1e-5)
        : blocks_{DenseBnRelu(kLatentDim, 32, "dec.l1", bn_momentum, bn_epsilon),
                  DenseBnRelu(32, 64, "dec.l2", bn_momentum, bn_epsilon),
                  DenseBnRelu(64, 128, "dec.l3", bn_momentum, bn_epsilon)},
          out_(128, kHrtfDim, "dec.out") {}

    void init(Rng& rng) {
        for (auto& b : blocks_) b.dense.init(rng);
        out_.init(rng);
    }

    // Output in (0, 1)^173.
    const Matrix& forward(const Matrix& z, Mode mode) {
        const Matrix* h = &z;
        for (auto& b : blocks_) h = &b.forward(*h, mode);
        return sigmoid_.forward(out_.forward(*h));
    }

    Matrix backward(const Matrix& grad_recon, bool frozen = false) {
        Matrix g = out_.backward(sigmoid_.backward(grad_recon), frozen);
        for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
            g = it->backward(g, frozen);
        }
        return g;
    }

    std::vector<DenseBnRelu>& blocks() { return blocks_; }
    DenseLayer& out() { return out_; }

    double min_abs_preact() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& b : blocks_) m = std::min(m, b.min_abs_preact());
        return m;
    }

private:
    std::vector<DenseBnRelu> blocks_;
    DenseLayer out_;
    SigmoidLayer sigmoid_;
};

struct VaeForward {
    Matrix reconstruction;  // n x 173, in (0,1)
    LatentGaussian latent;
    Matrix z;      // sampled (train) or mean (eval)
    Matrix noise;  // the standard-normal draw used (empty in eval mode)
};

class Vae {
public:
    explicit Vae(double bn_momentum = 0.1, double bn_epsilon = 1e-5)
        : encoder_(bn_momentum, bn_epsilon), decoder_(bn_momentum, bn_epsilon) {}

    void init(Rng& rng) {
        encoder_.init(rng);
        decoder_.init(rng);
    }

    // With noise: z = mean + exp(0.5 log_var) * noise (reparameterized
    // sample). Without: z = mean. The mode argument drives batch norm only,
    // so sampling and statistics can be controlled independently.
    VaeForward forward(const Matrix& x, Mode mode, const Matrix* noise = nullptr) {
        VaeForward out;
        out.latent = encoder_.forward(x, mode);
        const std::size_t n = x.rows();
        if (noise != nullptr) {
            if (noise->rows() != n || noise->cols() != kLatentDim) {
                throw std::invalid_argument("Vae::forward: noise must be n x 32");
            }
            out.noise = *noise;
            out.z = Matrix(n, kLatentDim);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < kLatentDim; ++c) {
                    out.z(r, c) = out.latent.mean(r, c) +
                                  std::exp(0.5 * out.latent.log_var(r, c)) * out.noise(r, c);
                }
            }
        } else {
            out.z = out.latent.mean;
        }
        out.reconstruction = decoder_.forward(out.z, mode);
        return out;
    }

    // Backward through decoder, reparameterization and encoder.
    // grad_mean_extra / grad_log_var_extra carry the loss terms that hit the
    // latent directly (the KL gradient).
    void backward(const VaeForward& fwd, const Matrix& grad_recon, const Matrix& grad_mean_extra,
                  const Matrix& grad_log_var_extra) {
        Matrix grad_z = decoder_.backward(grad_recon);
        Matrix grad_mean = grad_mean_extra;
        Matrix grad_log_var = grad_log_var_extra;
        if (!fwd.noise.size()) {  // eval-mode forward: z == mean
            for (std::size_t i = 0; i < grad_z.size(); ++i) {
                grad_mean.data()[i] += grad_z.data()[i];
            }
        } else {
            for (std::size_t r = 0; r < grad_z.rows(); ++r) {
                for (std::size_t c = 0; c < kLatentDim; ++c) {
                    grad_mean(r, c) += grad_z(r, c);
                    grad_log_var(r, c) += grad_z(r, c) * fwd.noise(r, c) * 0.5 *
                                          std::exp(0.5 * fwd.latent.log_var(r, c));
                }
            }
        }
        encoder_.backward(grad_mean, grad_log_var);
    }

    VaeEncoder& encoder() { return encoder_; }
    VaeDecoder& decoder() { return decoder_; }
    const VaeEncoder& encoder() const { return encoder_; }
    const VaeDecoder& decoder() const { return decoder_; }

    std::vector<Param*> parameters() {
        std::vector<Param*> params;
        auto add_block = [&](DenseBnRelu& b) {
            params.push_back(&b.dense.weight());
            params.push_back(&b.dense.bias());
            params.push_back(&b.bn.gamma());
            params.push_back(&b.bn.beta());
        };
        for (auto& b : encoder_.blocks()) add_block(b);
        params.push_back(&encoder_.mean_head().weight());
        params.push_back(&encoder_.mean_head().bias());
        params.push_back(&encoder_.log_var_head().weight());
        params.push_back(&encoder_.log_var_head().bias());
        for (auto& b : decoder_.blocks()) add_block(b);
        params.push_back(&decoder_.out().weight());
        params.push_back(&decoder_.out().bias());
        return params;
    }

    void zero_grad() {
        for (auto* p : parameters()) p->zero_grad();
    }

    double min_abs_preact() const {
        return std::min(encoder_.min_abs_preact(), decoder_.min_abs_preact());
    }

private:
    VaeEncoder encoder_;
    VaeDecoder decoder_;
};

class PredictorDnn {
public:
    explicit PredictorDnn(double bn_momentum = 0.1, double bn_epsilon = 1e-5)
        : trunk_{DenseBnRelu(kInputDim, 64, "dnn.t1", bn_momentum, bn_epsilon),
                 DenseBnRelu(64, 64, "dnn.t2", bn_momentum, bn_epsilon)},
          mean_branch_{DenseBnRelu(64, 128, "dnn.m1", bn_momentum, bn_epsilon),
                       DenseBnRelu(128, 128, "dnn.m2", bn_momentum, bn_epsilon)},
          log_var_branch_{DenseBnRelu(64, 128, "dnn.v1", bn_momentum, bn_epsilon),
                          DenseBnRelu(128, 128, "dnn.v2", bn_momentum, bn_epsilon)},
          mean_out_(128, kLatentDim, "dnn.mean"),
          log_var_out_(128, kLatentDim, "dnn.log_var") {}

    void init(Rng& rng) {
        for (auto& b : trunk_) b.dense.init(rng);
        for (auto& b : mean_branch_) b.dense.init(rng);
        for (auto& b : log_var_branch_) b.dense.init(rng);
        mean_out_.init(rng);
        log_var_out_.init(rng);
    }

    LatentGaussian forward(const Matrix& x, Mode mode) {
        const Matrix* h = &x;
        for (auto& b : trunk_) h = &b.forward(*h, mode);
        const Matrix* hm = h;
        for (auto& b : mean_branch_) hm = &b.forward(*hm, mode);
        const Matrix* hv = h;
        for (auto& b : log_var_branch_) hv = &b.forward(*hv, mode);
        return {mean_out_.forward(*hm), log_var_out_.forward(*hv)};
    }

    void backward(const Matrix& grad_mean, const Matrix& grad_log_var) {
        Matrix gm = mean_out_.backward(grad_mean);
        for (auto it = mean_branch_.rbegin(); it != mean_branch_.rend(); ++it) {
            gm = it->backward(gm);
        }
        Matrix gv = log_var_out_.backward(grad_log_var);
        for (auto it = log_var_branch_.rbegin(); it != log_var_branch_.rend(); ++it) {
            gv = it->backward(gv);
        }
        for (std::size_t i = 0; i < gm.size(); ++i) gm.data()[i] += gv.data()[i];
        for (auto it = trunk_.rbegin(); it != trunk_.rend(); ++it) {
            gm = it->backward(gm);
        }
    }

    std::vector<Param*> parameters() {
        std::vector<Param*> params;
        auto add_block = [&](DenseBnRelu& b) {
            params.push_back(&b.dense.weight());
            params.push_back(&b.dense.bias());
            params.push_back(&b.bn.gamma());
            params.push_back(&b.bn.beta());
        };
        for (auto& b : trunk_) add_block(b);
        for (auto& b : mean_branch_) add_block(b);
        for (auto& b : log_var_branch_) add_block(b);
        params.push_back(&mean_out_.weight());
        params.push_back(&mean_out_.bias());
        params.push_back(&log_var_out_.weight());
        params.push_back(&log_var_out_.bias());
        return params;
    }

    void zero_grad() {
        for (auto* p : parameters()) p->zero_grad();
    }

    double min_abs_preact() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& b : trunk_) m = std::min(m, b.min_abs_preact());
        for (const auto& b : mean_branch_) m = std::min(m, b.min_abs_preact());
        for (const auto& b : log_var_branch_) m = std::min(m, b.min_abs_preact());
        return m;
    }

    std::vector<DenseBnRelu>& trunk() { return trunk_; }
    std::vector<DenseBnRelu>& mean_branch() { return mean_branch_; }
    std::vector<DenseBnRelu>& log_var_branch() { return log_var_branch_; }
    DenseLayer& mean_out() { return mean_out_; }
    DenseLayer& log_var_out() { return log_var_out_; }

private:
    std::vector<DenseBnRelu> trunk_;
    std::vector<DenseBnRelu> mean_branch_;
    std::vector<DenseBnRelu> log_var_branch_;
    DenseLayer mean_out_;
    DenseLayer log_var_out_;
};

}  // namespace hrtfgroup::nn
