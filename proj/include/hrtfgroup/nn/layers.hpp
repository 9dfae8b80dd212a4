// Hand-rolled differentiable building blocks: dense layers, batch
// normalization, ReLU and sigmoid. Each layer caches what its backward
// pass needs; backward accumulates parameter gradients unless the layer
// is frozen (used for the fixed VAE during DNN training).
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hrtfgroup/error.hpp"
#include "hrtfgroup/matrix.hpp"
#include "hrtfgroup/rng.hpp"

namespace hrtfgroup::nn {

enum class Mode { Train, Eval };

struct Param {
    Matrix value;
    Matrix grad;
    std::string name;

    Param() = default;
    Param(std::size_t rows, std::size_t cols, std::string n)
        : value(rows, cols), grad(rows, cols), name(std::move(n)) {}

    void zero_grad() { grad.fill(0.0); }
};

inline void check_finite(const Matrix& m, const std::string& where) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!std::isfinite(m.data()[i])) {
            throw NumericalError("non-finite activation in " + where);
        }
    }
}

// y = x W^T + b, W is out x in.
class DenseLayer {
public:
    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out, const std::string& name)
        : weight_(out, in, name + ".weight"), bias_(1, out, name + ".bias"), name_(name) {}

    // He-style uniform fan-in init: U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
    void init(Rng& rng) {
        const double limit = std::sqrt(6.0 / static_cast<double>(weight_.value.cols()));
        for (double& v : weight_.value.storage()) v = rng.uniform(-limit, limit);
        bias_.value.fill(0.0);
    }

    const Matrix& forward(const Matrix& x) {
        input_ = x;
        gemm_nt(x, weight_.value, output_);
        for (std::size_t r = 0; r < output_.rows(); ++r) {
            double* row = output_.data() + r * output_.cols();
            for (std::size_t c = 0; c < output_.cols(); ++c) row[c] += bias_.value(0, c);
        }
        check_finite(output_, name_);
        return output_;
    }

    // Returns grad wrt input; accumulates dW, db unless frozen.
    Matrix backward(const Matrix& grad_out, bool frozen = false) {
        if (!frozen) {
            gemm_tn(grad_out, input_, weight_.grad, /*accumulate=*/true);
            for (std::size_t r = 0; r < grad_out.rows(); ++r) {
                const double* row = grad_out.data() + r * grad_out.cols();
                for (std::size_t c = 0; c < grad_out.cols(); ++c) bias_.grad(0, c) += row[c];
            }
        }
        Matrix grad_in;
        gemm_nn(grad_out, weight_.value, grad_in);
        return grad_in;
    }

    std::size_t in_dim() const { return weight_.value.cols(); }
    std::size_t out_dim() const { return weight_.value.rows(); }

    Param& weight() { return weight_; }
    Param& bias() { return bias_; }
    const Param& weight() const { return weight_; }
    const Param& bias() const { return bias_; }
    const std::string& name() const { return name_; }

private:
    Param weight_;
    Param bias_;
    Matrix input_;
    Matrix output_;
    std::string name_;
};

// Per-feature batch normalization. Train mode normalizes with batch
// statistics (biased variance) and updates the running estimates as
// running = (1 - momentum) * running + momentum * batch. Eval mode is a
// pure affine map through the stored running statistics.
class BatchNormLayer {
public:
    BatchNormLayer() = default;
    BatchNormLayer(std::size_t features, const std::string& name, double momentum = 0.1,
                   double epsilon = 1e-5)
        : gamma_(1, features, name + ".gamma"),
          beta_(1, features, name + ".beta"),
          running_mean_(1, features),
          running_var_(1, features),
          momentum_(momentum),
          epsilon_(epsilon),
          name_(name) {
        gamma_.value.fill(1.0);
        running_var_.fill(1.0);
    }

    const Matrix& forward(const Matrix& x, Mode mode) {
        const std::size_t n = x.rows(), f = x.cols();
        xhat_ = Matrix(n, f);
        output_ = Matrix(n, f);
        inv_std_.assign(f, 0.0);
        mode_ = mode;

        if (mode == Mode::Train) {
            if (n < 2) throw NumericalError(name_ + ": train-mode batch norm needs batch >= 2");
            batch_mean_.assign(f, 0.0);
            batch_var_.assign(f, 0.0);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < f; ++c) batch_mean_[c] += x(r, c);
            }
            for (double& v : batch_mean_) v /= static_cast<double>(n);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < f; ++c) {
                    const double d = x(r, c) - batch_mean_[c];
                    batch_var_[c] += d * d;
                }
            }
            for (double& v : batch_var_) v /= static_cast<double>(n);
            for (std::size_t c = 0; c < f; ++c) {
                inv_std_[c] = 1.0 / std::sqrt(batch_var_[c] + epsilon_);
                running_mean_(0, c) =
                    (1.0 - momentum_) * running_mean_(0, c) + momentum_ * batch_mean_[c];
                running_var_(0, c) =
                    (1.0 - momentum_) * running_var_(0, c) + momentum_ * batch_var_[c];
            }
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < f; ++c) {
                    xhat_(r, c) = (x(r, c) - batch_mean_[c]) * inv_std_[c];
                    output_(r, c) = gamma_.value(0, c) * xhat_(r, c) + beta_.value(0, c);
                }
            }
        } else {
            for (std::size_t c = 0; c < f; ++c) {
                inv_std_[c] = 1.0 / std::sqrt(running_var_(0, c) + epsilon_);
            }
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < f; ++c) {
                    xhat_(r, c) = (x(r, c) - running_mean_(0, c)) * inv_std_[c];
                    output_(r, c) = gamma_.value(0, c) * xhat_(r, c) + beta_.value(0, c);
                }
            }
        }
        check_finite(output_, name_);
        return output_;
    }

    Matrix backward(const Matrix& grad_out, bool frozen = false) {
        const std::size_t n = grad_out.rows(), f = grad_out.cols();
        if (!frozen) {
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < f; ++c) {
                    gamma_.grad(0, c) += grad_out(r, c) * xhat_(r, c);
                    beta_.grad(0, c) += grad_out(r, c);
                }
            }
        }
        Matrix grad_in(n, f);
        if (mode_ == Mode::Eval) {
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < f; ++c) {
                    grad_in(r, c) = grad_out(r, c) * gamma_.value(0, c) * inv_std_[c];
                }
            }
            return grad_in;
        }
        // train mode: gradient through the batch statistics
        std::vector<double> sum_dxhat(f, 0.0), sum_dxhat_xhat(f, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < f; ++c) {
                const double dxhat = grad_out(r, c) * gamma_.value(0, c);
                sum_dxhat[c] += dxhat;
                sum_dxhat_xhat[c] += dxhat * xhat_(r, c);
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < f; ++c) {
                const double dxhat = grad_out(r, c) * gamma_.value(0, c);
                grad_in(r, c) = inv_std_[c] * (dxhat - inv_n * sum_dxhat[c] -
                                               xhat_(r, c) * inv_n * sum_dxhat_xhat[c]);
            }
        }
        return grad_in;
    }

    Param& gamma() { return gamma_; }
    Param& beta() { return beta_; }
    const Param& gamma() const { return gamma_; }
    const Param& beta() const { return beta_; }
    Matrix& running_mean() { return running_mean_; }
    Matrix& running_var() { return running_var_; }
    const Matrix& running_mean() const { return running_mean_; }
    const Matrix& running_var() const { return running_var_; }
    double momentum() const { return momentum_; }
    double epsilon() const { return epsilon_; }

private:
    Param gamma_;
    Param beta_;
    Matrix running_mean_;
    Matrix running_var_;
    std::vector<double> batch_mean_, batch_var_, inv_std_;
    Matrix xhat_;
    Matrix output_;
    Mode mode_ = Mode::Eval;
    double momentum_ = 0.1;
    double epsilon_ = 1e-5;
    std::string name_;
};

class ReluLayer {
public:
    const Matrix& forward(const Matrix& x) {
        output_ = x;
        min_abs_preact_ = std::numeric_limits<double>::infinity();
        for (double& v : output_.storage()) {
            min_abs_preact_ = std::min(min_abs_preact_, std::abs(v));
            if (v < 0.0) v = 0.0;
        }
        return output_;
    }

    Matrix backward(const Matrix& grad_out) const {
        Matrix grad_in = grad_out;
        for (std::size_t i = 0; i < grad_in.size(); ++i) {
            if (output_.data()[i] <= 0.0) grad_in.data()[i] = 0.0;
        }
        return grad_in;
    }

    // Distance of the last forward's closest pre-activation to the ReLU
    // kink; gradient checks skip probes that land too close.
    double min_abs_preact() const { return min_abs_preact_; }

private:
    Matrix output_;
    double min_abs_preact_ = std::numeric_limits<double>::infinity();
};

class SigmoidLayer {
public:
    const Matrix& forward(const Matrix& x) {
        output_ = x;
        for (double& v : output_.storage()) v = 1.0 / (1.0 + std::exp(-v));
        return output_;
    }

    Matrix backward(const Matrix& grad_out) const {
        Matrix grad_in = grad_out;
        for (std::size_t i = 0; i < grad_in.size(); ++i) {
            const double y = output_.data()[i];
            grad_in.data()[i] *= y * (1.0 - y);
        }
        return grad_in;
    }

private:
    Matrix output_;
};

// Dense -> BatchNorm -> ReLU, the repeated hidden-block shape of both
// networks.
class DenseBnRelu {
public:
    DenseBnRelu() = default;
    DenseBnRelu(std::size_t in, std::size_t out, const std::string& name, double bn_momentum,
                double bn_epsilon)
        : dense(in, out, name), bn(out, name + ".bn", bn_momentum, bn_epsilon) {}

    const Matrix& forward(const Matrix& x, Mode mode) {
        return relu.forward(bn.forward(dense.forward(x), mode));
    }

    Matrix backward(const Matrix& grad_out, bool frozen = false) {
        return dense.backward(bn.backward(relu.backward(grad_out), frozen), frozen);
    }

    double min_abs_preact() const { return relu.min_abs_preact(); }

    DenseLayer dense;
    BatchNormLayer bn;
    ReluLayer relu;
};

}  // namespace hrtfgroup::nn
