// Adam with bias correction, one shared step counter per optimizer.
#pragma once

#include <cmath>
#include <vector>

#include "hrtfgroup/error.hpp"
#include "hrtfgroup/nn/layers.hpp"

namespace hrtfgroup::nn {

class Adam {
public:
    Adam(std::vector<Param*> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double epsilon = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (const auto* p : params_) {
            m_.emplace_back(p->value.rows(), p->value.cols());
            v_.emplace_back(p->value.rows(), p->value.cols());
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Param& p = *params_[i];
            double* value = p.value.data();
            const double* grad = p.grad.data();
            double* m = m_[i].data();
            double* v = v_[i].data();
            for (std::size_t j = 0; j < p.value.size(); ++j) {
                m[j] = beta1_ * m[j] + (1.0 - beta1_) * grad[j];
                v[j] = beta2_ * v[j] + (1.0 - beta2_) * grad[j] * grad[j];
                const double m_hat = m[j] / bc1;
                const double v_hat = v[j] / bc2;
                value[j] -= lr_ * m_hat / (std::sqrt(v_hat) + epsilon_);
                if (!std::isfinite(value[j])) {
                    throw NumericalError("adam: non-finite update in " + p.name);
                }
            }
        }
    }

    std::uint64_t step_count() const { return t_; }
    double learning_rate() const { return lr_; }

private:
    std::vector<Param*> params_;
    std::vector<Matrix> m_, v_;
    double lr_, beta1_, beta2_, epsilon_;
    std::uint64_t t_ = 0;
};

}  // namespace hrtfgroup::nn
