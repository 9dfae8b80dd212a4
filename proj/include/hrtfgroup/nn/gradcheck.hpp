// Verification of the hand-rolled backward passes against central finite
// differences. The caller runs one forward/backward to populate analytic
// gradients, then hands over a pure loss closure; parameters are sampled
// and perturbed one scalar at a time.
//
// Probes whose perturbed forward pass lands a pre-activation within
// kink_guard of a ReLU kink are discarded and resampled: the loss is not
// differentiable there and finite differences are meaningless.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "hrtfgroup/nn/layers.hpp"
#include "hrtfgroup/rng.hpp"

namespace hrtfgroup::nn {

struct GradCheckOptions {
    std::size_t n_samples = 500;
    double step = 1e-5;
    double kink_guard = 1e-7;
    std::uint64_t seed = 1234;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_kink = 0;
    std::string worst_param;
};

// loss: evaluates the loss at the current parameter values (no gradient
// side effects needed). min_abs_preact: smallest |pre-activation| seen in
// the last loss evaluation, used for the kink-exclusion rule.
inline GradCheckReport gradient_check(const std::vector<Param*>& params,
                                      const std::function<double()>& loss,
                                      const std::function<double()>& min_abs_preact,
                                      const GradCheckOptions& options = {}) {
    std::size_t total = 0;
    for (const auto* p : params) total += p->value.size();
    if (total == 0) throw std::invalid_argument("gradient_check: no parameters");

    Rng rng(options.seed);
    GradCheckReport report;
    const std::size_t wanted = std::min(options.n_samples, total);
    std::size_t attempts = 0;
    const std::size_t max_attempts = wanted * 20 + 100;

    while (report.checked < wanted && attempts < max_attempts) {
        ++attempts;
        std::size_t flat = static_cast<std::size_t>(rng.next_below(total));
        std::size_t pi = 0;
        while (flat >= params[pi]->value.size()) {
            flat -= params[pi]->value.size();
            ++pi;
        }
        Param& p = *params[pi];
        double& theta = p.value.data()[flat];
        const double analytic = p.grad.data()[flat];
        const double saved = theta;

        theta = saved + options.step;
        const double f_plus = loss();
        const double kink_plus = min_abs_preact();
        theta = saved - options.step;
        const double f_minus = loss();
        const double kink_minus = min_abs_preact();
        theta = saved;

        if (kink_plus < options.kink_guard || kink_minus < options.kink_guard) {
            ++report.skipped_kink;
            continue;
        }

        const double fd = (f_plus - f_minus) / (2.0 * options.step);
        const double rel = std::abs(analytic - fd) /
                           std::max({std::abs(analytic), std::abs(fd), 1e-8});
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_param = p.name;
        }
        ++report.checked;
    }
    return report;
}

}  // namespace hrtfgroup::nn
