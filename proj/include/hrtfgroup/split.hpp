// Seen/unseen direction split for one leave-one-out fold. The unseen set
// is a seeded uniform draw over the grid, shared by every subject in the
// fold; at the paper's scale (35 subjects) this yields 34,000 training,
// 1,000 seen-evaluation and 250 unseen-evaluation HRTFs.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "hrtfgroup/geometry.hpp"
#include "hrtfgroup/preproc.hpp"
#include "hrtfgroup/rng.hpp"

namespace hrtfgroup {

struct SplitPlan {
    std::string fold_subject_id;
    std::vector<std::size_t> seen_direction_indices;    // sorted
    std::vector<std::size_t> unseen_direction_indices;  // sorted
    std::uint64_t seed = 0;

    std::size_t training_pool_count(std::size_t n_subjects) const {
        return (n_subjects - 1) * seen_direction_indices.size();
    }

    bool is_seen(std::size_t direction_index) const {
        return std::binary_search(seen_direction_indices.begin(), seen_direction_indices.end(),
                                  direction_index);
    }
};

inline SplitPlan make_split_plan(const MeasurementGrid& grid, const std::string& fold_subject_id,
                                 std::uint64_t seed, double unseen_fraction = 0.2) {
    if (!(unseen_fraction >= 0.0) || !(unseen_fraction < 1.0)) {
        throw std::invalid_argument("make_split_plan: unseen_fraction in [0,1)");
    }
    const std::size_t n = grid.directions.size();
    const auto n_unseen =
        static_cast<std::size_t>(std::llround(unseen_fraction * static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(Rng::derive(seed, fnv1a64(fold_subject_id)));
    rng.shuffle(order.begin(), order.end());

    SplitPlan plan;
    plan.fold_subject_id = fold_subject_id;
    plan.seed = seed;
    plan.unseen_direction_indices.assign(order.begin(), order.begin() + n_unseen);
    plan.seen_direction_indices.assign(order.begin() + n_unseen, order.end());
    std::sort(plan.unseen_direction_indices.begin(), plan.unseen_direction_indices.end());
    std::sort(plan.seen_direction_indices.begin(), plan.seen_direction_indices.end());
    return plan;
}

}  // namespace hrtfgroup
