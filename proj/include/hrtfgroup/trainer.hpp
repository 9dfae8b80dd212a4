// Per-group training: fit preprocessing statistics on the group's training
// slice, train the VAE, freeze it, then train the predictor DNN against the
// frozen encoder's latents with the decoded-LSD term. Leakage rules: the
// held-out subject contributes nothing to statistics, masks or batches, and
// unseen directions never enter training.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hrtfgroup/dataset.hpp"
#include "hrtfgroup/error.hpp"
#include "hrtfgroup/grouping.hpp"
#include "hrtfgroup/lsd.hpp"
#include "hrtfgroup/nn/adam.hpp"
#include "hrtfgroup/nn/checkpoint.hpp"
#include "hrtfgroup/nn/loss.hpp"
#include "hrtfgroup/nn/models.hpp"
#include "hrtfgroup/preproc.hpp"
#include "hrtfgroup/rng.hpp"
#include "hrtfgroup/split.hpp"

namespace hrtfgroup {

struct TrainConfig {
    std::size_t vae_epochs = 300;
    std::size_t dnn_epochs = 300;
    std::size_t batch_size = 256;
    double vae_lr = 1e-5;   // Adam, VAE
    double dnn_lr = 1e-4;   // Adam, DNN
    double beta_kl = 1e-3;
    double lambda_lsd = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double bn_momentum = 0.1;
    double bn_epsilon = 1e-5;
    std::size_t patience = 30;  // early stop on validation LSD; 0 disables
    double val_fraction = 0.1;
    std::uint64_t seed = 1;
};

inline nlohmann::json to_json(const TrainConfig& c) {
    return {{"vae_epochs", c.vae_epochs},   {"dnn_epochs", c.dnn_epochs},
            {"batch_size", c.batch_size},   {"vae_lr", c.vae_lr},
            {"dnn_lr", c.dnn_lr},           {"beta_kl", c.beta_kl},
            {"lambda_lsd", c.lambda_lsd},   {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},   {"adam_epsilon", c.adam_epsilon},
            {"bn_momentum", c.bn_momentum}, {"bn_epsilon", c.bn_epsilon},
            {"patience", c.patience},       {"val_fraction", c.val_fraction},
            {"seed", c.seed}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.vae_epochs = j.value("vae_epochs", c.vae_epochs);
    c.dnn_epochs = j.value("dnn_epochs", c.dnn_epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.vae_lr = j.value("vae_lr", c.vae_lr);
    c.dnn_lr = j.value("dnn_lr", c.dnn_lr);
    c.beta_kl = j.value("beta_kl", c.beta_kl);
    c.lambda_lsd = j.value("lambda_lsd", c.lambda_lsd);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    c.bn_momentum = j.value("bn_momentum", c.bn_momentum);
    c.bn_epsilon = j.value("bn_epsilon", c.bn_epsilon);
    c.patience = j.value("patience", c.patience);
    c.val_fraction = j.value("val_fraction", c.val_fraction);
    c.seed = j.value("seed", c.seed);
    return c;
}

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_lsd_db = -1.0;  // -1 when no validation split
};

// Mean reconstruction LSD (dB) of the eval-mode VAE over normalized rows.
inline double vae_reconstruction_lsd(nn::Vae& vae, const Matrix& x, const MinMax& minmax) {
    const auto fwd = vae.forward(x, nn::Mode::Eval);
    double acc = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double sq = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double d = minmax.span(c) * (fwd.reconstruction(r, c) - x(r, c));
            sq += d * d;
        }
        acc += std::sqrt(sq / static_cast<double>(x.cols()));
    }
    return acc / static_cast<double>(x.rows());
}

// Mean LSD (dB) of decoded DNN mean predictions against normalized targets.
inline double dnn_prediction_lsd(nn::PredictorDnn& dnn, nn::Vae& vae, const Matrix& inputs,
                                 const Matrix& targets, const MinMax& minmax) {
    const auto pred = dnn.forward(inputs, nn::Mode::Eval);
    const Matrix& decoded = vae.decoder().forward(pred.mean, nn::Mode::Eval);
    double acc = 0.0;
    for (std::size_t r = 0; r < targets.rows(); ++r) {
        double sq = 0.0;
        for (std::size_t c = 0; c < targets.cols(); ++c) {
            const double d = minmax.span(c) * (decoded(r, c) - targets(r, c));
            sq += d * d;
        }
        acc += std::sqrt(sq / static_cast<double>(targets.cols()));
    }
    return acc / static_cast<double>(targets.rows());
}

namespace detail {

inline Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = src.row(rows[i]);
        std::copy(row.begin(), row.end(), out.data() + i * src.cols());
    }
    return out;
}

// Shuffled train/validation row split; validation is empty when early
// stopping is off or the set is too small to spare rows.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_val_split(
    std::size_t n, const TrainConfig& cfg, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    std::size_t n_val = 0;
    if (cfg.patience > 0 && cfg.val_fraction > 0.0) {
        n_val = static_cast<std::size_t>(static_cast<double>(n) * cfg.val_fraction);
        if (n - n_val < 2) n_val = 0;
    }
    std::vector<std::size_t> val(order.begin(), order.begin() + n_val);
    std::vector<std::size_t> train(order.begin() + n_val, order.end());
    return {std::move(train), std::move(val)};
}

}  // namespace detail

struct VaeTrainResult {
    nn::Vae vae{};
    std::vector<EpochLog> log;
};

inline VaeTrainResult train_vae(const Matrix& x_norm, const MinMax& minmax,
                                const TrainConfig& cfg, std::uint64_t seed) {
    const std::size_t n = x_norm.rows();
    if (n < 2) throw NumericalError("train_vae: need at least 2 samples");

    Rng rng(seed);
    VaeTrainResult result;
    result.vae = nn::Vae(cfg.bn_momentum, cfg.bn_epsilon);
    result.vae.init(rng);

    auto [train_rows, val_rows] = detail::train_val_split(n, cfg, rng);
    const Matrix x_val = detail::gather_rows(x_norm, val_rows);

    nn::Adam adam(result.vae.parameters(), cfg.vae_lr, cfg.adam_beta1, cfg.adam_beta2,
                  cfg.adam_epsilon);

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_params;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.vae_epochs; ++epoch) {
        rng.shuffle(train_rows.begin(), train_rows.end());
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < train_rows.size(); start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, train_rows.size() - start);
            if (len < 2) continue;  // train-mode batch norm needs 2+
            std::vector<std::size_t> batch(train_rows.begin() + start,
                                           train_rows.begin() + start + len);
            const Matrix xb = detail::gather_rows(x_norm, batch);
            Matrix noise(len, nn::kLatentDim);
            for (double& v : noise.storage()) v = rng.normal();

            auto fwd = result.vae.forward(xb, nn::Mode::Train, &noise);
            auto loss = nn::vae_loss(fwd.reconstruction, xb, fwd.latent, cfg.beta_kl);
            result.vae.zero_grad();
            result.vae.backward(fwd, loss.grad_recon, loss.grad_mean, loss.grad_log_var);
            adam.step();
            epoch_loss += loss.value;
            ++n_batches;
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = n_batches ? epoch_loss / static_cast<double>(n_batches) : 0.0;
        if (!val_rows.empty()) {
            log.val_lsd_db = vae_reconstruction_lsd(result.vae, x_val, minmax);
            if (log.val_lsd_db < best_val) {
                best_val = log.val_lsd_db;
                best_params = nn::parameter_snapshot(result.vae.parameters());
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                result.log.push_back(log);
                break;
            }
        }
        result.log.push_back(log);
    }

    if (!best_params.empty()) {
        std::size_t off = 0;
        for (auto* p : result.vae.parameters()) {
            std::copy(best_params.begin() + off, best_params.begin() + off + p->value.size(),
                      p->value.storage().begin());
            off += p->value.size();
        }
    }
    return result;
}

struct DnnTrainResult {
    nn::PredictorDnn dnn{};
    std::vector<EpochLog> log;
};

// Trains the predictor against the frozen VAE. Targets are the eval-mode
// encoder latents of the normalized HRTFs; the decoded-LSD term
// backpropagates through the decoder without touching its parameters.
inline DnnTrainResult train_dnn(const Matrix& inputs, const Matrix& targets_norm, nn::Vae& vae,
                                const MinMax& minmax, const TrainConfig& cfg,
                                std::uint64_t seed) {
    const std::size_t n = inputs.rows();
    if (n < 2) throw NumericalError("train_dnn: need at least 2 samples");

    const auto target_latent = vae.encoder().forward(targets_norm, nn::Mode::Eval);

    Rng rng(seed);
    DnnTrainResult result;
    result.dnn = nn::PredictorDnn(cfg.bn_momentum, cfg.bn_epsilon);
    result.dnn.init(rng);

    auto [train_rows, val_rows] = detail::train_val_split(n, cfg, rng);
    const Matrix in_val = detail::gather_rows(inputs, val_rows);
    const Matrix tgt_val = detail::gather_rows(targets_norm, val_rows);

    nn::Adam adam(result.dnn.parameters(), cfg.dnn_lr, cfg.adam_beta1, cfg.adam_beta2,
                  cfg.adam_epsilon);

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_params;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.dnn_epochs; ++epoch) {
        rng.shuffle(train_rows.begin(), train_rows.end());
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < train_rows.size(); start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, train_rows.size() - start);
            if (len < 2) continue;
            std::vector<std::size_t> batch(train_rows.begin() + start,
                                           train_rows.begin() + start + len);
            const Matrix xb = detail::gather_rows(inputs, batch);
            const Matrix tb = detail::gather_rows(targets_norm, batch);
            const Matrix tm = detail::gather_rows(target_latent.mean, batch);
            const Matrix tv = detail::gather_rows(target_latent.log_var, batch);

            auto pred = result.dnn.forward(xb, nn::Mode::Train);
            const Matrix& decoded = vae.decoder().forward(pred.mean, nn::Mode::Eval);
            auto loss = nn::dnn_loss(pred, {tm, tv}, decoded, tb, cfg.lambda_lsd, minmax, minmax);

            result.dnn.zero_grad();
            const Matrix grad_from_decoder =
                vae.decoder().backward(loss.grad_decoded, /*frozen=*/true);
            Matrix grad_mean = loss.grad_pred_mean;
            for (std::size_t i = 0; i < grad_mean.size(); ++i) {
                grad_mean.data()[i] += grad_from_decoder.data()[i];
            }
            result.dnn.backward(grad_mean, loss.grad_pred_log_var);
            adam.step();
            epoch_loss += loss.value;
            ++n_batches;
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = n_batches ? epoch_loss / static_cast<double>(n_batches) : 0.0;
        if (!val_rows.empty()) {
            log.val_lsd_db = dnn_prediction_lsd(result.dnn, vae, in_val, tgt_val, minmax);
            if (log.val_lsd_db < best_val) {
                best_val = log.val_lsd_db;
                best_params = nn::parameter_snapshot(result.dnn.parameters());
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                result.log.push_back(log);
                break;
            }
        }
        result.log.push_back(log);
    }

    if (!best_params.empty()) {
        std::size_t off = 0;
        for (auto* p : result.dnn.parameters()) {
            std::copy(best_params.begin() + off, best_params.begin() + off + p->value.size(),
                      p->value.storage().begin());
            off += p->value.size();
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Grouped training over one leave-one-out fold
// ---------------------------------------------------------------------------

struct GroupModel {
    GroupId id{Strategy::SL, GroupLabel::LeftFront};
    std::vector<std::size_t> direction_indices;  // full domain of this group
    PreprocManifest manifest;
    std::string manifest_hash;
    nn::Vae vae{};
    nn::PredictorDnn dnn{};
    std::vector<EpochLog> vae_log, dnn_log;
};

struct GroupedModelSet {
    Strategy strategy = Strategy::SL;
    std::string fold_subject_id;
    Router router;
    SplitPlan plan;
    std::vector<GroupModel> groups;
    std::vector<std::string> training_subject_ids;
    TrainConfig config;
};

// dB HRTFs for every subject (1250 x 173 each), grid order.
inline std::vector<Matrix> compute_db_hrtfs(const Dataset& dataset, const FrequencyAxis& axis,
                                            const PreprocConfig& config = {}) {
    std::vector<Matrix> out;
    out.reserve(dataset.subjects.size());
    for (const auto& subject : dataset.subjects) {
        Matrix m(kGridDirections, axis.centers_hz.size());
        for (std::size_t d = 0; d < kGridDirections; ++d) {
            const auto db = hrir_to_hrtf_db(subject.hrirs.row(d), axis, config);
            std::copy(db.begin(), db.end(), m.data() + d * m.cols());
        }
        out.push_back(std::move(m));
    }
    return out;
}

struct GroupingParams {
    double de_threshold = 0.5;
    double de_band_lo_hz = 200.0;
    double de_band_hi_hz = 500.0;
};

inline GroupedModelSet train_grouped(
    const Dataset& dataset, Strategy strategy, const TrainConfig& cfg,
    const std::string& fold_subject_id, const SplitPlan& plan,
    const std::vector<Matrix>& db_cache, const FrequencyAxis& axis,
    const GroupingParams& grouping = {},
    const std::function<void(const std::string&)>& progress = {}) {
    if (db_cache.size() != dataset.subjects.size()) {
        throw std::invalid_argument("train_grouped: db cache does not match dataset");
    }

    std::vector<std::size_t> train_subjects;
    for (std::size_t s = 0; s < dataset.subjects.size(); ++s) {
        if (dataset.subjects[s].id != fold_subject_id) train_subjects.push_back(s);
    }
    if (train_subjects.size() + 1 != dataset.subjects.size()) {
        throw std::invalid_argument("train_grouped: fold subject " + fold_subject_id +
                                    " not in dataset");
    }
    if (train_subjects.size() < 2) {
        throw NumericalError("train_grouped: need at least 2 training subjects");
    }

    GroupedModelSet set;
    set.strategy = strategy;
    set.fold_subject_id = fold_subject_id;
    set.plan = plan;
    set.config = cfg;
    for (auto s : train_subjects) set.training_subject_ids.push_back(dataset.subjects[s].id);

    std::vector<std::vector<double>> raw_profiles;
    for (auto s : train_subjects) raw_profiles.push_back(dataset.subjects[s].anthro_raw);
    const AnthroStats anthro_stats = fit_anthro_stats(raw_profiles);

    // DE mask: normalized low-band energies over the full grid, training
    // subjects only; the mask-specific min-max is fit on the same values
    std::optional<DeMask> mask;
    if (strategy == Strategy::DE || strategy == Strategy::Hybrid) {
        std::vector<std::vector<double>> all_db;
        for (auto s : train_subjects) {
            for (std::size_t d = 0; d < kGridDirections; ++d) {
                const auto row = db_cache[s].row(d);
                all_db.emplace_back(row.begin(), row.end());
            }
        }
        const MinMax mask_mm = fit_minmax(all_db);
        std::vector<Matrix> normalized;
        for (auto s : train_subjects) {
            Matrix m(kGridDirections, axis.centers_hz.size());
            for (std::size_t d = 0; d < kGridDirections; ++d) {
                const auto norm = apply_minmax(db_cache[s].row(d), mask_mm);
                std::copy(norm.begin(), norm.end(), m.data() + d * m.cols());
            }
            normalized.push_back(std::move(m));
        }
        mask = compute_de_mask(dataset.grid, axis, normalized, set.training_subject_ids,
                               grouping.de_threshold, grouping.de_band_lo_hz,
                               grouping.de_band_hi_hz);
    }
    set.router = build_router(strategy, dataset.grid, std::move(mask));

    const std::uint64_t fold_seed = Rng::derive(cfg.seed, fnv1a64(fold_subject_id));

    for (std::size_t g = 0; g < set.router.n_groups(); ++g) {
        GroupModel gm;
        gm.id = set.router.group_id(g);
        gm.direction_indices = set.router.group_indices[g];

        std::vector<std::size_t> seen_dirs;
        for (auto d : gm.direction_indices) {
            if (plan.is_seen(d)) seen_dirs.push_back(d);
        }
        if (seen_dirs.empty()) {
            throw NumericalError(std::string("train_grouped: degenerate group ") +
                                 to_string(gm.id.label) + " (no seen directions)");
        }

        // group training tensors, subject-major
        std::vector<std::vector<double>> group_db;
        group_db.reserve(train_subjects.size() * seen_dirs.size());
        for (auto s : train_subjects) {
            for (auto d : seen_dirs) {
                const auto row = db_cache[s].row(d);
                group_db.emplace_back(row.begin(), row.end());
            }
        }
        const MinMax group_mm = fit_minmax(group_db);

        gm.manifest.anthro_stats = anthro_stats;
        gm.manifest.minmax = group_mm;
        gm.manifest.axis = axis;
        gm.manifest.config.n_bins = axis.centers_hz.size();
        gm.manifest.config.f_lo = axis.f_lo;
        gm.manifest.config.f_hi = axis.f_hi;
        gm.manifest_hash = manifest_hash(gm.manifest);

        const std::size_t n = group_db.size();
        Matrix x_norm(n, axis.centers_hz.size());
        for (std::size_t i = 0; i < n; ++i) {
            const auto norm = apply_minmax(group_db[i], group_mm);
            std::copy(norm.begin(), norm.end(), x_norm.data() + i * x_norm.cols());
        }

        Matrix inputs(n, kModelInputDim);
        {
            std::size_t i = 0;
            for (auto s : train_subjects) {
                const AnthroProfile raw{dataset.subjects[s].anthro_raw, false};
                const AnthroProfile norm_profile = normalize_anthro(raw, anthro_stats);
                for (auto d : seen_dirs) {
                    const auto in30 =
                        build_model_input(norm_profile, dataset.grid.directions[d]);
                    std::copy(in30.begin(), in30.end(), inputs.data() + i * kModelInputDim);
                    ++i;
                }
            }
        }

        const std::uint64_t group_seed = Rng::derive(fold_seed, g);
        if (progress) {
            progress("fold " + fold_subject_id + ": training group " +
                     to_string(gm.id.label) + " (" + std::to_string(n) + " samples)");
        }

        auto vae_result = train_vae(x_norm, group_mm, cfg, group_seed);
        gm.vae = std::move(vae_result.vae);
        gm.vae_log = std::move(vae_result.log);

        auto dnn_result =
            train_dnn(inputs, x_norm, gm.vae, group_mm, cfg, Rng::derive(group_seed, 1));
        gm.dnn = std::move(dnn_result.dnn);
        gm.dnn_log = std::move(dnn_result.log);

        set.groups.push_back(std::move(gm));
    }
    return set;
}

// Route -> predictor (eval) -> predicted latent mean -> frozen decoder ->
// denormalized dB response.
inline Hrtf predict_hrtf(GroupedModelSet& models, const std::vector<double>& anthro_raw,
                         const MeasurementGrid& grid, std::size_t direction_index) {
    const int g = models.router.group_of(direction_index);
    if (g < 0) {
        throw std::invalid_argument("predict_hrtf: direction " +
                                    std::to_string(direction_index) +
                                    " is outside the router domain");
    }
    GroupModel& gm = models.groups[static_cast<std::size_t>(g)];

    const AnthroProfile norm_profile =
        normalize_anthro(AnthroProfile{anthro_raw, false}, gm.manifest.anthro_stats);
    const auto in30 = build_model_input(norm_profile, grid.directions[direction_index]);
    Matrix x(1, kModelInputDim);
    std::copy(in30.begin(), in30.end(), x.data());

    const auto pred = gm.dnn.forward(x, nn::Mode::Eval);
    const Matrix& decoded = gm.vae.decoder().forward(pred.mean, nn::Mode::Eval);
    const auto db = inverse_minmax(decoded.row(0), gm.manifest.minmax);

    Hrtf out;
    out.bins = db;
    out.units = Hrtf::Units::Db;
    out.direction_index = direction_index;
    return out;
}

}  // namespace hrtfgroup
