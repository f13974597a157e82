#include "timid/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "timid/adam.hpp"
#include "timid/rng.hpp"

namespace timid {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
    if (lr <= 0.0 || batch_size == 0 || epochs == 0 || tau <= 0.0 ||
        contrastive_weight < 0.0 || checkpoint_cadence == 0) {
        throw std::invalid_argument("invalid training configuration");
    }
}

std::size_t mil_k(std::size_t num_valid_steps) {
    return std::max<std::size_t>(1, num_valid_steps / 32);
}

int mil_pool(Tape& tape, int logits, const Mask& step_mask, bool video_label) {
    std::size_t valid = 0;
    for (auto m : step_mask) valid += m ? 1 : 0;
    if (valid == 0) throw std::invalid_argument("mil_pool: no valid steps");
    if (!video_label) {
        return tape.max_over_valid(logits, step_mask);
    }
    return tape.topk_mean(logits, mil_k(valid), &step_mask);
}

int bce_loss(Tape& tape, int pooled_logit, bool video_label) {
    return tape.bce_with_logits(pooled_logit, video_label ? 1.0 : 0.0);
}

int contrastive_loss(Tape& tape, int global_features, const std::vector<bool>& labels,
                     double tau) {
    const std::size_t B = tape.node(global_features).shape.rows;
    if (B < 2) throw std::invalid_argument("contrastive_loss: need at least 2 episodes");
    if (labels.size() != B) throw std::invalid_argument("contrastive_loss: label count mismatch");
    if (tau <= 0.0) throw std::invalid_argument("contrastive_loss: temperature must be positive");

    const int z = tape.l2_normalize_rows(global_features);
    const int sims = tape.scale(tape.matmul(z, tape.transpose(z)), 1.0 / tau);
    Mask offdiag(B * B, 1);
    for (std::size_t i = 0; i < B; ++i) offdiag[i * B + i] = 0;
    const int lse = tape.row_logsumexp(sims, &offdiag);  // B x 1

    std::vector<int> anchor_terms;
    for (std::size_t i = 0; i < B; ++i) {
        std::vector<std::size_t> positives;
        for (std::size_t p = 0; p < B; ++p) {
            if (p != i && labels[p] == labels[i]) positives.push_back(p);
        }
        if (positives.empty()) continue;  // no partner, anchor skipped
        int acc = -1;
        for (std::size_t p : positives) {
            const int term = tape.add(tape.pick(lse, i, 0), tape.neg(tape.pick(sims, i, p)));
            acc = acc < 0 ? term : tape.add(acc, term);
        }
        anchor_terms.push_back(tape.scale(acc, 1.0 / static_cast<double>(positives.size())));
    }
    if (anchor_terms.empty()) {
        return tape.scalar(0.0);
    }
    int total = anchor_terms[0];
    for (std::size_t i = 1; i < anchor_terms.size(); ++i) total = tape.add(total, anchor_terms[i]);
    return tape.scale(total, 1.0 / static_cast<double>(anchor_terms.size()));
}

BatchLoss batch_loss(Tape& tape, const BoundParams& bound, const ModelParams& params,
                     const PromptEmbedding& prompts,
                     const std::vector<const sim::LoadedEpisode*>& episodes,
                     const TrainConfig& cfg) {
    if (episodes.empty()) throw std::invalid_argument("batch_loss: empty batch");
    std::size_t t_max = 0;
    for (const auto* ep : episodes) t_max = std::max(t_max, ep->features.size());

    int bce_sum = -1;
    std::vector<int> globals;
    std::vector<bool> labels;
    for (const auto* ep : episodes) {
        const std::size_t T = ep->features.size();
        std::vector<std::vector<double>> padded = ep->features;
        padded.resize(t_max, std::vector<double>(params.config.feature_dim, 0.0));
        Mask mask(t_max, 0);
        std::fill_n(mask.begin(), T, std::uint8_t{1});

        const ForwardTrace trace =
            model_forward(tape, padded, prompts, params, bound, mask);
        const int pooled = mil_pool(tape, trace.logits, mask, ep->video_label);
        const int bce = bce_loss(tape, pooled, ep->video_label);
        bce_sum = bce_sum < 0 ? bce : tape.add(bce_sum, bce);

        globals.push_back(tape.mean_over_valid(trace.z_sem, mask));
        labels.push_back(ep->video_label);
    }
    const int bce_mean = tape.scale(bce_sum, 1.0 / static_cast<double>(episodes.size()));

    BatchLoss out;
    out.bce = tape.scalar_value(bce_mean);
    if (cfg.contrastive_weight > 0.0 && episodes.size() >= 2) {
        const int stacked = tape.concat_rows(globals);
        const int con = contrastive_loss(tape, stacked, labels, cfg.tau);
        out.con = tape.scalar_value(con);
        out.node = tape.add(bce_mean, tape.scale(con, cfg.contrastive_weight));
    } else {
        out.con = 0.0;
        out.node = bce_mean;
    }
    out.total = tape.scalar_value(out.node);
    return out;
}

TrainResult train_loop(const std::vector<sim::LoadedEpisode>& train_set,
                       const PromptEmbedding& prompts, ModelParams& params,
                       const TrainConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    if (train_set.empty()) throw std::invalid_argument("train_loop: empty dataset");

    std::ofstream log_out;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        log_out.open((fs::path(out_dir) / "loss_log.jsonl").string(), std::ios::binary);
        if (!log_out) throw std::runtime_error("cannot open loss log in " + out_dir);
    }

    TrainResult result;
    AdamState adam;
    const AdamConfig adam_cfg{cfg.lr, 0.9, 0.999, 1e-8};

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(splitmix64(cfg.seed ^ (0x45504f43ull + epoch)));
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());
            std::vector<const sim::LoadedEpisode*> batch;
            for (std::size_t i = start; i < end; ++i) batch.push_back(&train_set[order[i]]);

            Tape tape;
            const BoundParams bound = bind_params(tape, params);
            const BatchLoss loss = batch_loss(tape, bound, params, prompts, batch, cfg);
            if (!std::isfinite(loss.total)) {
                throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                                         " batch " + std::to_string(batch_index) +
                                         " (bce=" + std::to_string(loss.bce) +
                                         ", con=" + std::to_string(loss.con) + ")");
            }
            tape.backward(loss.node);

            const auto grads = collect_param_grads(tape, bound);
            std::vector<std::vector<double>*> param_ptrs;
            std::vector<const std::vector<double>*> grad_ptrs;
            for (std::size_t i = 0; i < params.blocks.size(); ++i) {
                param_ptrs.push_back(&params.blocks[i].value);
                grad_ptrs.push_back(&grads[i]);
            }
            adam_step(param_ptrs, grad_ptrs, adam, adam_cfg);

            LossRecord rec{epoch, batch_index, loss.bce, loss.con, loss.total};
            result.log.push_back(rec);
            if (log_out) {
                json j{{"epoch", rec.epoch},
                       {"batch", rec.batch},
                       {"bce", rec.bce},
                       {"con", rec.con},
                       {"total", rec.total}};
                log_out << j.dump() << "\n";
            }
            epoch_loss += loss.total;
            ++batch_index;
        }
        result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(batch_index));

        if (!out_dir.empty() && (epoch + 1) % cfg.checkpoint_cadence == 0 &&
            epoch + 1 < cfg.epochs) {
            save_checkpoint(params,
                            (fs::path(out_dir) / ("checkpoint_ep" + std::to_string(epoch + 1) +
                                                  ".bin")).string());
        }
    }
    if (!out_dir.empty()) {
        save_checkpoint(params, (fs::path(out_dir) / "checkpoint_final.bin").string());
    }
    return result;
}

}  // namespace timid
