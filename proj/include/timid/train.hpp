#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "timid/dataset.hpp"
#include "timid/model.hpp"
#include "timid/tensor.hpp"

namespace timid {

struct TrainConfig {
    double lr = 1e-3;
    std::size_t batch_size = 16;
    std::size_t epochs = 50;
    double tau = 0.1;                // contrastive temperature
    double contrastive_weight = 1.0;
    std::uint64_t seed = 0;
    std::size_t checkpoint_cadence = 10;  // epochs between periodic checkpoints

    void validate() const;
};

// k = max(1, floor(T/32)) over the valid steps of one episode
std::size_t mil_k(std::size_t num_valid_steps);

// Dynamic MIL pooling of frame logits: normal videos take the maximum valid
// score, anomalous videos the mean of the top-k. Gradient flows only through
// the selected entries.
int mil_pool(Tape& tape, int logits, const Mask& step_mask, bool video_label);

int bce_loss(Tape& tape, int pooled_logit, bool video_label);

// Supervised contrastive loss over row-wise L2-normalized global features
// (B x d). Anchors without a same-label partner are skipped; returns a
// constant zero node when nothing contributes. Requires B >= 2.
int contrastive_loss(Tape& tape, int global_features, const std::vector<bool>& labels,
                     double tau);

struct LossRecord {
    std::size_t epoch = 0;
    std::size_t batch = 0;
    double bce = 0.0;
    double con = 0.0;
    double total = 0.0;
};

struct BatchLoss {
    int node = -1;  // scalar loss on the tape
    double bce = 0.0;
    double con = 0.0;
    double total = 0.0;
};

// Forward of every episode in the batch on one shared tape (features padded
// to the batch maximum with validity masks): mean BCE over the batch plus
// contrastive_weight * L_con.
BatchLoss batch_loss(Tape& tape, const BoundParams& bound, const ModelParams& params,
                     const PromptEmbedding& prompts,
                     const std::vector<const sim::LoadedEpisode*>& episodes,
                     const TrainConfig& cfg);

struct TrainResult {
    std::vector<LossRecord> log;
    std::vector<double> epoch_mean_loss;
};

// Seeded per-epoch shuffling, Adam updates per batch, periodic checkpoints
// plus a final one, and a JSONL loss log when out_dir is nonempty. Aborts
// with a diagnostic on non-finite loss.
TrainResult train_loop(const std::vector<sim::LoadedEpisode>& train_set,
                       const PromptEmbedding& prompts, ModelParams& params,
                       const TrainConfig& cfg, const std::string& out_dir = "");

}  // namespace timid
