#pragma once

#include <string>
#include <vector>

#include "timid/dataset.hpp"
#include "timid/model.hpp"

namespace timid {

// Frame-level metrics over the concatenated split, reported in percent.
struct ScoreReport {
    std::vector<std::string> episode_ids;
    std::vector<std::vector<double>> episode_probs;
    std::vector<std::vector<bool>> episode_labels;

    double ap = 0.0;
    double ar = 0.0;
    double f1 = 0.0;
    double threshold = 0.5;  // for the point precision/recall extras
    double precision_at_threshold = 0.0;
    double recall_at_threshold = 0.0;
    std::size_t num_episodes = 0;
    std::size_t num_steps = 0;
    std::size_t num_positive_steps = 0;

    std::string dataset_hash;     // provenance, hex FNV-1a of manifest bytes
    std::string checkpoint_hash;  // hex FNV-1a of checkpoint bytes, or "none"
};

// Ranked-list average precision: sort by descending score (ties pessimistic,
// negatives first), sum (R_n - R_{n-1}) * P_n over distinct thresholds.
// Throws when there are no positive labels.
double average_precision(const std::vector<double>& scores, const std::vector<bool>& labels);

// Mean recall over every distinct score threshold in the ranked list.
double average_recall(const std::vector<double>& scores, const std::vector<bool>& labels);

// Harmonic mean of the two (percent in, percent out); 0 when both are 0.
double f1_from_ap_ar(double ap, double ar);

// Sigmoid frame scores for every episode of a split; no pooling at test time.
std::vector<std::vector<double>> score_split(const ModelParams& params,
                                             const PromptEmbedding& prompts,
                                             const std::vector<sim::LoadedEpisode>& split);

// Assembles the report (metrics + per-episode curves) from scores and labels.
ScoreReport build_report(const std::vector<sim::LoadedEpisode>& split,
                         const std::vector<std::vector<double>>& probs);

// Writes metrics.json plus one score-curve record per episode under
// scores/<id>.json, consumable by the plot command.
void write_report(const ScoreReport& report, const std::string& out_dir);

std::string file_hash_hex(const std::string& path);

}  // namespace timid
