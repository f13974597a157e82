#include "timid/eval.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "timid/rng.hpp"

namespace timid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RankedList {
    std::vector<std::size_t> order;  // indices sorted: score desc, negatives first on ties
    std::size_t num_positive = 0;
};

RankedList rank(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("scores/labels length mismatch");
    }
    if (scores.empty()) throw std::invalid_argument("empty score list");
    RankedList r;
    r.order.resize(scores.size());
    std::iota(r.order.begin(), r.order.end(), std::size_t{0});
    std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return labels[a] < labels[b];  // pessimistic: negatives ahead of positives
    });
    for (bool l : labels) r.num_positive += l ? 1 : 0;
    if (r.num_positive == 0) {
        throw std::invalid_argument("metrics undefined without positive labels");
    }
    return r;
}

}  // namespace

double average_precision(const std::vector<double>& scores, const std::vector<bool>& labels) {
    const RankedList r = rank(scores, labels);
    double ap = 0.0, prev_recall = 0.0;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < r.order.size(); ++i) {
        labels[r.order[i]] ? ++tp : ++fp;
        const bool group_end =
            i + 1 == r.order.size() || scores[r.order[i + 1]] != scores[r.order[i]];
        if (!group_end) continue;
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double recall = static_cast<double>(tp) / static_cast<double>(r.num_positive);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return 100.0 * ap;
}

double average_recall(const std::vector<double>& scores, const std::vector<bool>& labels) {
    const RankedList r = rank(scores, labels);
    double recall_sum = 0.0;
    std::size_t tp = 0, thresholds = 0;
    for (std::size_t i = 0; i < r.order.size(); ++i) {
        tp += labels[r.order[i]] ? 1 : 0;
        const bool group_end =
            i + 1 == r.order.size() || scores[r.order[i + 1]] != scores[r.order[i]];
        if (!group_end) continue;
        recall_sum += static_cast<double>(tp) / static_cast<double>(r.num_positive);
        ++thresholds;
    }
    return 100.0 * recall_sum / static_cast<double>(thresholds);
}

double f1_from_ap_ar(double ap, double ar) {
    if (ap + ar <= 0.0) return 0.0;
    return 2.0 * ap * ar / (ap + ar);
}

std::vector<std::vector<double>> score_split(const ModelParams& params,
                                             const PromptEmbedding& prompts,
                                             const std::vector<sim::LoadedEpisode>& split) {
    std::vector<std::vector<double>> probs;
    probs.reserve(split.size());
    for (const auto& ep : split) {
        probs.push_back(score_episode(params, prompts, ep.features));
    }
    return probs;
}

ScoreReport build_report(const std::vector<sim::LoadedEpisode>& split,
                         const std::vector<std::vector<double>>& probs) {
    if (split.size() != probs.size()) {
        throw std::invalid_argument("build_report: episode/score count mismatch");
    }
    ScoreReport rep;
    std::vector<double> scores;
    std::vector<bool> labels;
    for (std::size_t e = 0; e < split.size(); ++e) {
        if (split[e].step_labels.size() != probs[e].size()) {
            throw std::invalid_argument("build_report: step count mismatch in " + split[e].id);
        }
        rep.episode_ids.push_back(split[e].id);
        rep.episode_probs.push_back(probs[e]);
        rep.episode_labels.push_back(split[e].step_labels);
        for (std::size_t t = 0; t < probs[e].size(); ++t) {
            scores.push_back(probs[e][t]);
            labels.push_back(split[e].step_labels[t]);
        }
    }
    rep.num_episodes = split.size();
    rep.num_steps = scores.size();
    for (bool l : labels) rep.num_positive_steps += l ? 1 : 0;

    rep.ap = average_precision(scores, labels);
    rep.ar = average_recall(scores, labels);
    rep.f1 = f1_from_ap_ar(rep.ap, rep.ar);

    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= rep.threshold;
        if (pred && labels[i]) ++tp;
        if (pred && !labels[i]) ++fp;
        if (!pred && labels[i]) ++fn;
    }
    rep.precision_at_threshold = tp + fp == 0 ? 0.0 : 100.0 * tp / static_cast<double>(tp + fp);
    rep.recall_at_threshold = tp + fn == 0 ? 0.0 : 100.0 * tp / static_cast<double>(tp + fn);
    return rep;
}

void write_report(const ScoreReport& report, const std::string& out_dir) {
    fs::create_directories(fs::path(out_dir) / "scores");
    json j;
    j["ap"] = report.ap;
    j["ar"] = report.ar;
    j["f1"] = report.f1;
    j["threshold"] = report.threshold;
    j["precision_at_threshold"] = report.precision_at_threshold;
    j["recall_at_threshold"] = report.recall_at_threshold;
    j["counts"] = {{"episodes", report.num_episodes},
                   {"steps", report.num_steps},
                   {"positive_steps", report.num_positive_steps}};
    j["provenance"] = {{"dataset_manifest", report.dataset_hash},
                       {"checkpoint", report.checkpoint_hash}};
    std::ofstream out((fs::path(out_dir) / "metrics.json").string(), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write metrics file in " + out_dir);
    out << j.dump(2) << "\n";

    for (std::size_t e = 0; e < report.episode_ids.size(); ++e) {
        json rec;
        rec["id"] = report.episode_ids[e];
        rec["probs"] = report.episode_probs[e];
        rec["step_labels"] = json::array();
        for (bool l : report.episode_labels[e]) rec["step_labels"].push_back(l ? 1 : 0);
        std::ofstream rec_out(
            (fs::path(out_dir) / "scores" / (report.episode_ids[e] + ".json")).string(),
            std::ios::binary);
        if (!rec_out) throw std::runtime_error("cannot write score record in " + out_dir);
        rec_out << rec.dump(2) << "\n";
    }
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash missing file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    std::ostringstream hex;
    hex << std::hex << fnv1a64_bytes(bytes.data(), bytes.size());
    return hex.str();
}

}  // namespace timid
