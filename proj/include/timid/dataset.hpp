#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "timid/simgen.hpp"

namespace timid::sim {

struct EpisodeRecord {
    std::string id;
    std::size_t num_steps = 0;  // T after segment pooling
    bool video_label = false;
    std::string split;          // "train" or "test"
    std::string feature_file;   // relative to the dataset directory
};

struct DatasetManifest {
    int version = 1;
    std::string task;
    std::string task_prompt;
    std::string mistake_prompt;
    std::size_t segment_len = 16;
    std::size_t feature_dim = 64;
    std::uint64_t seed = 0;
    std::vector<EpisodeRecord> episodes;

    std::size_t count(const std::string& split, bool label) const;
};

// Directory layout: manifest.json + features/<id>.f32 (row-major T x D,
// 32-bit little-endian floats) + labels/<id>.json (step labels, video label,
// proposition trace).
DatasetManifest generate_dataset(const GenConfig& cfg, const std::string& out_dir);

void write_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

void write_features_f32(const std::string& path,
                        const std::vector<std::vector<double>>& features);
std::vector<std::vector<double>> read_features_f32(const std::string& path,
                                                   std::size_t feature_dim);

struct EpisodeLabels {
    std::vector<bool> step_labels;
    bool video_label = false;
    std::vector<ltl::PropositionState> prop_trace;
};

void write_labels(const std::string& path, const Episode& ep);
EpisodeLabels read_labels(const std::string& path);

// Episode payload as the trainer/evaluator consumes it.
struct LoadedEpisode {
    std::string id;
    bool video_label = false;
    std::vector<bool> step_labels;
    std::vector<std::vector<double>> features;
};

LoadedEpisode load_episode(const std::string& dataset_dir, const DatasetManifest& m,
                           const EpisodeRecord& rec);
std::vector<LoadedEpisode> load_split(const std::string& dataset_dir,
                                      const DatasetManifest& m, const std::string& split);

}  // namespace timid::sim
