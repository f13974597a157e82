#include "timid/dataset.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "timid/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "feature files are little-endian; big-endian hosts need byte swaps");

namespace timid::sim {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t DatasetManifest::count(const std::string& split, bool label) const {
    std::size_t n = 0;
    for (const auto& e : episodes) {
        if (e.split == split && e.video_label == label) ++n;
    }
    return n;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
    json j;
    j["version"] = m.version;
    j["task"] = m.task;
    j["prompts"] = {{"task", m.task_prompt}, {"mistake", m.mistake_prompt}};
    j["segment_len"] = m.segment_len;
    j["feature_dim"] = m.feature_dim;
    j["seed"] = m.seed;
    j["episodes"] = json::array();
    for (const auto& e : m.episodes) {
        j["episodes"].push_back({{"id", e.id},
                                 {"num_steps", e.num_steps},
                                 {"video_label", e.video_label},
                                 {"split", e.split},
                                 {"feature_file", e.feature_file}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read manifest: " + path);
    json j = json::parse(in);
    DatasetManifest m;
    m.version = j.at("version").get<int>();
    m.task = j.at("task").get<std::string>();
    m.task_prompt = j.at("prompts").at("task").get<std::string>();
    m.mistake_prompt = j.at("prompts").at("mistake").get<std::string>();
    m.segment_len = j.at("segment_len").get<std::size_t>();
    m.feature_dim = j.at("feature_dim").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("episodes")) {
        EpisodeRecord rec;
        rec.id = e.at("id").get<std::string>();
        rec.num_steps = e.at("num_steps").get<std::size_t>();
        rec.video_label = e.at("video_label").get<bool>();
        rec.split = e.at("split").get<std::string>();
        rec.feature_file = e.at("feature_file").get<std::string>();
        m.episodes.push_back(std::move(rec));
    }
    return m;
}

void write_features_f32(const std::string& path,
                        const std::vector<std::vector<double>>& features) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write feature file: " + path);
    std::vector<float> row;
    for (const auto& r : features) {
        row.assign(r.begin(), r.end());
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("short write on feature file: " + path);
}

std::vector<std::vector<double>> read_features_f32(const std::string& path,
                                                   std::size_t feature_dim) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot read feature file: " + path);
    const std::size_t bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    if (feature_dim == 0 || bytes % (feature_dim * sizeof(float)) != 0) {
        throw std::runtime_error("feature file size does not match feature_dim: " + path);
    }
    const std::size_t rows = bytes / (feature_dim * sizeof(float));
    std::vector<float> buf(rows * feature_dim);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    std::vector<std::vector<double>> out(rows, std::vector<double>(feature_dim));
    for (std::size_t t = 0; t < rows; ++t) {
        for (std::size_t i = 0; i < feature_dim; ++i) {
            out[t][i] = static_cast<double>(buf[t * feature_dim + i]);
        }
    }
    return out;
}

void write_labels(const std::string& path, const Episode& ep) {
    json j;
    j["id"] = ep.id;
    j["video_label"] = ep.video_label;
    j["step_labels"] = json::array();
    for (bool b : ep.step_labels) j["step_labels"].push_back(b ? 1 : 0);
    j["prop_trace"] = json::array();
    for (const auto& state : ep.prop_trace) {
        json s = json::object();
        for (const auto& [name, value] : state.values()) s[name] = value;
        j["prop_trace"].push_back(std::move(s));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write label file: " + path);
    out << j.dump(2) << "\n";
}

EpisodeLabels read_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read label file: " + path);
    json j = json::parse(in);
    EpisodeLabels out;
    out.video_label = j.at("video_label").get<bool>();
    for (const auto& v : j.at("step_labels")) out.step_labels.push_back(v.get<int>() != 0);
    for (const auto& s : j.at("prop_trace")) {
        ltl::PropositionState state;
        for (auto it = s.begin(); it != s.end(); ++it) state.set(it.key(), it.value().get<bool>());
        out.prop_trace.push_back(std::move(state));
    }
    return out;
}

DatasetManifest generate_dataset(const GenConfig& cfg, const std::string& out_dir) {
    if (cfg.n_normal < 0 || cfg.n_anomalous < 0 || cfg.n_normal + cfg.n_anomalous == 0) {
        throw std::invalid_argument("generate_dataset: episode counts must be positive");
    }
    if (cfg.layouts.empty()) {
        throw std::invalid_argument("generate_dataset: need at least one layout");
    }
    if (cfg.train_fraction < 0.0 || cfg.train_fraction > 1.0) {
        throw std::invalid_argument("generate_dataset: train_fraction out of [0,1]");
    }
    fs::create_directories(fs::path(out_dir) / "features");
    fs::create_directories(fs::path(out_dir) / "labels");

    const int total = cfg.n_normal + cfg.n_anomalous;
    char idbuf[64];

    // stratified split: each class shuffled independently, head goes to train
    std::vector<int> normal_idx, anom_idx;
    for (int i = 0; i < total; ++i) (i < cfg.n_normal ? normal_idx : anom_idx).push_back(i);
    Rng split_rng(splitmix64(cfg.seed ^ 0x53504c49ull));
    split_rng.shuffle(normal_idx);
    split_rng.shuffle(anom_idx);
    std::vector<std::string> split(static_cast<std::size_t>(total), "test");
    const auto assign_train = [&](const std::vector<int>& idx) {
        const auto n_train = static_cast<std::size_t>(
            std::llround(cfg.train_fraction * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < n_train && i < idx.size(); ++i) {
            split[static_cast<std::size_t>(idx[i])] = "train";
        }
    };
    assign_train(normal_idx);
    assign_train(anom_idx);

    DatasetManifest manifest;
    manifest.task = task_name(cfg.task);
    manifest.task_prompt = task_prompt(cfg.task);
    manifest.mistake_prompt = mistake_prompt(cfg.task);
    manifest.segment_len = cfg.segment_len;
    manifest.feature_dim = cfg.feature_dim;
    manifest.seed = cfg.seed;

    const MistakeKind mistake_kind =
        cfg.task == Task::Mutex ? MistakeKind::MutexOverlap : MistakeKind::LionFirst;
    for (int i = 0; i < total; ++i) {
        std::snprintf(idbuf, sizeof(idbuf), "%s_%04d", task_name(cfg.task), i);
        const std::string id = idbuf;
        const std::uint64_t ep_seed = splitmix64(cfg.seed ^ fnv1a64(id));
        Rng layout_rng(splitmix64(ep_seed ^ 0x4c41594full));
        const int layout = cfg.layouts[layout_rng.uniform_index(cfg.layouts.size())];
        const MistakeKind mistake = i < cfg.n_normal ? MistakeKind::None : mistake_kind;

        const Episode ep = generate_episode(cfg, id, layout, mistake);
        const std::string feature_rel = "features/" + id + ".f32";
        write_features_f32((fs::path(out_dir) / feature_rel).string(), ep.features);
        write_labels((fs::path(out_dir) / "labels" / (id + ".json")).string(), ep);

        EpisodeRecord rec;
        rec.id = id;
        rec.num_steps = ep.prop_trace.size();
        rec.video_label = ep.video_label;
        rec.split = split[static_cast<std::size_t>(i)];
        rec.feature_file = feature_rel;
        manifest.episodes.push_back(std::move(rec));
    }
    write_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
    return manifest;
}

LoadedEpisode load_episode(const std::string& dataset_dir, const DatasetManifest& m,
                           const EpisodeRecord& rec) {
    LoadedEpisode ep;
    ep.id = rec.id;
    ep.video_label = rec.video_label;
    ep.features = read_features_f32((fs::path(dataset_dir) / rec.feature_file).string(),
                                    m.feature_dim);
    if (ep.features.size() != rec.num_steps) {
        throw std::runtime_error("feature file row count disagrees with manifest for " + rec.id);
    }
    ep.step_labels =
        read_labels((fs::path(dataset_dir) / "labels" / (rec.id + ".json")).string()).step_labels;
    return ep;
}

std::vector<LoadedEpisode> load_split(const std::string& dataset_dir,
                                      const DatasetManifest& m, const std::string& split) {
    std::vector<LoadedEpisode> out;
    for (const auto& rec : m.episodes) {
        if (rec.split == split) out.push_back(load_episode(dataset_dir, m, rec));
    }
    return out;
}

}  // namespace timid::sim
