#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "timid/dataset.hpp"
#include "timid/eval.hpp"
#include "timid/model.hpp"
#include "timid/plot.hpp"
#include "timid/simgen.hpp"
#include "timid/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fixed seed for the prompt-token hash so training and evaluation always
// agree on Z_task for the same prompt strings.
constexpr std::uint64_t kPromptSeed = 0x54455854ull;

int log_level() {  // 0 = quiet, 1 = info, 2 = debug; TIMID_LOG overrides
    static const int level = [] {
        const char* env = std::getenv("TIMID_LOG");
        if (!env) return 1;
        const std::string v = env;
        if (v == "quiet" || v == "0") return 0;
        if (v == "debug" || v == "2") return 2;
        return 1;
    }();
    return level;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cout << msg << "\n";
}

void debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[debug] " << msg << "\n";
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

int run_gen(const std::string& task_name, int normal, int anomalous, int layout,
            std::uint64_t seed, const std::string& out, const std::string& mistake,
            std::size_t feature_dim, int robots) {
    timid::sim::GenConfig cfg;
    cfg.task = timid::sim::parse_task(task_name);
    cfg.n_normal = normal;
    cfg.n_anomalous = anomalous;
    cfg.seed = seed;
    cfg.feature_dim = feature_dim;
    cfg.num_robots = robots;
    if (layout >= 0) {
        if (layout >= timid::sim::Arena::kNumLayouts) {
            throw std::invalid_argument("--layout must be one of 0, 1, 2");
        }
        cfg.layouts = {layout};
    }
    if (!mistake.empty()) {
        const auto kind = timid::sim::parse_mistake(mistake);
        if (!timid::sim::mistake_compatible(cfg.task, kind)) {
            throw std::invalid_argument(std::string("mistake '") + mistake +
                                        "' is incompatible with task '" + task_name + "'");
        }
    }
    const auto manifest = timid::sim::generate_dataset(cfg, out);
    info("dataset written to " + out);
    info("  train: " + std::to_string(manifest.count("train", false)) + " normal, " +
         std::to_string(manifest.count("train", true)) + " anomalous");
    info("  test:  " + std::to_string(manifest.count("test", false)) + " normal, " +
         std::to_string(manifest.count("test", true)) + " anomalous");
    return 0;
}

int run_train(const std::string& data_dir, const std::string& out_dir,
              const std::string& resume_checkpoint, const timid::TrainConfig& tcfg,
              std::size_t d_model, bool ablate_local) {
    const auto manifest =
        timid::sim::read_manifest((fs::path(data_dir) / "manifest.json").string());
    const auto train_set = timid::sim::load_split(data_dir, manifest, "train");
    if (train_set.empty()) throw std::runtime_error("dataset has no train episodes");
    debug("loaded " + std::to_string(train_set.size()) + " train episodes");

    timid::ModelParams params = [&] {
        if (!resume_checkpoint.empty()) {
            auto p = timid::load_checkpoint(resume_checkpoint);
            if (p.config.feature_dim != manifest.feature_dim) {
                throw std::runtime_error("checkpoint feature_dim does not match dataset");
            }
            return p;
        }
        timid::ModelConfig mcfg;
        mcfg.feature_dim = manifest.feature_dim;
        mcfg.d_model = d_model;
        mcfg.seed = tcfg.seed;
        mcfg.ablate_local = ablate_local;
        return timid::ModelParams::init(mcfg);
    }();

    const auto prompts = timid::embed_prompts(manifest.task_prompt, manifest.mistake_prompt,
                                              params.config.d_model, kPromptSeed);
    const auto result = timid::train_loop(train_set, prompts, params, tcfg, out_dir);
    info("final epoch mean loss: " + fmt2(result.epoch_mean_loss.back()));
    info("checkpoint written to " + (fs::path(out_dir) / "checkpoint_final.bin").string());
    return 0;
}

int run_eval(const std::string& data_dir, const std::string& checkpoint,
             const std::string& out_dir, const std::string& scores_file) {
    const std::string manifest_path = (fs::path(data_dir) / "manifest.json").string();
    const auto manifest = timid::sim::read_manifest(manifest_path);
    const auto test_set = timid::sim::load_split(data_dir, manifest, "test");
    if (test_set.empty()) throw std::runtime_error("dataset has no test episodes");

    std::vector<std::vector<double>> probs;
    std::string checkpoint_hash = "none";
    if (!scores_file.empty()) {
        std::ifstream in(scores_file, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read scores file: " + scores_file);
        const json j = json::parse(in);
        for (const auto& ep : test_set) {
            if (!j.contains(ep.id)) {
                throw std::runtime_error("scores file missing episode " + ep.id);
            }
            probs.push_back(j.at(ep.id).get<std::vector<double>>());
        }
    } else {
        if (checkpoint.empty()) {
            throw std::runtime_error("eval needs --checkpoint or --scores-file");
        }
        const auto params = timid::load_checkpoint(checkpoint);
        if (params.config.feature_dim != manifest.feature_dim) {
            throw std::runtime_error("checkpoint feature_dim does not match dataset");
        }
        const auto prompts = timid::embed_prompts(
            manifest.task_prompt, manifest.mistake_prompt, params.config.d_model, kPromptSeed);
        probs = timid::score_split(params, prompts, test_set);
        checkpoint_hash = timid::file_hash_hex(checkpoint);
    }

    auto report = timid::build_report(test_set, probs);
    report.dataset_hash = timid::file_hash_hex(manifest_path);
    report.checkpoint_hash = checkpoint_hash;
    timid::write_report(report, out_dir);
    std::cout << "AP=" << fmt2(report.ap) << " AR=" << fmt2(report.ar)
              << " F1=" << fmt2(report.f1) << "\n";
    return 0;
}

int run_plot(const std::string& record_path, const std::string& out_path) {
    std::ifstream in(record_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read score record: " + record_path);
    const json j = json::parse(in);
    timid::PlotInput input;
    input.title = j.value("id", std::string{});
    input.probs = j.at("probs").get<std::vector<double>>();
    for (const auto& v : j.at("step_labels")) input.step_labels.push_back(v.get<int>() != 0);
    timid::write_score_svg(input, out_path);
    info("plot written to " + out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TIMID pipeline: generate labeled multi-robot episodes, train the "
                 "weakly-supervised mistake detector, evaluate frame-level localization"};
    app.require_subcommand(1);

    // gen ---------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a labeled episode dataset");
    std::string g_task = "mutex", g_out, g_mistake;
    int g_normal = 125, g_anomalous = 125, g_layout = -1, g_robots = 3;
    std::uint64_t g_seed = 1;
    std::size_t g_feature_dim = 64;
    gen->add_option("--task", g_task, "task: mutex or ordering");
    gen->add_option("--normal", g_normal, "number of compliant episodes");
    gen->add_option("--anomalous", g_anomalous, "number of mistake episodes");
    gen->add_option("--layout", g_layout, "fix one arena layout (0, 1, 2); default mixes all");
    gen->add_option("--seed", g_seed, "generator seed");
    gen->add_option("--mistake", g_mistake, "mistake kind for anomalous episodes");
    gen->add_option("--feature-dim", g_feature_dim, "feature dimension D");
    gen->add_option("--robots", g_robots, "robots per episode");
    gen->add_option("--out", g_out, "output dataset directory")->required();

    // train -------------------------------------------------------------
    auto* train = app.add_subcommand("train", "train the detector on a dataset");
    train->set_config("--config", "", "config file with TrainConfig keys (flags win)");
    std::string t_data, t_out, t_resume;
    timid::TrainConfig tcfg;
    std::size_t t_d_model = 32;
    bool t_ablate = false;
    train->add_option("--data", t_data, "dataset directory")->required();
    train->add_option("--out", t_out, "output directory (checkpoints + loss log)")->required();
    train->add_option("--checkpoint", t_resume, "resume from an existing checkpoint");
    train->add_option("--lr", tcfg.lr, "learning rate");
    train->add_option("--batch", tcfg.batch_size, "batch size");
    train->add_option("--epochs", tcfg.epochs, "training epochs");
    train->add_option("--tau", tcfg.tau, "contrastive temperature");
    train->add_option("--contrastive-weight", tcfg.contrastive_weight, "weight of L_con");
    train->add_option("--seed", tcfg.seed, "training/init seed");
    train->add_option("--checkpoint-cadence", tcfg.checkpoint_cadence,
                      "epochs between periodic checkpoints");
    train->add_option("--d-model", t_d_model, "model width d");
    train->add_flag("--ablate-local", t_ablate, "disable the local stream (gate frozen to 1)");

    // eval --------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "score the test split and write metrics");
    std::string e_data, e_checkpoint, e_out = "eval_out", e_scores;
    eval->add_option("--data", e_data, "dataset directory")->required();
    eval->add_option("--checkpoint", e_checkpoint, "trained checkpoint");
    eval->add_option("--out", e_out, "output directory for metrics and score records");
    eval->add_option("--scores-file", e_scores, "JSON {episode id: [step scores]} to "
                                                "evaluate instead of a checkpoint");

    // plot --------------------------------------------------------------
    auto* plot = app.add_subcommand("plot", "emit an SVG score-vs-time plot");
    std::string p_record, p_out = "plot.svg";
    plot->add_option("--scores-file", p_record, "per-episode score record from eval")->required();
    plot->add_option("--out", p_out, "output SVG path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return run_gen(g_task, g_normal, g_anomalous, g_layout, g_seed, g_out, g_mistake,
                           g_feature_dim, g_robots);
        }
        if (train->parsed()) {
            return run_train(t_data, t_out, t_resume, tcfg, t_d_model, t_ablate);
        }
        if (eval->parsed()) {
            return run_eval(e_data, e_checkpoint, e_out, e_scores);
        }
        if (plot->parsed()) {
            return run_plot(p_record, p_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
