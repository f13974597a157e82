#include "timid/model.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "timid/rng.hpp"

namespace timid {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Prompt embedding / positional encoding
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> tokenize_prompt(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) tokens.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

}  // namespace

PromptEmbedding embed_prompts(const std::string& task_prompt,
                              const std::string& mistake_prompt, std::size_t d,
                              std::uint64_t seed) {
    PromptEmbedding out;
    out.d = d;
    out.tokens = tokenize_prompt(task_prompt);
    const auto mistake_tokens = tokenize_prompt(mistake_prompt);
    if (out.tokens.empty() || mistake_tokens.empty()) {
        throw std::invalid_argument("embed_prompts: prompts must be nonempty");
    }
    out.tokens.insert(out.tokens.end(), mistake_tokens.begin(), mistake_tokens.end());
    out.rows.reserve(out.tokens.size());
    for (const std::string& tok : out.tokens) {
        Rng rng(splitmix64(seed ^ fnv1a64(tok)));
        std::vector<double> row(d);
        double norm_sq = 0.0;
        for (double& v : row) {
            v = rng.normal();
            norm_sq += v * v;
        }
        const double norm = std::sqrt(norm_sq);
        for (double& v : row) v /= norm;
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::vector<double> PromptEmbedding::flat() const {
    std::vector<double> out;
    out.reserve(rows.size() * d);
    for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::vector<std::vector<double>> positional_encoding(std::size_t T, std::size_t d) {
    std::vector<std::vector<double>> pe(T, std::vector<double>(d));
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            const double pair = static_cast<double>(2 * (j / 2));
            const double angle =
                static_cast<double>(t) / std::pow(10000.0, pair / static_cast<double>(d));
            pe[t][j] = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return pe;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

ModelParams ModelParams::init(const ModelConfig& cfg) {
    if (cfg.feature_dim == 0 || cfg.d_model == 0) {
        throw std::invalid_argument("model dims must be positive");
    }
    ModelParams p;
    p.config = cfg;
    const std::size_t D = cfg.feature_dim, d = cfg.d_model;
    Rng rng(splitmix64(cfg.seed ^ 0x4d4f44ull));
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    const auto matrix = [&](const std::string& name, std::size_t rows, std::size_t cols) {
        ParamBlock b{name, {rows, cols}, std::vector<double>(rows * cols)};
        for (double& v : b.value) v = rng.uniform(-bound, bound);
        p.blocks.push_back(std::move(b));
    };
    const auto scalar = [&](const std::string& name, double v) {
        p.blocks.push_back({name, {1, 1}, {v}});
    };
    matrix("w_in", D, d);
    matrix("w_qt", d, d);
    matrix("w_kt", d, d);
    matrix("w_vt", d, d);
    scalar("gamma", 0.1);
    scalar("beta", 0.0);
    scalar("alpha", 0.0);  // sigma(0) = 0.5: balanced streams
    matrix("w_q", d, d);
    matrix("w_k", d, d);
    matrix("w_v", d, d);
    p.blocks.push_back({"ln_gain", {1, d}, std::vector<double>(d, 1.0)});
    p.blocks.push_back({"ln_bias", {1, d}, std::vector<double>(d, 0.0)});
    matrix("w_o", d, 1);
    scalar("b_o", 0.0);
    return p;
}

ParamBlock& ModelParams::block(const std::string& name) {
    for (auto& b : blocks) {
        if (b.name == name) return b;
    }
    throw std::invalid_argument("unknown parameter block: " + name);
}

const ParamBlock& ModelParams::block(const std::string& name) const {
    for (const auto& b : blocks) {
        if (b.name == name) return b;
    }
    throw std::invalid_argument("unknown parameter block: " + name);
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.value.size();
    return n;
}

BoundParams bind_params(Tape& tape, const ModelParams& params) {
    BoundParams bound;
    bound.nodes.reserve(params.blocks.size());
    for (const auto& b : params.blocks) {
        bound.nodes.push_back(tape.input(b.shape, b.value));
    }
    return bound;
}

std::vector<std::vector<double>> collect_param_grads(const Tape& tape,
                                                     const BoundParams& bound) {
    std::vector<std::vector<double>> grads;
    grads.reserve(bound.nodes.size());
    for (int id : bound.nodes) grads.push_back(tape.grad(id));
    return grads;
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

namespace {

enum BlockIndex {
    kWin, kWqt, kWkt, kWvt, kGamma, kBeta, kAlpha,
    kWq, kWk, kWv, kLnGain, kLnBias, kWo, kBo,
};

}  // namespace

ForwardTrace model_forward(Tape& tape, const std::vector<std::vector<double>>& features,
                           const PromptEmbedding& prompts, const ModelParams& params,
                           const BoundParams& bound, const Mask& step_mask) {
    const std::size_t T = features.size();
    const std::size_t D = params.config.feature_dim;
    const std::size_t d = params.config.d_model;
    if (T == 0) throw std::invalid_argument("model_forward: empty feature matrix");
    if (step_mask.size() != T) throw std::invalid_argument("model_forward: mask length mismatch");
    if (prompts.rows.empty()) throw std::invalid_argument("model_forward: empty prompt matrix");
    if (prompts.d != d) throw std::invalid_argument("model_forward: prompt width mismatch");

    std::vector<double> flat;
    flat.reserve(T * D);
    for (const auto& row : features) {
        if (row.size() != D) throw std::invalid_argument("model_forward: feature width mismatch");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    const int x = tape.input({T, D}, std::move(flat));

    const auto pe_rows = positional_encoding(T, d);
    std::vector<double> pe_flat;
    pe_flat.reserve(T * d);
    for (const auto& row : pe_rows) pe_flat.insert(pe_flat.end(), row.begin(), row.end());
    const int pe = tape.input({T, d}, std::move(pe_flat));

    const int x_proj = tape.add(tape.matmul(x, bound.nodes[kWin]), pe);

    // temporal context: prior G = exp(-|gamma (i-j)^2 + beta|), E = QK^T/sqrt(d) + G
    const int q_t = tape.matmul(x_proj, bound.nodes[kWqt]);
    const int k_t = tape.matmul(x_proj, bound.nodes[kWkt]);
    const int v_t = tape.matmul(x_proj, bound.nodes[kWvt]);
    std::vector<double> sq_dist(T * T);
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t j = 0; j < T; ++j) {
            const double diff = static_cast<double>(i) - static_cast<double>(j);
            sq_dist[i * T + j] = diff * diff;
        }
    }
    const int dist = tape.input({T, T}, std::move(sq_dist));
    const int prior =
        tape.exp(tape.neg(tape.abs(tape.badd(tape.bmul(bound.nodes[kGamma], dist),
                                             bound.nodes[kBeta]))));
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    const int energy =
        tape.add(tape.scale(tape.matmul(q_t, tape.transpose(k_t)), inv_sqrt_d), prior);

    Mask valid_cols(T * T, 0);
    Mask valid_causal(T * T, 0);
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t j = 0; j < T; ++j) {
            valid_cols[i * T + j] = step_mask[j];
            valid_causal[i * T + j] = static_cast<std::uint8_t>(step_mask[j] && j <= i);
        }
    }
    ForwardTrace trace;
    trace.step_mask = step_mask;
    trace.attn_global = tape.row_softmax(energy, &valid_cols);
    trace.attn_local = tape.row_softmax(energy, &valid_causal);
    const int c_global = tape.matmul(trace.attn_global, v_t);

    int z_time_full;
    if (params.config.ablate_local) {
        z_time_full = c_global;  // gate frozen at sigma(alpha) = 1
    } else {
        const int c_local = tape.matmul(trace.attn_local, v_t);
        const int gate = tape.sigmoid(bound.nodes[kAlpha]);
        const int gate_complement = tape.add_const(tape.neg(gate), 1.0);
        z_time_full = tape.add(tape.bmul(gate, c_global), tape.bmul(gate_complement, c_local));
    }
    // zero padded rows so they cannot leak into any pooled quantity
    std::vector<double> row_mask(T * d, 0.0);
    for (std::size_t i = 0; i < T; ++i) {
        if (step_mask[i]) std::fill_n(row_mask.begin() + static_cast<std::ptrdiff_t>(i * d), d, 1.0);
    }
    trace.z_time = tape.mul(z_time_full, tape.input({T, d}, std::move(row_mask)));

    // semantic alignment: queries from time features, keys/values from prompts
    const int z_task = tape.input({prompts.rows.size(), d}, prompts.flat());
    const int q_s = tape.matmul(trace.z_time, bound.nodes[kWq]);
    const int k_s = tape.matmul(z_task, bound.nodes[kWk]);
    const int v_s = tape.matmul(z_task, bound.nodes[kWv]);
    trace.attn_cross =
        tape.row_softmax(tape.scale(tape.matmul(q_s, tape.transpose(k_s)), inv_sqrt_d));
    const int context = tape.matmul(trace.attn_cross, v_s);
    // the residual adds the projected query, not z_time
    trace.z_sem = tape.layer_norm(tape.add(context, q_s), bound.nodes[kLnGain],
                                  bound.nodes[kLnBias]);

    trace.logits = tape.badd(tape.matmul(trace.z_sem, bound.nodes[kWo]), bound.nodes[kBo]);
    return trace;
}

std::vector<double> score_episode(const ModelParams& params, const PromptEmbedding& prompts,
                                  const std::vector<std::vector<double>>& features) {
    Tape tape;
    const BoundParams bound = bind_params(tape, params);
    const Mask mask(features.size(), 1);
    const ForwardTrace trace = model_forward(tape, features, prompts, params, bound, mask);
    const int probs = tape.sigmoid(trace.logits);
    return tape.value(probs);
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian; big-endian hosts need byte swaps");

void save_checkpoint(const ModelParams& params, const std::string& path) {
    json header;
    header["format"] = "timid-checkpoint";
    header["version"] = 1;
    header["config"] = {{"feature_dim", params.config.feature_dim},
                        {"d_model", params.config.d_model},
                        {"seed", params.config.seed},
                        {"ablate_local", params.config.ablate_local}};
    header["params"] = json::array();
    for (const auto& b : params.blocks) {
        header["params"].push_back(
            {{"name", b.name}, {"rows", b.shape.rows}, {"cols", b.shape.cols}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << header.dump() << "\n";
    for (const auto& b : params.blocks) {
        out.write(reinterpret_cast<const char*>(b.value.data()),
                  static_cast<std::streamsize>(b.value.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("short write on checkpoint: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw std::runtime_error("checkpoint missing header: " + path);
    }
    json header = json::parse(header_line);
    if (header.at("format").get<std::string>() != "timid-checkpoint") {
        throw std::runtime_error("not a checkpoint file: " + path);
    }
    ModelParams p;
    p.config.feature_dim = header.at("config").at("feature_dim").get<std::size_t>();
    p.config.d_model = header.at("config").at("d_model").get<std::size_t>();
    p.config.seed = header.at("config").at("seed").get<std::uint64_t>();
    p.config.ablate_local = header.at("config").at("ablate_local").get<bool>();
    for (const auto& b : header.at("params")) {
        ParamBlock block;
        block.name = b.at("name").get<std::string>();
        block.shape = {b.at("rows").get<std::size_t>(), b.at("cols").get<std::size_t>()};
        block.value.resize(block.shape.numel());
        in.read(reinterpret_cast<char*>(block.value.data()),
                static_cast<std::streamsize>(block.value.size() * sizeof(double)));
        if (!in) throw std::runtime_error("checkpoint blob truncated: " + path);
        p.blocks.push_back(std::move(block));
    }
    return p;
}

}  // namespace timid
