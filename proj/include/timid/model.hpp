#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "timid/tensor.hpp"

namespace timid {

// Tokenized task + mistake prompts embedded as fixed seeded-hash unit
// vectors; the rows stand in for a pretrained text encoder. Same token
// string, same row, everywhere.
struct PromptEmbedding {
    std::vector<std::string> tokens;        // lowercased, task prompt then mistake prompt
    std::vector<std::vector<double>> rows;  // tokens.size() x d, unit L2 norm
    std::size_t d = 0;

    std::vector<double> flat() const;
};

PromptEmbedding embed_prompts(const std::string& task_prompt,
                              const std::string& mistake_prompt, std::size_t d,
                              std::uint64_t seed);

// PE[t, 2i] = sin(t / 10000^(2i/d)), PE[t, 2i+1] = cos(t / 10000^(2i/d))
std::vector<std::vector<double>> positional_encoding(std::size_t T, std::size_t d);

struct ModelConfig {
    std::size_t feature_dim = 64;  // D
    std::size_t d_model = 32;      // d
    std::uint64_t seed = 0;
    bool ablate_local = false;     // freeze the fusion gate to the global stream
};

struct ParamBlock {
    std::string name;
    Shape shape;
    std::vector<double> value;
};

// All learnable arrays in fixed registry order; the checkpoint blob and the
// optimizer state both follow this order.
struct ModelParams {
    ModelConfig config;
    std::vector<ParamBlock> blocks;

    static ModelParams init(const ModelConfig& cfg);

    ParamBlock& block(const std::string& name);
    const ParamBlock& block(const std::string& name) const;
    std::size_t parameter_count() const;
};

// Parameter leaves on a tape, one per block, shared by every episode forward
// recorded on that tape so gradients accumulate across a batch.
struct BoundParams {
    std::vector<int> nodes;  // registry order
};

BoundParams bind_params(Tape& tape, const ModelParams& params);
std::vector<std::vector<double>> collect_param_grads(const Tape& tape,
                                                     const BoundParams& bound);

struct ForwardTrace {
    int logits = -1;       // T x 1
    int z_time = -1;       // T x d, padded rows zeroed
    int z_sem = -1;        // T x d
    int attn_global = -1;  // T x T
    int attn_local = -1;   // T x T
    int attn_cross = -1;   // T x prompt length
    Mask step_mask;
};

// Full network: W_in projection + sinusoidal encoding, Gaussian-prior
// dual-stream temporal attention with sigmoid-gated fusion, cross-attention
// onto the prompt rows with a residual layer norm, linear classifier.
ForwardTrace model_forward(Tape& tape, const std::vector<std::vector<double>>& features,
                           const PromptEmbedding& prompts, const ModelParams& params,
                           const BoundParams& bound, const Mask& step_mask);

// Inference helper: per-step mistake probabilities on a single episode.
std::vector<double> score_episode(const ModelParams& params, const PromptEmbedding& prompts,
                                  const std::vector<std::vector<double>>& features);

// Checkpoint file: one JSON header line (config, block names/shapes) followed
// by the flat little-endian 64-bit parameter blob in header order.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace timid
