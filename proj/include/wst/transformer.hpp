#pragma once

#include "wst/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wst::transformer {

/// Row-major dense matrix; the only tensor shape the model needs.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// How the encoder stack's output positions collapse into one feature
/// vector for the regression head.
enum class Pooling { Mean, Last };

struct Config {
    int num_blocks = 2;
    int d_model = 128;
    int num_heads = 4;
    int d_ff = 4;
    int mlp_units = 64;
    double dropout = 0.25;
    double mlp_dropout = 0.40;
    int window = 12;
    int horizon = 1; // k, outputs per forward pass
    int batch_size = 32;
    int max_epochs = 100;
    int early_stop_patience = 10;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    bool use_positional_encoding = true;
    Pooling pooling = Pooling::Mean;

    void validate() const; // throws ConfigError
};

/// Sliding supervision windows, stride 1, chronological.
/// inputs: M x w, targets: M x k, M = N - w - k + 1.
struct WindowDataset {
    Matrix inputs;
    Matrix targets;
    int window = 0;
    int horizon = 0;

    std::size_t size() const { return inputs.rows; }
};

WindowDataset make_windows(std::span<const double> series, int window, int horizon);

Matrix positional_encoding(int length, int d_model);

/// Z = softmax(Q K^T / sqrt(d_k)) V. Optionally exposes the attention
/// weights (row-stochastic).
Matrix scaled_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                        Matrix* weights = nullptr);

struct EncoderBlockParams {
    Matrix wq, bq, wk, bk, wv, bv, wo, bo;
    Matrix ln1_gain, ln1_shift;
    Matrix ff_w1, ff_b1, ff_w2, ff_b2;
    Matrix ln2_gain, ln2_shift;
};

struct Parameters {
    Matrix embed_w, embed_b; // scalar -> d_model projection
    std::vector<EncoderBlockParams> blocks;
    Matrix mlp_w, mlp_b;     // pooled encoding -> hidden
    Matrix out_w, out_b;     // hidden -> k outputs

    /// Visits every tensor in a fixed order (used by the optimizer,
    /// checkpointing and the gradient tests).
    template <typename Fn>
    void for_each(Fn&& fn) {
        fn("embed_w", embed_w);
        fn("embed_b", embed_b);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            auto& b = blocks[i];
            const std::string p = "block" + std::to_string(i) + ".";
            fn(p + "wq", b.wq); fn(p + "bq", b.bq);
            fn(p + "wk", b.wk); fn(p + "bk", b.bk);
            fn(p + "wv", b.wv); fn(p + "bv", b.bv);
            fn(p + "wo", b.wo); fn(p + "bo", b.bo);
            fn(p + "ln1_gain", b.ln1_gain); fn(p + "ln1_shift", b.ln1_shift);
            fn(p + "ff_w1", b.ff_w1); fn(p + "ff_b1", b.ff_b1);
            fn(p + "ff_w2", b.ff_w2); fn(p + "ff_b2", b.ff_b2);
            fn(p + "ln2_gain", b.ln2_gain); fn(p + "ln2_shift", b.ln2_shift);
        }
        fn("mlp_w", mlp_w); fn("mlp_b", mlp_b);
        fn("out_w", out_w); fn("out_b", out_b);
    }
};

/// Standardization applied to inputs and targets during training;
/// predictions are mapped back through it.
struct NormStats {
    double mean = 0.0;
    double std_dev = 1.0;
    bool degenerate = false; // constant training data, std clamped to 1
};

struct Model {
    Config config;
    Parameters params;
    NormStats norm;
};

/// Allocates and Glorot-initializes all tensors from config.seed.
Model initialize_model(const Config& config);

/// Throws ModelError if any tensor shape disagrees with the config.
void audit_shapes(const Model& model);

/// Mean squared error of one standardized batch; if grads is non-null the
/// parameter gradients are written into it (same shapes as model.params).
/// dropout_rng enables training-mode dropout; pass nullptr for inference
/// behaviour. Exposed for the finite-difference gradient tests.
double batch_loss(const Model& model, const Matrix& inputs_std,
                  const Matrix& targets_std, Parameters* grads,
                  Rng* dropout_rng);

struct TrainHistory {
    std::vector<double> train_mse; // per epoch, standardized units
    std::vector<double> val_mse;   // empty when no validation split
    int best_epoch = 0;
    int epochs_run = 0;
};

/// Adam on MSE with a chronological 10% validation tail for early
/// stopping; deterministic for a given config/seed/dataset.
Model train(const WindowDataset& dataset, const Config& config,
            TrainHistory* history = nullptr);

/// One forward pass on a raw (unstandardized) window of length w;
/// returns k destandardized predictions. Dropout off.
std::vector<double> predict(const Model& model, std::span<const double> window);

/// Feeds predictions back into the window until `horizon` values emitted.
std::vector<double> forecast_recursive(const Model& model,
                                       std::span<const double> history,
                                       int horizon);

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

} // namespace wst::transformer
