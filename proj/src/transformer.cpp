#include "wst/transformer.hpp"

#include "wst/errors.hpp"
#include "wst/kernels.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace wst::transformer {
namespace {

constexpr double kLayerNormEpsilon = 1e-6;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

using kernels::gemm;

void add_bias(Matrix& m, const Matrix& bias) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        kernels::axpy(1.0, bias.row(0), m.row(i), m.cols);
    }
}

void bias_gradient(const Matrix& grad, Matrix& bias_grad) {
    for (std::size_t i = 0; i < grad.rows; ++i) {
        kernels::axpy(1.0, grad.row(i), bias_grad.row(0), grad.cols);
    }
}

void softmax_rows(Matrix& m) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* row = m.row(i);
        double mx = row[0];
        for (std::size_t j = 1; j < m.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (std::size_t j = 0; j < m.cols; ++j) row[j] /= sum;
    }
}

// out_i = gain_i * (x_i - mu) / (sigma + eps) + shift_i, rowwise.
// Caches the normalized values and per-row sigma for the backward pass.
void layer_norm_forward(const Matrix& x, const Matrix& gain, const Matrix& shift,
                        Matrix& normalized, std::vector<double>& sigma,
                        Matrix& out) {
    const std::size_t d = x.cols;
    normalized = Matrix(x.rows, d);
    out = Matrix(x.rows, d);
    sigma.assign(x.rows, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xr = x.row(i);
        const double mu = kernels::sum(xr, d) / static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = xr[j] - mu;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double s = std::sqrt(var);
        sigma[i] = s;
        const double denom = s + kLayerNormEpsilon;
        double* yr = normalized.row(i);
        double* or_ = out.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            yr[j] = (xr[j] - mu) / denom;
            or_[j] = gain.at(0, j) * yr[j] + shift.at(0, j);
        }
    }
}

void layer_norm_backward(const Matrix& grad_out, const Matrix& normalized,
                         const std::vector<double>& sigma, const Matrix& gain,
                         Matrix& grad_gain, Matrix& grad_shift, Matrix& grad_x) {
    const std::size_t d = normalized.cols;
    grad_x = Matrix(normalized.rows, d);
    std::vector<double> u(d);
    for (std::size_t i = 0; i < normalized.rows; ++i) {
        const double* g = grad_out.row(i);
        const double* y = normalized.row(i);
        double u_sum = 0.0, uy_sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            u[j] = g[j] * gain.at(0, j);
            u_sum += u[j];
            uy_sum += u[j] * y[j];
            grad_gain.at(0, j) += g[j] * y[j];
            grad_shift.at(0, j) += g[j];
        }
        const double s = sigma[i];
        const double denom = s + kLayerNormEpsilon;
        const double u_mean = u_sum / static_cast<double>(d);
        double* gx = grad_x.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            gx[j] = (u[j] - u_mean) / denom;
            if (s > 0.0) gx[j] -= y[j] * uy_sum / (static_cast<double>(d) * s);
        }
    }
}

// Inverted dropout: mask entries are 0 or 1/(1-rate); identity when rng is
// null or rate == 0.
void apply_dropout(Matrix& m, double rate, Rng* rng, Matrix& mask) {
    if (rng == nullptr || rate <= 0.0) {
        mask = Matrix();
        return;
    }
    const double scale = 1.0 / (1.0 - rate);
    mask = Matrix(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        mask.data[i] = (rng->uniform() >= rate) ? scale : 0.0;
        m.data[i] *= mask.data[i];
    }
}

void dropout_backward(Matrix& grad, const Matrix& mask) {
    if (mask.data.empty()) return;
    for (std::size_t i = 0; i < grad.data.size(); ++i)
        grad.data[i] *= mask.data[i];
}

struct BlockCache {
    Matrix input;             // R x d
    Matrix q, k, v;           // R x d
    std::vector<Matrix> attn; // per window*head, w x w
    Matrix ctx;               // R x d
    Matrix attn_drop_mask;
    Matrix r1_norm;           // normalized residual 1
    std::vector<double> r1_sigma;
    Matrix h1;                // LN1 output
    Matrix ff_relu_mask;      // R x d_ff
    Matrix ff_drop_mask;
    Matrix f1;                // post relu + dropout
    Matrix r2_norm;
    std::vector<double> r2_sigma;
};

struct ForwardCache {
    std::vector<BlockCache> blocks;
    Matrix h_final; // R x d
    Matrix pooled;  // B x d
    Matrix m1;      // B x mlp_units, post relu + dropout
    Matrix mlp_relu_mask;
    Matrix mlp_drop_mask;
    Matrix pred;    // B x k
};

// Full forward pass on a standardized batch. R = B * w rows.
void forward(const Model& model, const Matrix& inputs_std, Rng* dropout_rng,
             ForwardCache& cache) {
    const Config& cfg = model.config;
    const auto B = inputs_std.rows;
    const auto w = static_cast<std::size_t>(cfg.window);
    const auto d = static_cast<std::size_t>(cfg.d_model);
    const auto H = static_cast<std::size_t>(cfg.num_heads);
    const std::size_t dh = d / H;
    const std::size_t R = B * w;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

    if (inputs_std.cols != w) throw ModelError("window length mismatch");

    const Matrix pe = cfg.use_positional_encoding
                          ? positional_encoding(cfg.window, cfg.d_model)
                          : Matrix(w, d);

    Matrix x(R, d);
    const Parameters& p = model.params;
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t t = 0; t < w; ++t) {
            double* row = x.row(b * w + t);
            const double value = inputs_std.at(b, t);
            for (std::size_t j = 0; j < d; ++j) {
                row[j] = value * p.embed_w.at(0, j) + p.embed_b.at(0, j) +
                         pe.at(t, j);
            }
        }
    }

    cache.blocks.assign(p.blocks.size(), BlockCache{});
    for (std::size_t bl = 0; bl < p.blocks.size(); ++bl) {
        const EncoderBlockParams& bp = p.blocks[bl];
        BlockCache& bc = cache.blocks[bl];
        bc.input = x;

        bc.q = Matrix(R, d);
        bc.k = Matrix(R, d);
        bc.v = Matrix(R, d);
        gemm(false, false, R, d, d, 1.0, x.data.data(), d, bp.wq.data.data(), d,
             0.0, bc.q.data.data(), d);
        gemm(false, false, R, d, d, 1.0, x.data.data(), d, bp.wk.data.data(), d,
             0.0, bc.k.data.data(), d);
        gemm(false, false, R, d, d, 1.0, x.data.data(), d, bp.wv.data.data(), d,
             0.0, bc.v.data.data(), d);
        add_bias(bc.q, bp.bq);
        add_bias(bc.k, bp.bk);
        add_bias(bc.v, bp.bv);

        bc.ctx = Matrix(R, d);
        bc.attn.assign(B * H, Matrix());
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t h = 0; h < H; ++h) {
                Matrix& a = bc.attn[b * H + h];
                a = Matrix(w, w);
                const double* qs = bc.q.row(b * w) + h * dh;
                const double* ks = bc.k.row(b * w) + h * dh;
                const double* vs = bc.v.row(b * w) + h * dh;
                gemm(false, true, w, w, dh, inv_sqrt_dh, qs, d, ks, d, 0.0,
                     a.data.data(), w);
                softmax_rows(a);
                gemm(false, false, w, dh, w, 1.0, a.data.data(), w, vs, d, 0.0,
                     bc.ctx.row(b * w) + h * dh, d);
            }
        }

        Matrix o(R, d);
        gemm(false, false, R, d, d, 1.0, bc.ctx.data.data(), d,
             bp.wo.data.data(), d, 0.0, o.data.data(), d);
        add_bias(o, bp.bo);
        apply_dropout(o, cfg.dropout, dropout_rng, bc.attn_drop_mask);

        // residual + LN
        for (std::size_t i = 0; i < o.data.size(); ++i) o.data[i] += x.data[i];
        layer_norm_forward(o, bp.ln1_gain, bp.ln1_shift, bc.r1_norm,
                           bc.r1_sigma, bc.h1);

        // position-wise FFN
        const auto dff = static_cast<std::size_t>(cfg.d_ff);
        bc.f1 = Matrix(R, dff);
        gemm(false, false, R, dff, d, 1.0, bc.h1.data.data(), d,
             bp.ff_w1.data.data(), dff, 0.0, bc.f1.data.data(), dff);
        add_bias(bc.f1, bp.ff_b1);
        bc.ff_relu_mask = Matrix(R, dff);
        for (std::size_t i = 0; i < bc.f1.data.size(); ++i) {
            if (bc.f1.data[i] > 0.0) {
                bc.ff_relu_mask.data[i] = 1.0;
            } else {
                bc.f1.data[i] = 0.0;
            }
        }
        apply_dropout(bc.f1, cfg.dropout, dropout_rng, bc.ff_drop_mask);

        Matrix f2(R, d);
        gemm(false, false, R, d, dff, 1.0, bc.f1.data.data(), dff,
             bp.ff_w2.data.data(), d, 0.0, f2.data.data(), d);
        add_bias(f2, bp.ff_b2);

        for (std::size_t i = 0; i < f2.data.size(); ++i)
            f2.data[i] += bc.h1.data[i];
        layer_norm_forward(f2, bp.ln2_gain, bp.ln2_shift, bc.r2_norm,
                           bc.r2_sigma, x);
    }
    cache.h_final = x;

    // Collapse the encoder positions for the head: cycle average or the
    // final position.
    cache.pooled = Matrix(B, d);
    if (cfg.pooling == Pooling::Mean) {
        for (std::size_t b = 0; b < B; ++b) {
            double* pr = cache.pooled.row(b);
            for (std::size_t t = 0; t < w; ++t)
                kernels::axpy(1.0 / static_cast<double>(w), x.row(b * w + t),
                              pr, d);
        }
    } else {
        for (std::size_t b = 0; b < B; ++b) {
            std::copy_n(x.row(b * w + w - 1), d, cache.pooled.row(b));
        }
    }

    const auto mu = static_cast<std::size_t>(cfg.mlp_units);
    const auto k = static_cast<std::size_t>(cfg.horizon);
    cache.m1 = Matrix(B, mu);
    gemm(false, false, B, mu, d, 1.0, cache.pooled.data.data(), d,
         p.mlp_w.data.data(), mu, 0.0, cache.m1.data.data(), mu);
    add_bias(cache.m1, p.mlp_b);
    cache.mlp_relu_mask = Matrix(B, mu);
    for (std::size_t i = 0; i < cache.m1.data.size(); ++i) {
        if (cache.m1.data[i] > 0.0) {
            cache.mlp_relu_mask.data[i] = 1.0;
        } else {
            cache.m1.data[i] = 0.0;
        }
    }
    apply_dropout(cache.m1, cfg.mlp_dropout, dropout_rng, cache.mlp_drop_mask);

    cache.pred = Matrix(B, k);
    gemm(false, false, B, k, mu, 1.0, cache.m1.data.data(), mu,
         p.out_w.data.data(), k, 0.0, cache.pred.data.data(), k);
    add_bias(cache.pred, p.out_b);
}

Parameters zeros_like(const Parameters& p) {
    Parameters z;
    z.embed_w = Matrix(p.embed_w.rows, p.embed_w.cols);
    z.embed_b = Matrix(p.embed_b.rows, p.embed_b.cols);
    z.blocks.resize(p.blocks.size());
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        const EncoderBlockParams& b = p.blocks[i];
        EncoderBlockParams& o = z.blocks[i];
        auto alloc = [](const Matrix& m) { return Matrix(m.rows, m.cols); };
        o.wq = alloc(b.wq); o.bq = alloc(b.bq);
        o.wk = alloc(b.wk); o.bk = alloc(b.bk);
        o.wv = alloc(b.wv); o.bv = alloc(b.bv);
        o.wo = alloc(b.wo); o.bo = alloc(b.bo);
        o.ln1_gain = alloc(b.ln1_gain); o.ln1_shift = alloc(b.ln1_shift);
        o.ff_w1 = alloc(b.ff_w1); o.ff_b1 = alloc(b.ff_b1);
        o.ff_w2 = alloc(b.ff_w2); o.ff_b2 = alloc(b.ff_b2);
        o.ln2_gain = alloc(b.ln2_gain); o.ln2_shift = alloc(b.ln2_shift);
    }
    z.mlp_w = Matrix(p.mlp_w.rows, p.mlp_w.cols);
    z.mlp_b = Matrix(p.mlp_b.rows, p.mlp_b.cols);
    z.out_w = Matrix(p.out_w.rows, p.out_w.cols);
    z.out_b = Matrix(p.out_b.rows, p.out_b.cols);
    return z;
}

void backward(const Model& model, const Matrix& inputs_std,
              const Matrix& targets_std, const ForwardCache& cache,
              Parameters& grads) {
    const Config& cfg = model.config;
    const Parameters& p = model.params;
    const auto B = inputs_std.rows;
    const auto w = static_cast<std::size_t>(cfg.window);
    const auto d = static_cast<std::size_t>(cfg.d_model);
    const auto H = static_cast<std::size_t>(cfg.num_heads);
    const auto dff = static_cast<std::size_t>(cfg.d_ff);
    const auto mu = static_cast<std::size_t>(cfg.mlp_units);
    const auto k = static_cast<std::size_t>(cfg.horizon);
    const std::size_t dh = d / H;
    const std::size_t R = B * w;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

    // MSE: L = mean over B*k of (pred - target)^2
    Matrix dpred(B, k);
    const double scale = 2.0 / static_cast<double>(B * k);
    for (std::size_t i = 0; i < dpred.data.size(); ++i)
        dpred.data[i] = scale * (cache.pred.data[i] - targets_std.data[i]);

    // Output head.
    gemm(true, false, mu, k, B, 1.0, cache.m1.data.data(), mu,
         dpred.data.data(), k, 1.0, grads.out_w.data.data(), k);
    bias_gradient(dpred, grads.out_b);
    Matrix dm1(B, mu);
    gemm(false, true, B, mu, k, 1.0, dpred.data.data(), k,
         p.out_w.data.data(), k, 0.0, dm1.data.data(), mu);
    dropout_backward(dm1, cache.mlp_drop_mask);
    for (std::size_t i = 0; i < dm1.data.size(); ++i)
        dm1.data[i] *= cache.mlp_relu_mask.data[i];
    gemm(true, false, d, mu, B, 1.0, cache.pooled.data.data(), d,
         dm1.data.data(), mu, 1.0, grads.mlp_w.data.data(), mu);
    bias_gradient(dm1, grads.mlp_b);
    Matrix dpooled(B, d);
    gemm(false, true, B, d, mu, 1.0, dm1.data.data(), mu, p.mlp_w.data.data(),
         mu, 0.0, dpooled.data.data(), d);

    // Un-pool.
    Matrix dx(R, d);
    if (cfg.pooling == Pooling::Mean) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t t = 0; t < w; ++t) {
                kernels::axpy(1.0 / static_cast<double>(w), dpooled.row(b),
                              dx.row(b * w + t), d);
            }
        }
    } else {
        for (std::size_t b = 0; b < B; ++b) {
            kernels::axpy(1.0, dpooled.row(b), dx.row(b * w + w - 1), d);
        }
    }

    for (std::size_t bl = p.blocks.size(); bl-- > 0;) {
        const EncoderBlockParams& bp = p.blocks[bl];
        const BlockCache& bc = cache.blocks[bl];
        EncoderBlockParams& bg = grads.blocks[bl];

        // LN2 backward.
        Matrix dr2;
        layer_norm_backward(dx, bc.r2_norm, bc.r2_sigma, bp.ln2_gain,
                            bg.ln2_gain, bg.ln2_shift, dr2);

        // FFN backward; residual feeds dr2 into dh1 as well.
        Matrix dh1 = dr2;
        gemm(true, false, dff, d, R, 1.0, bc.f1.data.data(), dff,
             dr2.data.data(), d, 1.0, bg.ff_w2.data.data(), d);
        bias_gradient(dr2, bg.ff_b2);
        Matrix df1(R, dff);
        gemm(false, true, R, dff, d, 1.0, dr2.data.data(), d,
             bp.ff_w2.data.data(), d, 0.0, df1.data.data(), dff);
        dropout_backward(df1, bc.ff_drop_mask);
        for (std::size_t i = 0; i < df1.data.size(); ++i)
            df1.data[i] *= bc.ff_relu_mask.data[i];
        gemm(true, false, d, dff, R, 1.0, bc.h1.data.data(), d,
             df1.data.data(), dff, 1.0, bg.ff_w1.data.data(), dff);
        bias_gradient(df1, bg.ff_b1);
        gemm(false, true, R, d, dff, 1.0, df1.data.data(), dff,
             bp.ff_w1.data.data(), dff, 1.0, dh1.data.data(), d);

        // LN1 backward.
        Matrix dr1;
        layer_norm_backward(dh1, bc.r1_norm, bc.r1_sigma, bp.ln1_gain,
                            bg.ln1_gain, bg.ln1_shift, dr1);

        // Residual: dr1 flows to the block input and to the attention path.
        Matrix dxin = dr1;
        Matrix do_ = dr1;
        dropout_backward(do_, bc.attn_drop_mask);

        gemm(true, false, d, d, R, 1.0, bc.ctx.data.data(), d,
             do_.data.data(), d, 1.0, bg.wo.data.data(), d);
        bias_gradient(do_, bg.bo);
        Matrix dctx(R, d);
        gemm(false, true, R, d, d, 1.0, do_.data.data(), d,
             bp.wo.data.data(), d, 0.0, dctx.data.data(), d);

        Matrix dq(R, d), dk(R, d), dv(R, d);
        Matrix da(w, w), ds(w, w);
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t h = 0; h < H; ++h) {
                const Matrix& a = bc.attn[b * H + h];
                const double* vs = bc.v.row(b * w) + h * dh;
                const double* qs = bc.q.row(b * w) + h * dh;
                const double* ks = bc.k.row(b * w) + h * dh;
                const double* dctxs = dctx.row(b * w) + h * dh;

                gemm(false, true, w, w, dh, 1.0, dctxs, d, vs, d, 0.0,
                     da.data.data(), w);
                gemm(true, false, w, dh, w, 1.0, a.data.data(), w, dctxs, d,
                     0.0, dv.row(b * w) + h * dh, d);
                // softmax backward: ds = a .* (da - rowsum(da .* a))
                for (std::size_t i = 0; i < w; ++i) {
                    const double* ar = a.row(i);
                    const double* dar = da.row(i);
                    double* dsr = ds.row(i);
                    const double dot = kernels::dot(ar, dar, w);
                    for (std::size_t j = 0; j < w; ++j)
                        dsr[j] = ar[j] * (dar[j] - dot);
                }
                gemm(false, false, w, dh, w, inv_sqrt_dh, ds.data.data(), w,
                     ks, d, 0.0, dq.row(b * w) + h * dh, d);
                gemm(true, false, w, dh, w, inv_sqrt_dh, ds.data.data(), w,
                     qs, d, 0.0, dk.row(b * w) + h * dh, d);
            }
        }

        gemm(true, false, d, d, R, 1.0, bc.input.data.data(), d,
             dq.data.data(), d, 1.0, bg.wq.data.data(), d);
        gemm(true, false, d, d, R, 1.0, bc.input.data.data(), d,
             dk.data.data(), d, 1.0, bg.wk.data.data(), d);
        gemm(true, false, d, d, R, 1.0, bc.input.data.data(), d,
             dv.data.data(), d, 1.0, bg.wv.data.data(), d);
        bias_gradient(dq, bg.bq);
        bias_gradient(dk, bg.bk);
        bias_gradient(dv, bg.bv);
        gemm(false, true, R, d, d, 1.0, dq.data.data(), d, bp.wq.data.data(),
             d, 1.0, dxin.data.data(), d);
        gemm(false, true, R, d, d, 1.0, dk.data.data(), d, bp.wk.data.data(),
             d, 1.0, dxin.data.data(), d);
        gemm(false, true, R, d, d, 1.0, dv.data.data(), d, bp.wv.data.data(),
             d, 1.0, dxin.data.data(), d);

        dx = std::move(dxin);
    }

    // Embedding backward.
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t t = 0; t < w; ++t) {
            const double value = inputs_std.at(b, t);
            const double* gr = dx.row(b * w + t);
            kernels::axpy(value, gr, grads.embed_w.row(0), d);
            kernels::axpy(1.0, gr, grads.embed_b.row(0), d);
        }
    }
}

double mse(const Matrix& pred, const Matrix& target) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double e = pred.data[i] - target.data[i];
        acc += e * e;
    }
    return acc / static_cast<double>(pred.data.size());
}

void glorot_init(Matrix& m, Rng& rng) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
    for (double& v : m.data) v = rng.uniform(-limit, limit);
}

Matrix standardize_matrix(const Matrix& m, const NormStats& norm) {
    Matrix out = m;
    for (double& v : out.data) v = (v - norm.mean) / norm.std_dev;
    return out;
}

} // namespace

void Config::validate() const {
    if (num_blocks < 1 || d_model < 1 || num_heads < 1 || d_ff < 1 ||
        mlp_units < 1 || window < 1 || horizon < 1 || batch_size < 1 ||
        max_epochs < 1 || early_stop_patience < 1) {
        throw ConfigError("transformer config: counts and widths must be >= 1");
    }
    if (!(dropout >= 0.0 && dropout < 1.0) ||
        !(mlp_dropout >= 0.0 && mlp_dropout < 1.0)) {
        throw ConfigError("transformer config: dropout rates must be in [0,1)");
    }
    if (d_model % 2 != 0) {
        throw ConfigError("transformer config: d_model must be even");
    }
    if (d_model % num_heads != 0) {
        throw ConfigError("transformer config: num_heads must divide d_model");
    }
    if (!(learning_rate > 0.0)) {
        throw ConfigError("transformer config: learning rate must be positive");
    }
}

WindowDataset make_windows(std::span<const double> series, int window,
                           int horizon) {
    if (window < 1 || horizon < 1) {
        throw DataError("make_windows: window and horizon must be >= 1");
    }
    const auto w = static_cast<std::size_t>(window);
    const auto k = static_cast<std::size_t>(horizon);
    if (series.size() < w + k) {
        throw DataError("make_windows: series length " +
                        std::to_string(series.size()) +
                        " below window + horizon = " + std::to_string(w + k));
    }
    const std::size_t m = series.size() - w - k + 1;
    WindowDataset ds;
    ds.window = window;
    ds.horizon = horizon;
    ds.inputs = Matrix(m, w);
    ds.targets = Matrix(m, k);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < w; ++j) ds.inputs.at(i, j) = series[i + j];
        for (std::size_t j = 0; j < k; ++j)
            ds.targets.at(i, j) = series[i + w + j];
    }
    return ds;
}

Matrix positional_encoding(int length, int d_model) {
    if (d_model % 2 != 0) {
        throw ConfigError("positional_encoding: d_model must be even");
    }
    if (length < 1 || d_model < 1) {
        throw ConfigError("positional_encoding: dimensions must be >= 1");
    }
    const auto n = static_cast<std::size_t>(length);
    const auto d = static_cast<std::size_t>(d_model);
    Matrix pe(n, d);
    for (std::size_t pos = 0; pos < n; ++pos) {
        for (std::size_t i = 0; i < d / 2; ++i) {
            const double angle =
                static_cast<double>(pos) /
                std::pow(10000.0, 2.0 * static_cast<double>(i) /
                                      static_cast<double>(d));
            pe.at(pos, 2 * i) = std::sin(angle);
            pe.at(pos, 2 * i + 1) = std::cos(angle);
        }
    }
    return pe;
}

Matrix scaled_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                        Matrix* weights) {
    if (q.cols != k.cols) throw ModelError("scaled_attention: Q/K width mismatch");
    if (k.rows != v.rows) throw ModelError("scaled_attention: K/V row mismatch");
    Matrix a(q.rows, k.rows);
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.cols));
    gemm(false, true, q.rows, k.rows, q.cols, inv_sqrt_dk, q.data.data(),
         q.cols, k.data.data(), k.cols, 0.0, a.data.data(), a.cols);
    softmax_rows(a);
    Matrix z(q.rows, v.cols);
    gemm(false, false, q.rows, v.cols, k.rows, 1.0, a.data.data(), a.cols,
         v.data.data(), v.cols, 0.0, z.data.data(), z.cols);
    if (weights != nullptr) *weights = std::move(a);
    return z;
}

Model initialize_model(const Config& config) {
    config.validate();
    const auto d = static_cast<std::size_t>(config.d_model);
    const auto dff = static_cast<std::size_t>(config.d_ff);
    const auto mu = static_cast<std::size_t>(config.mlp_units);
    const auto k = static_cast<std::size_t>(config.horizon);

    Rng rng = Rng::derive(config.seed, 0);
    Model model;
    model.config = config;
    Parameters& p = model.params;

    p.embed_w = Matrix(1, d);
    p.embed_b = Matrix(1, d);
    glorot_init(p.embed_w, rng);

    p.blocks.resize(static_cast<std::size_t>(config.num_blocks));
    for (auto& b : p.blocks) {
        b.wq = Matrix(d, d); glorot_init(b.wq, rng);
        b.bq = Matrix(1, d);
        b.wk = Matrix(d, d); glorot_init(b.wk, rng);
        b.bk = Matrix(1, d);
        b.wv = Matrix(d, d); glorot_init(b.wv, rng);
        b.bv = Matrix(1, d);
        b.wo = Matrix(d, d); glorot_init(b.wo, rng);
        b.bo = Matrix(1, d);
        b.ln1_gain = Matrix(1, d);
        std::fill(b.ln1_gain.data.begin(), b.ln1_gain.data.end(), 1.0);
        b.ln1_shift = Matrix(1, d);
        b.ff_w1 = Matrix(d, dff); glorot_init(b.ff_w1, rng);
        b.ff_b1 = Matrix(1, dff);
        b.ff_w2 = Matrix(dff, d); glorot_init(b.ff_w2, rng);
        b.ff_b2 = Matrix(1, d);
        b.ln2_gain = Matrix(1, d);
        std::fill(b.ln2_gain.data.begin(), b.ln2_gain.data.end(), 1.0);
        b.ln2_shift = Matrix(1, d);
    }
    p.mlp_w = Matrix(d, mu); glorot_init(p.mlp_w, rng);
    p.mlp_b = Matrix(1, mu);
    p.out_w = Matrix(mu, k); glorot_init(p.out_w, rng);
    p.out_b = Matrix(1, k);
    return model;
}

void audit_shapes(const Model& model) {
    const Config& cfg = model.config;
    cfg.validate();
    const auto d = static_cast<std::size_t>(cfg.d_model);
    const auto dff = static_cast<std::size_t>(cfg.d_ff);
    const auto mu = static_cast<std::size_t>(cfg.mlp_units);
    const auto k = static_cast<std::size_t>(cfg.horizon);

    auto expect = [](const Matrix& m, std::size_t r, std::size_t c,
                     const std::string& name) {
        if (m.rows != r || m.cols != c) {
            throw ModelError("shape audit failed for " + name + ": have " +
                             std::to_string(m.rows) + "x" +
                             std::to_string(m.cols) + ", want " +
                             std::to_string(r) + "x" + std::to_string(c));
        }
        for (double v : m.data) {
            if (!std::isfinite(v)) {
                throw ModelError("non-finite parameter in " + name);
            }
        }
    };

    const Parameters& p = model.params;
    expect(p.embed_w, 1, d, "embed_w");
    expect(p.embed_b, 1, d, "embed_b");
    if (p.blocks.size() != static_cast<std::size_t>(cfg.num_blocks)) {
        throw ModelError("shape audit failed: block count mismatch");
    }
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        const auto& b = p.blocks[i];
        const std::string pre = "block" + std::to_string(i) + ".";
        expect(b.wq, d, d, pre + "wq"); expect(b.bq, 1, d, pre + "bq");
        expect(b.wk, d, d, pre + "wk"); expect(b.bk, 1, d, pre + "bk");
        expect(b.wv, d, d, pre + "wv"); expect(b.bv, 1, d, pre + "bv");
        expect(b.wo, d, d, pre + "wo"); expect(b.bo, 1, d, pre + "bo");
        expect(b.ln1_gain, 1, d, pre + "ln1_gain");
        expect(b.ln1_shift, 1, d, pre + "ln1_shift");
        expect(b.ff_w1, d, dff, pre + "ff_w1");
        expect(b.ff_b1, 1, dff, pre + "ff_b1");
        expect(b.ff_w2, dff, d, pre + "ff_w2");
        expect(b.ff_b2, 1, d, pre + "ff_b2");
        expect(b.ln2_gain, 1, d, pre + "ln2_gain");
        expect(b.ln2_shift, 1, d, pre + "ln2_shift");
    }
    expect(p.mlp_w, d, mu, "mlp_w");
    expect(p.mlp_b, 1, mu, "mlp_b");
    expect(p.out_w, mu, k, "out_w");
    expect(p.out_b, 1, k, "out_b");
}

double batch_loss(const Model& model, const Matrix& inputs_std,
                  const Matrix& targets_std, Parameters* grads,
                  Rng* dropout_rng) {
    ForwardCache cache;
    forward(model, inputs_std, dropout_rng, cache);
    const double loss = mse(cache.pred, targets_std);
    if (grads != nullptr) {
        backward(model, inputs_std, targets_std, cache, *grads);
    }
    return loss;
}

Model train(const WindowDataset& dataset, const Config& config,
            TrainHistory* history) {
    config.validate();
    if (dataset.size() == 0) throw DataError("train: empty dataset");
    if (dataset.window != config.window || dataset.horizon != config.horizon) {
        throw ConfigError("train: dataset window/horizon disagree with config");
    }

    const std::size_t m = dataset.size();
    const std::size_t val_count = m / 10;
    const std::size_t train_count = m - val_count;

    Model model = initialize_model(config);

    // Standardization from the training split only.
    {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < train_count; ++i) {
            sum += kernels::sum(dataset.inputs.row(i), dataset.inputs.cols);
            sum += kernels::sum(dataset.targets.row(i), dataset.targets.cols);
            n += dataset.inputs.cols + dataset.targets.cols;
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < train_count; ++i) {
            for (std::size_t j = 0; j < dataset.inputs.cols; ++j) {
                const double c = dataset.inputs.at(i, j) - mean;
                ss += c * c;
            }
            for (std::size_t j = 0; j < dataset.targets.cols; ++j) {
                const double c = dataset.targets.at(i, j) - mean;
                ss += c * c;
            }
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        model.norm.mean = mean;
        model.norm.degenerate = !(sd > 1e-12);
        model.norm.std_dev = model.norm.degenerate ? 1.0 : sd;
    }

    const Matrix inputs = standardize_matrix(dataset.inputs, model.norm);
    const Matrix targets = standardize_matrix(dataset.targets, model.norm);

    // Adam state mirrors the parameter tensors.
    Parameters grads = zeros_like(model.params);
    Parameters adam_m = zeros_like(model.params);
    Parameters adam_v = zeros_like(model.params);
    std::vector<Matrix*> param_ptrs, grad_ptrs, m_ptrs, v_ptrs;
    model.params.for_each([&](const std::string&, Matrix& t) {
        param_ptrs.push_back(&t);
    });
    grads.for_each([&](const std::string&, Matrix& t) { grad_ptrs.push_back(&t); });
    adam_m.for_each([&](const std::string&, Matrix& t) { m_ptrs.push_back(&t); });
    adam_v.for_each([&](const std::string&, Matrix& t) { v_ptrs.push_back(&t); });

    Rng dropout_rng = Rng::derive(config.seed, 1);
    Rng shuffle_rng = Rng::derive(config.seed, 2);

    std::vector<std::size_t> order(train_count);
    for (std::size_t i = 0; i < train_count; ++i) order[i] = i;

    Matrix val_inputs, val_targets;
    if (val_count > 0) {
        val_inputs = Matrix(val_count, inputs.cols);
        val_targets = Matrix(val_count, targets.cols);
        for (std::size_t i = 0; i < val_count; ++i) {
            std::copy_n(inputs.row(train_count + i), inputs.cols,
                        val_inputs.row(i));
            std::copy_n(targets.row(train_count + i), targets.cols,
                        val_targets.row(i));
        }
    }

    Parameters best_params = model.params;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int since_best = 0;
    long long adam_t = 0;
    const auto batch = static_cast<std::size_t>(config.batch_size);

    int epoch = 0;
    for (; epoch < config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t epoch_examples = 0;
        for (std::size_t begin = 0; begin < train_count; begin += batch) {
            const std::size_t bsz = std::min(batch, train_count - begin);
            Matrix bi(bsz, inputs.cols), bt(bsz, targets.cols);
            for (std::size_t i = 0; i < bsz; ++i) {
                std::copy_n(inputs.row(order[begin + i]), inputs.cols, bi.row(i));
                std::copy_n(targets.row(order[begin + i]), targets.cols,
                            bt.row(i));
            }
            grads.for_each([](const std::string&, Matrix& t) {
                std::fill(t.data.begin(), t.data.end(), 0.0);
            });
            const double loss = batch_loss(model, bi, bt, &grads, &dropout_rng);
            if (!std::isfinite(loss)) {
                throw ModelError("training diverged at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(begin / batch));
            }
            epoch_loss += loss * static_cast<double>(bsz);
            epoch_examples += bsz;

            ++adam_t;
            const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_t));
            const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_t));
            for (std::size_t ti = 0; ti < param_ptrs.size(); ++ti) {
                auto& pd = param_ptrs[ti]->data;
                auto& gd = grad_ptrs[ti]->data;
                auto& md = m_ptrs[ti]->data;
                auto& vd = v_ptrs[ti]->data;
                for (std::size_t j = 0; j < pd.size(); ++j) {
                    md[j] = kAdamBeta1 * md[j] + (1.0 - kAdamBeta1) * gd[j];
                    vd[j] = kAdamBeta2 * vd[j] + (1.0 - kAdamBeta2) * gd[j] * gd[j];
                    const double mhat = md[j] / bc1;
                    const double vhat = vd[j] / bc2;
                    pd[j] -= config.learning_rate * mhat /
                             (std::sqrt(vhat) + kAdamEpsilon);
                }
            }
        }
        if (history != nullptr) {
            history->train_mse.push_back(epoch_loss /
                                         static_cast<double>(epoch_examples));
        }

        if (val_count > 0) {
            const double val = batch_loss(model, val_inputs, val_targets,
                                          nullptr, nullptr);
            if (history != nullptr) history->val_mse.push_back(val);
            if (val < best_val) {
                best_val = val;
                best_params = model.params;
                best_epoch = epoch;
                since_best = 0;
            } else if (++since_best >= config.early_stop_patience) {
                ++epoch;
                break;
            }
        }
    }

    if (val_count > 0) {
        model.params = std::move(best_params);
    } else {
        best_epoch = epoch - 1;
    }
    if (history != nullptr) {
        history->best_epoch = best_epoch;
        history->epochs_run = epoch;
    }
    audit_shapes(model);
    return model;
}

std::vector<double> predict(const Model& model, std::span<const double> window) {
    const auto w = static_cast<std::size_t>(model.config.window);
    if (window.size() != w) {
        throw ModelError("predict: window length " +
                         std::to_string(window.size()) + ", expected " +
                         std::to_string(w));
    }
    Matrix input(1, w);
    for (std::size_t j = 0; j < w; ++j) {
        input.at(0, j) = (window[j] - model.norm.mean) / model.norm.std_dev;
    }
    ForwardCache cache;
    forward(model, input, nullptr, cache);
    std::vector<double> out(cache.pred.data.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double v = cache.pred.data[j] * model.norm.std_dev + model.norm.mean;
        if (!std::isfinite(v)) throw ModelError("predict: non-finite output");
        out[j] = v;
    }
    return out;
}

std::vector<double> forecast_recursive(const Model& model,
                                       std::span<const double> history,
                                       int horizon) {
    if (horizon < 1) throw ModelError("forecast horizon must be >= 1");
    const auto w = static_cast<std::size_t>(model.config.window);
    if (history.size() < w) {
        throw ModelError("forecast_recursive: history shorter than the window");
    }
    // Fed-back predictions are clamped to an 8-sigma band around the
    // training distribution; outside it the network is pure extrapolation
    // and feedback can spiral.
    const double lo = model.norm.mean - 8.0 * model.norm.std_dev;
    const double hi = model.norm.mean + 8.0 * model.norm.std_dev;
    std::vector<double> buffer(history.end() - static_cast<long>(w),
                               history.end());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    while (out.size() < static_cast<std::size_t>(horizon)) {
        const std::vector<double> step =
            predict(model, std::span<const double>(buffer).last(w));
        for (double v : step) {
            v = std::clamp(v, lo, hi);
            buffer.push_back(v);
            out.push_back(v);
        }
    }
    out.resize(static_cast<std::size_t>(horizon));
    return out;
}

void save_checkpoint(const Model& model, const std::string& path) {
    nlohmann::json j;
    j["format"] = "wst-transformer-checkpoint";
    j["version"] = 1;
    j["config"] = {{"num_blocks", model.config.num_blocks},
                   {"d_model", model.config.d_model},
                   {"num_heads", model.config.num_heads},
                   {"d_ff", model.config.d_ff},
                   {"mlp_units", model.config.mlp_units},
                   {"dropout", model.config.dropout},
                   {"mlp_dropout", model.config.mlp_dropout},
                   {"window", model.config.window},
                   {"horizon", model.config.horizon},
                   {"batch_size", model.config.batch_size},
                   {"max_epochs", model.config.max_epochs},
                   {"early_stop_patience", model.config.early_stop_patience},
                   {"learning_rate", model.config.learning_rate},
                   {"seed", model.config.seed},
                   {"use_positional_encoding",
                    model.config.use_positional_encoding},
                   {"pooling", model.config.pooling == Pooling::Mean
                                   ? "mean"
                                   : "last"}};
    j["norm"] = {{"mean", model.norm.mean},
                 {"std_dev", model.norm.std_dev},
                 {"degenerate", model.norm.degenerate}};
    nlohmann::json params = nlohmann::json::array();
    const_cast<Model&>(model).params.for_each(
        [&](const std::string& name, Matrix& t) {
            params.push_back({{"name", name},
                              {"rows", t.rows},
                              {"cols", t.cols},
                              {"data", t.data}});
        });
    j["params"] = params;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << j.dump();
    if (!out) throw DataError("checkpoint write failed: " + path);
}

Model load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint " + path + ": " + e.what());
    }
    try {
        if (j.at("format") != "wst-transformer-checkpoint" ||
            j.at("version") != 1) {
            throw DataError("unsupported checkpoint format in " + path);
        }
        const auto& jc = j.at("config");
        Config cfg;
        cfg.num_blocks = jc.at("num_blocks");
        cfg.d_model = jc.at("d_model");
        cfg.num_heads = jc.at("num_heads");
        cfg.d_ff = jc.at("d_ff");
        cfg.mlp_units = jc.at("mlp_units");
        cfg.dropout = jc.at("dropout");
        cfg.mlp_dropout = jc.at("mlp_dropout");
        cfg.window = jc.at("window");
        cfg.horizon = jc.at("horizon");
        cfg.batch_size = jc.at("batch_size");
        cfg.max_epochs = jc.at("max_epochs");
        cfg.early_stop_patience = jc.at("early_stop_patience");
        cfg.learning_rate = jc.at("learning_rate");
        cfg.seed = jc.at("seed");
        cfg.use_positional_encoding = jc.at("use_positional_encoding");
        const std::string pooling = jc.at("pooling");
        if (pooling != "mean" && pooling != "last") {
            throw DataError("unknown pooling '" + pooling + "' in " + path);
        }
        cfg.pooling = pooling == "mean" ? Pooling::Mean : Pooling::Last;

        Model model = initialize_model(cfg);
        model.norm.mean = j.at("norm").at("mean");
        model.norm.std_dev = j.at("norm").at("std_dev");
        model.norm.degenerate = j.at("norm").at("degenerate");

        std::size_t idx = 0;
        const auto& params = j.at("params");
        model.params.for_each([&](const std::string& name, Matrix& t) {
            if (idx >= params.size()) {
                throw DataError("checkpoint missing tensor " + name);
            }
            const auto& entry = params[idx++];
            if (entry.at("name") != name || entry.at("rows") != t.rows ||
                entry.at("cols") != t.cols) {
                throw DataError("checkpoint tensor mismatch at " + name);
            }
            t.data = entry.at("data").get<std::vector<double>>();
        });
        if (idx != params.size()) {
            throw DataError("checkpoint has extra tensors");
        }
        audit_shapes(model);
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint " + path + ": " + e.what());
    }
}

} // namespace wst::transformer
