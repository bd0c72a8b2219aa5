#include "dtwc/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dtwc/eval.hpp"
#include "dtwc/kernels.hpp"
#include "dtwc/linalg.hpp"
#include "dtwc/vectorize.hpp"

namespace dtwc {

namespace {

constexpr double kLnEpsilon = 1e-12;
constexpr double kBceClamp = 1e-7;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller without state, two uniforms per draw; pinned so seeded
// initialization is bit-identical run to run.
double normal01(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

bool is_weight_tensor(const std::string& name) {
    if (name == "token_embeddings" || name == "position_embeddings" || name == "head.weight")
        return true;
    for (const char* suffix : {".wq", ".wk", ".wv", ".wo", ".w1", ".w2"})
        if (name.ends_with(suffix)) return true;
    return false;
}

void add_bias_rows(double* m, const double* bias, std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m[i * cols + j] += bias[j];
}

void add_col_sums(const double* m, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[j] += m[i * cols + j];
}

void ln_forward_pos(const double* x, const double* scale, const double* offset, double* out,
                    double* x_hat, double* inv_std, std::size_t n) {
    const double mean = kernels::sum(x, n) / static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = x[j] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + kLnEpsilon);
    if (inv_std) *inv_std = inv;
    for (std::size_t j = 0; j < n; ++j) {
        const double xh = (x[j] - mean) * inv;
        if (x_hat) x_hat[j] = xh;
        out[j] = scale[j] * xh + offset[j];
    }
}

// d(loss)/d(x) for one position given d(loss)/d(out); accumulates the
// scale/offset gradients.
void ln_backward_pos(const double* dout, const double* x_hat, double inv_std,
                     const double* scale, double* dx, double* gscale, double* goffset,
                     std::size_t n) {
    const double inv_n = 1.0 / static_cast<double>(n);
    double mean_dxhat = 0.0;
    double mean_dxhat_xhat = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double dxh = dout[j] * scale[j];
        mean_dxhat += dxh;
        mean_dxhat_xhat += dxh * x_hat[j];
        gscale[j] += dout[j] * x_hat[j];
        goffset[j] += dout[j];
    }
    mean_dxhat *= inv_n;
    mean_dxhat_xhat *= inv_n;
    for (std::size_t j = 0; j < n; ++j) {
        const double dxh = dout[j] * scale[j];
        dx[j] = inv_std * (dxh - mean_dxhat - x_hat[j] * mean_dxhat_xhat);
    }
}

struct MhaCache {
    std::vector<double> q, k, v;  // seq x hidden, post bias
    std::vector<double> attn;     // heads x seq x seq softmax weights
    std::vector<double> concat;   // seq x hidden, pre output projection
};

struct LayerTensors {
    std::span<const double> wq, bq, wk, bk, wv, bv, wo, bo;
    std::span<const double> n1s, n1o, w1, b1, w2, b2, n2s, n2o;
};

LayerTensors layer_tensors(const EncoderParams& p, std::size_t layer) {
    const std::string base = "layer" + std::to_string(layer) + ".";
    return {
        p.tensor(base + "attn.wq"), p.tensor(base + "attn.bq"),
        p.tensor(base + "attn.wk"), p.tensor(base + "attn.bk"),
        p.tensor(base + "attn.wv"), p.tensor(base + "attn.bv"),
        p.tensor(base + "attn.wo"), p.tensor(base + "attn.bo"),
        p.tensor(base + "norm1.scale"), p.tensor(base + "norm1.offset"),
        p.tensor(base + "ffn.w1"), p.tensor(base + "ffn.b1"),
        p.tensor(base + "ffn.w2"), p.tensor(base + "ffn.b2"),
        p.tensor(base + "norm2.scale"), p.tensor(base + "norm2.offset"),
    };
}

struct GradTensors {
    std::span<double> wq, bq, wk, bk, wv, bv, wo, bo;
    std::span<double> n1s, n1o, w1, b1, w2, b2, n2s, n2o;
};

GradTensors grad_tensors(const EncoderLayout& layout, std::vector<double>& grads,
                         std::size_t layer) {
    auto g = [&](const std::string& name) -> std::span<double> {
        const TensorInfo& t = layout.find(name);
        return {grads.data() + t.offset, t.size};
    };
    const std::string base = "layer" + std::to_string(layer) + ".";
    return {
        g(base + "attn.wq"), g(base + "attn.bq"), g(base + "attn.wk"), g(base + "attn.bk"),
        g(base + "attn.wv"), g(base + "attn.bv"), g(base + "attn.wo"), g(base + "attn.bo"),
        g(base + "norm1.scale"), g(base + "norm1.offset"),
        g(base + "ffn.w1"), g(base + "ffn.b1"), g(base + "ffn.w2"), g(base + "ffn.b2"),
        g(base + "norm2.scale"), g(base + "norm2.offset"),
    };
}

void mha_forward(const double* x, std::size_t seq, const EncoderParams& p, std::size_t layer,
                 const std::vector<bool>& mask, MhaCache& c, double* out,
                 AttentionTrace* trace) {
    const std::size_t H = p.config.hidden;
    const std::size_t A = p.config.heads;
    const std::size_t dk = p.config.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    const LayerTensors t = layer_tensors(p, layer);

    c.q.assign(seq * H, 0.0);
    c.k.assign(seq * H, 0.0);
    c.v.assign(seq * H, 0.0);
    linalg::matmul_nn(x, t.wq.data(), c.q.data(), seq, H, H);
    linalg::matmul_nn(x, t.wk.data(), c.k.data(), seq, H, H);
    linalg::matmul_nn(x, t.wv.data(), c.v.data(), seq, H, H);
    add_bias_rows(c.q.data(), t.bq.data(), seq, H);
    add_bias_rows(c.k.data(), t.bk.data(), seq, H);
    add_bias_rows(c.v.data(), t.bv.data(), seq, H);

    c.attn.assign(A * seq * seq, 0.0);
    c.concat.assign(seq * H, 0.0);
    for (std::size_t h = 0; h < A; ++h) {
        const std::size_t base = h * dk;
        for (std::size_t i = 0; i < seq; ++i) {
            double* row = c.attn.data() + (h * seq + i) * seq;
            const double* qi = c.q.data() + i * H + base;
            for (std::size_t j = 0; j < seq; ++j) {
                row[j] = mask[j] ? kNegInf
                                 : scale * kernels::dot(qi, c.k.data() + j * H + base, dk);
            }
            softmax_row({row, seq});
            double* ci = c.concat.data() + i * H + base;
            for (std::size_t j = 0; j < seq; ++j) {
                if (row[j] != 0.0)
                    kernels::axpy(row[j], c.v.data() + j * H + base, ci, dk);
            }
        }
    }

    std::fill(out, out + seq * H, 0.0);
    linalg::matmul_nn(c.concat.data(), t.wo.data(), out, seq, H, H);
    add_bias_rows(out, t.bo.data(), seq, H);

    if (trace) {
        trace->heads = A;
        trace->seq = seq;
        trace->weights = c.attn;
    }
}

struct LayerCache {
    std::vector<double> x_in;
    MhaCache mha;
    std::vector<double> r1, x1, ln1_xhat;
    std::vector<double> ln1_inv;
    std::vector<double> u, g;
    std::vector<double> r2, x_out, ln2_xhat;
    std::vector<double> ln2_inv;
};

struct ForwardCache {
    std::size_t seq = 0;
    std::vector<std::size_t> ids;
    std::vector<bool> mask;
    std::vector<double> x0;
    std::vector<LayerCache> layers;
    std::vector<double> pooled_pre, pooled;
    std::vector<double> dropout_scale; // empty when dropout is inactive
    double logit = 0.0;
    double prob = 0.0;
};

ForwardCache forward_cached(const std::vector<std::size_t>& token_ids, const EncoderParams& p,
                            bool training, std::mt19937_64* dropout_rng) {
    const EncoderConfig& cfg = p.config;
    if (token_ids.empty()) throw Error(ErrorCode::empty_input, "empty token sequence");
    if (token_ids.size() > cfg.max_len)
        throw Error(ErrorCode::sequence_too_long, std::to_string(token_ids.size()) +
                                                      " tokens exceeds max_len " +
                                                      std::to_string(cfg.max_len));
    if (token_ids[0] != kClsId)
        throw Error(ErrorCode::usage, "sequence must start with the CLS id");
    for (std::size_t id : token_ids)
        if (id >= cfg.vocab_size)
            throw Error(ErrorCode::unknown_token_id,
                        "token id " + std::to_string(id) + " outside vocabulary of " +
                            std::to_string(cfg.vocab_size));

    const std::size_t seq = token_ids.size();
    const std::size_t H = cfg.hidden;
    const std::size_t F = cfg.ffn_dim;

    ForwardCache cache;
    cache.seq = seq;
    cache.ids = token_ids;
    cache.mask.resize(seq);
    for (std::size_t i = 0; i < seq; ++i) cache.mask[i] = token_ids[i] == kPadId;

    auto tok = p.tensor("token_embeddings");
    auto pos = p.tensor("position_embeddings");
    cache.x0.resize(seq * H);
    for (std::size_t i = 0; i < seq; ++i)
        for (std::size_t j = 0; j < H; ++j)
            cache.x0[i * H + j] = tok[token_ids[i] * H + j] + pos[i * H + j];

    const double* x = cache.x0.data();
    cache.layers.resize(cfg.layers);
    std::vector<double> attn_out(seq * H);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        LayerCache& c = cache.layers[l];
        const LayerTensors t = layer_tensors(p, l);
        c.x_in.assign(x, x + seq * H);

        mha_forward(c.x_in.data(), seq, p, l, cache.mask, c.mha, attn_out.data(), nullptr);

        c.r1.resize(seq * H);
        for (std::size_t i = 0; i < seq * H; ++i) c.r1[i] = c.x_in[i] + attn_out[i];

        c.x1.resize(seq * H);
        c.ln1_xhat.resize(seq * H);
        c.ln1_inv.resize(seq);
        for (std::size_t i = 0; i < seq; ++i)
            ln_forward_pos(c.r1.data() + i * H, t.n1s.data(), t.n1o.data(),
                           c.x1.data() + i * H, c.ln1_xhat.data() + i * H, &c.ln1_inv[i], H);

        c.u.assign(seq * F, 0.0);
        linalg::matmul_nn(c.x1.data(), t.w1.data(), c.u.data(), seq, H, F);
        add_bias_rows(c.u.data(), t.b1.data(), seq, F);
        c.g.resize(seq * F);
        for (std::size_t i = 0; i < seq * F; ++i) c.g[i] = gelu(c.u[i]);

        c.r2.assign(seq * H, 0.0);
        linalg::matmul_nn(c.g.data(), t.w2.data(), c.r2.data(), seq, F, H);
        add_bias_rows(c.r2.data(), t.b2.data(), seq, H);
        for (std::size_t i = 0; i < seq * H; ++i) c.r2[i] += c.x1[i];

        c.x_out.resize(seq * H);
        c.ln2_xhat.resize(seq * H);
        c.ln2_inv.resize(seq);
        for (std::size_t i = 0; i < seq; ++i)
            ln_forward_pos(c.r2.data() + i * H, t.n2s.data(), t.n2o.data(),
                           c.x_out.data() + i * H, c.ln2_xhat.data() + i * H, &c.ln2_inv[i], H);

        x = c.x_out.data();
    }

    cache.pooled_pre.assign(x, x + H);
    cache.pooled = cache.pooled_pre;
    if (training && cfg.dropout_rate > 0.0) {
        std::mt19937_64 local(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
        std::mt19937_64& rng = dropout_rng ? *dropout_rng : local;
        const double keep = 1.0 - cfg.dropout_rate;
        cache.dropout_scale.resize(H);
        for (std::size_t j = 0; j < H; ++j) {
            cache.dropout_scale[j] = uniform01(rng) < cfg.dropout_rate ? 0.0 : 1.0 / keep;
            cache.pooled[j] *= cache.dropout_scale[j];
        }
    }

    auto hw = p.tensor("head.weight");
    cache.logit = kernels::dot(hw.data(), cache.pooled.data(), H) + p.tensor("head.bias")[0];
    if (!std::isfinite(cache.logit))
        throw Error(ErrorCode::non_finite_activation, "classification logit is not finite");
    cache.prob = sigmoid(cache.logit);
    return cache;
}

void backward_one(const ForwardCache& cache, const EncoderParams& p, double dlogit,
                  std::vector<double>& grads) {
    const EncoderConfig& cfg = p.config;
    const std::size_t seq = cache.seq;
    const std::size_t H = cfg.hidden;
    const std::size_t F = cfg.ffn_dim;
    const std::size_t A = cfg.heads;
    const std::size_t dk = cfg.head_dim();
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(dk));
    const EncoderLayout& layout = p.layout;

    // Head.
    {
        const TensorInfo& hw = layout.find("head.weight");
        const TensorInfo& hb = layout.find("head.bias");
        for (std::size_t j = 0; j < H; ++j)
            grads[hw.offset + j] += dlogit * cache.pooled[j];
        grads[hb.offset] += dlogit;
    }

    std::vector<double> dx(seq * H, 0.0);
    {
        auto hw = p.tensor("head.weight");
        for (std::size_t j = 0; j < H; ++j) {
            double dp = dlogit * hw[j];
            if (!cache.dropout_scale.empty()) dp *= cache.dropout_scale[j];
            dx[j] = dp; // row 0 = CLS position
        }
    }

    std::vector<double> dr2(seq * H), dy(seq * H), dgbuf(seq * F), du(seq * F);
    std::vector<double> dx1(seq * H), dr1(seq * H), dattn(seq * H), dconcat(seq * H);
    std::vector<double> dq(seq * H), dkk(seq * H), dv(seq * H), dwrow(seq);

    for (std::size_t li = cfg.layers; li-- > 0;) {
        const LayerCache& c = cache.layers[li];
        const LayerTensors t = layer_tensors(p, li);
        GradTensors g = grad_tensors(layout, grads, li);

        // LN after the FFN.
        for (std::size_t i = 0; i < seq; ++i)
            ln_backward_pos(dx.data() + i * H, c.ln2_xhat.data() + i * H, c.ln2_inv[i],
                            t.n2s.data(), dr2.data() + i * H, g.n2s.data(), g.n2o.data(), H);

        // Residual: r2 = x1 + ffn(x1).
        dx1 = dr2;
        dy = dr2;

        // FFN backward.
        linalg::matmul_tn(c.g.data(), dy.data(), g.w2.data(), seq, F, H);
        add_col_sums(dy.data(), g.b2.data(), seq, H);
        std::fill(dgbuf.begin(), dgbuf.end(), 0.0);
        linalg::matmul_nt(dy.data(), t.w2.data(), dgbuf.data(), seq, H, F);
        for (std::size_t i = 0; i < seq * F; ++i) du[i] = dgbuf[i] * gelu_derivative(c.u[i]);
        linalg::matmul_tn(c.x1.data(), du.data(), g.w1.data(), seq, H, F);
        add_col_sums(du.data(), g.b1.data(), seq, F);
        linalg::matmul_nt(du.data(), t.w1.data(), dx1.data(), seq, F, H);

        // LN after attention.
        for (std::size_t i = 0; i < seq; ++i)
            ln_backward_pos(dx1.data() + i * H, c.ln1_xhat.data() + i * H, c.ln1_inv[i],
                            t.n1s.data(), dr1.data() + i * H, g.n1s.data(), g.n1o.data(), H);

        // Residual: r1 = x_in + attention(x_in).
        dattn = dr1;

        // Output projection backward.
        linalg::matmul_tn(c.mha.concat.data(), dattn.data(), g.wo.data(), seq, H, H);
        add_col_sums(dattn.data(), g.bo.data(), seq, H);
        std::fill(dconcat.begin(), dconcat.end(), 0.0);
        linalg::matmul_nt(dattn.data(), t.wo.data(), dconcat.data(), seq, H, H);

        // Per-head attention backward.
        std::fill(dq.begin(), dq.end(), 0.0);
        std::fill(dkk.begin(), dkk.end(), 0.0);
        std::fill(dv.begin(), dv.end(), 0.0);
        for (std::size_t h = 0; h < A; ++h) {
            const std::size_t base = h * dk;
            for (std::size_t i = 0; i < seq; ++i) {
                const double* w = c.mha.attn.data() + (h * seq + i) * seq;
                const double* dch = dconcat.data() + i * H + base;
                double dot_row = 0.0;
                for (std::size_t j = 0; j < seq; ++j) {
                    dwrow[j] = kernels::dot(dch, c.mha.v.data() + j * H + base, dk);
                    dot_row += w[j] * dwrow[j];
                }
                const double* qi = c.mha.q.data() + i * H + base;
                for (std::size_t j = 0; j < seq; ++j) {
                    if (w[j] != 0.0)
                        kernels::axpy(w[j], dch, dv.data() + j * H + base, dk);
                    const double ds = w[j] * (dwrow[j] - dot_row);
                    if (ds != 0.0) {
                        kernels::axpy(ds * att_scale, c.mha.k.data() + j * H + base,
                                      dq.data() + i * H + base, dk);
                        kernels::axpy(ds * att_scale, qi, dkk.data() + j * H + base, dk);
                    }
                }
            }
        }

        // Input projections backward; dx becomes the gradient at x_in.
        linalg::matmul_tn(c.x_in.data(), dq.data(), g.wq.data(), seq, H, H);
        linalg::matmul_tn(c.x_in.data(), dkk.data(), g.wk.data(), seq, H, H);
        linalg::matmul_tn(c.x_in.data(), dv.data(), g.wv.data(), seq, H, H);
        add_col_sums(dq.data(), g.bq.data(), seq, H);
        add_col_sums(dkk.data(), g.bk.data(), seq, H);
        add_col_sums(dv.data(), g.bv.data(), seq, H);

        dx = dr1; // residual path
        linalg::matmul_nt(dq.data(), t.wq.data(), dx.data(), seq, H, H);
        linalg::matmul_nt(dkk.data(), t.wk.data(), dx.data(), seq, H, H);
        linalg::matmul_nt(dv.data(), t.wv.data(), dx.data(), seq, H, H);
    }

    // Embedding tables.
    const TensorInfo& tok = layout.find("token_embeddings");
    const TensorInfo& pos = layout.find("position_embeddings");
    for (std::size_t i = 0; i < seq; ++i)
        for (std::size_t j = 0; j < H; ++j) {
            grads[tok.offset + cache.ids[i] * H + j] += dx[i * H + j];
            grads[pos.offset + i * H + j] += dx[i * H + j];
        }
}

} // namespace

void EncoderConfig::validate() const {
    if (hidden == 0 || heads == 0 || layers == 0 || ffn_dim == 0)
        throw Error(ErrorCode::usage, "encoder geometry fields must be >= 1");
    if (hidden % heads != 0)
        throw Error(ErrorCode::usage, "hidden " + std::to_string(hidden) +
                                          " is not divisible by heads " + std::to_string(heads));
    if (max_len < 2) throw Error(ErrorCode::usage, "max_len must be >= 2");
    if (vocab_size < kReservedTokens)
        throw Error(ErrorCode::usage, "vocab_size must cover the reserved token ids");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw Error(ErrorCode::usage, "dropout_rate must be in [0, 1)");
}

EncoderLayout EncoderLayout::build(const EncoderConfig& config) {
    config.validate();
    EncoderLayout layout;
    auto add = [&layout](std::string name, std::vector<std::size_t> dims) {
        TensorInfo t;
        t.name = std::move(name);
        t.dims = std::move(dims);
        t.size = 1;
        for (std::size_t d : t.dims) t.size *= d;
        t.offset = layout.total;
        layout.total += t.size;
        layout.tensors.push_back(std::move(t));
    };

    const std::size_t H = config.hidden;
    const std::size_t F = config.ffn_dim;
    add("token_embeddings", {config.vocab_size, H});
    add("position_embeddings", {config.max_len, H});
    for (std::size_t l = 0; l < config.layers; ++l) {
        const std::string base = "layer" + std::to_string(l) + ".";
        add(base + "attn.wq", {H, H});
        add(base + "attn.bq", {H});
        add(base + "attn.wk", {H, H});
        add(base + "attn.bk", {H});
        add(base + "attn.wv", {H, H});
        add(base + "attn.bv", {H});
        add(base + "attn.wo", {H, H});
        add(base + "attn.bo", {H});
        add(base + "norm1.scale", {H});
        add(base + "norm1.offset", {H});
        add(base + "ffn.w1", {H, F});
        add(base + "ffn.b1", {F});
        add(base + "ffn.w2", {F, H});
        add(base + "ffn.b2", {H});
        add(base + "norm2.scale", {H});
        add(base + "norm2.offset", {H});
    }
    add("head.weight", {H});
    add("head.bias", {1});
    return layout;
}

const TensorInfo& EncoderLayout::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return t;
    throw Error(ErrorCode::usage, "unknown tensor '" + name + "'");
}

std::span<double> EncoderParams::tensor(const std::string& name) {
    const TensorInfo& t = layout.find(name);
    return {values.data() + t.offset, t.size};
}

std::span<const double> EncoderParams::tensor(const std::string& name) const {
    const TensorInfo& t = layout.find(name);
    return {values.data() + t.offset, t.size};
}

EncoderParams init_encoder(const EncoderConfig& config) {
    EncoderParams p;
    p.config = config;
    p.layout = EncoderLayout::build(config);
    p.values.assign(p.layout.total, 0.0);

    std::mt19937_64 rng(config.seed);
    for (const auto& t : p.layout.tensors) {
        double* dst = p.values.data() + t.offset;
        if (is_weight_tensor(t.name)) {
            for (std::size_t i = 0; i < t.size; ++i) dst[i] = 0.02 * normal01(rng);
        } else if (t.name.ends_with(".scale")) {
            std::fill(dst, dst + t.size, 1.0);
        }
        // biases and offsets stay zero
    }
    return p;
}

double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865476));
}

double gelu_derivative(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * 0.7071067811865476));
    const double pdf = 0.3989422804014327 * std::exp(-0.5 * x * x);
    return cdf + x * pdf;
}

void layer_norm(std::span<const double> x, std::span<const double> scale,
                std::span<const double> offset, std::span<double> out, double* x_hat) {
    if (x.size() != scale.size() || x.size() != offset.size() || x.size() != out.size())
        throw Error(ErrorCode::shape_mismatch, "layer_norm span sizes differ");
    if (x.empty()) throw Error(ErrorCode::empty_input, "layer_norm on empty span");
    ln_forward_pos(x.data(), scale.data(), offset.data(), out.data(), x_hat, nullptr, x.size());
}

void softmax_row(std::span<double> row) {
    if (row.empty()) throw Error(ErrorCode::empty_input, "softmax on empty row");
    double hi = kNegInf;
    for (double v : row) hi = std::max(hi, v);
    if (hi == kNegInf)
        throw Error(ErrorCode::non_finite_activation, "softmax row is entirely masked");
    double sum = 0.0;
    for (double& v : row) {
        v = v == kNegInf ? 0.0 : std::exp(v - hi);
        sum += v;
    }
    for (double& v : row) v /= sum;
}

std::vector<double> multi_head_attention(std::span<const double> x, std::size_t seq,
                                         const EncoderParams& params, std::size_t layer,
                                         const std::vector<bool>& mask, AttentionTrace* trace) {
    if (x.size() != seq * params.config.hidden)
        throw Error(ErrorCode::shape_mismatch, "input is not seq x hidden");
    if (mask.size() != seq)
        throw Error(ErrorCode::shape_mismatch, "mask length differs from seq");
    if (layer >= params.config.layers)
        throw Error(ErrorCode::usage, "layer index out of range");
    MhaCache cache;
    std::vector<double> out(seq * params.config.hidden);
    mha_forward(x.data(), seq, params, layer, mask, cache, out.data(), trace);
    return out;
}

EncoderOutput encoder_forward(const std::vector<std::size_t>& token_ids,
                              const EncoderParams& params, bool training,
                              std::mt19937_64* dropout_rng) {
    ForwardCache cache = forward_cached(token_ids, params, training, dropout_rng);
    EncoderOutput out;
    out.pooled = std::move(cache.pooled);
    out.logit = cache.logit;
    out.prob = cache.prob;
    return out;
}

double bce_loss(double prob, int target) {
    if (target != 0 && target != 1)
        throw Error(ErrorCode::non_binary_target, "target " + std::to_string(target));
    if (!std::isfinite(prob))
        throw Error(ErrorCode::non_finite_activation, "probability is not finite");
    const double p = std::clamp(prob, kBceClamp, 1.0 - kBceClamp);
    return target == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double encoder_batch(const std::vector<std::vector<std::size_t>>& batch_ids,
                     const std::vector<int>& targets, const EncoderParams& params,
                     std::vector<double>* grads, bool training, std::mt19937_64* dropout_rng) {
    if (batch_ids.size() != targets.size())
        throw Error(ErrorCode::length_mismatch,
                    std::to_string(batch_ids.size()) + " sequences vs " +
                        std::to_string(targets.size()) + " targets");
    if (batch_ids.empty()) throw Error(ErrorCode::empty_input, "empty batch");
    if (grads && grads->size() != params.layout.total)
        throw Error(ErrorCode::shape_mismatch, "gradient buffer size differs from layout");

    const double inv_b = 1.0 / static_cast<double>(batch_ids.size());
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < batch_ids.size(); ++s) {
        ForwardCache cache = forward_cached(batch_ids[s], params, training, dropout_rng);
        loss_sum += bce_loss(cache.prob, targets[s]);
        if (grads) {
            double dlogit = 0.0; // clamped probabilities contribute no gradient
            if (cache.prob > kBceClamp && cache.prob < 1.0 - kBceClamp)
                dlogit = cache.prob - static_cast<double>(targets[s]);
            backward_one(cache, params, dlogit * inv_b, *grads);
        }
    }
    const double loss = loss_sum * inv_b;
    if (!std::isfinite(loss))
        throw Error(ErrorCode::non_finite_activation, "batch loss is not finite");
    return loss;
}

EncoderVocab EncoderVocab::build(const std::vector<TokenSequence>& docs, std::size_t min_df) {
    EncoderVocab v;
    v.tokens = {"<cls>", "<pad>", "<unk>"};
    for (std::size_t i = 0; i < v.tokens.size(); ++i) v.token_to_id.emplace(v.tokens[i], i);

    Vocabulary base = build_vocab(docs, min_df);
    for (const auto& tok : base.tokens) {
        if (v.token_to_id.contains(tok)) continue; // reserved marker collision
        v.token_to_id.emplace(tok, v.tokens.size());
        v.tokens.push_back(tok);
    }
    return v;
}

std::vector<std::size_t> EncoderVocab::encode(const TokenSequence& doc,
                                              std::size_t max_len) const {
    if (max_len < 1) throw Error(ErrorCode::usage, "max_len must be >= 1");
    std::vector<std::size_t> ids;
    ids.reserve(std::min(doc.size() + 1, max_len));
    ids.push_back(kClsId);
    for (const auto& tok : doc) {
        if (ids.size() == max_len) break;
        auto it = token_to_id.find(tok);
        ids.push_back(it == token_to_id.end() ? kUnkId : it->second);
    }
    return ids;
}

FineTuneResult fine_tune(const std::vector<TweetRecord>& records, const FineTuneConfig& ft,
                         EncoderConfig config, const CleansingConfig& cleansing) {
    if (ft.batch_size == 0) throw Error(ErrorCode::usage, "batch_size must be >= 1");

    SplitSpec spec{ft.val_fraction, ft.split_seed, true};
    auto [train_recs, val_recs] = stratified_split(records, spec);
    if (train_recs.empty()) throw Error(ErrorCode::empty_corpus, "no training records");

    auto to_docs = [&cleansing](const std::vector<TweetRecord>& recs) {
        std::vector<TokenSequence> docs;
        docs.reserve(recs.size());
        for (const auto& r : recs) docs.push_back(tokenize(cleanse_text(r.text, cleansing)));
        return docs;
    };
    const auto train_docs = to_docs(train_recs);
    const auto val_docs = to_docs(val_recs);

    FineTuneResult result;
    result.vocab = EncoderVocab::build(train_docs, ft.vocab_min_df);
    config.vocab_size = result.vocab.size();
    config.dropout_rate = ft.dropout_rate;
    result.params = init_encoder(config);

    auto encode_all = [&](const std::vector<TokenSequence>& docs) {
        std::vector<std::vector<std::size_t>> out;
        out.reserve(docs.size());
        for (const auto& d : docs) out.push_back(result.vocab.encode(d, config.max_len));
        return out;
    };
    auto train_ids = encode_all(train_docs);
    auto val_ids = encode_all(val_docs);
    std::vector<int> train_y, val_y;
    for (const auto& r : train_recs) train_y.push_back(*r.target);
    for (const auto& r : val_recs) val_y.push_back(*r.target);

    OptimizerConfig opt = ft.optimizer;
    opt.learning_rate = ft.learning_rate;
    OptimizerState state;
    std::vector<double> grads(result.params.layout.total, 0.0);
    std::mt19937_64 shuffle_rng(ft.split_seed);
    std::mt19937_64 dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<std::size_t> order(train_ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < ft.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_weighted = 0.0;
        for (std::size_t start = 0; start < order.size(); start += ft.batch_size) {
            const std::size_t stop = std::min(order.size(), start + ft.batch_size);
            std::vector<std::vector<std::size_t>> batch;
            std::vector<int> batch_y;
            std::size_t batch_max = 0;
            for (std::size_t k = start; k < stop; ++k)
                batch_max = std::max(batch_max, train_ids[order[k]].size());
            for (std::size_t k = start; k < stop; ++k) {
                auto ids = train_ids[order[k]];
                ids.resize(batch_max, kPadId); // pad so the mask path is exercised
                batch.push_back(std::move(ids));
                batch_y.push_back(train_y[order[k]]);
            }
            std::fill(grads.begin(), grads.end(), 0.0);
            const double loss =
                encoder_batch(batch, batch_y, result.params, &grads, true, &dropout_rng);
            loss_weighted += loss * static_cast<double>(stop - start);
            opt_step(result.params.values, grads, state, opt);
        }

        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.train_loss = train_ids.empty()
                               ? 0.0
                               : loss_weighted / static_cast<double>(train_ids.size());
        if (!val_ids.empty()) {
            std::vector<int> preds;
            preds.reserve(val_ids.size());
            for (const auto& ids : val_ids) {
                EncoderOutput out = encoder_forward(ids, result.params, false, nullptr);
                preds.push_back(out.prob >= 0.5 ? 1 : 0);
            }
            stats.val_f1 = metrics(confusion(preds, val_y)).f1;
        }
        result.history.push_back(stats);
    }
    return result;
}

} // namespace dtwc
