#include "taxdiff/denoiser.hpp"

#include <cmath>
#include <numbers>

#include "taxdiff/errors.hpp"

namespace taxdiff {

bool method_uses_global(char m) { return m == 'A' || m == 'B' || m == 'C' || m == 'D'; }
bool method_uses_local(char m) { return m == 'A' || m == 'B' || m == 'C' || m == 'E'; }

int method_sublayers(char m) {
    switch (m) {
        case 'A': return 1;
        case 'B':
        case 'C': return 3;
        case 'D':
        case 'E': return 2;
        default: throw UnknownMethod(std::string("unknown method '") + m + "'");
    }
}

namespace {

std::vector<SubKind> sublayer_plan(char m) {
    switch (m) {
        case 'A': return {SubKind::CompositeA};
        case 'B': return {SubKind::Global, SubKind::Local, SubKind::FfStd};
        case 'C': return {SubKind::Local, SubKind::Global, SubKind::FfStd};
        case 'D': return {SubKind::Global, SubKind::FfStd};
        case 'E': return {SubKind::Local, SubKind::FfStd};
        default: throw UnknownMethod(std::string("unknown method '") + m + "'");
    }
}

constexpr double kLnEps = 1e-6;

Matrix softmax_rows(const Matrix& scores) {
    Matrix out(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double m = scores.row(i).maxCoeff();
        out.row(i) = (scores.row(i).array() - m).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

// dS = A ⊙ (dA - rowsum(dA ⊙ A))
Matrix softmax_bw(const Matrix& a, const Matrix& da) {
    const Vector rs = da.cwiseProduct(a).rowwise().sum();
    return a.cwiseProduct(da.colwise() - rs);
}

}  // namespace

void DenoiserConfig::validate() const {
    auto fail = [](const std::string& msg) { throw InvalidConfig(msg); };
    if (L < 1) fail("L must be >= 1");
    if (D_in < 1) fail("D_in must be >= 1");
    if (W < 2) fail("width must be >= 2");
    if (H < 1) fail("head count must be >= 1");
    if (W % H != 0) fail("head count must divide width");
    if (P < 1) fail("patch size must be >= 1");
    if (L % P != 0) fail("patch size must divide sequence length");
    if (N < 1) fail("block count must be >= 1");
    if (!method_uses_global(method) && !method_uses_local(method))
        throw UnknownMethod(std::string("unknown method '") + method + "'");
    if (num_classes < 1) fail("need at least one class");
    if (T < 1) fail("timestep range must be >= 1");
}

// --- primitives ---

Matrix linear_fw(const Matrix& x, const LinearParams& p) {
    if (x.cols() != p.w.rows()) throw ShapeMismatch("linear: input width mismatch");
    return (x * p.w).rowwise() + p.b.row(0);
}

Matrix linear_bw(const Matrix& x, const LinearParams& p, const Matrix& dy, LinearParams& g) {
    g.w += x.transpose() * dy;
    g.b += dy.colwise().sum();
    return dy * p.w.transpose();
}

Matrix gelu(const Matrix& x) {
    return x.unaryExpr(
        [](double v) { return 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2)); });
}

Matrix gelu_bw(const Matrix& x, const Matrix& dy) {
    const Matrix d = x.unaryExpr([](double v) {
        const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
        const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
        return cdf + v * pdf;
    });
    return dy.cwiseProduct(d);
}

Matrix layernorm_fw(const Matrix& x, Vector& istd) {
    const Eigen::Index n = x.cols();
    istd.resize(x.rows());
    Matrix y(x.rows(), n);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double mu = x.row(i).mean();
        const auto centered = x.row(i).array() - mu;
        const double var = centered.square().sum() / static_cast<double>(n);
        istd(i) = 1.0 / std::sqrt(var + kLnEps);
        y.row(i) = centered * istd(i);
    }
    return y;
}

Matrix layernorm_bw(const Matrix& y, const Vector& istd, const Matrix& dy) {
    Matrix dx(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const double m1 = dy.row(i).mean();
        const double m2 = dy.row(i).cwiseProduct(y.row(i)).mean();
        dx.row(i) = istd(i) * (dy.row(i).array() - m1 - y.row(i).array() * m2);
    }
    return dx;
}

// --- embeddings ---

namespace {

// interleaved sin/cos of v at geometrically spaced frequencies; odd dim leaves
// the last channel zero
Matrix sincos_features(double v, int dim) {
    const int half = dim / 2;
    Matrix out = Matrix::Zero(1, dim);
    for (int k = 0; k < half; ++k) {
        const double omega = std::pow(10000.0, -static_cast<double>(k) / half);
        out(0, 2 * k) = std::sin(v * omega);
        out(0, 2 * k + 1) = std::cos(v * omega);
    }
    return out;
}

}  // namespace

Matrix timestep_features(int t, int dim) { return sincos_features(static_cast<double>(t), dim); }

Matrix position_table(int L, int dim) {
    Matrix out(L, dim);
    for (int pos = 0; pos < L; ++pos) out.row(pos) = sincos_features(static_cast<double>(pos), dim);
    return out;
}

Matrix embed_timestep(int t, const DenoiserParams& p) {
    if (t < 1 || t > p.cfg.T) throw TimestepOutOfRange("timestep " + std::to_string(t));
    const Matrix feat = timestep_features(t, p.cfg.W);
    return linear_fw(gelu(linear_fw(feat, p.t_mlp1)), p.t_mlp2);
}

Matrix embed_label(const TaxLabel& y, const Matrix& table) {
    if (y.class_id < 0 || y.class_id >= table.rows())
        throw LabelOutOfRange("class id " + std::to_string(y.class_id) + " outside table of " +
                              std::to_string(table.rows()) + " rows");
    return table.row(y.class_id);
}

// --- attention ---

std::vector<int> local_patch_sizes(int S, int P, int n_cond) {
    if (P < 1) throw PatchSizeMismatch("patch size must be >= 1");
    if (n_cond < 0 || n_cond > S) throw PatchSizeMismatch("conditional token count out of range");
    const int seq = S - n_cond;
    if (seq % P != 0)
        throw PatchSizeMismatch("sequence token count " + std::to_string(seq) +
                                " not divisible by patch size " + std::to_string(P));
    std::vector<int> sizes;
    if (n_cond > 0) sizes.push_back(n_cond);
    for (int j = 0; j < seq / P; ++j) sizes.push_back(P);
    return sizes;
}

namespace {

Matrix global_attention_fw(const Matrix& x, const GlobalAttentionParams& p, int H,
                           GlobalTrace& tr) {
    const Eigen::Index W = x.cols();
    if (p.wq.rows() != W || p.wk.rows() != W || p.wv.rows() != W || p.wo.rows() != W ||
        p.wq.cols() != W || p.wk.cols() != W || p.wv.cols() != W || p.wo.cols() != W)
        throw ShapeMismatch("global attention weights must be width x width");
    if (H < 1 || W % H != 0) throw ShapeMismatch("head count must divide width");
    const Eigen::Index dk = W / H;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    tr.q = x * p.wq;
    tr.k = x * p.wk;
    tr.v = x * p.wv;
    tr.attn.assign(static_cast<std::size_t>(H), Matrix());
    tr.concat.resize(x.rows(), W);
    for (int h = 0; h < H; ++h) {
        const auto Q = tr.q.middleCols(h * dk, dk);
        const auto K = tr.k.middleCols(h * dk, dk);
        const auto V = tr.v.middleCols(h * dk, dk);
        tr.attn[static_cast<std::size_t>(h)] = softmax_rows(Q * K.transpose() * scale);
        tr.concat.middleCols(h * dk, dk) = tr.attn[static_cast<std::size_t>(h)] * V;
    }
    return tr.concat * p.wo;
}

Matrix global_attention_bw(const Matrix& x, const GlobalAttentionParams& p, int H,
                           const GlobalTrace& tr, const Matrix& dout,
                           GlobalAttentionParams& g) {
    const Eigen::Index W = x.cols();
    const Eigen::Index dk = W / H;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    g.wo += tr.concat.transpose() * dout;
    const Matrix dconcat = dout * p.wo.transpose();
    Matrix dq(x.rows(), W), dk_(x.rows(), W), dv(x.rows(), W);
    for (int h = 0; h < H; ++h) {
        const auto A = tr.attn[static_cast<std::size_t>(h)];
        const auto Q = tr.q.middleCols(h * dk, dk);
        const auto K = tr.k.middleCols(h * dk, dk);
        const auto V = tr.v.middleCols(h * dk, dk);
        const Matrix dO = dconcat.middleCols(h * dk, dk);
        dv.middleCols(h * dk, dk) = A.transpose() * dO;
        const Matrix dS = softmax_bw(A, dO * V.transpose());
        dq.middleCols(h * dk, dk) = dS * K * scale;
        dk_.middleCols(h * dk, dk) = dS.transpose() * Q * scale;
    }
    g.wq += x.transpose() * dq;
    g.wk += x.transpose() * dk_;
    g.wv += x.transpose() * dv;
    return dq * p.wq.transpose() + dk_ * p.wk.transpose() + dv * p.wv.transpose();
}

// When the weight list carries one more triple than the input has patches
// (model parameters always include the conditional-patch triple at index 0,
// but patchify_block may run on sequence-only inputs), the leading triple
// stays idle and sequence patch j uses triple j + 1.
std::size_t local_weight_offset(std::size_t triples, std::size_t patches, int n_cond) {
    if (triples == patches) return 0;
    if (n_cond == 0 && triples == patches + 1) return 1;
    throw PatchSizeMismatch("have weights for " + std::to_string(triples) +
                            " patches, need " + std::to_string(patches));
}

Matrix local_attention_fw(const Matrix& x, const LocalAttentionParams& p, int P, int n_cond,
                          LocalTrace& tr) {
    const auto sizes = local_patch_sizes(static_cast<int>(x.rows()), P, n_cond);
    if (p.wq.size() != p.wk.size() || p.wq.size() != p.wv.size())
        throw ShapeMismatch("local attention q/k/v weight counts differ");
    const std::size_t woff = local_weight_offset(p.wq.size(), sizes.size(), n_cond);
    const Eigen::Index W = x.cols();
    const double scale = 1.0 / std::sqrt(static_cast<double>(W));
    const std::size_t n = sizes.size();
    tr.q.assign(n, Matrix());
    tr.k.assign(n, Matrix());
    tr.v.assign(n, Matrix());
    tr.attn.assign(n, Matrix());
    Matrix out(x.rows(), W);
    Eigen::Index off = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t w = j + woff;
        if (p.wq[w].rows() != W || p.wq[w].cols() != W || p.wk[w].rows() != W ||
            p.wk[w].cols() != W || p.wv[w].rows() != W || p.wv[w].cols() != W)
            throw ShapeMismatch("local attention weights must be width x width");
        const auto xj = x.middleRows(off, sizes[j]);
        tr.q[j] = xj * p.wq[w];
        tr.k[j] = xj * p.wk[w];
        tr.v[j] = xj * p.wv[w];
        tr.attn[j] = softmax_rows(tr.q[j] * tr.k[j].transpose() * scale);
        out.middleRows(off, sizes[j]) = tr.attn[j] * tr.v[j];
        off += sizes[j];
    }
    return out;
}

Matrix local_attention_bw(const Matrix& x, const LocalAttentionParams& p, int P, int n_cond,
                          const LocalTrace& tr, const Matrix& dout, LocalAttentionParams& g) {
    const auto sizes = local_patch_sizes(static_cast<int>(x.rows()), P, n_cond);
    const std::size_t woff = local_weight_offset(p.wq.size(), sizes.size(), n_cond);
    const Eigen::Index W = x.cols();
    const double scale = 1.0 / std::sqrt(static_cast<double>(W));
    if (g.wq.size() != p.wq.size()) {  // gradient buffers mirror the params
        g.wq.assign(p.wq.size(), Matrix::Zero(W, W));
        g.wk.assign(p.wq.size(), Matrix::Zero(W, W));
        g.wv.assign(p.wq.size(), Matrix::Zero(W, W));
    }
    Matrix dx(x.rows(), W);
    Eigen::Index off = 0;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        const std::size_t w = j + woff;
        const auto xj = x.middleRows(off, sizes[j]);
        const auto dj = dout.middleRows(off, sizes[j]);
        const Matrix dv = tr.attn[j].transpose() * dj;
        const Matrix dS = softmax_bw(tr.attn[j], dj * tr.v[j].transpose());
        const Matrix dq = dS * tr.k[j] * scale;
        const Matrix dk = dS.transpose() * tr.q[j] * scale;
        g.wq[w] += xj.transpose() * dq;
        g.wk[w] += xj.transpose() * dk;
        g.wv[w] += xj.transpose() * dv;
        dx.middleRows(off, sizes[j]) =
            dq * p.wq[w].transpose() + dk * p.wk[w].transpose() + dv * p.wv[w].transpose();
        off += sizes[j];
    }
    return dx;
}

Matrix block_fw(const Matrix& x_in, const Matrix& g, const BlockParams& p,
                const DenoiserConfig& cfg, int n_cond, BlockTrace& tr) {
    const Eigen::Index W = cfg.W;
    const Eigen::Index S = x_in.rows();
    const auto plan = sublayer_plan(cfg.method);
    tr.mods = linear_fw(g, p.mod);
    if (tr.mods.cols() != 3 * W * static_cast<Eigen::Index>(plan.size()))
        throw ShapeMismatch("modulation output width mismatch");
    tr.subs.assign(plan.size(), SubTrace{});
    Matrix x = x_in;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        SubTrace& st = tr.subs[i];
        st.kind = plan[i];
        const Eigen::Index base = 3 * W * static_cast<Eigen::Index>(i);
        const auto gamma = tr.mods.middleCols(base, W);
        const auto beta = tr.mods.middleCols(base + W, W);
        const auto alpha = tr.mods.middleCols(base + 2 * W, W);
        st.ln_y = layernorm_fw(x, st.istd);
        st.h = st.ln_y.cwiseProduct((gamma.array() + 1.0).matrix().replicate(S, 1)) +
               beta.replicate(S, 1);
        switch (st.kind) {
            case SubKind::Global:
                st.u = global_attention_fw(st.h, p.global, cfg.H, st.g);
                break;
            case SubKind::Local:
                st.u = local_attention_fw(st.h, p.local, cfg.P, n_cond, st.l);
                break;
            case SubKind::FfStd:
                st.ff_in = st.h;
                st.ff_pre = linear_fw(st.ff_in, p.ff1);
                st.ff_act = gelu(st.ff_pre);
                st.u = linear_fw(st.ff_act, p.ff2);
                break;
            case SubKind::CompositeA: {
                const Matrix go = global_attention_fw(st.h, p.global, cfg.H, st.g);
                const Matrix lo = local_attention_fw(st.h, p.local, cfg.P, n_cond, st.l);
                st.ff_in.resize(S, 2 * W);
                st.ff_in << go, lo;
                st.ff_pre = linear_fw(st.ff_in, p.ff1);
                st.ff_act = gelu(st.ff_pre);
                st.u = linear_fw(st.ff_act, p.ff2);
                break;
            }
        }
        x += st.u.cwiseProduct(alpha.replicate(S, 1));
    }
    return x;
}

// returns d x_in; accumulates into pg and dg (grad wrt gelu(cond))
Matrix block_bw(const Matrix& dx_out, const Matrix& g, const BlockParams& p,
                const DenoiserConfig& cfg, int n_cond, const BlockTrace& tr, BlockParams& pg,
                Matrix& dg) {
    const Eigen::Index W = cfg.W;
    const Eigen::Index S = dx_out.rows();
    Matrix dx = dx_out;
    Matrix dmods = Matrix::Zero(1, tr.mods.cols());
    for (std::size_t idx = tr.subs.size(); idx-- > 0;) {
        const SubTrace& st = tr.subs[idx];
        const Eigen::Index base = 3 * W * static_cast<Eigen::Index>(idx);
        const auto gamma = tr.mods.middleCols(base, W);
        const auto alpha = tr.mods.middleCols(base + 2 * W, W);
        // x_out = x_in + alpha ⊙ u
        const Matrix du = dx.cwiseProduct(alpha.replicate(S, 1));
        dmods.middleCols(base + 2 * W, W) += dx.cwiseProduct(st.u).colwise().sum();
        Matrix dh;
        switch (st.kind) {
            case SubKind::Global:
                dh = global_attention_bw(st.h, p.global, cfg.H, st.g, du, pg.global);
                break;
            case SubKind::Local:
                dh = local_attention_bw(st.h, p.local, cfg.P, n_cond, st.l, du, pg.local);
                break;
            case SubKind::FfStd: {
                const Matrix dff_act = linear_bw(st.ff_act, p.ff2, du, pg.ff2);
                const Matrix dff_pre = gelu_bw(st.ff_pre, dff_act);
                dh = linear_bw(st.ff_in, p.ff1, dff_pre, pg.ff1);
                break;
            }
            case SubKind::CompositeA: {
                const Matrix dff_act = linear_bw(st.ff_act, p.ff2, du, pg.ff2);
                const Matrix dff_pre = gelu_bw(st.ff_pre, dff_act);
                const Matrix dff_in = linear_bw(st.ff_in, p.ff1, dff_pre, pg.ff1);
                dh = global_attention_bw(st.h, p.global, cfg.H, st.g, dff_in.leftCols(W),
                                         pg.global) +
                     local_attention_bw(st.h, p.local, cfg.P, n_cond, st.l, dff_in.rightCols(W),
                                        pg.local);
                break;
            }
        }
        // h = ln_y ⊙ (1 + gamma) + beta
        dmods.middleCols(base, W) += dh.cwiseProduct(st.ln_y).colwise().sum();
        dmods.middleCols(base + W, W) += dh.colwise().sum();
        const Matrix dln_y = dh.cwiseProduct((gamma.array() + 1.0).matrix().replicate(S, 1));
        dx += layernorm_bw(st.ln_y, st.istd, dln_y);
    }
    pg.mod.w += g.transpose() * dmods;
    pg.mod.b += dmods;
    dg += dmods * p.mod.w.transpose();
    return dx;
}

}  // namespace

Matrix global_attention(const Matrix& x, const GlobalAttentionParams& p, int H) {
    GlobalTrace tr;
    return global_attention_fw(x, p, H, tr);
}

Matrix local_attention(const Matrix& x, const LocalAttentionParams& p, int P, int n_cond) {
    LocalTrace tr;
    return local_attention_fw(x, p, P, n_cond, tr);
}

Matrix patchify_block(const Matrix& x, const Matrix& cond, const BlockParams& p,
                      const DenoiserConfig& cfg) {
    int n_cond = 0;
    if (x.rows() == cfg.L + 2)
        n_cond = 2;
    else if (x.rows() != cfg.L)
        throw ShapeMismatch("block input must have L or L+2 rows");
    BlockTrace tr;
    return block_fw(x, gelu(cond), p, cfg, n_cond, tr);
}

// --- parameter container ---

DenoiserParams DenoiserParams::shaped(const DenoiserConfig& cfg) {
    cfg.validate();
    DenoiserParams p;
    p.cfg = cfg;
    const int W = cfg.W;
    auto zlin = [](int in, int out) {
        return LinearParams{Matrix::Zero(in, out), Matrix::Zero(1, out)};
    };
    p.input_proj = zlin(cfg.D_in, W);
    p.t_mlp1 = zlin(W, W);
    p.t_mlp2 = zlin(W, W);
    p.label_table = Matrix::Zero(cfg.num_classes + 1, W);
    p.blocks.resize(static_cast<std::size_t>(cfg.N));
    for (auto& b : p.blocks) {
        b.mod = zlin(W, 3 * W * method_sublayers(cfg.method));
        if (method_uses_global(cfg.method))
            b.global = {Matrix::Zero(W, W), Matrix::Zero(W, W), Matrix::Zero(W, W),
                        Matrix::Zero(W, W)};
        if (method_uses_local(cfg.method)) {
            b.local.wq.assign(static_cast<std::size_t>(cfg.local_patches()), Matrix::Zero(W, W));
            b.local.wk = b.local.wq;
            b.local.wv = b.local.wq;
        }
        if (cfg.method == 'A') {
            b.ff1 = zlin(2 * W, W);
            b.ff2 = zlin(W, W);
        } else {
            b.ff1 = zlin(W, 4 * W);
            b.ff2 = zlin(4 * W, W);
        }
    }
    p.final_mod = zlin(W, 2 * W);
    p.head = zlin(W, 2 * cfg.D_in);
    p.pos = position_table(cfg.L, W);
    return p;
}

DenoiserParams DenoiserParams::init(const DenoiserConfig& cfg, Rng& rng) {
    DenoiserParams p = shaped(cfg);
    const int W = cfg.W;
    const double aw = 1.0 / std::sqrt(static_cast<double>(W));
    auto fill = [&rng](Matrix& m, double limit) {
        m = rng.uniform_matrix(m.rows(), m.cols(), limit);
    };
    auto fill_lin = [&](LinearParams& lp) { fill(lp.w, 1.0 / std::sqrt(double(lp.w.rows()))); };
    fill_lin(p.input_proj);
    fill_lin(p.t_mlp1);
    fill_lin(p.t_mlp2);
    fill(p.label_table, aw);
    for (auto& b : p.blocks) {
        // modulation stays zero: gates closed, blocks start as the identity
        if (method_uses_global(cfg.method)) {
            fill(b.global.wq, aw);
            fill(b.global.wk, aw);
            fill(b.global.wv, aw);
            fill(b.global.wo, aw);
        }
        for (std::size_t j = 0; j < b.local.wq.size(); ++j) {
            fill(b.local.wq[j], aw);
            fill(b.local.wk[j], aw);
            fill(b.local.wv[j], aw);
        }
        fill_lin(b.ff1);
        fill_lin(b.ff2);
    }
    // final modulation and head stay zero: the model predicts 0 at init
    return p;
}

DenoiserParams DenoiserParams::zeros_like(const DenoiserParams& other) {
    DenoiserParams p = other;
    for (Matrix* m : p.param_list()) m->setZero();
    return p;
}

std::vector<std::pair<std::string, Matrix*>> DenoiserParams::named_params() {
    std::vector<std::pair<std::string, Matrix*>> out;
    auto add = [&out](const std::string& name, LinearParams& lp) {
        out.emplace_back(name + ".w", &lp.w);
        out.emplace_back(name + ".b", &lp.b);
    };
    add("input_proj", input_proj);
    add("t_mlp1", t_mlp1);
    add("t_mlp2", t_mlp2);
    out.emplace_back("label_table", &label_table);
    for (std::size_t n = 0; n < blocks.size(); ++n) {
        const std::string pre = "block." + std::to_string(n) + ".";
        BlockParams& b = blocks[n];
        add(pre + "mod", b.mod);
        if (method_uses_global(cfg.method)) {
            out.emplace_back(pre + "global.wq", &b.global.wq);
            out.emplace_back(pre + "global.wk", &b.global.wk);
            out.emplace_back(pre + "global.wv", &b.global.wv);
            out.emplace_back(pre + "global.wo", &b.global.wo);
        }
        for (std::size_t j = 0; j < b.local.wq.size(); ++j) {
            const std::string lp = pre + "local." + std::to_string(j) + ".";
            out.emplace_back(lp + "wq", &b.local.wq[j]);
            out.emplace_back(lp + "wk", &b.local.wk[j]);
            out.emplace_back(lp + "wv", &b.local.wv[j]);
        }
        add(pre + "ff1", b.ff1);
        add(pre + "ff2", b.ff2);
    }
    add("final_mod", final_mod);
    add("head", head);
    return out;
}

std::vector<Matrix*> DenoiserParams::param_list() {
    std::vector<Matrix*> out;
    for (auto& [name, m] : named_params()) out.push_back(m);
    return out;
}

std::vector<const Matrix*> DenoiserParams::param_list() const {
    auto list = const_cast<DenoiserParams*>(this)->param_list();
    return {list.begin(), list.end()};
}

std::size_t DenoiserParams::num_scalars() const {
    std::size_t n = 0;
    for (const Matrix* m : param_list()) n += static_cast<std::size_t>(m->size());
    return n;
}

void DenoiserParams::randomize(Rng& rng, double amplitude) {
    for (Matrix* m : param_list()) {
        const double a = amplitude / std::sqrt(static_cast<double>(m->rows()));
        *m = rng.uniform_matrix(m->rows(), m->cols(), a);
    }
}

// --- model forward/backward ---

DenoiserOutput forward_traced(const Matrix& x_t, int t, const TaxLabel& y,
                              const DenoiserParams& p, DenoiserTrace& trace) {
    const DenoiserConfig& cfg = p.cfg;
    if (x_t.rows() != cfg.L || x_t.cols() != cfg.D_in)
        throw ShapeMismatch("input must be L x D_in");
    if (t < 1 || t > cfg.T) throw TimestepOutOfRange("timestep " + std::to_string(t));
    if (y.num_classes != cfg.num_classes)
        throw LabelOutOfRange("label class count " + std::to_string(y.num_classes) +
                              " does not match model (" + std::to_string(cfg.num_classes) + ")");

    trace.t = t;
    trace.y = y;
    trace.x_t = x_t;
    trace.feat = timestep_features(t, cfg.W);
    trace.t_pre = linear_fw(trace.feat, p.t_mlp1);
    trace.t_act = gelu(trace.t_pre);
    trace.t_emb = linear_fw(trace.t_act, p.t_mlp2);
    trace.y_emb = embed_label(y, p.label_table);
    trace.c = trace.t_emb + trace.y_emb;
    trace.g = gelu(trace.c);

    Matrix x(cfg.L + 2, cfg.W);
    x.row(0) = trace.t_emb;
    x.row(1) = trace.y_emb;
    x.bottomRows(cfg.L) = linear_fw(x_t, p.input_proj) + p.pos;
    trace.blocks.assign(static_cast<std::size_t>(cfg.N), BlockTrace{});
    for (int n = 0; n < cfg.N; ++n)
        x = block_fw(x, trace.g, p.blocks[static_cast<std::size_t>(n)], cfg, 2,
                     trace.blocks[static_cast<std::size_t>(n)]);

    // conditional tokens are excised before the head
    const Matrix xs = x.bottomRows(cfg.L);
    trace.fin_ln_y = layernorm_fw(xs, trace.fin_istd);
    const Matrix fmods = linear_fw(trace.g, p.final_mod);
    const auto gamma = fmods.leftCols(cfg.W);
    const auto beta = fmods.rightCols(cfg.W);
    trace.fin_h = trace.fin_ln_y.cwiseProduct((gamma.array() + 1.0).matrix().replicate(cfg.L, 1)) +
                  beta.replicate(cfg.L, 1);
    const Matrix ho = linear_fw(trace.fin_h, p.head);
    trace.out.eps_pred = ho.leftCols(cfg.D_in);
    trace.out.v_raw = ho.rightCols(cfg.D_in);
    trace.recorded = true;
    return trace.out;
}

DenoiserOutput forward(const Matrix& x_t, int t, const TaxLabel& y, const DenoiserParams& p) {
    DenoiserTrace trace;
    return forward_traced(x_t, t, y, p, trace);
}

void backward(const DenoiserParams& p, const DenoiserTrace& trace, const Matrix& d_eps,
              const Matrix& d_v_raw, DenoiserParams& grads, Matrix* d_x_t) {
    if (!trace.recorded) throw GraphNotRecorded("backward without a recorded forward");
    const DenoiserConfig& cfg = p.cfg;
    if (d_eps.rows() != cfg.L || d_eps.cols() != cfg.D_in || !same_shape(d_eps, d_v_raw))
        throw ShapeMismatch("output gradients must be L x D_in");

    Matrix dho(cfg.L, 2 * cfg.D_in);
    dho << d_eps, d_v_raw;
    Matrix dfin_h = linear_bw(trace.fin_h, p.head, dho, grads.head);

    const Matrix fmods = linear_fw(trace.g, p.final_mod);
    const auto gamma = fmods.leftCols(cfg.W);
    Matrix dfmods(1, 2 * cfg.W);
    dfmods.leftCols(cfg.W) = dfin_h.cwiseProduct(trace.fin_ln_y).colwise().sum();
    dfmods.rightCols(cfg.W) = dfin_h.colwise().sum();
    grads.final_mod.w += trace.g.transpose() * dfmods;
    grads.final_mod.b += dfmods;
    Matrix dg = dfmods * p.final_mod.w.transpose();

    const Matrix dln = dfin_h.cwiseProduct((gamma.array() + 1.0).matrix().replicate(cfg.L, 1));
    Matrix dx = Matrix::Zero(cfg.L + 2, cfg.W);
    dx.bottomRows(cfg.L) = layernorm_bw(trace.fin_ln_y, trace.fin_istd, dln);

    for (int n = cfg.N; n-- > 0;)
        dx = block_bw(dx, trace.g, p.blocks[static_cast<std::size_t>(n)], cfg, 2,
                      trace.blocks[static_cast<std::size_t>(n)],
                      grads.blocks[static_cast<std::size_t>(n)], dg);

    Matrix d_t_emb = dx.row(0);
    Matrix d_y_emb = dx.row(1);
    const Matrix d_input = linear_bw(trace.x_t, p.input_proj, dx.bottomRows(cfg.L),
                                     grads.input_proj);
    if (d_x_t) *d_x_t = d_input;

    const Matrix dc = gelu_bw(trace.c, dg);
    d_t_emb += dc;
    d_y_emb += dc;
    grads.label_table.row(trace.y.class_id) += d_y_emb.row(0);
    const Matrix d_t_act = linear_bw(trace.t_act, p.t_mlp2, d_t_emb, grads.t_mlp2);
    const Matrix d_t_pre = gelu_bw(trace.t_pre, d_t_act);
    linear_bw(trace.feat, p.t_mlp1, d_t_pre, grads.t_mlp1);
}

}  // namespace taxdiff
