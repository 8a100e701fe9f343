#ifndef TAXDIFF_DENOISER_HPP
#define TAXDIFF_DENOISER_HPP

#include <string>
#include <utility>
#include <vector>

#include "taxdiff/rng.hpp"
#include "taxdiff/taxonomy.hpp"
#include "taxdiff/tensor.hpp"

namespace taxdiff {

// Attention wiring inside a patchify block:
//   A: global and local in parallel on one normalized input, channel-concat,
//      fused by a pointwise feedforward (one composite sub-layer)
//   B: global, then local, then feedforward (three sub-layers)
//   C: local, then global, then feedforward
//   D: global + feedforward
//   E: local + feedforward
bool method_uses_global(char m);
bool method_uses_local(char m);
int method_sublayers(char m);

struct DenoiserConfig {
    int L = 256;        // sequence token count
    int D_in = 22;      // input/output channels per token
    int W = 384;        // hidden width
    int H = 6;          // global attention heads
    int P = 16;         // tokens per local-attention patch
    int N = 12;         // patchify block count
    char method = 'A';
    int num_classes = 1;  // C; the label table carries C+1 rows (row C = null)
    int T = 1000;         // timestep range for the embedding

    void validate() const;
    int seq_patches() const { return L / P; }
    // local attention patches incl. the 2-token conditional patch at index 0
    int local_patches() const { return seq_patches() + 1; }
};

// y = x w + b with w: [in, out], b: [1, out] broadcast over rows
struct LinearParams {
    Matrix w, b;
};

// Heads are column slices of width W/H; wo recombines the concatenation.
struct GlobalAttentionParams {
    Matrix wq, wk, wv, wo;  // [W, W]
};

// One single-head weight triple per patch.
struct LocalAttentionParams {
    std::vector<Matrix> wq, wk, wv;  // each [W, W]
};

struct BlockParams {
    LinearParams mod;  // gelu(cond) -> 3*W*sublayers of (gamma, beta, alpha)
    GlobalAttentionParams global;  // present per method
    LocalAttentionParams local;    // present per method
    LinearParams ff1, ff2;         // A: 2W->W, W->W; B..E: W->4W, 4W->W
};

struct DenoiserParams {
    DenoiserConfig cfg;
    LinearParams input_proj;     // D_in -> W
    LinearParams t_mlp1, t_mlp2; // W -> W each, on sinusoidal features
    Matrix label_table;          // [C+1, W]
    std::vector<BlockParams> blocks;
    LinearParams final_mod;  // gelu(cond) -> 2W of (gamma, beta)
    LinearParams head;       // W -> 2*D_in
    Matrix pos;              // [L, W] fixed sin-cos table (not a parameter)

    // fan-in-scaled uniform init; modulation and head weights start at zero
    static DenoiserParams init(const DenoiserConfig& cfg, Rng& rng);
    // all-zero parameters of the right shapes (checkpoint loading, grads)
    static DenoiserParams shaped(const DenoiserConfig& cfg);
    static DenoiserParams zeros_like(const DenoiserParams& other);

    bool empty() const { return head.w.size() == 0; }
    std::vector<Matrix*> param_list();
    std::vector<const Matrix*> param_list() const;
    std::vector<std::pair<std::string, Matrix*>> named_params();
    std::size_t num_scalars() const;
    // overwrite every parameter (incl. zero-initialized ones) with small
    // uniform draws; used by gradient checks
    void randomize(Rng& rng, double amplitude = 0.2);
};

struct DenoiserOutput {
    Matrix eps_pred;  // [L, D_in]
    Matrix v_raw;     // [L, D_in]
};

// --- embedding pieces ---

// interleaved sin/cos features: feat[2k] = sin(t w_k), feat[2k+1] = cos(t w_k),
// w_k = 10000^(-k/(dim/2)); odd dim zero-pads the last channel
Matrix timestep_features(int t, int dim);   // [1, dim]
Matrix position_table(int L, int dim);      // [L, dim], same formula over positions 0..L-1
Matrix embed_timestep(int t, const DenoiserParams& p);        // [1, W]
Matrix embed_label(const TaxLabel& y, const Matrix& table);   // [1, W]

// --- attention (pure forms, used directly by tests) ---

Matrix global_attention(const Matrix& x, const GlobalAttentionParams& p, int H);
// first n_cond tokens form their own patch; the rest split into P-sized
// patches. With n_cond = 0 a weight list one triple longer than the patch
// count leaves its leading (conditional-patch) triple idle.
Matrix local_attention(const Matrix& x, const LocalAttentionParams& p, int P, int n_cond = 0);
std::vector<int> local_patch_sizes(int S, int P, int n_cond);

// --- block and model (pure forms) ---

Matrix patchify_block(const Matrix& x, const Matrix& cond, const BlockParams& p,
                      const DenoiserConfig& cfg);
DenoiserOutput forward(const Matrix& x_t, int t, const TaxLabel& y, const DenoiserParams& p);

// --- recorded forward + exact reverse-mode gradients ---

struct GlobalTrace {
    Matrix q, k, v, concat;
    std::vector<Matrix> attn;  // per head [S, S]
};

struct LocalTrace {
    std::vector<Matrix> q, k, v, attn;  // per patch
};

enum class SubKind { Global, Local, FfStd, CompositeA };

struct SubTrace {
    SubKind kind;
    Matrix ln_y;   // normalized input
    Vector istd;   // per-row inverse std
    Matrix h;      // modulated normalized input (sub-op input)
    Matrix u;      // sub-op output (pre-gate)
    GlobalTrace g;
    LocalTrace l;
    Matrix ff_in, ff_pre, ff_act;
};

struct BlockTrace {
    Matrix mods;  // [1, 3*W*sublayers]
    std::vector<SubTrace> subs;
};

struct DenoiserTrace {
    int t = 0;
    TaxLabel y;
    Matrix x_t;
    Matrix feat, t_pre, t_act, t_emb, y_emb, c, g;  // g = gelu(c)
    std::vector<BlockTrace> blocks;
    Matrix fin_ln_y;
    Vector fin_istd;
    Matrix fin_h;  // head input
    DenoiserOutput out;
    bool recorded = false;
};

DenoiserOutput forward_traced(const Matrix& x_t, int t, const TaxLabel& y,
                              const DenoiserParams& p, DenoiserTrace& trace);

// Accumulates into grads (a zeros_like-shaped DenoiserParams); optionally
// returns d loss / d x_t.
void backward(const DenoiserParams& p, const DenoiserTrace& trace, const Matrix& d_eps,
              const Matrix& d_v_raw, DenoiserParams& grads, Matrix* d_x_t = nullptr);

// --- shared primitives (exposed for reuse in tests) ---

Matrix linear_fw(const Matrix& x, const LinearParams& p);
Matrix linear_bw(const Matrix& x, const LinearParams& p, const Matrix& dy, LinearParams& g);
Matrix gelu(const Matrix& x);
Matrix gelu_bw(const Matrix& x, const Matrix& dy);
Matrix layernorm_fw(const Matrix& x, Vector& istd);
Matrix layernorm_bw(const Matrix& y, const Vector& istd, const Matrix& dy);

}  // namespace taxdiff

#endif
