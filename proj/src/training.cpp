#include "taxdiff/training.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "taxdiff/errors.hpp"
#include <nlohmann/json.hpp>

namespace taxdiff {

using json = nlohmann::json;

void TrainConfig::validate() const {
    auto fail = [](const std::string& m) { throw InvalidConfig(m); };
    if (learning_rate < 0.0) fail("learning rate must be >= 0");
    if (weight_decay < 0.0) fail("weight decay must be >= 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        fail("adam betas must lie in [0, 1)");
    if (batch_size < 1) fail("batch size must be >= 1");
    if (ema_decay <= 0.0 || ema_decay >= 1.0) fail("ema decay must lie in (0, 1)");
    if (label_dropout_p < 0.0 || label_dropout_p > 1.0) fail("dropout probability outside [0, 1]");
    if (steps < 0) fail("step count must be >= 0");
    if (lambda_vlb < 0.0) fail("vlb weight must be >= 0");
    if (grad_clip < 0.0) fail("gradient clip must be >= 0");
}

TrainingState TrainingState::init(const DenoiserConfig& cfg, std::uint64_t seed) {
    TrainingState s;
    s.rng = Rng(seed);
    s.params = DenoiserParams::init(cfg, s.rng);
    s.ema = s.params;
    s.adam_m = DenoiserParams::zeros_like(s.params);
    s.adam_v = DenoiserParams::zeros_like(s.params);
    return s;
}

std::vector<TaxLabel> dropout_labels(const std::vector<TaxLabel>& labels, double p, Rng& rng) {
    std::vector<TaxLabel> out = labels;
    for (auto& y : out)
        if (rng.uniform() < p) y = TaxLabel::null(y.num_classes);
    return out;
}

void ema_update(DenoiserParams& ema, const DenoiserParams& params, double d) {
    auto dst = ema.param_list();
    auto src = params.param_list();
    if (dst.size() != src.size()) throw ShapeMismatch("ema: parameter count mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (!same_shape(*dst[i], *src[i])) throw ShapeMismatch("ema: parameter shape mismatch");
        *dst[i] = d * *dst[i] + (1.0 - d) * *src[i];
    }
}

StepMetrics train_step(const std::vector<TrainExample>& batch, TrainingState& state,
                       const NoiseSchedule& sched, const TrainConfig& cfg) {
    if (batch.empty()) throw EmptyBatch("train_step needs at least one example");
    const DenoiserConfig& mcfg = state.params.cfg;
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    std::vector<TaxLabel> labels(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) labels[i] = batch[i].y;
    labels = dropout_labels(labels, cfg.label_dropout_p, state.rng);

    std::vector<int> ts(batch.size());
    std::vector<Matrix> epss(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        ts[i] = 1 + static_cast<int>(state.rng.uniform_int(static_cast<std::uint64_t>(sched.T())));
        epss[i] = state.rng.normal_matrix(mcfg.L, mcfg.D_in);
    }

    DenoiserParams grads = DenoiserParams::zeros_like(state.params);
    StepMetrics metrics;
    const double norm = static_cast<double>(mcfg.L) * mcfg.D_in;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Matrix& x0 = batch[i].x0;
        const int t = ts[i];
        const Matrix x_t = q_sample(x0, t, epss[i], sched);
        DenoiserTrace trace;
        const DenoiserOutput out = forward_traced(x_t, t, labels[i], state.params, trace);

        const double mse_i = loss_mse(out.eps_pred, epss[i]);
        const ReverseParams rev = p_mean_variance(out.eps_pred, out.v_raw, x_t, t, sched);
        const double vlb_i = loss_vlb(x0, x_t, t, rev, sched);
        if (!std::isfinite(mse_i))
            throw NonFiniteLoss("mse not finite at step " + std::to_string(state.step + 1));
        if (!std::isfinite(vlb_i))
            throw NonFiniteLoss("vlb not finite at step " + std::to_string(state.step + 1));
        metrics.mse += mse_i * inv_b;
        metrics.vlb += vlb_i * inv_b;

        const Matrix d_eps = (2.0 * inv_b / norm) * (out.eps_pred - epss[i]);
        // variance channel: log var = v log(beta) + (1-v) log(beta~); the mean
        // branch is frozen inside the vlb term
        const Matrix d_logvar = (cfg.lambda_vlb * inv_b) *
                                loss_vlb_grad_logvar(x0, x_t, t, rev, sched);
        const double span = std::log(sched.beta(t)) - sched.log_posterior_variance_clipped(t);
        const Matrix interior =
            ((out.v_raw.array() > -1.0) && (out.v_raw.array() < 1.0)).cast<double>().matrix();
        const Matrix d_v_raw = 0.5 * span * d_logvar.cwiseProduct(interior);
        backward(state.params, trace, d_eps, d_v_raw, grads);
    }
    metrics.total = metrics.mse + cfg.lambda_vlb * metrics.vlb;

    if (cfg.grad_clip > 0.0) {
        double sq = 0.0;
        for (const Matrix* g : static_cast<const DenoiserParams&>(grads).param_list())
            sq += g->squaredNorm();
        const double gn = std::sqrt(sq);
        if (gn > cfg.grad_clip) {
            const double sc = cfg.grad_clip / gn;
            for (Matrix* g : grads.param_list()) *g *= sc;
        }
    }

    const long k = state.step + 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(k));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(k));
    auto ps = state.params.param_list();
    auto gs = grads.param_list();
    auto ms = state.adam_m.param_list();
    auto vs = state.adam_v.param_list();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        Matrix& p = *ps[i];
        const Matrix& g = *gs[i];
        Matrix& m = *ms[i];
        Matrix& v = *vs[i];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        const auto m_hat = m.array() / bc1;
        const auto v_hat = v.array() / bc2;
        p.array() -= cfg.learning_rate *
                     (m_hat / (v_hat.sqrt() + cfg.adam_eps) + cfg.weight_decay * p.array());
    }
    ema_update(state.ema, state.params, cfg.ema_decay);
    state.step = k;
    return metrics;
}

void run_training(TrainingState& state, const NoiseSchedule& sched, const TrainConfig& cfg,
                  const std::vector<TrainExample>& data, const MetricsHook& hook) {
    cfg.validate();
    if (data.empty()) throw EmptyBatch("training needs a non-empty dataset");
    const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                 data.size());
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t pos = data.size();  // forces a shuffle before the first batch
    std::vector<TrainExample> batch;
    for (long s = 0; s < cfg.steps; ++s) {
        if (pos + bs > data.size()) {
            state.rng.shuffle(order);
            pos = 0;
        }
        batch.clear();
        for (std::size_t i = 0; i < bs; ++i) batch.push_back(data[order[pos + i]]);
        pos += bs;
        const auto t0 = std::chrono::steady_clock::now();
        const StepMetrics m = train_step(batch, state, sched, cfg);
        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        if (hook) hook(state.step, m, wall_ms);
    }
}

// --- checkpointing ---
//
// Layout: magic, u32 format version, u64 JSON header length, JSON header,
// then raw 64-bit float blocks in exactly the order listed in the header.

namespace {

constexpr char kMagic[] = "taxdiffckpt";
constexpr std::uint32_t kFormatVersion = 1;

json config_to_json(const DenoiserConfig& c) {
    return json{{"L", c.L},           {"D_in", c.D_in},
                {"W", c.W},           {"H", c.H},
                {"P", c.P},           {"N", c.N},
                {"method", std::string(1, c.method)},
                {"num_classes", c.num_classes},
                {"T", c.T}};
}

DenoiserConfig config_from_json(const json& j) {
    DenoiserConfig c;
    c.L = j.at("L").get<int>();
    c.D_in = j.at("D_in").get<int>();
    c.W = j.at("W").get<int>();
    c.H = j.at("H").get<int>();
    c.P = j.at("P").get<int>();
    c.N = j.at("N").get<int>();
    const std::string m = j.at("method").get<std::string>();
    if (m.size() != 1) throw CorruptCheckpoint("bad method field");
    c.method = m[0];
    c.num_classes = j.at("num_classes").get<int>();
    c.T = j.at("T").get<int>();
    return c;
}

void write_block(std::ostream& os, const Matrix& m) {
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
}

void read_block(std::istream& is, Matrix& m) {
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
    if (!is) throw CorruptCheckpoint("truncated parameter data");
}

}  // namespace

void save_checkpoint(const TrainingState& state, const NoiseSchedule& sched,
                     const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoFailure("cannot open '" + path + "' for writing");

    auto& mutable_state = const_cast<TrainingState&>(state);
    json blocks = json::array();
    for (auto& [name, m] : mutable_state.params.named_params())
        blocks.push_back(json{{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});

    json header{{"config", config_to_json(state.params.cfg)},
                {"schedule",
                 {{"kind", to_string(sched.kind())},
                  {"T", sched.T()},
                  {"beta_start", sched.beta_start()},
                  {"beta_end", sched.beta_end()}}},
                {"step", state.step},
                {"rng", state.rng.serialize()},
                {"blocks", blocks}};
    const std::string hs = header.dump();

    os.write(kMagic, sizeof(kMagic) - 1);
    const std::uint32_t ver = kFormatVersion;
    os.write(reinterpret_cast<const char*>(&ver), sizeof(ver));
    const std::uint64_t hlen = hs.size();
    os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));

    // schedule betas, then param/ema/adam blocks in header order
    for (double b : sched.betas()) os.write(reinterpret_cast<const char*>(&b), sizeof(b));
    for (const Matrix* m : state.params.param_list()) write_block(os, *m);
    for (const Matrix* m : state.ema.param_list()) write_block(os, *m);
    for (const Matrix* m : state.adam_m.param_list()) write_block(os, *m);
    for (const Matrix* m : state.adam_v.param_list()) write_block(os, *m);
    if (!os) throw IoFailure("write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoFailure("cannot open '" + path + "' for reading");

    char magic[sizeof(kMagic) - 1];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw CorruptCheckpoint("'" + path + "' is not a checkpoint");
    std::uint32_t ver = 0;
    is.read(reinterpret_cast<char*>(&ver), sizeof(ver));
    if (!is) throw CorruptCheckpoint("truncated version field");
    if (ver != kFormatVersion)
        throw VersionMismatch("checkpoint format " + std::to_string(ver) + ", supported " +
                              std::to_string(kFormatVersion));
    std::uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!is) throw CorruptCheckpoint("truncated header length");
    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!is) throw CorruptCheckpoint("truncated header");

    json header;
    try {
        header = json::parse(hs);
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("bad header: ") + e.what());
    }

    Checkpoint out;
    DenoiserConfig cfg;
    try {
        cfg = config_from_json(header.at("config"));
        out.state.step = header.at("step").get<long>();
        out.state.rng = Rng::deserialize(header.at("rng").get<std::string>());

        const json& js = header.at("schedule");
        const int T = js.at("T").get<int>();
        std::vector<double> betas(static_cast<std::size_t>(T));
        for (double& b : betas) {
            is.read(reinterpret_cast<char*>(&b), sizeof(b));
            if (!is) throw CorruptCheckpoint("truncated schedule data");
        }
        out.sched = NoiseSchedule::from_betas(std::move(betas),
                                              schedule_kind_from_string(
                                                  js.at("kind").get<std::string>()),
                                              js.at("beta_start").get<double>(),
                                              js.at("beta_end").get<double>());
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("bad header: ") + e.what());
    }

    out.state.params = DenoiserParams::shaped(cfg);
    out.state.ema = DenoiserParams::shaped(cfg);
    out.state.adam_m = DenoiserParams::shaped(cfg);
    out.state.adam_v = DenoiserParams::shaped(cfg);

    // validate the header's block table against the shapes implied by config
    auto named = out.state.params.named_params();
    const json& blocks = header.at("blocks");
    if (blocks.size() != named.size()) throw CorruptCheckpoint("parameter block count mismatch");
    for (std::size_t i = 0; i < named.size(); ++i) {
        const json& b = blocks.at(i);
        if (b.at("name").get<std::string>() != named[i].first ||
            b.at("rows").get<Eigen::Index>() != named[i].second->rows() ||
            b.at("cols").get<Eigen::Index>() != named[i].second->cols())
            throw CorruptCheckpoint("parameter block table mismatch at '" + named[i].first + "'");
    }

    for (Matrix* m : out.state.params.param_list()) read_block(is, *m);
    for (Matrix* m : out.state.ema.param_list()) read_block(is, *m);
    for (Matrix* m : out.state.adam_m.param_list()) read_block(is, *m);
    for (Matrix* m : out.state.adam_v.param_list()) read_block(is, *m);
    return out;
}

}  // namespace taxdiff
