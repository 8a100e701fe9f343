#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "taxdiff/codec.hpp"
#include "taxdiff/dataset.hpp"
#include "taxdiff/denoiser.hpp"
#include "taxdiff/diffusion.hpp"
#include "taxdiff/errors.hpp"
#include "taxdiff/fasta.hpp"
#include "taxdiff/sampler.hpp"
#include "taxdiff/schedule.hpp"
#include "taxdiff/taxonomy.hpp"
#include "taxdiff/training.hpp"

namespace py = pybind11;
using namespace taxdiff;

namespace {

// None -> null label, int -> class label, both validated against num_classes
TaxLabel as_label(const py::object& class_id, std::int32_t num_classes) {
    if (class_id.is_none()) return TaxLabel::null(num_classes);
    return TaxLabel::of(class_id.cast<std::int32_t>(), num_classes);
}

ReverseParams as_reverse(const Matrix& mean, const Matrix& var) {
    ReverseParams r;
    r.mean = mean;
    r.var = var;
    return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Taxonomic-conditional protein sequence diffusion (C++ core)";
    m.attr("__version__") = "0.1.0";
    m.attr("ALPHABET") =
        std::string(alphabet::kTokens.data(), static_cast<std::size_t>(alphabet::kNumResidues));

    // --- codec ---
    m.def(
        "encode",
        [](const std::string& seq, int L, double amplitude, bool center) {
            Matrix x = encode(ProteinSequence::from_string(seq), L, amplitude);
            if (center) center_encoding(x, amplitude);
            return x;
        },
        py::arg("seq"), py::arg("L") = 256, py::arg("amplitude") = 1.0, py::arg("center") = false,
        "One-hot lift of a residue string into the [L, 22] diffusion space.");
    m.def(
        "decode", [](const Matrix& x0) { return decode(x0).to_string(); }, py::arg("x0"),
        "Row-wise argmax back to a residue string, truncated at the first stop/pad row.");

    // --- schedule ---
    py::class_<NoiseSchedule>(m, "Schedule")
        .def_static(
            "build",
            [](int T, const std::string& kind, double beta_start, double beta_end) {
                return NoiseSchedule::build(T, schedule_kind_from_string(kind), beta_start,
                                            beta_end);
            },
            py::arg("T"), py::arg("kind") = "linear", py::arg("beta_start") = 1e-4,
            py::arg("beta_end") = 0.02)
        .def_property_readonly("T", &NoiseSchedule::T)
        .def_property_readonly("kind",
                               [](const NoiseSchedule& s) { return to_string(s.kind()); })
        .def("beta", &NoiseSchedule::beta, py::arg("t"))
        .def("alpha", &NoiseSchedule::alpha, py::arg("t"))
        .def("alpha_bar", &NoiseSchedule::alpha_bar, py::arg("t"))
        .def("posterior_variance", &NoiseSchedule::posterior_variance, py::arg("t"))
        .def("betas", &NoiseSchedule::betas)
        .def("well_mixed", &NoiseSchedule::well_mixed)
        .def("__repr__", [](const NoiseSchedule& s) {
            return "Schedule(T=" + std::to_string(s.T()) + ", kind=" + to_string(s.kind()) + ")";
        });

    // --- diffusion algebra ---
    m.def("q_sample", &q_sample, py::arg("x0"), py::arg("t"), py::arg("eps"), py::arg("sched"),
          "x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps");
    m.def(
        "posterior_mean_variance",
        [](const Matrix& x0, const Matrix& x_t, int t, const NoiseSchedule& s) {
            const ReverseParams r = posterior_mean_variance(x0, x_t, t, s);
            return py::make_tuple(r.mean, r.var);
        },
        py::arg("x0"), py::arg("x_t"), py::arg("t"), py::arg("sched"),
        "Closed-form q(x_{t-1} | x_t, x0) as (mean, var).");
    m.def(
        "p_mean_variance",
        [](const Matrix& eps_pred, const Matrix& v_raw, const Matrix& x_t, int t,
           const NoiseSchedule& s) {
            const ReverseParams r = p_mean_variance(eps_pred, v_raw, x_t, t, s);
            return py::make_tuple(r.mean, r.var);
        },
        py::arg("eps_pred"), py::arg("v_raw"), py::arg("x_t"), py::arg("t"), py::arg("sched"),
        "Reverse Gaussian from a noise prediction and learned-variance channel.");
    m.def("predict_x0_from_eps", &predict_x0_from_eps, py::arg("x_t"), py::arg("t"),
          py::arg("eps_pred"), py::arg("sched"));
    m.def("guided_epsilon", &guided_epsilon, py::arg("eps_cond"), py::arg("eps_uncond"),
          py::arg("scale"), "eps_uncond + scale * (eps_cond - eps_uncond)");
    m.def("kl_gaussian_diag", &kl_gaussian_diag, py::arg("mean1"), py::arg("var1"),
          py::arg("mean2"), py::arg("var2"));
    m.def("loss_mse", &loss_mse, py::arg("eps_pred"), py::arg("eps"));
    m.def(
        "loss_vlb",
        [](const Matrix& x0, const Matrix& x_t, int t, const Matrix& mean, const Matrix& var,
           const NoiseSchedule& s) { return loss_vlb(x0, x_t, t, as_reverse(mean, var), s); },
        py::arg("x0"), py::arg("x_t"), py::arg("t"), py::arg("mean"), py::arg("var"),
        py::arg("sched"));

    // --- model ---
    py::class_<DenoiserConfig>(m, "ModelConfig")
        .def(py::init([](int L, int D_in, int W, int H, int P, int N, const std::string& method,
                         int num_classes, int T) {
                 DenoiserConfig c;
                 c.L = L;
                 c.D_in = D_in;
                 c.W = W;
                 c.H = H;
                 c.P = P;
                 c.N = N;
                 if (method.size() != 1) throw UnknownMethod("method must be one letter A-E");
                 c.method = method[0];
                 c.num_classes = num_classes;
                 c.T = T;
                 c.validate();
                 return c;
             }),
             py::arg("L") = 64, py::arg("D_in") = 22, py::arg("W") = 64, py::arg("H") = 4,
             py::arg("P") = 8, py::arg("N") = 3, py::arg("method") = "A",
             py::arg("num_classes") = 1, py::arg("T") = 50)
        .def_readwrite("L", &DenoiserConfig::L)
        .def_readwrite("D_in", &DenoiserConfig::D_in)
        .def_readwrite("W", &DenoiserConfig::W)
        .def_readwrite("H", &DenoiserConfig::H)
        .def_readwrite("P", &DenoiserConfig::P)
        .def_readwrite("N", &DenoiserConfig::N)
        .def_property(
            "method", [](const DenoiserConfig& c) { return std::string(1, c.method); },
            [](DenoiserConfig& c, const std::string& v) {
                if (v.size() != 1) throw UnknownMethod("method must be one letter A-E");
                c.method = v[0];
            })
        .def_readwrite("num_classes", &DenoiserConfig::num_classes)
        .def_readwrite("T", &DenoiserConfig::T)
        .def("validate", &DenoiserConfig::validate)
        .def("__repr__", [](const DenoiserConfig& c) {
            return "ModelConfig(L=" + std::to_string(c.L) + ", W=" + std::to_string(c.W) +
                   ", N=" + std::to_string(c.N) + ", method=" + std::string(1, c.method) + ")";
        });

    py::class_<DenoiserParams>(m, "ModelParams")
        .def_property_readonly("config",
                               [](const DenoiserParams& p) -> const DenoiserConfig& {
                                   return p.cfg;
                               })
        .def_property_readonly("num_scalars", &DenoiserParams::num_scalars)
        .def("empty", &DenoiserParams::empty);

    m.def(
        "forward",
        [](const Matrix& x_t, int t, const py::object& class_id, const DenoiserParams& p) {
            const DenoiserOutput out = forward(x_t, t, as_label(class_id, p.cfg.num_classes), p);
            return py::make_tuple(out.eps_pred, out.v_raw);
        },
        py::arg("x_t"), py::arg("t"), py::arg("class_id"), py::arg("params"),
        "Denoiser pass: (eps_pred, v_raw); class_id None means unconditional.");

    // --- training ---
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("weight_decay", &TrainConfig::weight_decay)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("ema_decay", &TrainConfig::ema_decay)
        .def_readwrite("label_dropout_p", &TrainConfig::label_dropout_p)
        .def_readwrite("steps", &TrainConfig::steps)
        .def_readwrite("lambda_vlb", &TrainConfig::lambda_vlb)
        .def_readwrite("grad_clip", &TrainConfig::grad_clip)
        .def("validate", &TrainConfig::validate);

    py::class_<TrainingState>(m, "TrainingState")
        .def_static("init", &TrainingState::init, py::arg("config"), py::arg("seed"))
        .def_readonly("step", &TrainingState::step)
        .def_property_readonly("params",
                               [](const TrainingState& s) -> const DenoiserParams& {
                                   return s.params;
                               })
        .def_property_readonly(
            "ema", [](const TrainingState& s) -> const DenoiserParams& { return s.ema; });

    m.def(
        "train",
        [](TrainingState& state, const NoiseSchedule& sched, const TrainConfig& cfg,
           const std::vector<Matrix>& x0s, const std::vector<py::object>& class_ids) {
            if (x0s.size() != class_ids.size())
                throw ShapeMismatch("x0s and class_ids must be the same length");
            std::vector<TrainExample> data;
            data.reserve(x0s.size());
            for (std::size_t i = 0; i < x0s.size(); ++i)
                data.push_back({x0s[i], as_label(class_ids[i], state.params.cfg.num_classes)});
            std::vector<py::dict> metrics;
            run_training(state, sched, cfg, data,
                         [&](long step, const StepMetrics& sm, double wall_ms) {
                             py::dict d;
                             d["step"] = step;
                             d["mse"] = sm.mse;
                             d["vlb"] = sm.vlb;
                             d["total"] = sm.total;
                             d["wall_ms"] = wall_ms;
                             metrics.push_back(std::move(d));
                         });
            return metrics;
        },
        py::arg("state"), py::arg("sched"), py::arg("config"), py::arg("x0s"),
        py::arg("class_ids"),
        "Run config.steps optimization steps over the encoded examples; returns per-step "
        "metrics dicts.");

    // --- sampling ---
    m.def(
        "sample",
        [](const DenoiserParams& params, const NoiseSchedule& sched, const py::object& class_id,
           double scale, int n, std::uint64_t seed) {
            GuidanceConfig g;
            g.scale = scale;
            Rng rng(seed);
            return sample_loop(params, sched, g, as_label(class_id, params.cfg.num_classes), rng,
                               n);
        },
        py::arg("params"), py::arg("sched"), py::arg("class_id") = py::none(),
        py::arg("scale") = 1.0, py::arg("n") = 1, py::arg("seed") = 0,
        "Ancestral sampling; returns n [L, 22] matrices. class_id None samples "
        "unconditionally.");

    // --- checkpointing ---
    m.def(
        "save_checkpoint",
        [](const TrainingState& state, const NoiseSchedule& sched, const std::string& path) {
            save_checkpoint(state, sched, path);
        },
        py::arg("state"), py::arg("sched"), py::arg("path"));
    m.def(
        "load_checkpoint",
        [](const std::string& path) {
            Checkpoint cp = load_checkpoint(path);
            return py::make_tuple(std::move(cp.state), std::move(cp.sched));
        },
        py::arg("path"), "Returns (TrainingState, Schedule).");

    // --- fasta ---
    m.def(
        "read_fasta",
        [](const std::string& path) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const FastaRecord& r : parse_fasta_file(path))
                out.emplace_back(r.id, r.seq.to_string());
            return out;
        },
        py::arg("path"), "List of (header, sequence) pairs.");
    m.def(
        "write_fasta",
        [](const std::string& path, const std::vector<std::pair<std::string, std::string>>& recs) {
            std::vector<FastaRecord> rs;
            rs.reserve(recs.size());
            for (const auto& [id, seq] : recs)
                rs.push_back({id, ProteinSequence::from_string(seq)});
            write_fasta_file(path, rs);
        },
        py::arg("path"), py::arg("records"));

    // --- taxonomy ---
    m.def(
        "reclassify_taxdump",
        [](const std::string& nodes_path, const std::string& names_path, int layer) {
            const TaxonomyTree tree = parse_taxdump_files(nodes_path, names_path);
            const Reclassification rc = reclassify(tree, layer);
            py::dict class_of;
            for (const auto& [tax, cls] : rc.class_of) class_of[py::int_(tax)] = cls;
            py::list reps;
            for (std::int64_t id : rc.representatives) {
                reps.append(py::make_tuple(id, tree.node(id).name));
            }
            return py::make_tuple(class_of, rc.num_classes(), reps);
        },
        py::arg("nodes_path"), py::arg("names_path"), py::arg("layer") = 9,
        "Collapse lineages at `layer`; returns (tax_id -> class dict, num_classes, "
        "[(representative_id, name)]).");

    // --- toy corpus ---
    m.def(
        "toy_corpus",
        [](int per_class, std::uint64_t seed, int classes) {
            const ToyCorpus toy = make_toy_corpus(per_class, seed, classes);
            std::vector<py::tuple> records;
            records.reserve(toy.data.records.size());
            for (std::size_t i = 0; i < toy.data.records.size(); ++i)
                records.push_back(py::make_tuple(toy.data.records[i].id,
                                                 toy.data.records[i].seq.to_string(),
                                                 toy.data.class_ids[i]));
            return py::make_tuple(records, toy.motifs);
        },
        py::arg("per_class") = 100, py::arg("seed") = 0, py::arg("classes") = 3,
        "Synthetic motif-marked corpus; returns ([(id, seq, class)], motifs).");
}
