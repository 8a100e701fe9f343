// Command-line entry points: taxonomy building, dataset preparation, toy
// corpus generation, training, guided sampling, sequence evaluation, the
// patchify ablation sweep, and the finite-difference self-check.
//
// Exit codes: 0 success, 2 input error, 3 numeric failure, 4 compatibility
// mismatch, 5 self-check failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "taxdiff/codec.hpp"
#include "taxdiff/dataset.hpp"
#include "taxdiff/denoiser.hpp"
#include "taxdiff/diffusion.hpp"
#include "taxdiff/errors.hpp"
#include "taxdiff/evalseq.hpp"
#include "taxdiff/fasta.hpp"
#include "taxdiff/gradcheck.hpp"
#include "taxdiff/manifest.hpp"
#include "taxdiff/sampler.hpp"
#include "taxdiff/schedule.hpp"
#include "taxdiff/taxonomy.hpp"
#include "taxdiff/training.hpp"

namespace {

using json = nlohmann::json;
using namespace taxdiff;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCompat = 4;
constexpr int kExitSelfCheck = 5;

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("TAXDIFF_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

void write_manifest(const std::string& path, const std::string& command, std::uint64_t seed,
                    const json& config, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& artifacts) {
    json digests = json::object();
    for (const std::string& in : inputs) digests[in] = file_digest(in);
    const json m{{"tool_version", kToolVersion}, {"command", command},   {"seed", seed},
                 {"config", config},             {"inputs", digests},    {"artifacts", artifacts}};
    write_text_file(path, m.dump(2) + "\n");
}

// --- train/sample configuration ---

struct RunConfig {
    DenoiserConfig model;
    ScheduleKind sched_kind = ScheduleKind::Linear;
    double beta_start = 1e-4, beta_end = 0.02;
    TrainConfig train;
    double amplitude = 1.0;
    bool center = true;
};

RunConfig load_run_config(const std::string& path) {
    RunConfig rc;
    rc.model.T = 0;  // filled from schedule below unless given explicitly
    if (path.empty()) {
        rc.model.T = 1000;
        return rc;
    }
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw InvalidConfig("config '" + path + "': " + e.what());
    }
    try {
        if (j.contains("model")) {
            const json& m = j["model"];
            if (m.contains("L")) rc.model.L = m["L"].get<int>();
            if (m.contains("D_in")) rc.model.D_in = m["D_in"].get<int>();
            if (m.contains("W")) rc.model.W = m["W"].get<int>();
            if (m.contains("H")) rc.model.H = m["H"].get<int>();
            if (m.contains("P")) rc.model.P = m["P"].get<int>();
            if (m.contains("N")) rc.model.N = m["N"].get<int>();
            if (m.contains("method")) {
                const std::string s = m["method"].get<std::string>();
                if (s.size() != 1) throw InvalidConfig("method must be a single letter A-E");
                rc.model.method = s[0];
            }
            if (m.contains("T")) rc.model.T = m["T"].get<int>();
        }
        if (j.contains("schedule")) {
            const json& s = j["schedule"];
            if (s.contains("kind"))
                rc.sched_kind = schedule_kind_from_string(s["kind"].get<std::string>());
            if (s.contains("T") && rc.model.T == 0) rc.model.T = s["T"].get<int>();
            if (s.contains("beta_start")) rc.beta_start = s["beta_start"].get<double>();
            if (s.contains("beta_end")) rc.beta_end = s["beta_end"].get<double>();
        }
        if (j.contains("train")) {
            const json& t = j["train"];
            if (t.contains("learning_rate")) rc.train.learning_rate = t["learning_rate"].get<double>();
            if (t.contains("weight_decay")) rc.train.weight_decay = t["weight_decay"].get<double>();
            if (t.contains("batch_size")) rc.train.batch_size = t["batch_size"].get<int>();
            if (t.contains("ema_decay")) rc.train.ema_decay = t["ema_decay"].get<double>();
            if (t.contains("label_dropout_p"))
                rc.train.label_dropout_p = t["label_dropout_p"].get<double>();
            if (t.contains("steps")) rc.train.steps = t["steps"].get<long>();
            if (t.contains("lambda_vlb")) rc.train.lambda_vlb = t["lambda_vlb"].get<double>();
            if (t.contains("grad_clip")) rc.train.grad_clip = t["grad_clip"].get<double>();
        }
        if (j.contains("encode")) {
            const json& e = j["encode"];
            if (e.contains("amplitude")) rc.amplitude = e["amplitude"].get<double>();
            if (e.contains("center")) rc.center = e["center"].get<bool>();
        }
    } catch (const json::exception& e) {
        throw InvalidConfig("config '" + path + "': " + e.what());
    }
    if (rc.model.T == 0) rc.model.T = 1000;
    return rc;
}

json run_config_to_json(const RunConfig& rc) {
    return json{
        {"model",
         {{"L", rc.model.L},
          {"D_in", rc.model.D_in},
          {"W", rc.model.W},
          {"H", rc.model.H},
          {"P", rc.model.P},
          {"N", rc.model.N},
          {"method", std::string(1, rc.model.method)},
          {"num_classes", rc.model.num_classes},
          {"T", rc.model.T}}},
        {"schedule",
         {{"kind", to_string(rc.sched_kind)},
          {"T", rc.model.T},
          {"beta_start", rc.beta_start},
          {"beta_end", rc.beta_end}}},
        {"train",
         {{"learning_rate", rc.train.learning_rate},
          {"weight_decay", rc.train.weight_decay},
          {"batch_size", rc.train.batch_size},
          {"ema_decay", rc.train.ema_decay},
          {"label_dropout_p", rc.train.label_dropout_p},
          {"steps", rc.train.steps},
          {"lambda_vlb", rc.train.lambda_vlb},
          {"grad_clip", rc.train.grad_clip},
          {"seed", rc.train.seed}}},
        {"encode", {{"amplitude", rc.amplitude}, {"center", rc.center}}}};
}

// --- subcommand bodies (throw on failure; main maps to exit codes) ---

int cmd_taxonomy_build(const std::string& nodes, const std::string& names, int layer,
                       const std::string& out) {
    const TaxonomyTree tree = parse_taxdump_files(nodes, names);
    const Reclassification rc = reclassify(tree, layer);
    write_taxmap(out, rc, layer);
    const std::string registry = out + ".classes.tsv";
    write_class_registry(registry, rc, tree);
    write_manifest(out + ".manifest.json", "taxonomy-build", 0,
                   json{{"layer", layer}}, {nodes, names}, {out, registry});
    std::cout << "nodes=" << tree.size() << " classes=" << rc.num_classes()
              << " layer=" << layer << "\n";
    return kExitOk;
}

int cmd_dataset_prepare(const std::string& fasta, const std::string& taxmap_path,
                        const std::string& labels_path, int max_len, const std::string& out) {
    const LenientFasta lf = parse_fasta_lenient(read_text_file(fasta));
    const auto rec_labels = read_record_labels(labels_path);
    const TaxMap tm = read_taxmap(taxmap_path);

    std::unordered_map<std::int64_t, std::int32_t> class_of(tm.class_of.begin(),
                                                            tm.class_of.end());
    PrepareCounts counts;
    const PreparedDataset ds = prepare_dataset(lf.records, rec_labels, class_of,
                                               tm.num_classes, max_len, counts);
    counts.dropped_invalid = lf.rejected.size();
    save_dataset(ds, out);
    write_manifest(out + ".manifest.json", "dataset-prepare", 0,
                   json{{"max_len", max_len}}, {fasta, taxmap_path, labels_path},
                   {out + ".fasta", out + ".labels.tsv", out + ".meta.json"});
    std::cout << "kept=" << counts.kept << " dropped_too_long=" << counts.dropped_too_long
              << " dropped_unlabeled=" << counts.dropped_unlabeled
              << " dropped_invalid=" << counts.dropped_invalid << "\n";
    return kExitOk;
}

int cmd_toy_data(const std::string& out, int per_class, std::uint64_t seed) {
    const ToyCorpus toy = make_toy_corpus(per_class, seed);
    save_dataset(toy.data, out);
    MotifSpec spec;
    for (std::size_t c = 0; c < toy.motifs.size(); ++c)
        spec.motif_of[static_cast<std::int32_t>(c)] = toy.motifs[c];
    write_motif_spec(spec, out + ".motifs.tsv");
    write_manifest(out + ".manifest.json", "toy-data", seed, json{{"per_class", per_class}}, {},
                   {out + ".fasta", out + ".labels.tsv", out + ".meta.json",
                    out + ".motifs.tsv"});
    std::cout << "sequences=" << toy.data.records.size()
              << " classes=" << toy.data.num_classes << "\n";
    return kExitOk;
}

int cmd_train(const std::string& dataset, const std::string& config_path, const std::string& out,
              std::optional<long> steps, std::optional<std::uint64_t> seed_flag,
              long checkpoint_every) {
    RunConfig rc = load_run_config(config_path);
    if (steps) rc.train.steps = *steps;
    rc.train.seed = resolve_seed(seed_flag);

    const PreparedDataset ds = load_dataset(dataset);
    rc.model.num_classes = ds.num_classes;
    rc.model.validate();
    rc.train.validate();
    const auto examples = to_examples(ds, rc.model.L, rc.amplitude, rc.center);

    const NoiseSchedule sched =
        NoiseSchedule::build(rc.model.T, rc.sched_kind, rc.beta_start, rc.beta_end);
    TrainingState state = TrainingState::init(rc.model, rc.train.seed);

    const std::string metrics_path = out + ".metrics.jsonl";
    std::ofstream metrics(metrics_path);
    if (!metrics) throw IoFailure("cannot write '" + metrics_path + "'");
    metrics.precision(17);
    const auto hook = [&](long step, const StepMetrics& m, double wall_ms) {
        metrics << "{\"step\":" << step << ",\"mse\":" << m.mse << ",\"vlb\":" << m.vlb
                << ",\"total\":" << m.total << ",\"wall_ms\":" << wall_ms << "}\n";
        if (checkpoint_every > 0 && step % checkpoint_every == 0)
            save_checkpoint(state, sched, out);
    };
    run_training(state, sched, rc.train, examples, hook);
    save_checkpoint(state, sched, out);

    write_manifest(out + ".manifest.json", "train", rc.train.seed, run_config_to_json(rc),
                   {dataset + ".fasta", dataset + ".labels.tsv", dataset + ".meta.json"},
                   {out, metrics_path});
    std::cout << "steps=" << state.step << " examples=" << examples.size() << "\n";
    return kExitOk;
}

int cmd_sample(const std::string& ckpt, int num, std::optional<int> tax_id, bool unconditional,
               double scale, std::optional<std::uint64_t> seed_flag, const std::string& out) {
    if (static_cast<bool>(tax_id) == unconditional)
        throw InvalidLabel("pass exactly one of --tax-id or --unconditional");
    const std::uint64_t seed = resolve_seed(seed_flag);
    const Checkpoint cp = load_checkpoint(ckpt);
    const DenoiserConfig& cfg = cp.state.ema.cfg;
    if (tax_id && (*tax_id < 0 || *tax_id >= cfg.num_classes))
        throw InvalidLabel("tax id " + std::to_string(*tax_id) + " outside [0, " +
                           std::to_string(cfg.num_classes) + ")");
    const TaxLabel y =
        unconditional ? TaxLabel::null(cfg.num_classes) : TaxLabel::of(*tax_id, cfg.num_classes);
    GuidanceConfig guidance;
    guidance.scale = unconditional ? 1.0 : scale;

    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(seed);
    const std::vector<Matrix> draws = sample_loop(cp.state.ema, cp.sched, guidance, y, rng, num);

    std::vector<FastaRecord> records;
    std::size_t discarded = 0;
    const std::string tax_attr = unconditional ? "null" : std::to_string(*tax_id);
    for (std::size_t i = 0; i < draws.size(); ++i) {
        std::optional<ProteinSequence> seq;
        try {
            seq = decode(draws[i]);
        } catch (const DecodesEmpty&) {
        }
        if (!seq || seq->length() < 10) {
            ++discarded;
            continue;
        }
        std::ostringstream id;
        id << "taxdiff_" << i << " tax=" << tax_attr << " s=" << guidance.scale
           << " seed=" << seed << " idx=" << i;
        records.push_back({id.str(), *seq});
    }
    write_fasta_file(out, records);
    const double wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_manifest(out + ".manifest.json", "sample", seed,
                   json{{"num", num},
                        {"tax", tax_attr},
                        {"guidance_scale", guidance.scale},
                        {"checkpoint", ckpt}},
                   {ckpt}, {out});
    std::cout << "generated=" << records.size() << " discarded=" << discarded
              << " wall_s=" << wall_s << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& fasta, const std::string& reference,
             const std::string& motifs_path, const std::string& out) {
    const LenientFasta gen = parse_fasta_lenient(read_text_file(fasta));

    std::vector<std::string> ref_seqs;
    if (!reference.empty()) {
        const LenientFasta ref = parse_fasta_lenient(read_text_file(reference));
        for (const FastaRecord& r : ref.records) ref_seqs.push_back(r.seq.to_string());
    }
    std::optional<MotifSpec> motifs;
    if (!motifs_path.empty()) motifs = read_motif_spec(motifs_path);

    const EvalReport rep =
        evaluate_sequences(gen, ref_seqs, motifs ? &*motifs : nullptr);

    json jrep{{"total", rep.total},
              {"valid", rep.valid},
              {"validity_rate", rep.validity_rate}};
    json hist = json::object();
    for (const auto& [len, n] : rep.length_hist) hist[std::to_string(len)] = n;
    jrep["length_hist"] = hist;
    if (rep.has_freq_kl) jrep["freq_kl"] = rep.freq_kl;
    json cond = json::object(), uncond = json::object(), groups = json::object();
    for (const auto& [c, r] : rep.cond_motif_rate) cond[std::to_string(c)] = r;
    for (const auto& [c, r] : rep.uncond_motif_rate) uncond[std::to_string(c)] = r;
    for (const auto& [g, n] : rep.group_counts) groups[g] = n;
    if (!cond.empty()) jrep["cond_motif_rate"] = cond;
    if (!uncond.empty()) jrep["uncond_motif_rate"] = uncond;
    jrep["group_counts"] = groups;

    write_text_file(out, jrep.dump(2) + "\n");
    std::cout << "total=" << rep.total << " valid=" << rep.valid
              << " validity_rate=" << rep.validity_rate << "\n";
    return kExitOk;
}

int cmd_gradcheck(const std::string& config, std::uint64_t seed, const std::string& methods,
                  const std::string& inject, double h, int t) {
    DenoiserConfig base;
    if (config == "tiny") {
        base.L = 16;
        base.D_in = 6;
        base.W = 16;
        base.H = 2;
        base.P = 4;
        base.N = 2;
        base.num_classes = 2;
        base.T = 4;
    } else {
        throw InvalidConfig("unknown gradcheck config '" + config + "' (have: tiny)");
    }
    double worst = 0.0;
    std::string worst_param, worst_method;
    for (const char m : methods) {
        DenoiserConfig cfg = base;
        cfg.method = m;
        const GradCheckResult r = gradcheck_denoiser(cfg, seed, 1e-3, h, t, inject);
        std::cout << "method " << m << ": max_rel_err=" << r.max_rel_err << " over "
                  << r.scalars_checked << " parameters (worst: " << r.worst_param << ")\n";
        if (r.max_rel_err > worst) {
            worst = r.max_rel_err;
            worst_param = r.worst_param;
            worst_method = std::string(1, m);
        }
    }
    std::cout << "max_rel_err=" << worst << "\n";
    if (worst >= 1e-4) {
        std::cerr << "gradient check failed: method " << worst_method << " parameter "
                  << worst_param << " rel_err=" << worst << "\n";
        return kExitSelfCheck;
    }
    return kExitOk;
}

int cmd_ablate(const std::string& dataset, const std::string& out_dir, long steps,
               std::optional<std::uint64_t> seed_flag, int T, int width, int blocks,
               int sample_count) {
    const std::uint64_t seed = resolve_seed(seed_flag);
    const PreparedDataset ds = load_dataset(dataset);
    std::filesystem::create_directories(out_dir);

    const std::vector<int> patch_sizes{4, 8, 16, 32, 64};
    const std::string methods = "ABCDE";

    std::ostringstream table;
    table.precision(17);
    table << "method\tP\tfinal_mse\tfinal_vlb\tfinal_total\tsample_validity\n";
    for (const char method : methods) {
        for (const int P : patch_sizes) {
            RunConfig rc;
            rc.model = DenoiserConfig{};
            rc.model.L = 64;
            rc.model.D_in = alphabet::kVocab;
            rc.model.W = width;
            rc.model.H = 4;
            rc.model.P = P;
            rc.model.N = blocks;
            rc.model.method = method;
            rc.model.num_classes = ds.num_classes;
            rc.model.T = T;
            rc.model.validate();
            rc.train.steps = steps;
            rc.train.batch_size = 8;
            rc.train.learning_rate = 3e-4;
            rc.train.ema_decay = 0.99;
            rc.train.seed = splitmix64(seed ^ (static_cast<std::uint64_t>(method) << 8 ^
                                               static_cast<std::uint64_t>(P)));

            const auto examples = to_examples(ds, rc.model.L, rc.amplitude, rc.center);
            const NoiseSchedule sched =
                NoiseSchedule::build(rc.model.T, rc.sched_kind, rc.beta_start, rc.beta_end);
            TrainingState state = TrainingState::init(rc.model, rc.train.seed);
            StepMetrics last;
            run_training(state, sched, rc.train, examples,
                         [&last](long, const StepMetrics& m, double) { last = m; });

            Rng rng(splitmix64(rc.train.seed + 1));
            GuidanceConfig guidance;  // s = 1: single-pass
            const auto draws = sample_loop(state.ema, sched, guidance,
                                           TaxLabel::null(ds.num_classes), rng, sample_count);
            int valid = 0;
            for (const Matrix& x : draws) {
                try {
                    if (decode(x).length() >= 10) ++valid;
                } catch (const DecodesEmpty&) {
                }
            }
            const double validity =
                sample_count == 0 ? 0.0 : static_cast<double>(valid) / sample_count;
            table << method << '\t' << P << '\t' << last.mse << '\t' << last.vlb << '\t'
                  << last.total << '\t' << validity << '\n';
            std::cout << "method " << method << " P=" << P << " total=" << last.total
                      << " validity=" << validity << "\n";
        }
    }
    const std::string table_path = out_dir + "/ablation.tsv";
    write_text_file(table_path, table.str());
    write_manifest(out_dir + "/manifest.json", "ablate", seed,
                   json{{"steps", steps},
                        {"T", T},
                        {"width", width},
                        {"blocks", blocks},
                        {"samples", sample_count}},
                   {dataset + ".fasta", dataset + ".labels.tsv", dataset + ".meta.json"},
                   {table_path});
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"taxonomic-guided protein sequence diffusion"};
    app.require_subcommand(1);
    std::cout.precision(17);

    // taxonomy-build
    auto* tb = app.add_subcommand("taxonomy-build", "collapse a taxonomy dump into class labels");
    std::string tb_nodes, tb_names, tb_out;
    int tb_layer = 9;
    tb->add_option("--nodes", tb_nodes, "nodes.dmp path")->required();
    tb->add_option("--names", tb_names, "names.dmp path")->required();
    tb->add_option("--layer", tb_layer, "lineage depth to cut at (root = 1)");
    tb->add_option("--out", tb_out, "output map TSV")->required();

    // dataset-prepare
    auto* dp = app.add_subcommand("dataset-prepare", "filter and label a FASTA corpus");
    std::string dp_fasta, dp_taxmap, dp_labels, dp_out;
    int dp_max_len = 255;
    dp->add_option("--fasta", dp_fasta, "input FASTA")->required();
    dp->add_option("--taxmap", dp_taxmap, "tax id -> class map TSV (from taxonomy-build)")
        ->required();
    dp->add_option("--labels", dp_labels, "record id -> tax id TSV")->required();
    dp->add_option("--max-len", dp_max_len, "maximum residue count kept");
    dp->add_option("--out", dp_out, "output dataset prefix")->required();

    // toy-data
    auto* td = app.add_subcommand("toy-data", "generate the synthetic motif corpus");
    std::string td_out;
    int td_per_class = 1000;
    std::optional<std::uint64_t> td_seed;
    td->add_option("--out", td_out, "output dataset prefix")->required();
    td->add_option("--per-class", td_per_class, "sequences per class");
    td->add_option("--seed", td_seed, "rng seed");

    // train
    auto* tr = app.add_subcommand("train", "train a denoiser on a prepared dataset");
    std::string tr_dataset, tr_config, tr_out;
    std::optional<long> tr_steps;
    std::optional<std::uint64_t> tr_seed;
    long tr_ckpt_every = 0;
    tr->add_option("--dataset", tr_dataset, "dataset prefix")->required();
    tr->add_option("--config", tr_config, "JSON run config");
    tr->add_option("--steps", tr_steps, "step count override");
    tr->add_option("--seed", tr_seed, "rng seed");
    tr->add_option("--checkpoint-every", tr_ckpt_every, "checkpoint period in steps (0 = end only)");
    tr->add_option("--out", tr_out, "checkpoint path")->required();

    // sample
    auto* sa = app.add_subcommand("sample", "draw sequences from a trained checkpoint");
    std::string sa_ckpt, sa_out;
    int sa_num = 1000;
    std::optional<int> sa_tax;
    bool sa_uncond = false;
    double sa_scale = 1.5;
    std::optional<std::uint64_t> sa_seed;
    sa->add_option("--ckpt", sa_ckpt, "checkpoint path")->required();
    sa->add_option("--num", sa_num, "sample count");
    sa->add_option("--tax-id", sa_tax, "conditioning class id");
    sa->add_flag("--unconditional", sa_uncond, "sample from the null label");
    sa->add_option("--guidance-scale", sa_scale, "guidance scale s");
    sa->add_option("--seed", sa_seed, "rng seed");
    sa->add_option("--out", sa_out, "output FASTA")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "desk-scale sequence metrics");
    std::string ev_fasta, ev_ref, ev_motifs, ev_out;
    ev->add_option("--fasta", ev_fasta, "generated FASTA")->required();
    ev->add_option("--reference", ev_ref, "reference FASTA for frequency KL");
    ev->add_option("--motifs", ev_motifs, "class motif spec TSV");
    ev->add_option("--out", ev_out, "report JSON path")->required();

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient self-check");
    std::string gc_config = "tiny", gc_methods = "ABCDE", gc_inject;
    std::uint64_t gc_seed = 0;
    gc->add_option("--config", gc_config, "configuration name");
    gc->add_option("--seed", gc_seed, "rng seed");
    gc->add_option("--methods", gc_methods, "method letters to check");
    gc->add_option("--inject-sign-bug", gc_inject, "flip a parameter block's analytic gradient")
        ->group("");  // hidden: fault-injection hook for tests
    double gc_h = 1e-5;
    int gc_t = 0;
    gc->add_option("--fd-step", gc_h, "finite-difference step")->group("");
    gc->add_option("--fd-t", gc_t, "timestep (0 = midpoint default)")->group("");

    // ablate
    auto* ab = app.add_subcommand("ablate", "patchify-size x method sweep on a toy dataset");
    std::string ab_dataset, ab_out;
    long ab_steps = 30;
    std::optional<std::uint64_t> ab_seed;
    int ab_T = 10, ab_width = 32, ab_blocks = 2, ab_samples = 4;
    ab->add_option("--dataset", ab_dataset, "dataset prefix")->required();
    ab->add_option("--out", ab_out, "output directory")->required();
    ab->add_option("--steps", ab_steps, "training steps per setting");
    ab->add_option("--seed", ab_seed, "rng seed");
    ab->add_option("--T", ab_T, "diffusion steps");
    ab->add_option("--width", ab_width, "model width");
    ab->add_option("--blocks", ab_blocks, "block count");
    ab->add_option("--samples", ab_samples, "samples drawn per setting");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*tb) return cmd_taxonomy_build(tb_nodes, tb_names, tb_layer, tb_out);
        if (*dp) return cmd_dataset_prepare(dp_fasta, dp_taxmap, dp_labels, dp_max_len, dp_out);
        if (*td) return cmd_toy_data(td_out, td_per_class, resolve_seed(td_seed));
        if (*tr) return cmd_train(tr_dataset, tr_config, tr_out, tr_steps, tr_seed, tr_ckpt_every);
        if (*sa) return cmd_sample(sa_ckpt, sa_num, sa_tax, sa_uncond, sa_scale, sa_seed, sa_out);
        if (*ev) return cmd_eval(ev_fasta, ev_ref, ev_motifs, ev_out);
        if (*gc) return cmd_gradcheck(gc_config, gc_seed, gc_methods, gc_inject, gc_h, gc_t);
        if (*ab)
            return cmd_ablate(ab_dataset, ab_out, ab_steps, ab_seed, ab_T, ab_width, ab_blocks,
                              ab_samples);
    } catch (const NonFiniteLoss& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const CorruptCheckpoint& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return kExitCompat;
    } catch (const VersionMismatch& e) {
        std::cerr << "version error: " << e.what() << "\n";
        return kExitCompat;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
