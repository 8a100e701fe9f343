#include <doctest.h>

#include <cmath>
#include <string>

#include "taxdiff/evalseq.hpp"
#include "testutil.hpp"

using namespace taxdiff;

TEST_CASE("header_attrs: whitespace-separated key=value tokens") {
    const auto attrs = header_attrs("taxdiff_3 tax=2 s=1.5 seed=99 idx=3");
    CHECK(attrs.at("tax") == "2");
    CHECK(attrs.at("s") == "1.5");
    CHECK(attrs.at("seed") == "99");
    CHECK(attrs.count("taxdiff_3") == 0);  // bare token, not key=value
    CHECK(header_attrs("plain header no attrs").empty());
}

TEST_CASE("contains_motif: exact substring semantics") {
    CHECK(contains_motif("AAACHYWDDD", "CHYW"));
    CHECK(contains_motif("CHYW", "CHYW"));
    CHECK_FALSE(contains_motif("CHY", "CHYW"));
    CHECK_FALSE(contains_motif("AAACHYDWDD", "CHYW"));
}

TEST_CASE("motif spec: TSV round-trip") {
    testutil::TempDir dir("motifs");
    MotifSpec spec;
    spec.motif_of[0] = "CHYW";
    spec.motif_of[1] = "FIMP";
    const std::string path = dir.file("motifs.tsv");
    write_motif_spec(spec, path);
    const MotifSpec back = read_motif_spec(path);
    CHECK(back.motif_of == spec.motif_of);
}

TEST_CASE("residue_frequencies: smoothing keeps every bin positive") {
    const auto f = residue_frequencies({"AAAA"});
    double total = 0.0;
    for (const double v : f) {
        CHECK(v > 0.0);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f[0] > f[1]);  // A dominates
}

TEST_CASE("freq_kl: zero on identical corpora, positive on skew") {
    const auto p = residue_frequencies({"ACDEFGHIKL", "MNPQRSTVWY"});
    const auto q = residue_frequencies({"ACDEFGHIKL", "MNPQRSTVWY"});
    CHECK(freq_kl(p, q) == 0.0);
    const auto skew = residue_frequencies({"AAAAAAAAAA"});
    CHECK(freq_kl(skew, p) > 0.1);
    CHECK(freq_kl(skew, p) >= 0.0);
}

TEST_CASE("evaluate_sequences: validity, grouping, motif rates") {
    const std::string fasta =
        ">g1 tax=0 s=1.5\nAAACHYWAAAAAAAAAAAAA\n"    // class 0 motif present
        ">g2 tax=0 s=1.5\nAAAAAAAAAAAAAAAAAAAA\n"    // class 0, no motif
        ">g3 tax=1 s=1.5\nAAAFIMPAAAAAAAAAAAAA\n"    // class 1 motif present
        ">g4 tax=null s=1\nAAACHYWAAAAAAAAAAAAA\n"   // uncond, class 0 motif
        ">g5 tax=null s=1\nAAAAAAAAAAAAAAAAAAAA\n"   // uncond, nothing
        ">short tax=0 s=1.5\nAAA\n";                 // below the length floor
    const LenientFasta gen = parse_fasta_lenient(fasta);
    MotifSpec spec;
    spec.motif_of[0] = "CHYW";
    spec.motif_of[1] = "FIMP";
    const EvalReport rep = evaluate_sequences(gen, {}, &spec);
    CHECK(rep.total == 6);
    CHECK(rep.valid == 5);
    CHECK(rep.validity_rate == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(rep.group_counts.at("0") == 2);
    CHECK(rep.group_counts.at("1") == 1);
    CHECK(rep.group_counts.at("null") == 2);
    CHECK(rep.cond_motif_rate.at(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.cond_motif_rate.at(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.uncond_motif_rate.at(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.uncond_motif_rate.at(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(rep.has_freq_kl);
    // length histogram covers only valid sequences
    std::size_t hist_total = 0;
    for (const auto& [len, n] : rep.length_hist) hist_total += n;
    CHECK(hist_total == 5);
}

TEST_CASE("evaluate_sequences: frequency KL against a reference corpus") {
    const std::string fasta = ">a tax=null\nACDEFGHIKLMNPQRSTVWY\n";
    const LenientFasta gen = parse_fasta_lenient(fasta);
    const EvalReport self =
        evaluate_sequences(gen, {"ACDEFGHIKLMNPQRSTVWY"}, nullptr);
    CHECK(self.has_freq_kl);
    CHECK(self.freq_kl == 0.0);  // identical distributions
    const EvalReport far = evaluate_sequences(gen, {"AAAAAAAAAA"}, nullptr);
    CHECK(far.freq_kl > 0.1);
}

TEST_CASE("evaluate_sequences: rejected records count toward total only") {
    const std::string fasta = ">ok tax=0\nACDEFGHIKLMNPQRSTVWY\n>bad tax=0\nXXXX\n";
    const LenientFasta gen = parse_fasta_lenient(fasta);
    const EvalReport rep = evaluate_sequences(gen, {}, nullptr);
    CHECK(rep.total == 2);
    CHECK(rep.valid == 1);
    CHECK(rep.validity_rate == doctest::Approx(0.5).epsilon(1e-12));
}
