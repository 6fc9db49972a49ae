#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "okbc/sts.hpp"
#include "test_util.hpp"

using namespace okbc;

namespace {

WordVectors synthetic_vectors(const std::vector<std::string>& tokens, std::size_t dim,
                              std::uint64_t seed) {
    WordVectors wv;
    wv.dim = dim;
    Rng rng(seed);
    for (const std::string& tok : tokens) {
        std::vector<double> v(dim);
        for (double& x : v) x = rng.normal();
        wv.vectors[tok] = std::move(v);
    }
    return wv;
}

std::vector<std::string> token_pool(std::size_t count) {
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < count; ++i) pool.push_back("tok" + std::to_string(i));
    return pool;
}

}  // namespace

TEST_CASE("load_vectors parses plain and headered files") {
    TempDir dir;
    write_file(dir.file("v.txt"), "cat 1.0 0.5 -0.25\ndog 0 1 2\n");
    const WordVectors wv = load_vectors(dir.file("v.txt"));
    CHECK(wv.dim == 3);
    CHECK(wv.vectors.size() == 2);
    CHECK(wv.vectors.at("cat")[2] == -0.25);

    write_file(dir.file("h.txt"), "2 3\ncat 1.0 0.5 -0.25\ndog 0 1 2\n");
    const WordVectors headered = load_vectors(dir.file("h.txt"));
    CHECK(headered.dim == 3);
    CHECK(headered.vectors.size() == 2);
}

TEST_CASE("load_vectors rejects dimension drift and non-numeric entries") {
    TempDir dir;
    write_file(dir.file("d.txt"), "cat 1 2 3\ndog 1 2\n");
    CHECK_THROWS_WITH(load_vectors(dir.file("d.txt")),
                      Catch::Matchers::ContainsSubstring("line 2"));

    write_file(dir.file("n.txt"), "cat 1 2 3\ndog 1 two 3\n");
    CHECK_THROWS_WITH(load_vectors(dir.file("n.txt")),
                      Catch::Matchers::ContainsSubstring("line 2") &&
                          Catch::Matchers::ContainsSubstring("non-numeric"));

    write_file(dir.file("e.txt"), "\n\n");
    CHECK_THROWS_AS(load_vectors(dir.file("e.txt")), InputError);
}

TEST_CASE("load_vectors: duplicate tokens keep the later entry with a warning") {
    TempDir dir;
    write_file(dir.file("dup.txt"), "cat 1 1\ncat 2 2\n");
    std::vector<std::string> warnings;
    const WordVectors wv = load_vectors(dir.file("dup.txt"), &warnings);
    CHECK(wv.vectors.at("cat")[0] == 2.0);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("duplicate") != std::string::npos);
}

TEST_CASE("phrase embedding sums in-vocabulary word vectors") {
    WordVectors wv;
    wv.dim = 2;
    wv.vectors["a"] = {1.0, 0.0};
    wv.vectors["b"] = {0.0, 2.0};

    const PhraseEmbedding single = phrase_embedding("a", wv);
    CHECK(single.vec == std::vector<double>{1.0, 0.0});
    CHECK(single.used_tokens == 1);

    const PhraseEmbedding pair = phrase_embedding("a b", wv);
    CHECK(pair.vec == std::vector<double>{1.0, 2.0});
    CHECK(pair.used_tokens == 2);

    const PhraseEmbedding oov = phrase_embedding("zzz qqq", wv);
    CHECK(oov.used_tokens == 0);
    CHECK(!oov.usable());
    CHECK(oov.vec == std::vector<double>{0.0, 0.0});

    // OOV words inside a phrase are skipped
    const PhraseEmbedding mixed = phrase_embedding("a zzz b", wv);
    CHECK(mixed.vec == std::vector<double>{1.0, 2.0});
    CHECK(mixed.used_tokens == 2);
}

TEST_CASE("phrase embedding is exactly permutation-invariant") {
    const auto pool = token_pool(8);
    const WordVectors wv = synthetic_vectors(pool, 5, 3);
    const std::string forward = "tok0 tok3 tok5 tok7 tok2";
    const std::string backward = "tok2 tok7 tok5 tok3 tok0";
    const std::string mixed = "tok5 tok0 tok2 tok7 tok3";
    const auto a = phrase_embedding(forward, wv);
    const auto b = phrase_embedding(backward, wv);
    const auto c = phrase_embedding(mixed, wv);
    CHECK(a.vec == b.vec);  // bitwise
    CHECK(a.vec == c.vec);
}

TEST_CASE("cosine: identity, orthogonality, frozen arithmetic oracle") {
    CHECK(cosine({3.0, -4.0}, {3.0, -4.0}) == Catch::Approx(1.0).margin(1e-15));
    CHECK(cosine({1.0, 0.0}, {0.0, 1.0}) == 0.0);
    // 32 / (sqrt(14) * sqrt(77)), computed independently beforehand
    CHECK(cosine({1, 2, 3}, {4, 5, 6}) == Catch::Approx(0.9746318461970762).margin(1e-12));
    CHECK(cosine({0.0, 0.0}, {1.0, 1.0}) == 0.0);  // zero norm defined as 0
    CHECK_THROWS_AS(cosine({1.0}, {1.0, 2.0}), InputError);
}

TEST_CASE("cosine symmetry is exact; scale invariance holds tightly") {
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(6), b(6);
        for (double& x : a) x = rng.normal();
        for (double& x : b) x = rng.normal();
        CHECK(cosine(a, b) == cosine(b, a));  // bitwise
        std::vector<double> scaled = a;
        const double lambda = 0.1 + 10.0 * rng.uniform_real();
        for (double& x : scaled) x *= lambda;
        CHECK(cosine(scaled, b) == Catch::Approx(cosine(a, b)).margin(1e-12));
    }
}

TEST_CASE("welch t test matches the frozen reference fixtures") {
    // reference values computed with an independent statistics library
    // before this implementation existed
    const WelchResult r = welch_t_test({0.9, 0.8, 0.85}, {0.1, 0.2, 0.15});
    CHECK(r.t == Catch::Approx(17.14642819948225).margin(1e-9));
    CHECK(r.df == Catch::Approx(4.0).margin(1e-9));
    CHECK(std::abs(r.p - 6.786912935123908e-05) < 1e-6);
    CHECK(std::abs(r.p - 6.786912935123908e-05) / 6.786912935123908e-05 < 1e-6);

    const WelchResult r2 = welch_t_test({0.52, 0.48, 0.50, 0.55, 0.47, 0.51, 0.49, 0.53},
                                        {0.50, 0.46, 0.49, 0.51, 0.45, 0.52, 0.47, 0.48});
    CHECK(r2.t == Catch::Approx(1.659030124012505).margin(1e-9));
    CHECK(std::abs(r2.p - 0.11949756899195536) < 1e-9);
}

TEST_CASE("welch t test: identical samples, swap symmetry, degenerate variance") {
    const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    const WelchResult same = welch_t_test(x, x);
    CHECK(same.t == 0.0);
    CHECK(same.p == 1.0);

    const std::vector<double> y = {0.5, 1.5, 2.0, 5.0};
    const WelchResult xy = welch_t_test(x, y);
    const WelchResult yx = welch_t_test(y, x);
    CHECK(xy.t == -yx.t);
    CHECK(xy.p == yx.p);
    CHECK(xy.df == yx.df);

    // zero variance in both samples: equal means define p = 1, unequal error
    CHECK(welch_t_test({2.0, 2.0}, {2.0, 2.0}).p == 1.0);
    CHECK_THROWS_AS(welch_t_test({2.0, 2.0}, {3.0, 3.0}), ComputeError);
    CHECK_THROWS_AS(welch_t_test({1.0}, {1.0, 2.0}), InputError);
}

TEST_CASE("permutation test: null, separation, smoothing floor") {
    const std::vector<double> x = {1.0, 1.1, 0.9, 1.05, 0.95};
    CHECK(permutation_test(x, x, 2000, 1) > 0.9);

    std::vector<double> low, high;
    Rng rng(2);
    for (int i = 0; i < 12; ++i) {
        low.push_back(rng.uniform_real(0.0, 0.05));
        high.push_back(rng.uniform_real(10.0, 10.05));
    }
    const double p = permutation_test(low, high, 10000, 3);
    CHECK(p <= 3.0 / 10001.0);
    CHECK(p >= 1.0 / 10001.0);  // add-one smoothing floor

    CHECK_THROWS_AS(permutation_test(x, x, 999, 1), InputError);
}

TEST_CASE("welch and permutation p-values agree on Gaussian samples") {
    // criterion: agreement within 0.02 for samples of size >= 30
    for (std::uint64_t seed : {1, 2, 3, 4}) {
        Rng rng(seed);
        std::vector<double> x(40), y(40);
        for (double& v : x) v = rng.normal();
        for (double& v : y) v = 0.25 + rng.normal();  // moderate shift
        const double pw = welch_t_test(x, y).p;
        const double pp = permutation_test(x, y, 20000, seed + 100);
        CHECK(std::abs(pw - pp) < 0.02);
    }
}

TEST_CASE("welch null calibration: rejection rate near the nominal level") {
    // 1000 seeded trials, both samples of size 50 from one distribution
    std::size_t rejections = 0;
    Rng rng(424242);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> x(50), y(50);
        for (double& v : x) v = rng.normal();
        for (double& v : y) v = rng.normal();
        if (welch_t_test(x, y).p < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / 1000.0;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
}

TEST_CASE("derangements have no fixed points and are seed-deterministic") {
    for (std::size_t n : {2, 3, 5, 17, 40}) {
        for (std::uint64_t seed : {1, 2, 3}) {
            Rng rng(seed);
            const auto pi = rng.derangement(n);
            REQUIRE(pi.size() == n);
            std::vector<bool> seen(n, false);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(pi[i] != i);
                seen[pi[i]] = true;
            }
            for (bool b : seen) CHECK(b);
            Rng rng2(seed);
            CHECK(rng2.derangement(n) == pi);
        }
    }
    Rng rng(1);
    CHECK_THROWS_AS(rng.derangement(1), ComputeError);
}

TEST_CASE("sts_test: perfect predictions give mu_pred 1 and a decisive p") {
    const auto pool = token_pool(40);
    const WordVectors wv = synthetic_vectors(pool, 8, 11);
    Rng rng(5);
    std::vector<std::string> truth;
    for (int i = 0; i < 120; ++i) {
        std::string phrase = pool[rng.uniform_index(pool.size())];
        phrase += " " + pool[rng.uniform_index(pool.size())];
        phrase += " " + pool[rng.uniform_index(pool.size())];
        truth.push_back(phrase);
    }
    const STSReport report = sts_test(truth, truth, wv, 7, StsMethod::welch);
    CHECK(report.mu_pred == Catch::Approx(1.0).margin(1e-12));
    CHECK(report.mu_rdn < 1.0);
    CHECK(report.p_value < 1e-6);
    CHECK(report.n_pairs == 120);
    CHECK(report.oov_skipped == 0);
}

TEST_CASE("sts_test is deterministic and excludes unusable pairs symmetrically") {
    const auto pool = token_pool(12);
    const WordVectors wv = synthetic_vectors(pool, 6, 2);
    std::vector<std::string> pred, truth;
    Rng rng(9);
    for (int i = 0; i < 30; ++i) {
        pred.push_back(pool[rng.uniform_index(pool.size())] + " " +
                       pool[rng.uniform_index(pool.size())]);
        truth.push_back(pool[rng.uniform_index(pool.size())]);
    }
    pred[3] = "entirely unknown words";  // unusable prediction
    truth[10] = "another mystery";       // unusable truth

    const STSReport a = sts_test(pred, truth, wv, 31, StsMethod::welch);
    const STSReport b = sts_test(pred, truth, wv, 31, StsMethod::welch);
    CHECK(a.mu_pred == b.mu_pred);
    CHECK(a.mu_rdn == b.mu_rdn);
    CHECK(a.p_value == b.p_value);
    CHECK(a.n_pairs + a.oov_skipped == 30);
    CHECK(a.oov_skipped >= 2);

    const STSReport perm = sts_test(pred, truth, wv, 31, StsMethod::permutation);
    CHECK(perm.n_pairs == a.n_pairs);
    CHECK(perm.p_value >= 1.0 / (kPermutationIterations + 1));

    CHECK_THROWS_AS(sts_test({"a"}, {"a", "b"}, wv, 1), InputError);
    CHECK_THROWS_AS(sts_test({"a"}, {"a"}, wv, 1), InputError);
    // all pairs unusable
    CHECK_THROWS_AS(sts_test({"zz", "yy", "xx"}, {"qq", "pp", "rr"}, wv, 1), InputError);
}

TEST_CASE("replacing predictions with their exact truths never lowers mu_pred") {
    const auto pool = token_pool(25);
    const WordVectors wv = synthetic_vectors(pool, 8, 21);
    Rng rng(17);
    std::vector<std::string> pred, truth;
    for (int i = 0; i < 60; ++i) {
        pred.push_back(pool[rng.uniform_index(pool.size())] + " " +
                       pool[rng.uniform_index(pool.size())]);
        truth.push_back(pool[rng.uniform_index(pool.size())] + " " +
                        pool[rng.uniform_index(pool.size())]);
    }
    // nested replacement sets, so each step can only improve alignment
    const auto order = Rng(99).permutation(60);
    double previous = -1.0;
    for (std::size_t k = 0; k <= 60; k += 10) {
        std::vector<std::string> mixed = pred;
        for (std::size_t i = 0; i < k; ++i) mixed[order[i]] = truth[order[i]];
        const STSReport r = sts_test(mixed, truth, wv, 5, StsMethod::welch);
        CHECK(r.mu_pred >= previous);
        previous = r.mu_pred;
    }
    CHECK(previous == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("sts report serialization carries the table columns") {
    STSReport r;
    r.mu_pred = 0.551;
    r.mu_rdn = 0.511;
    r.n_pairs = 100;
    r.statistic = 3.5;
    r.degrees_of_freedom = 192.2;
    r.p_value = 1.35e-25;
    r.method = StsMethod::welch;
    const std::string json = sts_report_json(r);
    CHECK(json.find("\"method\":\"welch\"") != std::string::npos);
    CHECK(json.find("\"mu_pred\":0.551") != std::string::npos);
    CHECK(json.find("\"p_value\":1.35") != std::string::npos);
    const std::string row = sts_report_row(r);
    CHECK(row.find("welch") != std::string::npos);
    CHECK(row.find("0.551 / 0.511") != std::string::npos);
}
