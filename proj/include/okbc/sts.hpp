#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <unordered_map>
#include <vector>

#include "okbc/common.hpp"
#include "okbc/rng.hpp"
#include "okbc/tokenize.hpp"

namespace okbc {

// Pretrained word vectors in the plain text format: optional "count dim"
// header, then one "token v1 ... v_dim" line per word.
struct WordVectors {
    std::size_t dim = 0;
    std::unordered_map<std::string, std::vector<double>> vectors;

    bool contains(const std::string& token) const { return vectors.count(token) > 0; }
};

namespace detail {

inline bool parse_double_strict(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

inline bool parse_uint_strict(const std::string& s, std::uint64_t& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    try {
        out = std::stoull(s);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) parts.push_back(line.substr(i, j - i));
        i = j;
    }
    return parts;
}

}  // namespace detail

inline WordVectors load_vectors(const std::string& path, std::vector<std::string>* warnings = nullptr) {
    const std::string content = read_text_file(path);
    WordVectors wv;
    std::size_t line_no = 0;
    std::size_t start = 0;
    bool first_content_line = true;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        const std::string line = content.substr(start, end - start);
        start = end + 1;
        ++line_no;
        std::vector<std::string> parts = detail::split_ws(line);
        if (parts.empty()) continue;
        if (first_content_line) {
            first_content_line = false;
            std::uint64_t count = 0, dim = 0;
            if (parts.size() == 2 && detail::parse_uint_strict(parts[0], count) &&
                detail::parse_uint_strict(parts[1], dim)) {
                wv.dim = static_cast<std::size_t>(dim);
                continue;  // header consumed
            }
        }
        if (parts.size() < 2)
            throw InputError(path + ": line " + std::to_string(line_no) + ": expected token and values");
        const std::string& token = parts[0];
        std::vector<double> vec(parts.size() - 1);
        for (std::size_t k = 1; k < parts.size(); ++k) {
            if (!detail::parse_double_strict(parts[k], vec[k - 1]))
                throw InputError(path + ": line " + std::to_string(line_no) + ": non-numeric entry '" +
                                 parts[k] + "'");
        }
        if (wv.dim == 0) wv.dim = vec.size();
        if (vec.size() != wv.dim)
            throw InputError(path + ": line " + std::to_string(line_no) + ": dimension " +
                             std::to_string(vec.size()) + " does not match established dimension " +
                             std::to_string(wv.dim));
        auto [it, inserted] = wv.vectors.emplace(token, std::move(vec));
        if (!inserted) {
            it->second.assign(parts.size() - 1, 0.0);
            for (std::size_t k = 1; k < parts.size(); ++k)
                detail::parse_double_strict(parts[k], it->second[k - 1]);
            if (warnings)
                warnings->push_back(path + ": line " + std::to_string(line_no) + ": duplicate token '" +
                                    token + "', keeping the later entry");
        }
    }
    if (wv.dim == 0) throw InputError(path + ": no word vectors found");
    return wv;
}

struct PhraseEmbedding {
    std::vector<double> vec;
    std::size_t used_tokens = 0;

    bool usable() const {
        if (used_tokens == 0) return false;
        for (double v : vec)
            if (v != 0.0) return true;
        return false;
    }
};

// Sum of the vectors of in-vocabulary words; out-of-vocabulary words are
// skipped. An all-OOV phrase yields the zero vector with count 0. The terms
// are added in sorted token order, so reordering the words of a phrase can
// never change the result, not even in the last bit.
inline PhraseEmbedding phrase_embedding(const std::string& phrase, const WordVectors& wv) {
    PhraseEmbedding out;
    out.vec.assign(wv.dim, 0.0);
    std::vector<std::string> known;
    for (const std::string& tok : tokenize(phrase)) {
        if (wv.contains(tok)) known.push_back(tok);
    }
    std::sort(known.begin(), known.end());
    for (const std::string& tok : known) {
        const std::vector<double>& v = wv.vectors.at(tok);
        for (std::size_t i = 0; i < wv.dim; ++i) out.vec[i] += v[i];
        ++out.used_tokens;
    }
    return out;
}

// Cosine similarity; defined as 0 when either norm vanishes (such pairs are
// also excluded from hypothesis-test samples upstream).
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw InputError("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// Significance tests
// ---------------------------------------------------------------------------

namespace detail {

// Continued-fraction evaluation of the incomplete beta (modified Lentz),
// absolute tolerance 1e-10.
inline double beta_cont_frac(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-10) return h;
    }
    throw ComputeError("incomplete beta continued fraction did not converge");
}

inline double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cont_frac(a, b, x) / a;
    return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

// Two-sided tail probability of Student's t distribution.
inline double student_t_two_sided_p(double t, double df) {
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace detail

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

// Unpaired two-sided Welch test with the Welch-Satterthwaite degrees of
// freedom. Identical degenerate samples define p = 1; degenerate samples
// with different means have no finite statistic and are an error.
inline WelchResult welch_t_test(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2 || y.size() < 2) throw InputError("welch_t_test: need at least 2 values per sample");
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const double mx = detail::mean_of(x);
    const double my = detail::mean_of(y);
    const double vx = detail::sample_variance(x, mx);
    const double vy = detail::sample_variance(y, my);
    const double se2 = vx / nx + vy / ny;
    if (se2 == 0.0) {
        if (mx == my) return {0.0, nx + ny - 2.0, 1.0};
        throw ComputeError("welch_t_test: zero variance in both samples with unequal means");
    }
    WelchResult r;
    r.t = (mx - my) / std::sqrt(se2);
    const double dx = (vx / nx) * (vx / nx) / (nx - 1.0);
    const double dy = (vy / ny) * (vy / ny) / (ny - 1.0);
    r.df = se2 * se2 / (dx + dy);
    r.p = detail::student_t_two_sided_p(r.t, r.df);
    return r;
}

// Model-free cross-check: two-sided label-permutation test on the mean
// difference with add-one smoothing.
inline double permutation_test(const std::vector<double>& x, const std::vector<double>& y,
                               std::size_t iterations, std::uint64_t seed) {
    if (iterations < 1000) throw InputError("permutation_test: need at least 1000 iterations");
    if (x.empty() || y.empty()) throw InputError("permutation_test: empty sample");
    const double observed = std::abs(detail::mean_of(x) - detail::mean_of(y));
    std::vector<double> pool = x;
    pool.insert(pool.end(), y.begin(), y.end());
    Rng rng(seed);
    std::size_t at_least_as_extreme = 0;
    std::vector<double> scratch(pool.size());
    for (std::size_t it = 0; it < iterations; ++it) {
        scratch = pool;
        rng.shuffle(scratch);
        double sx = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) sx += scratch[i];
        double sy = 0.0;
        for (std::size_t i = x.size(); i < scratch.size(); ++i) sy += scratch[i];
        const double diff =
            std::abs(sx / static_cast<double>(x.size()) - sy / static_cast<double>(y.size()));
        if (diff >= observed) ++at_least_as_extreme;
    }
    return static_cast<double>(at_least_as_extreme + 1) / static_cast<double>(iterations + 1);
}

// ---------------------------------------------------------------------------
// The STS hypothesis test
// ---------------------------------------------------------------------------

enum class StsMethod { welch, permutation };

inline const char* sts_method_name(StsMethod m) {
    return m == StsMethod::welch ? "welch" : "permutation";
}

struct STSReport {
    double mu_pred = 0.0;  // mean cosine(predicted, true)
    double mu_rdn = 0.0;   // mean cosine(predicted, shuffled true)
    std::size_t n_pairs = 0;
    double statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    StsMethod method = StsMethod::welch;
    std::size_t oov_skipped = 0;
};

inline constexpr std::size_t kPermutationIterations = 10000;

// Compares actual prediction-vs-truth similarities against a shuffled
// baseline built from a fixed-point-free permutation of the true phrases.
// Pairs involving an unusable (all-OOV / zero) embedding are excluded from
// both samples symmetrically.
inline STSReport sts_test(const std::vector<std::string>& predicted,
                          const std::vector<std::string>& truth, const WordVectors& wv,
                          std::uint64_t seed, StsMethod method = StsMethod::welch) {
    if (predicted.size() != truth.size())
        throw InputError("sts_test: predicted and truth lists differ in length");
    if (predicted.size() < 2) throw InputError("sts_test: need at least 2 pairs");

    const std::size_t n = predicted.size();
    std::vector<PhraseEmbedding> pred_emb(n), truth_emb(n);
    for (std::size_t i = 0; i < n; ++i) {
        pred_emb[i] = phrase_embedding(predicted[i], wv);
        truth_emb[i] = phrase_embedding(truth[i], wv);
    }

    Rng rng(seed);
    const std::vector<std::size_t> pi = rng.derangement(n);

    std::vector<double> actual, shuffled;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!pred_emb[i].usable() || !truth_emb[i].usable() || !truth_emb[pi[i]].usable()) {
            ++skipped;
            continue;
        }
        actual.push_back(cosine(pred_emb[i].vec, truth_emb[i].vec));
        shuffled.push_back(cosine(pred_emb[i].vec, truth_emb[pi[i]].vec));
    }
    if (actual.size() < 2)
        throw InputError("sts_test: fewer than 2 usable pairs after OOV exclusions");

    STSReport report;
    report.method = method;
    report.n_pairs = actual.size();
    report.oov_skipped = skipped;
    report.mu_pred = detail::mean_of(actual);
    report.mu_rdn = detail::mean_of(shuffled);
    if (method == StsMethod::welch) {
        const WelchResult w = welch_t_test(actual, shuffled);
        report.statistic = w.t;
        report.degrees_of_freedom = w.df;
        report.p_value = w.p;
    } else {
        report.statistic = report.mu_pred - report.mu_rdn;
        report.degrees_of_freedom = 0.0;
        report.p_value = permutation_test(actual, shuffled, kPermutationIterations, rng.next_u64());
    }
    return report;
}

// Single-line JSON-style record.
inline std::string sts_report_json(const STSReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "{\"method\":\"%s\",\"mu_pred\":%.17g,\"mu_rdn\":%.17g,\"n_pairs\":%zu,"
                  "\"statistic\":%.17g,\"df\":%.17g,\"p_value\":%.17g,\"oov_skipped\":%zu}",
                  sts_method_name(r.method), r.mu_pred, r.mu_rdn, r.n_pairs, r.statistic,
                  r.degrees_of_freedom, r.p_value, r.oov_skipped);
    return buf;
}

// Human-readable row: method, mu_pred / mu_rdn, p.
inline std::string sts_report_row(const STSReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-12s %.3f / %.3f  p=%.4g", sts_method_name(r.method), r.mu_pred,
                  r.mu_rdn, r.p_value);
    return buf;
}

}  // namespace okbc
