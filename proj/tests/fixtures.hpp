#pragma once

// Deterministic fixtures shared by the acceptance suite.

#include <string>
#include <vector>

#include "okbc/kb.hpp"
#include "okbc/rng.hpp"
#include "okbc/sts.hpp"

namespace fixtures {

inline const std::vector<std::string>& colors() {
    static const std::vector<std::string> v = {"red",  "blue", "green", "gold",  "gray",
                                               "pink", "teal", "aqua",  "brown", "black"};
    return v;
}

inline const std::vector<std::string>& sizes() {
    static const std::vector<std::string> v = {"tiny",  "small", "large", "huge",  "short",
                                               "tall",  "wide",  "thin",  "round", "flat"};
    return v;
}

inline const std::vector<std::string>& animals() {
    static const std::vector<std::string> v = {
        "cat",  "dog",  "fox",   "owl",   "bat",  "elk",  "hen",  "ram",  "sow",
        "colt", "crow", "dove",  "hare",  "lamb", "lynx", "mole", "mule", "newt",
        "pony", "seal", "stork", "swan",  "toad", "wolf", "wren"};
    return v;
}

// 32-triple copy-task fixture: object repeats the subject's head token.
inline okbc::KnowledgeBase overfit32() {
    okbc::KnowledgeBase kb;
    kb.name = "overfit32";
    const auto& heads = colors();  // 8 used
    const char* tails[] = {"cat", "dog", "fox", "owl"};
    for (int h = 0; h < 8; ++h)
        for (const char* tail : tails)
            kb.triples.push_back(okbc::Triple{heads[h] + " " + tail, "maps to",
                                              heads[h] + " thing", okbc::Polarity::positive, ""});
    return kb;
}

// Two rule families merged into one 500-triple KB:
//   "<color> <animal>" likes      -> "<color> food"   (copy token 0)
//   "<size> <animal>"  sound of   -> "<animal> call"  (copy token 1)
inline okbc::KnowledgeBase mixed500() {
    okbc::KnowledgeBase family_a, family_b;
    family_a.name = "colors";
    family_b.name = "sounds";
    for (const std::string& color : colors())
        for (const std::string& animal : animals())
            family_a.triples.push_back(okbc::Triple{color + " " + animal, "likes", color + " food",
                                                    okbc::Polarity::positive, "a"});
    for (const std::string& size : sizes())
        for (const std::string& animal : animals())
            family_b.triples.push_back(okbc::Triple{size + " " + animal, "sound of",
                                                    animal + " call", okbc::Polarity::positive, "b"});
    return okbc::merge({family_a, family_b}, "mixed500");
}

// Gaussian word vectors covering every corpus token of a KB.
inline okbc::WordVectors gaussian_vectors(const okbc::KnowledgeBase& kb, std::size_t dim,
                                          std::uint64_t seed) {
    okbc::WordVectors wv;
    wv.dim = dim;
    okbc::Rng rng(seed);
    std::vector<std::string> tokens;
    std::unordered_map<std::string, bool> seen;
    for (const okbc::Triple& t : kb.triples) {
        for (const std::string& phrase : {t.subject, t.predicate, t.object}) {
            for (const std::string& tok : okbc::tokenize(phrase)) {
                if (!seen[tok]) {
                    seen[tok] = true;
                    tokens.push_back(tok);
                }
            }
        }
    }
    for (const std::string& tok : tokens) {
        std::vector<double> v(dim);
        for (double& x : v) x = rng.normal();
        wv.vectors[tok] = std::move(v);
    }
    return wv;
}

// Large positive-only fixture with the paper-scale line count.
inline okbc::KnowledgeBase positives(std::size_t count) {
    okbc::KnowledgeBase kb;
    kb.name = "synthetic-positives";
    const auto& cs = colors();
    const auto& as = animals();
    const auto& ss = sizes();
    for (std::size_t i = 0; i < count; ++i) {
        const std::string subject =
            cs[i % cs.size()] + " " + as[(i / cs.size()) % as.size()] + " " + std::to_string(i);
        const std::string object =
            ss[i % ss.size()] + " " + as[(i / ss.size()) % as.size()] + " item" + std::to_string(i);
        kb.triples.push_back(
            okbc::Triple{subject, "relates to", object, okbc::Polarity::positive, ""});
    }
    return kb;
}

}  // namespace fixtures
