#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "okbc/common.hpp"
#include "okbc/rng.hpp"
#include "okbc/tokenize.hpp"

namespace okbc {

enum class Polarity { positive, negative };

// One SPO record. Phrases never contain tabs or newlines (reserved by the
// TSV format) and are never empty; `source` is an optional origin tag.
struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;
    Polarity polarity = Polarity::positive;
    std::string source;

    bool operator==(const Triple& other) const {
        return subject == other.subject && predicate == other.predicate &&
               object == other.object && polarity == other.polarity && source == other.source;
    }
};

struct FileDescriptor {
    std::string path;
    std::size_t triple_count = 0;
};

// Immutable after construction; ordering is part of the value and survives
// serialization round-trips.
struct KnowledgeBase {
    std::string name;
    std::vector<Triple> triples;
    std::vector<FileDescriptor> provenance;

    std::size_t size() const { return triples.size(); }
    std::size_t count(Polarity p) const {
        std::size_t n = 0;
        for (const Triple& t : triples)
            if (t.polarity == p) ++n;
        return n;
    }
};

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw InputError("train_fraction must lie strictly between 0 and 1");
    }
};

namespace detail {

inline void validate_phrase(const std::string& phrase, const char* field, std::size_t line_no) {
    if (trim(phrase).empty())
        throw InputError("line " + std::to_string(line_no) + ": empty " + std::string(field) + " field");
    if (phrase.find('\t') != std::string::npos || phrase.find('\n') != std::string::npos)
        throw InputError("line " + std::to_string(line_no) + ": " + std::string(field) +
                         " contains a reserved tab or newline character");
}

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            cols.push_back(line.substr(start));
            break;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return cols;
}

// Dedup key: whitespace-normalized, case-preserving (subject, predicate,
// object, polarity). `source` intentionally excluded.
inline std::string dedup_key(const Triple& t) {
    return normalize_whitespace(t.subject) + '\t' + normalize_whitespace(t.predicate) + '\t' +
           normalize_whitespace(t.object) + '\t' + (t.polarity == Polarity::positive ? '1' : '0');
}

inline std::string spo_key(const Triple& t) {
    return t.subject + '\t' + t.predicate + '\t' + t.object;
}

}  // namespace detail

enum class KbFormat { tsv };

// Parses the triple TSV format: subject \t predicate \t object \t polarity
// with an optional fifth source column. Polarity 1 means positive, 0 negative.
inline KnowledgeBase parse_kb(const std::string& path, KbFormat format = KbFormat::tsv,
                              bool skip_header = false) {
    if (format != KbFormat::tsv) throw InputError("unsupported KB format");
    const std::string content = read_text_file(path);
    KnowledgeBase kb;
    kb.name = path;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        std::string line = content.substr(start, end - start);
        start = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
        if (line_no == 1 && skip_header) continue;
        if (line.empty()) {
            // Allow the conventional trailing newline; blank interior lines are errors.
            if (start > content.size()) break;
            throw InputError("line " + std::to_string(line_no) + ": blank line");
        }
        std::vector<std::string> cols = detail::split_tabs(line);
        if (cols.size() != 4 && cols.size() != 5)
            throw InputError("line " + std::to_string(line_no) + ": expected 4 or 5 tab-separated columns, got " +
                             std::to_string(cols.size()));
        Triple t;
        t.subject = cols[0];
        t.predicate = cols[1];
        t.object = cols[2];
        detail::validate_phrase(t.subject, "subject", line_no);
        detail::validate_phrase(t.predicate, "predicate", line_no);
        detail::validate_phrase(t.object, "object", line_no);
        if (cols[3] == "1") {
            t.polarity = Polarity::positive;
        } else if (cols[3] == "0") {
            t.polarity = Polarity::negative;
        } else {
            throw InputError("line " + std::to_string(line_no) + ": invalid polarity value '" + cols[3] +
                             "' (expected 1 or 0)");
        }
        if (cols.size() == 5) {
            if (trim(cols[4]).empty())
                throw InputError("line " + std::to_string(line_no) + ": empty source column");
            t.source = cols[4];
        }
        kb.triples.push_back(std::move(t));
    }
    kb.provenance.push_back({path, kb.triples.size()});
    return kb;
}

inline std::string serialize_kb(const KnowledgeBase& kb) {
    std::string out;
    for (const Triple& t : kb.triples) {
        out += t.subject;
        out += '\t';
        out += t.predicate;
        out += '\t';
        out += t.object;
        out += '\t';
        out += (t.polarity == Polarity::positive ? '1' : '0');
        if (!t.source.empty()) {
            out += '\t';
            out += t.source;
        }
        out += '\n';
    }
    return out;
}

inline void write_kb(const KnowledgeBase& kb, const std::string& path) {
    atomic_write_file(path, serialize_kb(kb));
}

// Stopword file: UTF-8, one lowercase token per line.
inline std::unordered_set<std::string> load_stopwords(const std::string& path) {
    const std::string content = read_text_file(path);
    std::unordered_set<std::string> words;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        const std::string w = trim(line);
        if (!w.empty()) words.insert(w);
    }
    return words;
}

// Removes triples whose subject or object consists entirely of stopword
// tokens (case-insensitive). Predicates are left alone: a stopword-only
// predicate still relates two real phrases.
inline KnowledgeBase filter_stopword_only(const KnowledgeBase& kb,
                                          const std::unordered_set<std::string>& stopwords) {
    if (stopwords.empty()) throw InputError("stopword set must be nonempty");
    auto all_stopwords = [&](const std::string& phrase) {
        const std::vector<std::string> tokens = tokenize(phrase);
        if (tokens.empty()) return true;
        for (const std::string& tok : tokens)
            if (!stopwords.count(tok)) return false;
        return true;
    };
    KnowledgeBase out;
    out.name = kb.name;
    out.provenance = kb.provenance;
    for (const Triple& t : kb.triples)
        if (!all_stopwords(t.subject) && !all_stopwords(t.object)) out.triples.push_back(t);
    return out;
}

// Concatenates the inputs and drops exact duplicates (same subject,
// predicate, object and polarity after whitespace normalization). First
// occurrence wins, so relative order is preserved.
inline KnowledgeBase merge(const std::vector<KnowledgeBase>& kbs, const std::string& name) {
    if (kbs.empty()) throw InputError("merge: need at least one input KB");
    KnowledgeBase out;
    out.name = name;
    std::unordered_set<std::string> seen;
    for (const KnowledgeBase& kb : kbs) {
        for (const FileDescriptor& fd : kb.provenance) out.provenance.push_back(fd);
        for (const Triple& t : kb.triples)
            if (seen.insert(detail::dedup_key(t)).second) out.triples.push_back(t);
    }
    return out;
}

// Seeded uniform shuffle followed by a partition; round-half-up on the train
// size. Same seed, same split.
inline std::pair<KnowledgeBase, KnowledgeBase> split(const KnowledgeBase& kb, const SplitSpec& spec) {
    spec.validate();
    if (kb.size() < 2) throw InputError("split: KB must contain at least 2 triples");
    std::vector<std::size_t> order(kb.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(spec.seed);
    rng.shuffle(order);
    const std::size_t train_size =
        static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(kb.size()) + 0.5));
    KnowledgeBase train, test;
    train.name = kb.name + ".train";
    test.name = kb.name + ".test";
    train.provenance = kb.provenance;
    test.provenance = kb.provenance;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < train_size ? train : test).triples.push_back(kb.triples[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

// Artificial semantic perturbations: three operators chosen uniformly per
// emission — subject/object swap, object replaced from another triple,
// subject replaced likewise. Emitted triples are negative and are rejection-
// resampled (up to 100 attempts) so none coincides with a positive.
inline KnowledgeBase generate_negatives(const KnowledgeBase& kb, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0)) throw InputError("negative ratio must be positive");
    std::unordered_set<std::string> positive_keys;
    std::unordered_set<std::string> distinct_objects;
    for (const Triple& t : kb.triples) {
        if (t.polarity != Polarity::positive)
            throw InputError("generate_negatives: input KB contains negative triples");
        positive_keys.insert(detail::spo_key(t));
        distinct_objects.insert(t.object);
    }
    if (distinct_objects.size() < 2)
        throw InputError("generate_negatives: need at least 2 distinct objects");

    const std::size_t target =
        static_cast<std::size_t>(std::floor(ratio * static_cast<double>(kb.size()) + 0.5));
    Rng rng(seed);
    KnowledgeBase out;
    out.name = kb.name + ".negatives";
    out.provenance = kb.provenance;
    out.triples.reserve(target);
    for (std::size_t emitted = 0; emitted < target; ++emitted) {
        bool accepted = false;
        for (int attempt = 0; attempt < 100 && !accepted; ++attempt) {
            const Triple& base = kb.triples[rng.uniform_index(kb.size())];
            Triple cand = base;
            cand.polarity = Polarity::negative;
            switch (rng.uniform_index(3)) {
                case 0:
                    std::swap(cand.subject, cand.object);
                    break;
                case 1:
                    cand.object = kb.triples[rng.uniform_index(kb.size())].object;
                    break;
                default:
                    cand.subject = kb.triples[rng.uniform_index(kb.size())].subject;
                    break;
            }
            if (!positive_keys.count(detail::spo_key(cand))) {
                out.triples.push_back(std::move(cand));
                accepted = true;
            }
        }
        // After 100 rejections this slot is skipped rather than forced.
    }
    return out;
}

}  // namespace okbc
