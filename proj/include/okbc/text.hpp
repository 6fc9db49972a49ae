#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "okbc/common.hpp"
#include "okbc/kb.hpp"
#include "okbc/tokenize.hpp"

namespace okbc {

// Reserved ids. These stay fixed so checkpoints remain portable across
// vocabularies built with the same corpus and settings.
inline constexpr int kPadId = 0;
inline constexpr int kStartId = 1;
inline constexpr int kEndId = 2;
inline constexpr int kUnkId = 3;

inline const std::vector<std::string>& special_tokens() {
    static const std::vector<std::string> specials = {"[pad]", "[start]", "[end]", "[UNK]"};
    return specials;
}

// Bijective token <-> id map with ids contiguous from 0 and the four special
// tokens pinned to ids 0-3.
class Vocabulary {
public:
    Vocabulary() {
        for (const std::string& s : special_tokens()) append(s);
    }

    static Vocabulary from_tokens(const std::vector<std::string>& corpus_tokens) {
        Vocabulary v;
        for (const std::string& t : corpus_tokens) v.append(t);
        return v;
    }

    std::size_t size() const { return id_to_token_.size(); }

    int id_of(const std::string& token) const {
        auto it = token_to_id_.find(token);
        return it == token_to_id_.end() ? kUnkId : it->second;
    }

    bool contains(const std::string& token) const { return token_to_id_.count(token) > 0; }

    const std::string& token_of(int id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
            throw InputError("token id " + std::to_string(id) + " out of range (vocab size " +
                             std::to_string(id_to_token_.size()) + ")");
        return id_to_token_[static_cast<std::size_t>(id)];
    }

    const std::vector<std::string>& tokens() const { return id_to_token_; }

    bool operator==(const Vocabulary& other) const { return id_to_token_ == other.id_to_token_; }

    void append(const std::string& token) {
        if (token_to_id_.count(token))
            throw InputError("duplicate token in vocabulary: '" + token + "'");
        token_to_id_.emplace(token, static_cast<int>(id_to_token_.size()));
        id_to_token_.push_back(token);
    }

private:
    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
};

// Tokens with corpus frequency >= min_freq, ranked by (frequency desc, token
// asc), truncated to max_size - 4 corpus tokens after the specials.
inline Vocabulary build_vocab(const KnowledgeBase& kb, std::size_t min_freq, std::size_t max_size) {
    if (kb.triples.empty()) throw InputError("build_vocab: KB is empty");
    if (min_freq < 1) throw InputError("build_vocab: min_freq must be >= 1");
    if (max_size < special_tokens().size()) throw InputError("build_vocab: max_size too small");
    std::unordered_map<std::string, std::size_t> freq;
    for (const Triple& t : kb.triples) {
        for (const std::string& phrase : {t.subject, t.predicate, t.object}) {
            for (const std::string& tok : tokenize(phrase)) ++freq[tok];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked;
    ranked.reserve(freq.size());
    for (auto& [tok, count] : freq) {
        if (count < min_freq) continue;
        bool is_special = false;
        for (const std::string& s : special_tokens())
            if (tok == s) is_special = true;
        if (!is_special) ranked.emplace_back(tok, count);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    const std::size_t keep = std::min(ranked.size(), max_size - special_tokens().size());
    Vocabulary vocab;
    for (std::size_t i = 0; i < keep; ++i) vocab.append(ranked[i].first);
    return vocab;
}

// Vocabulary file: one token per line, line number = id.
inline std::string serialize_vocab(const Vocabulary& vocab) {
    std::string out;
    for (const std::string& tok : vocab.tokens()) {
        out += tok;
        out += '\n';
    }
    return out;
}

inline void write_vocab(const Vocabulary& vocab, const std::string& path) {
    atomic_write_file(path, serialize_vocab(vocab));
}

inline Vocabulary load_vocab(const std::string& path) {
    const std::string content = read_text_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        std::string line = content.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    if (lines.size() < special_tokens().size())
        throw InputError("vocabulary file too short: " + path);
    for (std::size_t i = 0; i < special_tokens().size(); ++i)
        if (lines[i] != special_tokens()[i])
            throw InputError("vocabulary file " + path + ": line " + std::to_string(i + 1) +
                             " must be " + special_tokens()[i]);
    Vocabulary vocab;
    for (std::size_t i = special_tokens().size(); i < lines.size(); ++i) {
        if (lines[i].empty())
            throw InputError("vocabulary file " + path + ": empty token at line " + std::to_string(i + 1));
        vocab.append(lines[i]);
    }
    return vocab;
}

// Fixed-length encoding of one triple: the input side is the concatenated
// subject and predicate tokens, the target side is [start] object [end].
// Both sides are right-padded to exactly n ids; masks mark real positions.
struct EncodedPair {
    std::vector<int> input_ids;
    std::vector<int> target_ids;
    std::vector<std::uint8_t> input_real;   // 1 = non-pad
    std::vector<std::uint8_t> target_real;  // 1 = non-pad
};

inline EncodedPair encode_pair(const Triple& triple, const Vocabulary& vocab, std::size_t n) {
    if (n < 3) throw InputError("encode_pair: n must be >= 3");
    EncodedPair pair;
    pair.input_ids.assign(n, kPadId);
    pair.target_ids.assign(n, kPadId);
    pair.input_real.assign(n, 0);
    pair.target_real.assign(n, 0);

    std::vector<std::string> input_tokens = tokenize(triple.subject);
    for (const std::string& tok : tokenize(triple.predicate)) input_tokens.push_back(tok);
    const std::size_t in_len = std::min(input_tokens.size(), n);
    for (std::size_t i = 0; i < in_len; ++i) {
        pair.input_ids[i] = vocab.id_of(input_tokens[i]);
        pair.input_real[i] = 1;
    }

    std::vector<std::string> object_tokens = tokenize(triple.object);
    if (object_tokens.size() > n - 2) object_tokens.resize(n - 2);
    pair.target_ids[0] = kStartId;
    pair.target_real[0] = 1;
    for (std::size_t i = 0; i < object_tokens.size(); ++i) {
        pair.target_ids[i + 1] = vocab.id_of(object_tokens[i]);
        pair.target_real[i + 1] = 1;
    }
    pair.target_ids[object_tokens.size() + 1] = kEndId;
    pair.target_real[object_tokens.size() + 1] = 1;
    return pair;
}

// Joins tokens with single spaces, stopping before the first [pad]. Special
// tokens are kept verbatim, matching how decoded sequences are displayed.
inline std::string decode_ids(const std::vector<int>& ids, const Vocabulary& vocab) {
    std::string out;
    for (int id : ids) {
        if (id == kPadId) break;
        if (!out.empty()) out += ' ';
        out += vocab.token_of(id);
    }
    return out;
}

}  // namespace okbc
