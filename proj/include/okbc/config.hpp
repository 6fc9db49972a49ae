#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "okbc/common.hpp"
#include "okbc/train.hpp"
#include "okbc/transformer.hpp"

namespace okbc {

// One run = one key=value config file plus a seed; everything a training or
// evaluation command needs is resolved from here before any long-running
// work starts.
struct RunConfig {
    ModelConfig model;  // vocab_size is resolved from the vocabulary, not the file
    TrainConfig train;
    std::string train_kb;
    std::string heldout_kb;
    std::string vocab;           // existing vocabulary file; built from train_kb when empty
    std::string vocab_out;       // where a freshly built vocabulary is written
    std::string stopwords;
    std::string vectors;
    std::string checkpoint_out;
    std::string history_out;
    bool kb_header = false;
    std::size_t min_freq = 1;
    std::size_t max_vocab = 50000;
};

namespace detail {

inline std::map<std::string, std::string> parse_key_values(const std::string& path) {
    const std::string content = read_text_file(path);
    std::map<std::string, std::string> kv;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        std::string line = trim(content.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(path + ": line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw InputError(path + ": line " + std::to_string(line_no) + ": empty key");
        if (kv.count(key))
            throw InputError(path + ": line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

inline std::size_t to_size(const std::string& key, const std::string& value) {
    try {
        return static_cast<std::size_t>(std::stoull(value));
    } catch (const std::exception&) {
        throw InputError("config: bad integer for " + key + ": '" + value + "'");
    }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& value) {
    try {
        return std::stoull(value);
    } catch (const std::exception&) {
        throw InputError("config: bad integer for " + key + ": '" + value + "'");
    }
}

inline double to_real(const std::string& key, const std::string& value) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        throw InputError("config: bad number for " + key + ": '" + value + "'");
    }
}

inline bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw InputError("config: bad boolean for " + key + ": '" + value + "'");
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& path) {
    RunConfig rc;
    auto kv = detail::parse_key_values(path);
    auto take = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return {};
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("max_seq_len"); !v.empty()) rc.model.max_seq_len = detail::to_size("max_seq_len", v);
    if (auto v = take("model_dim"); !v.empty()) rc.model.model_dim = detail::to_size("model_dim", v);
    if (auto v = take("ffn_dim"); !v.empty()) rc.model.ffn_dim = detail::to_size("ffn_dim", v);
    if (auto v = take("num_heads"); !v.empty()) rc.model.num_heads = detail::to_size("num_heads", v);
    if (auto v = take("num_blocks"); !v.empty()) rc.model.num_blocks = detail::to_size("num_blocks", v);
    if (auto v = take("positional"); !v.empty()) {
        if (v == "sinusoidal") {
            rc.model.positional = PositionalEncoding::sinusoidal;
        } else if (v == "learned") {
            rc.model.positional = PositionalEncoding::learned;
        } else {
            throw InputError("config: positional must be 'sinusoidal' or 'learned', got '" + v + "'");
        }
    }

    if (auto v = take("learning_rate"); !v.empty()) rc.train.learning_rate = detail::to_real("learning_rate", v);
    if (auto v = take("batch_size"); !v.empty()) rc.train.batch_size = detail::to_size("batch_size", v);
    if (auto v = take("max_epochs"); !v.empty()) rc.train.max_epochs = detail::to_size("max_epochs", v);
    if (auto v = take("patience"); !v.empty()) rc.train.patience = detail::to_size("patience", v);
    if (auto v = take("seed"); !v.empty()) rc.train.seed = detail::to_u64("seed", v);
    if (auto v = take("adam_beta1"); !v.empty()) rc.train.adam_beta1 = detail::to_real("adam_beta1", v);
    if (auto v = take("adam_beta2"); !v.empty()) rc.train.adam_beta2 = detail::to_real("adam_beta2", v);
    if (auto v = take("adam_eps"); !v.empty()) rc.train.adam_eps = detail::to_real("adam_eps", v);

    rc.train_kb = take("train_kb");
    rc.heldout_kb = take("heldout_kb");
    rc.vocab = take("vocab");
    rc.vocab_out = take("vocab_out");
    rc.stopwords = take("stopwords");
    rc.vectors = take("vectors");
    rc.checkpoint_out = take("checkpoint_out");
    rc.history_out = take("history_out");
    if (auto v = take("header"); !v.empty()) rc.kb_header = detail::to_bool("header", v);
    if (auto v = take("min_freq"); !v.empty()) rc.min_freq = detail::to_size("min_freq", v);
    if (auto v = take("max_vocab"); !v.empty()) rc.max_vocab = detail::to_size("max_vocab", v);

    if (!kv.empty()) throw InputError(path + ": unknown config key '" + kv.begin()->first + "'");
    return rc;
}

// Resolved settings echoed into run manifests so outputs are reproducible
// from what they record.
inline std::string serialize_run_config(const RunConfig& rc) {
    std::ostringstream out;
    out << "max_seq_len=" << rc.model.max_seq_len << '\n';
    out << "model_dim=" << rc.model.model_dim << '\n';
    out << "ffn_dim=" << rc.model.ffn_dim << '\n';
    out << "num_heads=" << rc.model.num_heads << '\n';
    out << "num_blocks=" << rc.model.num_blocks << '\n';
    out << "positional=" << (rc.model.positional == PositionalEncoding::learned ? "learned" : "sinusoidal")
        << '\n';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", rc.train.learning_rate);
    out << "learning_rate=" << buf << '\n';
    out << "batch_size=" << rc.train.batch_size << '\n';
    out << "max_epochs=" << rc.train.max_epochs << '\n';
    out << "patience=" << rc.train.patience << '\n';
    out << "seed=" << rc.train.seed << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", rc.train.adam_beta1);
    out << "adam_beta1=" << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", rc.train.adam_beta2);
    out << "adam_beta2=" << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", rc.train.adam_eps);
    out << "adam_eps=" << buf << '\n';
    if (!rc.train_kb.empty()) out << "train_kb=" << rc.train_kb << '\n';
    if (!rc.heldout_kb.empty()) out << "heldout_kb=" << rc.heldout_kb << '\n';
    if (!rc.vocab.empty()) out << "vocab=" << rc.vocab << '\n';
    if (!rc.vocab_out.empty()) out << "vocab_out=" << rc.vocab_out << '\n';
    if (!rc.stopwords.empty()) out << "stopwords=" << rc.stopwords << '\n';
    if (!rc.vectors.empty()) out << "vectors=" << rc.vectors << '\n';
    if (!rc.checkpoint_out.empty()) out << "checkpoint_out=" << rc.checkpoint_out << '\n';
    if (!rc.history_out.empty()) out << "history_out=" << rc.history_out << '\n';
    out << "header=" << (rc.kb_header ? "true" : "false") << '\n';
    out << "min_freq=" << rc.min_freq << '\n';
    out << "max_vocab=" << rc.max_vocab << '\n';
    return out.str();
}

inline void require_readable(const std::string& path, const char* what) {
    if (path.empty()) throw InputError(std::string("config: missing required path: ") + what);
    if (!std::filesystem::exists(path))
        throw InputError(std::string(what) + " file does not exist: " + path);
}

}  // namespace okbc
