#pragma once

#include <bit>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "okbc/common.hpp"
#include "okbc/transformer.hpp"

namespace okbc {

// Checkpoint container: a text manifest (format version, model config, the
// named tensor list with shapes) followed by the raw values as little-endian
// 64-bit floats in manifest order, row-major. The encoding is fully
// deterministic, so save -> load -> save reproduces the file byte for byte.

inline constexpr const char* kCheckpointMagic = "okbc-checkpoint v1";

namespace detail {

inline void append_f64_le(std::string& out, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

inline double read_f64_le(const std::string& data, std::size_t offset) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[offset + b])) << (8 * b);
    return std::bit_cast<double>(bits);
}

inline std::size_t parse_size_field(const std::string& line, const std::string& key) {
    if (!line.starts_with(key + "="))
        throw InputError("checkpoint manifest: expected '" + key + "=', got: " + line);
    try {
        return static_cast<std::size_t>(std::stoull(line.substr(key.size() + 1)));
    } catch (const std::exception&) {
        throw InputError("checkpoint manifest: bad value in line: " + line);
    }
}

}  // namespace detail

inline std::string serialize_checkpoint(const ModelConfig& cfg, const TransformerParams& params) {
    std::ostringstream manifest;
    manifest << kCheckpointMagic << '\n';
    manifest << "max_seq_len=" << cfg.max_seq_len << '\n';
    manifest << "model_dim=" << cfg.model_dim << '\n';
    manifest << "ffn_dim=" << cfg.ffn_dim << '\n';
    manifest << "num_heads=" << cfg.num_heads << '\n';
    manifest << "num_blocks=" << cfg.num_blocks << '\n';
    manifest << "vocab_size=" << cfg.vocab_size << '\n';
    manifest << "positional=" << (cfg.positional == PositionalEncoding::learned ? "learned" : "sinusoidal")
             << '\n';
    std::size_t tensor_count = 0;
    params.for_each([&](const std::string&, const Tensor&) { ++tensor_count; });
    manifest << "tensors=" << tensor_count << '\n';
    params.for_each([&](const std::string& name, const Tensor& t) {
        manifest << name << ' ' << t.ndim();
        for (std::size_t i = 0; i < t.ndim(); ++i) manifest << ' ' << t.dim(i);
        manifest << '\n';
    });
    manifest << "binary\n";
    std::string out = manifest.str();
    params.for_each([&](const std::string&, const Tensor& t) {
        for (std::size_t i = 0; i < t.numel(); ++i) detail::append_f64_le(out, t[i]);
    });
    return out;
}

inline void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                            const TransformerParams& params) {
    atomic_write_file(path, serialize_checkpoint(cfg, params));
}

struct Checkpoint {
    ModelConfig config;
    TransformerParams params;
};

inline Checkpoint parse_checkpoint(const std::string& data, const std::string& origin) {
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        if (pos >= data.size()) throw InputError("checkpoint " + origin + ": truncated manifest");
        std::size_t end = data.find('\n', pos);
        if (end == std::string::npos) throw InputError("checkpoint " + origin + ": truncated manifest");
        std::string line = data.substr(pos, end - pos);
        pos = end + 1;
        return line;
    };

    if (next_line() != kCheckpointMagic)
        throw InputError("checkpoint " + origin + ": unsupported version or not a checkpoint file");
    ModelConfig cfg;
    cfg.max_seq_len = detail::parse_size_field(next_line(), "max_seq_len");
    cfg.model_dim = detail::parse_size_field(next_line(), "model_dim");
    cfg.ffn_dim = detail::parse_size_field(next_line(), "ffn_dim");
    cfg.num_heads = detail::parse_size_field(next_line(), "num_heads");
    cfg.num_blocks = detail::parse_size_field(next_line(), "num_blocks");
    cfg.vocab_size = detail::parse_size_field(next_line(), "vocab_size");
    {
        const std::string line = next_line();
        if (line == "positional=sinusoidal") {
            cfg.positional = PositionalEncoding::sinusoidal;
        } else if (line == "positional=learned") {
            cfg.positional = PositionalEncoding::learned;
        } else {
            throw InputError("checkpoint " + origin + ": bad positional line: " + line);
        }
    }
    cfg.validate();
    const std::size_t tensor_count = detail::parse_size_field(next_line(), "tensors");

    struct Entry {
        std::string name;
        std::vector<std::size_t> shape;
    };
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < tensor_count; ++i) {
        std::istringstream line(next_line());
        Entry e;
        std::size_t ndim = 0;
        if (!(line >> e.name >> ndim))
            throw InputError("checkpoint " + origin + ": malformed tensor entry " + std::to_string(i));
        e.shape.resize(ndim);
        for (std::size_t k = 0; k < ndim; ++k)
            if (!(line >> e.shape[k]))
                throw InputError("checkpoint " + origin + ": malformed shape for " + e.name);
        entries.push_back(std::move(e));
    }
    if (next_line() != "binary")
        throw InputError("checkpoint " + origin + ": missing binary section marker");

    // The manifest must enumerate exactly the tensors the config implies,
    // with the shapes the config implies.
    Checkpoint ckpt{cfg, zero_params(cfg)};
    std::size_t index = 0;
    std::size_t total_values = 0;
    ckpt.params.for_each([&](const std::string& name, const Tensor& t) {
        if (index >= entries.size())
            throw InputError("checkpoint " + origin + ": manifest missing tensor " + name);
        if (entries[index].name != name)
            throw InputError("checkpoint " + origin + ": expected tensor " + name + ", found " +
                             entries[index].name);
        if (entries[index].shape != t.shape())
            throw InputError("checkpoint " + origin + ": shape mismatch for " + name);
        total_values += t.numel();
        ++index;
    });
    if (index != entries.size())
        throw InputError("checkpoint " + origin + ": manifest lists unexpected extra tensors");

    if (data.size() - pos != total_values * 8)
        throw InputError("checkpoint " + origin + ": binary payload size mismatch (truncated or corrupt)");

    ckpt.params.for_each([&](const std::string& name, Tensor& t) {
        for (std::size_t i = 0; i < t.numel(); ++i) {
            t[i] = detail::read_f64_le(data, pos);
            pos += 8;
        }
        if (!t.all_finite())
            throw InputError("checkpoint " + origin + ": non-finite values in tensor " + name);
    });
    return ckpt;
}

inline Checkpoint load_checkpoint(const std::string& path) {
    return parse_checkpoint(read_text_file(path), path);
}

}  // namespace okbc
