#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "gradlab/errors.hpp"
#include "gradlab/io_util.hpp"
#include "gradlab/model.hpp"

namespace gradlab {

// Checkpoint layout (little-endian):
//   magic "AGCK" | version u32 | kind u32 | input_dim u32 | output_dim u32 |
//   layer_count u32 | per layer { out u32, in u32 } | payload f64[]
// Payload is the flat parameter vector (per layer W row-major then b; coeff
// for analytic kinds). save -> load is bit-exact on parameters.

namespace detail {

constexpr std::uint32_t kCheckpointVersion = 1;

inline void put_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32_le(const std::string& bytes, std::size_t& pos,
                                const std::string& path) {
    if (pos + 4 > bytes.size())
        throw checkpoint_error(path + ": truncated header at byte " + std::to_string(pos));
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 4;
    return v;
}

}  // namespace detail

inline void save_checkpoint(const Model& model, const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint writer assumes a little-endian host");
    std::string bytes = "AGCK";
    detail::put_u32_le(bytes, detail::kCheckpointVersion);
    detail::put_u32_le(bytes, static_cast<std::uint32_t>(model.kind));
    detail::put_u32_le(bytes, static_cast<std::uint32_t>(model.input_dim));
    detail::put_u32_le(bytes, static_cast<std::uint32_t>(model.output_dim));
    if (model.kind == ModelKind::mlp) {
        detail::put_u32_le(bytes, static_cast<std::uint32_t>(model.layers.size()));
        for (const Layer& l : model.layers) {
            detail::put_u32_le(bytes, static_cast<std::uint32_t>(l.out));
            detail::put_u32_le(bytes, static_cast<std::uint32_t>(l.in));
        }
    } else {
        detail::put_u32_le(bytes, 1);
        detail::put_u32_le(bytes, 1);
        detail::put_u32_le(bytes, static_cast<std::uint32_t>(model.coeff.size()));
    }
    const std::vector<double> params = model.parameters();
    const std::size_t payload = params.size() * sizeof(double);
    const std::size_t head = bytes.size();
    bytes.resize(head + payload);
    std::memcpy(bytes.data() + head, params.data(), payload);
    atomic_write_file(path, bytes);
}

inline Model load_checkpoint(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    const std::string name = path.string();
    if (bytes.size() < 4 || bytes.compare(0, 4, "AGCK") != 0)
        throw checkpoint_error(name + ": bad magic (expected AGCK)");
    std::size_t pos = 4;
    const std::uint32_t version = detail::get_u32_le(bytes, pos, name);
    if (version != detail::kCheckpointVersion)
        throw checkpoint_error(name + ": unsupported version " + std::to_string(version));
    const std::uint32_t kind_raw = detail::get_u32_le(bytes, pos, name);
    if (kind_raw > 3) throw checkpoint_error(name + ": unknown model kind tag");
    const auto kind = static_cast<ModelKind>(kind_raw);
    const std::uint32_t input_dim = detail::get_u32_le(bytes, pos, name);
    const std::uint32_t output_dim = detail::get_u32_le(bytes, pos, name);
    const std::uint32_t layer_count = detail::get_u32_le(bytes, pos, name);

    Model m;
    m.kind = kind;
    m.input_dim = input_dim;
    m.output_dim = output_dim;

    std::size_t param_count = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> dims(layer_count);
    for (auto& [out, in] : dims) {
        out = detail::get_u32_le(bytes, pos, name);
        in = detail::get_u32_le(bytes, pos, name);
    }
    if (kind == ModelKind::mlp) {
        for (auto& [out, in] : dims) param_count += std::size_t(out) * in + out;
    } else {
        if (layer_count != 1) throw checkpoint_error(name + ": analytic kind expects one block");
        param_count = dims[0].second;
    }

    if (bytes.size() != pos + param_count * sizeof(double))
        throw checkpoint_error(name + ": payload size mismatch at byte " + std::to_string(pos));
    std::vector<double> params(param_count);
    std::memcpy(params.data(), bytes.data() + pos, param_count * sizeof(double));

    if (kind == ModelKind::mlp) {
        std::size_t cursor = 0;
        std::uint32_t expect_in = input_dim;
        for (auto& [out, in] : dims) {
            if (in != expect_in)
                throw checkpoint_error(name + ": layer dimensions do not chain");
            Layer l;
            l.out = out;
            l.in = in;
            l.w.assign(params.begin() + cursor, params.begin() + cursor + std::size_t(out) * in);
            cursor += std::size_t(out) * in;
            l.b.assign(params.begin() + cursor, params.begin() + cursor + out);
            cursor += out;
            m.layers.push_back(std::move(l));
            expect_in = out;
        }
        if (expect_in != output_dim)
            throw checkpoint_error(name + ": final layer does not match output dim");
    } else {
        m.coeff = std::move(params);
        if (kind == ModelKind::linear && m.coeff.size() != input_dim)
            throw checkpoint_error(name + ": linear coefficient count mismatch");
        if ((kind == ModelKind::quadratic || kind == ModelKind::sinusoid1d) &&
            m.coeff.size() != 1)
            throw checkpoint_error(name + ": analytic kind expects one coefficient");
        if (kind == ModelKind::sinusoid1d && input_dim != 1)
            throw checkpoint_error(name + ": sinusoid1d is one-dimensional");
    }
    return m;
}

}  // namespace gradlab
