#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gradlab/errors.hpp"
#include "gradlab/io_util.hpp"
#include "gradlab/tensor.hpp"

namespace gradlab {

struct Dataset {
    std::vector<Tensor> images;
    std::vector<std::uint8_t> labels;
    DataRange range{0.0, 1.0};

    std::size_t size() const { return images.size(); }
};

namespace detail {

class IdxReader {
  public:
    IdxReader(const std::filesystem::path& path) : path_(path.string()), in_(path, std::ios::binary) {
        if (!in_) throw format_error("cannot open " + path_);
    }

    std::uint32_t read_u32_be() {
        unsigned char b[4];
        if (!in_.read(reinterpret_cast<char*>(b), 4))
            throw format_error(path_ + ": truncated at byte offset " + std::to_string(offset_));
        offset_ += 4;
        return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
               (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
    }

    void read_bytes(std::uint8_t* dst, std::size_t n) {
        if (!in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n)))
            throw format_error(path_ + ": truncated at byte offset " + std::to_string(offset_));
        offset_ += n;
    }

    std::size_t offset() const { return offset_; }
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ifstream in_;
    std::size_t offset_ = 0;
};

}  // namespace detail

// IDX image/label pair (big-endian, magics 0x00000803 / 0x00000801).
// Pixels are scaled to [0,1]; that fixes DataRange = [0,1].
inline Dataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
    detail::IdxReader imgs(images_path);
    const std::uint32_t img_magic = imgs.read_u32_be();
    if (img_magic != 0x00000803u)
        throw format_error(imgs.path() + ": bad image magic 0x" + [&] {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%08x", img_magic);
            return std::string(buf);
        }() + " at byte offset 0");
    const std::uint32_t count = imgs.read_u32_be();
    const std::uint32_t rows = imgs.read_u32_be();
    const std::uint32_t cols = imgs.read_u32_be();
    if (rows == 0 || cols == 0)
        throw format_error(imgs.path() + ": zero image dimensions at byte offset 8");

    detail::IdxReader labs(labels_path);
    const std::uint32_t lab_magic = labs.read_u32_be();
    if (lab_magic != 0x00000801u)
        throw format_error(labs.path() + ": bad label magic at byte offset 0");
    const std::uint32_t lab_count = labs.read_u32_be();
    if (lab_count != count)
        throw format_error(labs.path() + ": label count " + std::to_string(lab_count) +
                           " does not match image count " + std::to_string(count));

    Dataset ds;
    ds.range = DataRange(0.0, 1.0);
    ds.images.reserve(count);
    ds.labels.resize(count);

    std::vector<std::uint8_t> raw(static_cast<std::size_t>(rows) * cols);
    for (std::uint32_t i = 0; i < count; ++i) {
        imgs.read_bytes(raw.data(), raw.size());
        std::vector<double> pixels(raw.size());
        for (std::size_t p = 0; p < raw.size(); ++p) pixels[p] = raw[p] / 255.0;
        ds.images.emplace_back(std::vector<std::size_t>{rows, cols}, std::move(pixels));
    }
    labs.read_bytes(ds.labels.data(), count);
    for (std::uint32_t i = 0; i < count; ++i)
        if (ds.labels[i] > 9)
            throw format_error(labs.path() + ": label byte " + std::to_string(ds.labels[i]) +
                               " > 9 at byte offset " + std::to_string(8 + i));
    return ds;
}

// Writers for the synthetic corpus and tests; emit the same format we read.
inline void save_idx_images(const std::filesystem::path& path,
                            const std::vector<std::vector<std::uint8_t>>& images,
                            std::uint32_t rows, std::uint32_t cols) {
    std::string bytes;
    auto put_u32 = [&bytes](std::uint32_t v) {
        bytes.push_back(static_cast<char>((v >> 24) & 0xFF));
        bytes.push_back(static_cast<char>((v >> 16) & 0xFF));
        bytes.push_back(static_cast<char>((v >> 8) & 0xFF));
        bytes.push_back(static_cast<char>(v & 0xFF));
    };
    put_u32(0x00000803u);
    put_u32(static_cast<std::uint32_t>(images.size()));
    put_u32(rows);
    put_u32(cols);
    for (const auto& img : images) {
        if (img.size() != static_cast<std::size_t>(rows) * cols)
            throw shape_error("image byte count does not match rows*cols");
        bytes.append(reinterpret_cast<const char*>(img.data()), img.size());
    }
    atomic_write_file(path, bytes);
}

inline void save_idx_labels(const std::filesystem::path& path,
                            const std::vector<std::uint8_t>& labels) {
    std::string bytes;
    auto put_u32 = [&bytes](std::uint32_t v) {
        bytes.push_back(static_cast<char>((v >> 24) & 0xFF));
        bytes.push_back(static_cast<char>((v >> 16) & 0xFF));
        bytes.push_back(static_cast<char>((v >> 8) & 0xFF));
        bytes.push_back(static_cast<char>(v & 0xFF));
    };
    put_u32(0x00000801u);
    put_u32(static_cast<std::uint32_t>(labels.size()));
    bytes.append(reinterpret_cast<const char*>(labels.data()), labels.size());
    atomic_write_file(path, bytes);
}

}  // namespace gradlab
