// SPDX-License-Identifier: Apache-2.0

#include "lagkv/kvd_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "KVD writer assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace lagkv {

namespace {

constexpr char kMagic[4] = {'K', 'V', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) {
        throw KvdError(KvdErrorKind::Truncated, "truncated payload");
    }
    return v;
}

void put_matrix_f32(std::ostream& os, const Matrix& m) {
    std::vector<float> buf(m.data.size());
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        buf[i] = static_cast<float>(m.data[i]);
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Matrix get_matrix_f32(std::istream& is, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    std::vector<float> buf(rows * cols);
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!is) {
        throw KvdError(KvdErrorKind::Truncated, "truncated payload");
    }
    for (std::size_t i = 0; i < buf.size(); ++i) {
        m.data[i] = static_cast<double>(buf[i]);
    }
    return m;
}

}  // namespace

void save_kvd(const std::vector<LayerCache>& layers, const std::string& path) {
    std::uint32_t h_kv = 0;
    std::uint32_t d_h = 0;
    if (!layers.empty()) {
        h_kv = static_cast<std::uint32_t>(layers.front().num_heads());
        d_h = static_cast<std::uint32_t>(layers.front().head_dim());
        if (h_kv == 0 || d_h == 0) {
            throw KvdError(KvdErrorKind::DimMismatch,
                           "layers need at least one head and one channel");
        }
        for (const LayerCache& layer : layers) {
            if (layer.num_heads() != h_kv) {
                throw KvdError(KvdErrorKind::DimMismatch,
                               "layers disagree in head count");
            }
            for (const HeadCache& head : layer.heads) {
                if (head.head_dim() != d_h || head.V.cols != d_h ||
                    head.K.rows != head.V.rows ||
                    head.K.rows != head.positions.size() ||
                    head.size() != layer.seq_len()) {
                    throw KvdError(KvdErrorKind::DimMismatch,
                                   "head shapes disagree");
                }
            }
        }
    }

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IoError("cannot open for writing: " + path);
    }
    os.write(kMagic, sizeof(kMagic));
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(layers.size()));
    put_u32(os, h_kv);
    put_u32(os, d_h);
    for (const LayerCache& layer : layers) {
        const auto seq = static_cast<std::uint32_t>(layer.seq_len());
        put_u32(os, seq);
        for (const HeadCache& head : layer.heads) {
            os.write(reinterpret_cast<const char*>(head.positions.data()),
                     static_cast<std::streamsize>(seq * sizeof(std::uint32_t)));
            put_matrix_f32(os, head.K);
            put_matrix_f32(os, head.V);
        }
    }
    os.flush();
    if (!os) {
        throw IoError("write failed: " + path);
    }
}

std::vector<LayerCache> load_kvd(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open: " + path);
    }
    char magic[4] = {};
    is.read(magic, sizeof(magic));
    if (!is) {
        throw KvdError(KvdErrorKind::Truncated, "truncated payload");
    }
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw KvdError(KvdErrorKind::BadMagic, "bad magic");
    }
    const std::uint32_t version = get_u32(is);
    if (version != kVersion) {
        throw KvdError(KvdErrorKind::BadMagic, "unsupported version");
    }
    const std::uint32_t n_layers = get_u32(is);
    const std::uint32_t h_kv = get_u32(is);
    const std::uint32_t d_h = get_u32(is);
    if (n_layers > 0 && (h_kv == 0 || d_h == 0)) {
        throw KvdError(KvdErrorKind::DimMismatch, "dimension mismatch");
    }

    std::vector<LayerCache> layers(n_layers);
    for (std::uint32_t li = 0; li < n_layers; ++li) {
        LayerCache& layer = layers[li];
        layer.layer_index = li;
        const std::uint32_t seq = get_u32(is);
        layer.heads.resize(h_kv);
        for (HeadCache& head : layer.heads) {
            head.positions.resize(seq);
            is.read(reinterpret_cast<char*>(head.positions.data()),
                    static_cast<std::streamsize>(seq * sizeof(std::uint32_t)));
            if (!is) {
                throw KvdError(KvdErrorKind::Truncated, "truncated payload");
            }
            head.K = get_matrix_f32(is, seq, d_h);
            head.V = get_matrix_f32(is, seq, d_h);
        }
    }
    return layers;
}

}  // namespace lagkv
