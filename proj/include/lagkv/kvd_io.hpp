// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lagkv/cache.hpp"

// KVD cache dump, little-endian throughout:
//
//   magic "KVD1" (4 bytes)
//   version   u32 = 1
//   n_layers  u32
//   h_kv      u32
//   d_h       u32
//   per layer:
//     seq_len u32
//     per head:
//       positions  seq_len x u32
//       K          seq_len x d_h x f32, row-major
//       V          seq_len x d_h x f32, row-major
//
// Payloads are IEEE-754 binary32; in-memory matrices are binary64, so a
// save -> load -> save round trip is byte-exact.

namespace lagkv {

enum class KvdErrorKind {
    BadMagic,
    Truncated,
    DimMismatch,
};

/// Malformed KVD content. The kind distinguishes the three failure classes.
class KvdError : public std::runtime_error {
public:
    KvdError(KvdErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    KvdErrorKind kind() const { return kind_; }

private:
    KvdErrorKind kind_;
};

/// Filesystem-level failure (cannot open / cannot write), as opposed to
/// malformed content.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void save_kvd(const std::vector<LayerCache>& layers, const std::string& path);
std::vector<LayerCache> load_kvd(const std::string& path);

}  // namespace lagkv
