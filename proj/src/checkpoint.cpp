// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/checkpoint.h"

#include "gkd/binary_io.h"

#include <cmath>

namespace gkd {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "GKDC";
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::string encode_checkpoint(const Checkpoint& checkpoint) {
    const ParameterSet& p = checkpoint.params;
    json manifest = json::array();
    for (std::size_t i = 0; i < p.size(); ++i) {
        check_finite(p.values[i], "checkpoint tensor " + p.names[i]);
        manifest.push_back({{"name", p.names[i]}, {"rows", p.values[i].rows()}, {"cols", p.values[i].cols()}});
    }
    const std::string meta = json{{"model", checkpoint.metadata}, {"tensors", manifest}}.dump();

    ByteWriter w;
    w.bytes(kMagic);
    w.u32(kVersion);
    w.u64(meta.size());
    w.bytes(meta);
    for (const Tensor& t : p.values)
        for (double v : t.data()) w.f64(v);
    return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    ByteReader r(bytes, "checkpoint");
    r.expect_magic(kMagic);
    const std::size_t version_at = r.offset();
    if (const auto version = r.u32(); version != kVersion) r.fail_at("unsupported version " + std::to_string(version), version_at);
    const std::uint64_t meta_len = r.u64();
    const std::size_t meta_at = r.offset();
    if (meta_len > r.remaining()) r.fail("truncated metadata (declared " + std::to_string(meta_len) + " bytes)");
    json doc;
    try {
        doc = json::parse(r.bytes(meta_len));
    } catch (const json::exception& e) {
        r.fail_at(std::string("malformed metadata: ") + e.what(), meta_at);
    }

    Checkpoint cp;
    try {
        cp.metadata = doc.at("model");
        for (const auto& entry : doc.at("tensors")) {
            const auto rows = entry.at("rows").get<std::size_t>();
            const auto cols = entry.at("cols").get<std::size_t>();
            Tensor t(rows, cols);
            for (double& v : t.data()) {
                const std::size_t at = r.offset();
                v = r.f64();
                if (!std::isfinite(v)) r.fail_at("non-finite tensor value", at);
            }
            cp.params.add(entry.at("name").get<std::string>(), std::move(t));
        }
    } catch (const json::exception& e) {
        r.fail_at(std::string("malformed metadata: ") + e.what(), meta_at);
    }
    if (!r.at_end()) r.fail("trailing bytes after tensor data");
    return cp;
}

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    write_file(path, encode_checkpoint(checkpoint));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace gkd
