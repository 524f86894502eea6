// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Little-endian byte encoding shared by the .gemb, GKDC and GSLB containers.

#pragma once

#include "gkd/errors.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

namespace gkd {

class ByteWriter {
public:
    void bytes(std::string_view b) { out_.append(b); }
    void u16(std::uint16_t v) { put(v); }
    void u32(std::uint32_t v) { put(v); }
    void u64(std::uint64_t v) { put(v); }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }

    const std::string& str() const noexcept { return out_; }
    std::string take() { return std::move(out_); }

private:
    template <typename U>
    void put(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    std::string out_;
};

/// Bounds-checked reader. Every failure reports the offset where the read began.
class ByteReader {
public:
    ByteReader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

    std::string_view bytes(std::size_t n) {
        need(n, "bytes");
        auto v = data_.substr(pos_, n);
        pos_ += n;
        return v;
    }
    std::uint16_t u16() { return get<std::uint16_t>("u16"); }
    std::uint32_t u32() { return get<std::uint32_t>("u32"); }
    std::uint64_t u64() { return get<std::uint64_t>("u64"); }
    float f32() { return std::bit_cast<float>(get<std::uint32_t>("f32")); }
    double f64() { return std::bit_cast<double>(get<std::uint64_t>("f64")); }

    void expect_magic(std::string_view magic) {
        const std::size_t at = pos_;
        if (data_.size() - pos_ < magic.size() || data_.substr(pos_, magic.size()) != magic) {
            throw FormatError(what_ + ": bad magic, expected \"" + std::string(magic) + "\"", at);
        }
        pos_ += magic.size();
    }

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    bool at_end() const noexcept { return pos_ == data_.size(); }

    [[noreturn]] void fail(const std::string& msg) const { throw FormatError(what_ + ": " + msg, pos_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw FormatError(what_ + ": " + msg, at); }

private:
    void need(std::size_t n, const char* field) const {
        if (data_.size() - pos_ < n) {
            throw FormatError(what_ + ": truncated while reading " + field + " (need " + std::to_string(n) +
                                  " bytes, " + std::to_string(data_.size() - pos_) + " left)",
                              pos_);
        }
    }
    template <typename U>
    U get(const char* field) {
        need(sizeof(U), field);
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i));
        pos_ += sizeof(U);
        return v;
    }

    std::string_view data_;
    std::string what_;
    std::size_t pos_ = 0;
};

/// Whole-file helpers; throw InputError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace gkd
