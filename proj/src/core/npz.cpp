// This file is part of the gaitdiff project, a silhouette-domain video
// diffusion toolkit for gait sequence synthesis and evaluation.
//
// Copyright 2026 the gaitdiff authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/npz.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace gaitdiff {

namespace {

uint32_t crc32_update(uint32_t crc, const uint8_t* data, size_t n) {
    static const std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc = ~crc;
    for (size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return ~crc;
}

void put_u16(std::string& s, uint16_t v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& s, uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint16_t get_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t get_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

std::string npy_header(const std::string& dtype, const std::vector<int64_t>& shape) {
    std::ostringstream dict;
    dict << "{'descr': '" << dtype << "', 'fortran_order': False, 'shape': (";
    for (size_t i = 0; i < shape.size(); ++i) dict << shape[i] << (shape.size() == 1 ? "," : i + 1 < shape.size() ? ", " : "");
    dict << "), }";
    std::string body = dict.str();
    // Pad so magic(6)+version(2)+len(2)+header is 64-byte aligned, '\n' last.
    size_t total = 10 + body.size() + 1;
    size_t pad = (64 - total % 64) % 64;
    body.append(pad, ' ');
    body.push_back('\n');

    std::string out = "\x93NUMPY";
    out.push_back('\x01');
    out.push_back('\x00');
    put_u16(out, static_cast<uint16_t>(body.size()));
    out += body;
    return out;
}

size_t dtype_size(const std::string& d) {
    if (d == "<f4") return 4;
    if (d == "<f8" || d == "<u8" || d == "<i8") return 8;
    if (d == "|u1") return 1;
    throw parse_error("npz: unsupported dtype " + d);
}

// Parses the tiny python-dict header of an NPY member.
void parse_npy(const uint8_t* p, size_t n, NpzEntry& e) {
    if (n < 10 || std::memcmp(p, "\x93NUMPY", 6) != 0) throw parse_error("npz: bad npy magic");
    const uint16_t hlen = get_u16(p + 8);
    if (10 + static_cast<size_t>(hlen) > n) throw parse_error("npz: truncated npy header");
    std::string header(reinterpret_cast<const char*>(p) + 10, hlen);

    auto find_str = [&](const std::string& key) {
        size_t k = header.find("'" + key + "'");
        if (k == std::string::npos) throw parse_error("npz: missing key " + key);
        size_t q1 = header.find('\'', header.find(':', k));
        size_t q2 = header.find('\'', q1 + 1);
        return header.substr(q1 + 1, q2 - q1 - 1);
    };
    e.dtype = find_str("descr");
    if (header.find("'fortran_order': False") == std::string::npos)
        throw parse_error("npz: fortran-order arrays unsupported");

    size_t k = header.find("'shape'");
    size_t o = header.find('(', k);
    size_t c = header.find(')', o);
    std::string inner = header.substr(o + 1, c - o - 1);
    e.shape.clear();
    std::istringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::string trimmed;
        for (char ch : tok)
            if (!isspace(static_cast<unsigned char>(ch))) trimmed += ch;
        if (!trimmed.empty()) e.shape.push_back(std::stoll(trimmed));
    }

    const size_t payload = static_cast<size_t>(e.numel()) * dtype_size(e.dtype);
    if (10 + hlen + payload > n) throw parse_error("npz: truncated npy payload");
    e.bytes.assign(p + 10 + hlen, p + 10 + hlen + payload);
}

}  // namespace

void NpzWriter::add_raw(const std::string& name, const std::string& dtype,
                        std::vector<int64_t> shape, const uint8_t* data, size_t nbytes) {
    NpzEntry e;
    e.dtype = dtype;
    e.shape = std::move(shape);
    e.bytes.assign(data, data + nbytes);
    entries_.emplace_back(name, std::move(e));
}

void NpzWriter::add_f32(const std::string& name, std::span<const float> d, std::vector<int64_t> s) {
    add_raw(name, "<f4", std::move(s), reinterpret_cast<const uint8_t*>(d.data()), d.size_bytes());
}
void NpzWriter::add_f64(const std::string& name, std::span<const double> d, std::vector<int64_t> s) {
    add_raw(name, "<f8", std::move(s), reinterpret_cast<const uint8_t*>(d.data()), d.size_bytes());
}
void NpzWriter::add_u64(const std::string& name, std::span<const uint64_t> d) {
    add_raw(name, "<u8", {static_cast<int64_t>(d.size())}, reinterpret_cast<const uint8_t*>(d.data()),
            d.size_bytes());
}
void NpzWriter::add_i64(const std::string& name, std::span<const int64_t> d) {
    add_raw(name, "<i8", {static_cast<int64_t>(d.size())}, reinterpret_cast<const uint8_t*>(d.data()),
            d.size_bytes());
}
void NpzWriter::add_bytes(const std::string& name, std::span<const uint8_t> d) {
    add_raw(name, "|u1", {static_cast<int64_t>(d.size())}, d.data(), d.size_bytes());
}

void NpzWriter::save(const std::string& path) const {
    std::string out;
    std::string central;
    uint16_t count = 0;

    for (const auto& [name, e] : entries_) {
        const std::string member = name + ".npy";
        const std::string head = npy_header(e.dtype, e.shape);
        uint32_t crc = crc32_update(0, reinterpret_cast<const uint8_t*>(head.data()), head.size());
        crc = crc32_update(crc, e.bytes.data(), e.bytes.size());
        const uint32_t size = static_cast<uint32_t>(head.size() + e.bytes.size());
        const uint32_t offset = static_cast<uint32_t>(out.size());

        // Local file header, method 0 (store).
        put_u32(out, 0x04034b50u);
        put_u16(out, 20);
        put_u16(out, 0);
        put_u16(out, 0);
        put_u16(out, 0);
        put_u16(out, 0);
        put_u32(out, crc);
        put_u32(out, size);
        put_u32(out, size);
        put_u16(out, static_cast<uint16_t>(member.size()));
        put_u16(out, 0);
        out += member;
        out += head;
        out.append(reinterpret_cast<const char*>(e.bytes.data()), e.bytes.size());

        put_u32(central, 0x02014b50u);
        put_u16(central, 20);
        put_u16(central, 20);
        put_u16(central, 0);
        put_u16(central, 0);
        put_u16(central, 0);
        put_u16(central, 0);
        put_u32(central, crc);
        put_u32(central, size);
        put_u32(central, size);
        put_u16(central, static_cast<uint16_t>(member.size()));
        put_u16(central, 0);
        put_u16(central, 0);
        put_u16(central, 0);
        put_u16(central, 0);
        put_u32(central, 0);
        put_u32(central, offset);
        central += member;
        ++count;
    }

    const uint32_t central_offset = static_cast<uint32_t>(out.size());
    out += central;
    put_u32(out, 0x06054b50u);
    put_u16(out, 0);
    put_u16(out, 0);
    put_u16(out, count);
    put_u16(out, count);
    put_u32(out, static_cast<uint32_t>(central.size()));
    put_u32(out, central_offset);
    put_u16(out, 0);

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw io_error("cannot open for writing: " + tmp);
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!f) throw io_error("short write: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw io_error("rename failed: " + tmp + " -> " + path + ": " + ec.message());
}

NpzReader::NpzReader(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open archive: " + path);
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 22) throw parse_error("npz: file too small: " + path);

    // Walk local headers from the front; members were written with store
    // and accurate sizes, so no end-of-central-directory scan is needed.
    size_t p = 0;
    while (p + 4 <= buf.size() && get_u32(&buf[p]) == 0x04034b50u) {
        if (p + 30 > buf.size()) throw parse_error("npz: truncated local header");
        const uint16_t method = get_u16(&buf[p + 8]);
        const uint32_t size = get_u32(&buf[p + 18]);
        const uint16_t nlen = get_u16(&buf[p + 26]);
        const uint16_t xlen = get_u16(&buf[p + 28]);
        if (method != 0) throw parse_error("npz: compressed members unsupported");
        if (p + 30 + nlen + xlen + size > buf.size()) throw parse_error("npz: truncated member");
        std::string member(reinterpret_cast<const char*>(&buf[p + 30]), nlen);
        const uint8_t* payload = &buf[p + 30 + nlen + xlen];

        if (member.size() > 4 && member.substr(member.size() - 4) == ".npy") {
            NpzEntry e;
            parse_npy(payload, size, e);
            entries_[member.substr(0, member.size() - 4)] = std::move(e);
        }
        p += 30 + static_cast<size_t>(nlen) + xlen + size;
    }
    if (entries_.empty()) throw parse_error("npz: no members found: " + path);
}

const NpzEntry& NpzReader::get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw parse_error("npz: missing entry: " + name);
    return it->second;
}

std::vector<std::string> NpzReader::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [k, v] : entries_) out.push_back(k);
    return out;
}

namespace {
template <typename T>
std::vector<T> read_typed(const NpzEntry& e, const char* dtype, const std::string& name) {
    if (e.dtype != dtype) throw parse_error("npz: entry " + name + " has dtype " + e.dtype);
    std::vector<T> out(static_cast<size_t>(e.numel()));
    std::memcpy(out.data(), e.bytes.data(), e.bytes.size());
    return out;
}
}  // namespace

std::vector<float> NpzReader::read_f32(const std::string& n) const { return read_typed<float>(get(n), "<f4", n); }
std::vector<double> NpzReader::read_f64(const std::string& n) const { return read_typed<double>(get(n), "<f8", n); }
std::vector<uint64_t> NpzReader::read_u64(const std::string& n) const { return read_typed<uint64_t>(get(n), "<u8", n); }
std::vector<int64_t> NpzReader::read_i64(const std::string& n) const { return read_typed<int64_t>(get(n), "<i8", n); }
std::vector<uint8_t> NpzReader::read_bytes(const std::string& n) const { return read_typed<uint8_t>(get(n), "|u1", n); }

}  // namespace gaitdiff
