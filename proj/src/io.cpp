// Copyright 2026-present the raven project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "raven/io.hpp"

#include "raven/types.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace raven::io {

namespace {

void write_le(std::ostream& out, uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) {
        buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    out.write(buf, bytes);
}

uint64_t read_le(std::istream& in, int bytes) {
    char buf[8];
    in.read(buf, bytes);
    if (!in) {
        throw Error("unexpected end of file");
    }
    uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    }
    return v;
}

} // namespace

void write_u8(std::ostream& out, uint8_t v) { write_le(out, v, 1); }
void write_u16(std::ostream& out, uint16_t v) { write_le(out, v, 2); }
void write_u32(std::ostream& out, uint32_t v) { write_le(out, v, 4); }
void write_u64(std::ostream& out, uint64_t v) { write_le(out, v, 8); }

void write_f32(std::ostream& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    write_u32(out, bits);
}

uint8_t read_u8(std::istream& in) { return static_cast<uint8_t>(read_le(in, 1)); }
uint16_t read_u16(std::istream& in) { return static_cast<uint16_t>(read_le(in, 2)); }
uint32_t read_u32(std::istream& in) { return static_cast<uint32_t>(read_le(in, 4)); }
uint64_t read_u64(std::istream& in) { return read_le(in, 8); }

float read_f32(std::istream& in) {
    uint32_t bits = read_u32(in);
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

void write_string16(std::ostream& out, const std::string& s) {
    if (s.size() > UINT16_MAX) {
        throw Error("identifier longer than 65535 bytes: " + s.substr(0, 32) + "...");
    }
    write_u16(out, static_cast<uint16_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string16(std::istream& in) {
    uint16_t n = read_u16(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) {
        throw Error("unexpected end of file while reading identifier");
    }
    return s;
}

std::vector<std::string> split_tsv(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
        size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return cells;
}

std::string join_tsv(const std::vector<std::string>& cells) {
    std::string line;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            line += '\t';
        }
        std::string cell = cells[i];
        for (char& c : cell) {
            if (c == '\t' || c == '\n' || c == '\r') {
                c = ' ';
            }
        }
        line += cell;
    }
    return line;
}

std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& path,
                                               const std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(path.string() + ": empty file, expected a header row");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (split_tsv(line) != columns) {
        throw Error(path.string() + ": header mismatch, expected '" + join_tsv(columns) +
                    "' got '" + line + "'");
    }
    std::vector<std::vector<std::string>> rows;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto cells = split_tsv(line);
        if (cells.size() != columns.size()) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(columns.size()) + " columns, got " +
                        std::to_string(cells.size()));
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

void for_each_line(std::istream& in,
                   const std::function<void(size_t, const std::string&)>& fn) {
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        fn(lineno, line);
    }
}

} // namespace raven::io
