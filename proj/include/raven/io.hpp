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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace raven::io {

// Little-endian scalar codecs shared by the RVEM/RVIX file formats.
void write_u8(std::ostream& out, uint8_t v);
void write_u16(std::ostream& out, uint16_t v);
void write_u32(std::ostream& out, uint32_t v);
void write_u64(std::ostream& out, uint64_t v);
void write_f32(std::ostream& out, float v);

uint8_t read_u8(std::istream& in);
uint16_t read_u16(std::istream& in);
uint32_t read_u32(std::istream& in);
uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);

void write_string16(std::ostream& out, const std::string& s);
std::string read_string16(std::istream& in);

/// Splits one TSV line into cells. Cells never contain tabs or newlines.
std::vector<std::string> split_tsv(const std::string& line);

/// Joins cells into a TSV line; tabs/newlines inside cells become spaces.
std::string join_tsv(const std::vector<std::string>& cells);

/// Reads a whole TSV file. The first line must name exactly `columns`;
/// every data row must have the same arity.
std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& path,
                                               const std::vector<std::string>& columns);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

/// Invokes `fn(line_number, line)` for every non-empty line.
void for_each_line(std::istream& in,
                   const std::function<void(size_t, const std::string&)>& fn);

} // namespace raven::io
