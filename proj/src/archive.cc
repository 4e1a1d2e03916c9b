// Copyright 2026 The capgen Authors.
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

#include "capgen/archive.h"

#include <bit>
#include <cstring>

#include "capgen/ingest.h"

namespace capgen {

namespace {

static_assert(sizeof(double) == 8);

void append_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double read_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

bool has_space(std::string_view s) {
  return s.find_first_of(" \t\n\r") != std::string_view::npos;
}

std::int64_t to_int(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("archive: bad integer '" + s + "' in " + std::string(what));
  }
}

}  // namespace

std::int64_t Archive::dim(const std::string& name) const {
  auto it = dims_.find(name);
  if (it == dims_.end()) throw Error("archive: missing dim '" + name + "'");
  return it->second;
}

void Archive::put_strings(const std::string& name, std::vector<std::string> values) {
  for (const auto& v : values) {
    if (v.find('\n') != std::string::npos) throw Error("archive: string contains a newline");
  }
  strings_[name] = std::move(values);
}

const std::vector<std::string>& Archive::strings(const std::string& name) const {
  auto it = strings_.find(name);
  if (it == strings_.end()) throw Error("archive: missing string table '" + name + "'");
  return it->second;
}

void Archive::put_matrix(const std::string& name, const Matrix& m) {
  if (has_space(name)) throw Error("archive: matrix name contains whitespace");
  for (auto& [n, existing] : matrices_) {
    if (n == name) {
      existing = m;
      return;
    }
  }
  matrices_.emplace_back(name, m);
}

bool Archive::has_matrix(const std::string& name) const {
  for (const auto& [n, m] : matrices_)
    if (n == name) return true;
  return false;
}

const Matrix& Archive::matrix(const std::string& name) const {
  for (const auto& [n, m] : matrices_)
    if (n == name) return m;
  throw Error("archive: missing matrix '" + name + "'");
}

const Matrix& Archive::matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
  const Matrix& m = matrix(name);
  require_shape(m, rows, cols, "archive matrix '" + name + "'");
  return m;
}

void Archive::put_params(const ParamStore& params, std::string_view prefix) {
  for (const auto& e : params.entries()) put_matrix(std::string(prefix) + e.name, e.value);
}

void Archive::get_params(ParamStore& params, std::string_view prefix) const {
  for (auto& e : params.entries()) {
    e.value = matrix(std::string(prefix) + e.name, e.value.rows(), e.value.cols());
    e.grad = Matrix(e.value.rows(), e.value.cols());
  }
}

std::string Archive::serialize() const {
  std::string head = "capgen-archive " + std::to_string(kFormatVersion) + "\n";
  for (const auto& [name, v] : dims_) head += "dim " + name + " " + std::to_string(v) + "\n";
  for (const auto& [name, values] : strings_) {
    head += "strings " + name + " " + std::to_string(values.size()) + "\n";
    for (const auto& v : values) head += v + "\n";
  }
  std::size_t offset = 0;
  for (const auto& [name, m] : matrices_) {
    head += "matrix " + name + " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) +
            " " + std::to_string(offset) + "\n";
    offset += m.size() * 8;
  }
  head += "end\n";
  std::string out = std::move(head);
  out.reserve(out.size() + offset);
  for (const auto& [name, m] : matrices_)
    for (double v : m.values()) append_le(out, v);
  return out;
}

Archive Archive::parse(std::string_view bytes) {
  Archive a;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) throw Error("archive: truncated manifest");
    std::string line(bytes.substr(pos, end - pos));
    pos = end + 1;
    return line;
  };
  auto header = split_whitespace(next_line());
  if (header.size() != 2 || header[0] != "capgen-archive") throw Error("archive: bad magic");
  if (to_int(header[1], "version") != kFormatVersion) {
    throw Error("archive: unsupported format version " + header[1]);
  }
  struct Pending {
    std::string name;
    std::size_t rows, cols, offset;
  };
  std::vector<Pending> pending;
  while (true) {
    auto fields = split_whitespace(next_line());
    if (fields.empty()) throw Error("archive: blank manifest line");
    if (fields[0] == "end") break;
    if (fields[0] == "dim" && fields.size() == 3) {
      a.dims_[fields[1]] = to_int(fields[2], "dim " + fields[1]);
    } else if (fields[0] == "strings" && fields.size() == 3) {
      const auto count = to_int(fields[2], "strings " + fields[1]);
      if (count < 0) throw Error("archive: negative string count");
      std::vector<std::string> values;
      for (std::int64_t i = 0; i < count; ++i) values.push_back(next_line());
      a.strings_[fields[1]] = std::move(values);
    } else if (fields[0] == "matrix" && fields.size() == 5) {
      const auto rows = to_int(fields[2], "matrix " + fields[1]);
      const auto cols = to_int(fields[3], "matrix " + fields[1]);
      const auto off = to_int(fields[4], "matrix " + fields[1]);
      if (rows < 0 || cols < 0 || off < 0) throw Error("archive: negative shape or offset");
      pending.push_back({fields[1], std::size_t(rows), std::size_t(cols), std::size_t(off)});
    } else {
      throw Error("archive: unrecognized manifest line '" + fields[0] + "'");
    }
  }
  const std::string_view payload = bytes.substr(pos);
  std::size_t expected = 0;
  for (const auto& p : pending) {
    if (p.offset != expected) {
      throw Error("archive: matrix '" + p.name + "' declares offset " + std::to_string(p.offset) +
                  ", expected " + std::to_string(expected));
    }
    const std::size_t nbytes = p.rows * p.cols * 8;
    if (p.offset + nbytes > payload.size()) {
      throw Error("archive: matrix '" + p.name + "' extends past end of file");
    }
    std::vector<double> values(p.rows * p.cols);
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = read_le(payload.data() + p.offset + 8 * i);
    }
    a.matrices_.emplace_back(p.name, Matrix(p.rows, p.cols, std::move(values)));
    expected += nbytes;
  }
  if (expected != payload.size()) {
    throw Error("archive: payload is " + std::to_string(payload.size()) + " bytes, manifest declares " +
                std::to_string(expected));
  }
  return a;
}

void Archive::write(const std::string& path) const { write_file(path, serialize()); }

Archive Archive::read(const std::string& path) {
  try {
    return parse(read_file(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void store_vocabulary(Archive& archive, const Vocabulary& vocab, const std::string& prefix) {
  archive.put_strings(prefix + "tokens", vocab.tokens());
  archive.put_matrix(prefix + "W_T", vocab.embeddings());
}

Vocabulary load_vocabulary(const Archive& archive, const std::string& prefix) {
  const auto& tokens = archive.strings(prefix + "tokens");
  const Matrix& table = archive.matrix(prefix + "W_T");
  require_shape(table, tokens.size(), table.cols(), "archive vocabulary table");
  return Vocabulary(tokens, table);
}

}  // namespace capgen
