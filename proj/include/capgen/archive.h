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

#ifndef CAPGEN_ARCHIVE_H_
#define CAPGEN_ARCHIVE_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "capgen/ingest.h"
#include "capgen/numcore.h"

namespace capgen {

// Model archive: a text manifest followed by raw little-endian float64 blocks.
//
//   capgen-archive <version>
//   dim <name> <int64>                (any number)
//   strings <name> <count>            followed by <count> lines
//   matrix <name> <rows> <cols> <byte offset>
//   end
//   <binary blocks, in manifest order, offsets relative to the first block>
//
// Loading verifies every declared shape, offset and the total payload size.
class Archive {
 public:
  static constexpr int kFormatVersion = 1;

  void set_dim(const std::string& name, std::int64_t value) { dims_[name] = value; }
  std::int64_t dim(const std::string& name) const;
  bool has_dim(const std::string& name) const { return dims_.contains(name); }

  void put_strings(const std::string& name, std::vector<std::string> values);
  const std::vector<std::string>& strings(const std::string& name) const;
  bool has_strings(const std::string& name) const { return strings_.contains(name); }

  void put_matrix(const std::string& name, const Matrix& m);
  const Matrix& matrix(const std::string& name) const;
  // Throws unless the stored matrix is exactly rows x cols.
  const Matrix& matrix(const std::string& name, std::size_t rows, std::size_t cols) const;
  bool has_matrix(const std::string& name) const;

  void put_params(const ParamStore& params, std::string_view prefix = "");
  // Overwrites every parameter in `params` with the archived value of the
  // same (prefixed) name; shapes must match.
  void get_params(ParamStore& params, std::string_view prefix = "") const;

  std::string serialize() const;
  static Archive parse(std::string_view bytes);

  void write(const std::string& path) const;
  static Archive read(const std::string& path);

 private:
  std::map<std::string, std::int64_t> dims_;
  std::map<std::string, std::vector<std::string>> strings_;
  std::vector<std::pair<std::string, Matrix>> matrices_;
};

// Token list under "<prefix>tokens" and the embedding table under
// "<prefix>W_T".
void store_vocabulary(Archive& archive, const Vocabulary& vocab, const std::string& prefix = "vocab.");
Vocabulary load_vocabulary(const Archive& archive, const std::string& prefix = "vocab.");

}  // namespace capgen

#endif  // CAPGEN_ARCHIVE_H_
