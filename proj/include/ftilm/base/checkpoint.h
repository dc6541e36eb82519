// include/ftilm/base/checkpoint.h

// Copyright 2026  The ftilm Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FTILM_BASE_CHECKPOINT_H_
#define FTILM_BASE_CHECKPOINT_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ftilm {

/*
  Versioned binary container: a kind tag, integer dimensions and flat double
  arrays, all keyed by name.  Layout (little-endian):

    "FTILMCK\0"  u32 version
    str kind
    u32 n_dims    { str name, i64 value } * n_dims
    u32 n_arrays  { str name, u64 count, f64 * count } * n_arrays

  where str is u32 length followed by the bytes.  Doubles are written as raw
  IEEE-754 bits, so a write/read cycle is bit-exact.
*/
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  std::string kind;
  std::map<std::string, int64_t> dims;
  std::map<std::string, std::vector<double>> arrays;

  int64_t Dim(const std::string &name) const;
  const std::vector<double> &Array(const std::string &name) const;

  void Write(std::ostream &os) const;
  static Checkpoint Read(std::istream &is);

  void WriteFile(const std::string &path) const;
  static Checkpoint ReadFile(const std::string &path);
};

// FNV-1a over the raw bytes; used to assert that frozen parameters never
// change.
uint64_t HashParams(const std::vector<double> &params);

}  // namespace ftilm

#endif  // FTILM_BASE_CHECKPOINT_H_
