// src/base/checkpoint.cc

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

#include "ftilm/base/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ftilm/base/errors.h"

namespace ftilm {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'F', 'T', 'I', 'L', 'M', 'C', 'K', '\0'};

template <typename T>
void Put(std::ostream &os, T value) {
  os.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
T Get(std::istream &is) {
  T value;
  is.read(reinterpret_cast<char *>(&value), sizeof(T));
  if (!is) throw IoError("checkpoint: unexpected end of data");
  return value;
}

void PutString(std::ostream &os, const std::string &s) {
  Put<uint32_t>(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string GetString(std::istream &is) {
  uint32_t n = Get<uint32_t>(is);
  if (n > (1u << 20)) throw IoError("checkpoint: implausible string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw IoError("checkpoint: unexpected end of data");
  return s;
}

}  // namespace

int64_t Checkpoint::Dim(const std::string &name) const {
  auto it = dims.find(name);
  if (it == dims.end())
    throw IoError("checkpoint '" + kind + "': missing dimension " + name);
  return it->second;
}

const std::vector<double> &Checkpoint::Array(const std::string &name) const {
  auto it = arrays.find(name);
  if (it == arrays.end())
    throw IoError("checkpoint '" + kind + "': missing array " + name);
  return it->second;
}

void Checkpoint::Write(std::ostream &os) const {
  os.write(kMagic, sizeof(kMagic));
  Put<uint32_t>(os, kVersion);
  PutString(os, kind);
  Put<uint32_t>(os, static_cast<uint32_t>(dims.size()));
  for (const auto &[name, value] : dims) {
    PutString(os, name);
    Put<int64_t>(os, value);
  }
  Put<uint32_t>(os, static_cast<uint32_t>(arrays.size()));
  for (const auto &[name, values] : arrays) {
    PutString(os, name);
    Put<uint64_t>(os, values.size());
    os.write(reinterpret_cast<const char *>(values.data()),
             static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  if (!os) throw IoError("checkpoint: write failed");
}

Checkpoint Checkpoint::Read(std::istream &is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("checkpoint: bad magic");
  uint32_t version = Get<uint32_t>(is);
  if (version != kVersion)
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.kind = GetString(is);
  uint32_t n_dims = Get<uint32_t>(is);
  for (uint32_t i = 0; i < n_dims; ++i) {
    std::string name = GetString(is);
    ckpt.dims[name] = Get<int64_t>(is);
  }
  uint32_t n_arrays = Get<uint32_t>(is);
  for (uint32_t i = 0; i < n_arrays; ++i) {
    std::string name = GetString(is);
    uint64_t count = Get<uint64_t>(is);
    if (count > (uint64_t{1} << 32)) throw IoError("checkpoint: array too large");
    std::vector<double> values(count);
    is.read(reinterpret_cast<char *>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw IoError("checkpoint: truncated array " + name);
    ckpt.arrays[name] = std::move(values);
  }
  return ckpt;
}

void Checkpoint::WriteFile(const std::string &path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  Write(os);
}

Checkpoint Checkpoint::ReadFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return Read(is);
}

uint64_t HashParams(const std::vector<double> &params) {
  uint64_t h = 1469598103934665603ULL;
  const auto *bytes = reinterpret_cast<const unsigned char *>(params.data());
  for (size_t i = 0; i < params.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace ftilm
