// src/lattice/transducer-lattice.cc

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

#include "ftilm/lattice/transducer-lattice.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "ftilm/base/errors.h"
#include "ftilm/base/log-math.h"

namespace ftilm {

LogProbLattice::LogProbLattice(int num_frames, int target_length)
    : num_frames_(num_frames), target_length_(target_length) {
  if (num_frames < 0 || target_length < 0)
    throw InvalidInput("LogProbLattice: negative dimension");
  blank_.assign(static_cast<size_t>(num_frames) * (target_length + 1), 0.0);
  label_.assign(static_cast<size_t>(num_frames) * target_length, 0.0);
}

void LogProbLattice::Check() const {
  auto bad = [](double v) { return std::isnan(v) || v > 0.0; };
  for (double v : blank_)
    if (bad(v)) throw InvalidInput("LogProbLattice: blank entry not <= 0");
  for (double v : label_)
    if (bad(v)) throw InvalidInput("LogProbLattice: label entry not <= 0");
}

LatticeGradients::LatticeGradients(int num_frames, int target_length)
    : num_frames_(num_frames), target_length_(target_length) {
  blank_.assign(static_cast<size_t>(num_frames) * (target_length + 1), 0.0);
  label_.assign(static_cast<size_t>(num_frames) * target_length, 0.0);
}

void LatticeGradients::Scale(double factor) {
  for (double &v : blank_) v *= factor;
  for (double &v : label_) v *= factor;
}

BandMask::BandMask(int num_frames, int target_length)
    : num_frames_(num_frames), target_length_(target_length) {
  valid_.assign(static_cast<size_t>(num_frames) * (target_length + 1), 0);
}

BandMask BandMask::Full(int num_frames, int target_length) {
  BandMask mask(num_frames, target_length);
  std::fill(mask.valid_.begin(), mask.valid_.end(), 1);
  return mask;
}

bool BandMask::AdmitsPath() const {
  return num_frames_ > 0 && NumPaths() > 0.0;
}

void BandMask::Prune() {
  const int T = num_frames_, U = target_length_;
  if (T == 0) return;
  std::vector<char> fwd(valid_.size(), 0), bwd(valid_.size(), 0);
  auto idx = [U](int t, int u) { return t * (U + 1) + u; };
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (!Valid(t, u)) continue;
      bool reach = (t == 0 && u == 0) || (t > 0 && fwd[idx(t - 1, u)]) ||
                   (u > 0 && fwd[idx(t, u - 1)]);
      fwd[idx(t, u)] = reach;
    }
  }
  for (int t = T - 1; t >= 0; --t) {
    for (int u = U; u >= 0; --u) {
      if (!Valid(t, u)) continue;
      bool reach = (t == T - 1 && u == U) || (t + 1 < T && bwd[idx(t + 1, u)]) ||
                   (u < U && bwd[idx(t, u + 1)]);
      bwd[idx(t, u)] = reach;
    }
  }
  for (size_t i = 0; i < valid_.size(); ++i)
    valid_[i] = (fwd[i] && bwd[i]) ? 1 : 0;
}

int BandMask::NumValid() const {
  int n = 0;
  for (char v : valid_) n += v;
  return n;
}

double BandMask::NumPaths() const {
  const int T = num_frames_, U = target_length_;
  if (T == 0) return 0.0;
  std::vector<double> count(valid_.size(), 0.0);
  auto idx = [U](int t, int u) { return t * (U + 1) + u; };
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (!Valid(t, u)) continue;
      double c = (t == 0 && u == 0) ? 1.0 : 0.0;
      if (t > 0) c += count[idx(t - 1, u)];
      if (u > 0) c += count[idx(t, u - 1)];
      count[idx(t, u)] = c;
    }
  }
  return count[idx(T - 1, U)];
}

bool BandMask::Contains(const BandMask &other) const {
  if (other.num_frames_ != num_frames_ ||
      other.target_length_ != target_length_)
    return false;
  for (size_t i = 0; i < valid_.size(); ++i)
    if (other.valid_[i] && !valid_[i]) return false;
  return true;
}

namespace {

void CheckMaskShape(const LogProbLattice &lattice, const BandMask &mask) {
  if (mask.NumFrames() != lattice.NumFrames() ||
      mask.TargetLength() != lattice.TargetLength()) {
    std::ostringstream msg;
    msg << "BandMask shape " << mask.NumFrames() << "x"
        << mask.TargetLength() + 1 << " does not match lattice "
        << lattice.NumFrames() << "x" << lattice.TargetLength() + 1;
    throw InvalidMask(msg.str());
  }
  if (!mask.AdmitsPath())
    throw InvalidMask("BandMask admits no alignment from (0,0) to (T-1,U)");
}

double PathCountUpperBound(int T, int U) {
  // C(T-1+U, U) in floating point; only compared against a limit.
  double c = 1.0;
  for (int i = 1; i <= U; ++i) c = c * (T - 1 + i) / i;
  return c;
}

// Depth-first enumeration of every alignment; accumulates log-sum of the
// admissible ones.
void Enumerate(const LogProbLattice &lat, const BandMask *mask, int t, int u,
               double logp, double *total, int64_t *count) {
  const int T = lat.NumFrames(), U = lat.TargetLength();
  if (mask != nullptr && !mask->Valid(t, u)) return;
  if (t == T - 1 && u == U) {
    *total = LogAdd(*total, logp + lat.Blank(t, u));
    ++*count;
    return;
  }
  if (t + 1 < T) Enumerate(lat, mask, t + 1, u, logp + lat.Blank(t, u), total,
                           count);
  if (u < U) Enumerate(lat, mask, t, u + 1, logp + lat.Label(t, u), total,
                       count);
}

double BruteForce(const LogProbLattice &lattice, const BandMask *mask,
                  int64_t *num_paths) {
  const int T = lattice.NumFrames(), U = lattice.TargetLength();
  if (T == 0) throw InvalidInput("BruteForceLoss: empty lattice (T = 0)");
  double bound = PathCountUpperBound(T, U);
  if (bound > static_cast<double>(kMaxBruteForcePaths)) {
    std::ostringstream msg;
    msg << "BruteForceLoss: " << bound << " alignments for T=" << T
        << " U=" << U << " exceeds limit " << kMaxBruteForcePaths;
    throw SizeLimitExceeded(msg.str());
  }
  lattice.Check();
  double total = kLogZero;
  int64_t count = 0;
  Enumerate(lattice, mask, 0, 0, 0.0, &total, &count);
  if (num_paths != nullptr) *num_paths = count;
  return -total;
}

}  // namespace

double LossAndGradients(const LogProbLattice &lattice, const BandMask *mask,
                        LatticeGradients *grads) {
  const int T = lattice.NumFrames(), U = lattice.TargetLength();
  if (T == 0) throw InvalidInput("FullSumLoss: empty lattice (T = 0)");
  lattice.Check();
  if (mask != nullptr) CheckMaskShape(lattice, *mask);

  auto valid = [mask](int t, int u) {
    return mask == nullptr || mask->Valid(t, u);
  };
  const int stride = U + 1;
  std::vector<double> alpha(static_cast<size_t>(T) * stride, kLogZero);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (!valid(t, u)) continue;
      double a = (t == 0 && u == 0) ? 0.0 : kLogZero;
      if (t > 0)
        a = LogAdd(a, alpha[(t - 1) * stride + u] + lattice.Blank(t - 1, u));
      if (u > 0)
        a = LogAdd(a, alpha[t * stride + u - 1] + lattice.Label(t, u - 1));
      alpha[t * stride + u] = a;
    }
  }
  const double log_prob = alpha[(T - 1) * stride + U] + lattice.Blank(T - 1, U);
  if (grads == nullptr) return -log_prob;

  *grads = LatticeGradients(T, U);
  if (log_prob == kLogZero) {
    grads->no_path_mass = true;
    return -log_prob;
  }

  std::vector<double> beta(static_cast<size_t>(T) * stride, kLogZero);
  for (int t = T - 1; t >= 0; --t) {
    for (int u = U; u >= 0; --u) {
      if (!valid(t, u)) continue;
      double b = (t == T - 1 && u == U) ? lattice.Blank(t, u) : kLogZero;
      if (t + 1 < T)
        b = LogAdd(b, lattice.Blank(t, u) + beta[(t + 1) * stride + u]);
      if (u < U)
        b = LogAdd(b, lattice.Label(t, u) + beta[t * stride + u + 1]);
      beta[t * stride + u] = b;
    }
  }

  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const double a = alpha[t * stride + u];
      if (a == kLogZero) continue;
      double next_blank;
      if (t + 1 < T)
        next_blank = beta[(t + 1) * stride + u];
      else
        next_blank = (u == U) ? 0.0 : kLogZero;
      grads->Blank(t, u) =
          -std::exp(a + lattice.Blank(t, u) + next_blank - log_prob);
      if (u < U)
        grads->Label(t, u) = -std::exp(a + lattice.Label(t, u) +
                                       beta[t * stride + u + 1] - log_prob);
    }
  }
  return -log_prob;
}

double FullSumLoss(const LogProbLattice &lattice) {
  return LossAndGradients(lattice, nullptr, nullptr);
}

LatticeGradients LossGradients(const LogProbLattice &lattice) {
  LatticeGradients grads;
  LossAndGradients(lattice, nullptr, &grads);
  return grads;
}

double RestrictedFullSumLoss(const LogProbLattice &lattice,
                             const BandMask &mask) {
  return LossAndGradients(lattice, &mask, nullptr);
}

LatticeGradients RestrictedLossGradients(const LogProbLattice &lattice,
                                         const BandMask &mask) {
  LatticeGradients grads;
  LossAndGradients(lattice, &mask, &grads);
  return grads;
}

double BruteForceLoss(const LogProbLattice &lattice, int64_t *num_paths) {
  return BruteForce(lattice, nullptr, num_paths);
}

double BruteForceRestrictedLoss(const LogProbLattice &lattice,
                                const BandMask &mask, int64_t *num_paths) {
  if (mask.NumFrames() != lattice.NumFrames() ||
      mask.TargetLength() != lattice.TargetLength())
    throw InvalidMask("BruteForceRestrictedLoss: mask shape mismatch");
  return BruteForce(lattice, &mask, num_paths);
}

}  // namespace ftilm
