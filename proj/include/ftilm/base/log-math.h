// include/ftilm/base/log-math.h

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

#ifndef FTILM_BASE_LOG_MATH_H_
#define FTILM_BASE_LOG_MATH_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace ftilm {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)); LogAdd(-inf, -inf) is -inf, never NaN.
inline double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

inline double LogSumExp(std::span<const double> x) {
  double max_val = kLogZero;
  for (double v : x) max_val = std::max(max_val, v);
  if (max_val == kLogZero || std::isinf(max_val)) return max_val;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - max_val);
  return max_val + std::log(sum);
}

// log(1 + exp(x)) without overflow.
inline double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// out[i] = x[i] - logsumexp(x).  out may alias x.
inline void LogSoftmax(std::span<const double> x, std::span<double> out) {
  double norm = LogSumExp(x);
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] - norm;
}

inline std::vector<double> LogSoftmax(std::span<const double> x) {
  std::vector<double> out(x.size());
  LogSoftmax(x, out);
  return out;
}

}  // namespace ftilm

#endif  // FTILM_BASE_LOG_MATH_H_
