// include/ftilm/lattice/transducer-lattice.h

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

#ifndef FTILM_LATTICE_TRANSDUCER_LATTICE_H_
#define FTILM_LATTICE_TRANSDUCER_LATTICE_H_

#include <cstdint>
#include <vector>

namespace ftilm {

/*
  Log-probabilities of the transducer alignment lattice for one utterance and
  one target sequence y_1 .. y_U.

  A node (t, u) means "at frame t, having emitted u target tokens".  From
  (t, u) a blank moves to (t+1, u) and a label emits y_{u+1} and moves to
  (t, u+1).  Every alignment starts at (0, 0) and ends with a blank emitted
  at (T-1, U).

    Blank(t, u)   t in [0, T), u in [0, U]
    Label(t, u)   t in [0, T), u in [0, U)   log-prob of emitting y_{u+1}

  Only the target-token slice of the non-blank distribution is stored.
*/
class LogProbLattice {
 public:
  LogProbLattice() = default;
  // All entries start at log(1) = 0.
  LogProbLattice(int num_frames, int target_length);

  int NumFrames() const { return num_frames_; }
  int TargetLength() const { return target_length_; }

  double &Blank(int t, int u) { return blank_[t * (target_length_ + 1) + u]; }
  double Blank(int t, int u) const {
    return blank_[t * (target_length_ + 1) + u];
  }
  double &Label(int t, int u) { return label_[t * target_length_ + u]; }
  double Label(int t, int u) const { return label_[t * target_length_ + u]; }

  // Throws InvalidInput if any entry is NaN or positive.
  void Check() const;

 private:
  int num_frames_ = 0;
  int target_length_ = 0;
  std::vector<double> blank_;
  std::vector<double> label_;
};

// Derivatives of the loss w.r.t. every lattice entry, same indexing as
// LogProbLattice.
class LatticeGradients {
 public:
  LatticeGradients() = default;
  LatticeGradients(int num_frames, int target_length);

  int NumFrames() const { return num_frames_; }
  int TargetLength() const { return target_length_; }

  double &Blank(int t, int u) { return blank_[t * (target_length_ + 1) + u]; }
  double Blank(int t, int u) const {
    return blank_[t * (target_length_ + 1) + u];
  }
  double &Label(int t, int u) { return label_[t * target_length_ + u]; }
  double Label(int t, int u) const { return label_[t * target_length_ + u]; }

  void Scale(double factor);

  // Set when the loss is +inf: all gradients are then zero.
  bool no_path_mass = false;

 private:
  int num_frames_ = 0;
  int target_length_ = 0;
  std::vector<double> blank_;
  std::vector<double> label_;
};

// Set of admissible lattice nodes.  A path is admissible iff every node it
// visits is valid.
class BandMask {
 public:
  BandMask() = default;
  // All-invalid mask.
  BandMask(int num_frames, int target_length);

  static BandMask Full(int num_frames, int target_length);

  int NumFrames() const { return num_frames_; }
  int TargetLength() const { return target_length_; }

  bool Valid(int t, int u) const {
    return valid_[t * (target_length_ + 1) + u] != 0;
  }
  void SetValid(int t, int u, bool v) {
    valid_[t * (target_length_ + 1) + u] = v ? 1 : 0;
  }

  // True iff at least one complete alignment stays inside the mask.
  bool AdmitsPath() const;

  // Clears every node that lies on no admissible complete path.
  void Prune();

  int NumValid() const;

  // Number of admissible complete alignments (as a double; it can be large).
  double NumPaths() const;

  bool Contains(const BandMask &other) const;

 private:
  int num_frames_ = 0;
  int target_length_ = 0;
  std::vector<char> valid_;
};

// -log sum over all alignments of the product of their probabilities.
// Throws InvalidInput for T = 0; returns +inf if no alignment has mass.
double FullSumLoss(const LogProbLattice &lattice);

// Same quantity by explicit enumeration of the C(T-1+U, U) alignments.
// Refuses with SizeLimitExceeded above kMaxBruteForcePaths.  If num_paths is
// non-NULL it receives the number of alignments enumerated.
inline constexpr int64_t kMaxBruteForcePaths = 1000000;
double BruteForceLoss(const LogProbLattice &lattice,
                      int64_t *num_paths = nullptr);

// Enumeration restricted to alignments inside the mask.  Returns +inf when no
// enumerated alignment is admissible.
double BruteForceRestrictedLoss(const LogProbLattice &lattice,
                                const BandMask &mask,
                                int64_t *num_paths = nullptr);

// Forward-backward derivatives of FullSumLoss w.r.t. the log-probabilities.
LatticeGradients LossGradients(const LogProbLattice &lattice);

// Full-sum loss over the alignments inside the mask.  Throws InvalidMask if
// the mask admits no alignment or does not match the lattice shape.
double RestrictedFullSumLoss(const LogProbLattice &lattice,
                             const BandMask &mask);

LatticeGradients RestrictedLossGradients(const LogProbLattice &lattice,
                                         const BandMask &mask);

// Loss and gradients from one forward-backward pass; mask may be NULL.
double LossAndGradients(const LogProbLattice &lattice, const BandMask *mask,
                        LatticeGradients *grads);

}  // namespace ftilm

#endif  // FTILM_LATTICE_TRANSDUCER_LATTICE_H_
