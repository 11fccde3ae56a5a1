#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "ddp/rng.hpp"
#include "ddp/tensor.hpp"
#include "ddp/types.hpp"

namespace ddp {

enum Tissue : std::uint8_t { kBackground = 0, kWhiteMatter = 1, kGrayMatter = 2, kCsf = 3 };

struct Phantom {
  RealImage magnitude;  // in [0, 1], zero outside the head
  RealImage phase;      // radians, smooth
  LabelImage labels;
  std::uint64_t seed = 0;

  ComplexImage complex_image() const;
};

/// Brain-like slice: CSF rim, folded cortical GM band, WM core with
/// ventricles and deep GM nuclei, mild blur and bias field, polynomial phase.
Phantom gen_phantom(int height, int width, Rng& rng);
/// Convenience: Rng(seed).
Phantom gen_phantom(int height, int width, std::uint64_t seed);

struct PatchSource {
  int source = 0;  // index into the phantom list
  int row = 0;     // patch origin
  int col = 0;
};

/// Magnitude patches as p*p row-major columns, with where each came from.
struct PatchSet {
  int patch = 0;
  Eigen::MatrixXd patches;
  std::vector<PatchSource> provenance;

  Eigen::Index size() const { return patches.cols(); }
};

/// Each source magnitude is scaled so its 99th percentile is 1, then `count`
/// patches are cropped at uniformly drawn origins whose centre pixel
/// (origin + p/2) is tissue. With anywhere_fraction > 0 that share of the
/// patches is instead drawn uniformly over every origin, background included.
PatchSet extract_training_patches(const std::vector<Phantom>& phantoms, int patch, int count, Rng& rng,
                                  double anywhere_fraction = 0.0);

/// Adds N(0, sigma^2) to every patch value and clips at zero. Without it the
/// noiseless phantoms drive the learned decoder variance to its floor. Not
/// Rician on purpose: that would teach the prior a raised background.
void add_training_noise(PatchSet& set, double sigma, Rng& rng);

/// Source magnitude after the per-image percentile normalisation.
RealImage normalized_magnitude(const Phantom& ph);

TensorFile phantom_to_file(const Phantom& ph);
Phantom phantom_from_file(const TensorFile& file);

/// Entries "patches" [N, p, p] and "provenance" [N, 3] (source, row, col).
TensorFile patchset_to_file(const PatchSet& set);
PatchSet patchset_from_file(const TensorFile& file);

}  // namespace ddp
