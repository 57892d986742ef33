#ifndef GROWNET_DATA_HPP
#define GROWNET_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "grownet/linalg.hpp"

namespace grownet {

/// One training example. `label` drives cross-entropy; `target` drives the
/// squared-error head. Classification datasets fill both (target is the
/// one-hot encoding of label).
struct Sample {
    Vec x;
    int label = -1;
    Vec target;
};

struct Dataset {
    std::size_t input_dim = 0;
    std::size_t n_classes = 0;
    std::vector<Sample> train;
    std::vector<Sample> test;
    Vec feature_mean; // train-split statistics, already applied to both splits
    Vec feature_std;
};

enum class SynthKind { two_moons, spirals, blobs };

/// Deterministic 2-class synthetic dataset with balanced classes and a
/// stratified 80/20 train/test split. Features are standardized using
/// train-split statistics.
Dataset synth(SynthKind kind, std::size_t n, double noise, std::uint64_t seed);

/// Numeric CSV loader (RFC-4180 subset, no quoted fields). `label_column`
/// may be negative to index from the end (-1 = last column). Labels are
/// mapped to contiguous class ids in order of first appearance; the first
/// 80% of rows become the train split.
Dataset load_csv(const std::string& path, int label_column, bool has_header);

/// IDX (MNIST-format) reader: big-endian magics 0x00000803 (images) and
/// 0x00000801 (labels). Pixels are scaled to [0,1] before standardization;
/// the first 80% of records become the train split.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

} // namespace grownet

#endif
