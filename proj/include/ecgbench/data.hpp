#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ecgbench/tensor.hpp"

namespace ecgbench {

constexpr std::size_t kBeatSamples = 187;
constexpr std::size_t kNumClasses = 5;

/// One segmented heartbeat: 187 amplitude samples and a 5-way class label.
struct BeatRecord {
    std::array<double, kBeatSamples> samples{};
    int label = 0;
};

struct Dataset {
    std::vector<BeatRecord> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    std::array<std::size_t, kNumClasses> class_histogram() const;

    /// Features as one [N,187] tensor (for batch-style consumers).
    Tensor feature_matrix() const;
    std::vector<int> labels() const;
};

struct NoiseSpec {
    double sigma = 0.05;
    std::uint64_t seed = 0;
};

struct SplitSpec {
    double train_fraction = 0.8;
    bool stratified = true;
    std::uint64_t seed = 0;
};

/// Error raised for malformed input data (bad CSV, impossible split...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads the 188-column beat CSV (187 features, trailing integer label).
/// A header row is detected by a non-numeric first field and skipped.
Dataset load_csv(const std::string& path);

/// Writes the same CSV format; deterministic formatting (%.17g).
void save_csv(const Dataset& ds, const std::string& path);

/// Deterministic synthetic beats: class k is a parametric waveform built
/// from Gaussian bumps with class-specific position/width/amplitude plus
/// small additive noise.
Dataset synth_generate(const std::array<std::size_t, kNumClasses>& n_per_class,
                       std::uint64_t seed);

Dataset add_gaussian_noise(const Dataset& ds, const NoiseSpec& spec);

/// One interpolation draw from the SMOTE run, for replay verification.
struct SmoteDraw {
    int label = 0;
    std::size_t source_index = 0;    // index into ds.records
    std::size_t neighbor_index = 0;  // index into ds.records, same class
    double u = 0.0;                  // interpolation factor in [0,1]
};

/// Upsamples every class to the majority count by interpolating between a
/// record and one of its k nearest same-class neighbors. Real records are
/// preserved unchanged, in order, ahead of the synthetic ones. `draws`,
/// when non-null, receives the interpolation log.
Dataset smote_oversample(const Dataset& ds, std::size_t k_neighbors,
                         std::uint64_t seed,
                         std::vector<SmoteDraw>* draws = nullptr);

struct ScalerParams {
    std::array<double, kBeatSamples> mean{};
    std::array<double, kBeatSamples> stddev{};  // 0 marks a constant feature
};

/// Per-feature statistics from `train` only; every dataset is transformed
/// as (x - mean) / std, with constant features only mean-shifted.
ScalerParams fit_scaler(const Dataset& train);
Dataset apply_scaler(const Dataset& ds, const ScalerParams& params);

/// Deterministic stratified (or plain shuffled) split into train/val.
std::pair<Dataset, Dataset> split_train_val(const Dataset& ds, const SplitSpec& spec);

}  // namespace ecgbench
