#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace featnet {

// N samples by M features, row-major, plus one label per sample. Labels are
// -1/+1 for logistic, class indices 0..C-1 for softmax, reals for ridge.
struct Dataset {
    std::size_t N = 0;
    std::size_t M = 0;
    std::vector<double> features;
    std::vector<double> labels;

    std::span<const double> row(std::size_t n) const { return {features.data() + n * M, M}; }
    void validate() const;
};

struct LoadOptions {
    // CSV
    int label_column = -1;  // negative counts from the end
    bool header = false;
    char delimiter = ',';
    // IDX (MNIST-style): image file is the main path
    std::string idx_labels_path;
    std::vector<int> digits;  // keep only these labels; two digits map to -1/+1
    std::size_t limit = 0;    // 0 keeps everything
    // Both
    bool scale01 = false;
    bool append_bias = false;
};

// format is "csv" or "idx". Throws std::runtime_error with the offending line.
Dataset load_dataset(const std::string& path, const std::string& format, const LoadOptions& opts = {});
Dataset load_csv(const std::string& path, const LoadOptions& opts = {});
Dataset load_idx(const std::string& images_path, const LoadOptions& opts);
void write_csv(const std::string& path, const Dataset& data);

void scale_features_01(Dataset& data);
void append_bias_feature(Dataset& data);

struct SyntheticSpec {
    std::size_t N = 100;
    std::size_t M = 10;
    std::uint64_t seed = 1;
    std::string model = "logistic";  // logistic | softmax | ridge
    std::size_t classes = 2;         // softmax only
    double feature_scale = 1.0;      // E ||h_n||^2 = feature_scale^2
    double flip_prob = 0.0;          // label noise for classification
    double noise = 0.0;              // additive label noise for ridge
};

struct SyntheticData {
    Dataset data;
    std::vector<double> planted;  // M x C row-major
};

SyntheticData make_synthetic(const SyntheticSpec& spec);

// Contiguous feature blocks, one per agent.
struct Partition {
    std::size_t M = 0;
    std::vector<std::size_t> offsets;  // block k covers [offsets[k], offsets[k] + sizes[k])
    std::vector<std::size_t> sizes;

    std::size_t agents() const { return sizes.size(); }
};

// First M mod K agents get ceil(M/K) features, the rest floor(M/K).
Partition partition_features(std::size_t M, std::size_t K);
Partition partition_from_sizes(std::size_t M, const std::vector<std::size_t>& sizes);

// One agent's columns of every sample plus the replicated labels.
struct FeatureShard {
    std::size_t agent = 0;
    std::size_t offset = 0;
    std::size_t N = 0;
    std::size_t width = 0;
    std::vector<double> features;       // N x width row-major
    std::vector<double> labels;         // replicated
    std::vector<double> row_norms_sq;   // full-vector ||h_n||^2, shared by all shards

    std::span<const double> row(std::size_t n) const { return {features.data() + n * width, width}; }
};

std::vector<FeatureShard> shard(const Dataset& data, const Partition& partition);
// Column concatenation of the shards in block order.
Dataset assemble(const std::vector<FeatureShard>& shards);

}  // namespace featnet
