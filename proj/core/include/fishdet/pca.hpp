#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "fishdet/tensor.hpp"

namespace fishdet {

/// Single-channel raster of 64-bit reals, row-major.
struct Raster {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct FeatureMapSet {
    std::size_t layer = 0;  // 0-based
    std::string source;
    int height = 0;
    int width = 0;
    std::vector<Raster> maps;
};

/// Splits a layer output into one raster per channel.
FeatureMapSet feature_maps_from(const Tensor& output, std::size_t layer, std::string source = {});

/// One row per feature map (the variables), one column per pixel (the samples).
struct DataMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<double> means;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Row i is map i flattened row by row.
DataMatrix unpack(const FeatureMapSet& maps);

struct PcaResult {
    /// Descending, clamped at 0.
    std::vector<double> eigenvalues;
    /// eigenvectors[k] pairs with eigenvalues[k]; unit length, largest-magnitude
    /// component positive.
    std::vector<std::vector<double>> eigenvectors;
    std::vector<double> ratios;
    /// Total variance was zero; ratios are set to (1, 0, ...) by convention.
    bool degenerate = false;
};

/// Centres each row, forms the rows x rows sample covariance (divisor cols-1)
/// and eigendecomposes it.
PcaResult pca(const DataMatrix& m);

/// Projection of the centred maps onto component `k` (1-based).
Raster component_image(const FeatureMapSet& maps, const PcaResult& result, std::size_t k);

struct VarianceRow {
    std::size_t layer = 0;  // 0-based
    std::size_t n_maps = 0;
    std::vector<double> ratios;
    bool degenerate = false;
};

inline constexpr std::size_t kDefaultTopComponents = 5;

struct VarianceReport {
    std::size_t top_k = kDefaultTopComponents;
    std::vector<VarianceRow> rows;
};

/// Top-k ratios per layer, zero-padded when a layer has fewer than k maps.
VarianceReport variance_report(const std::map<std::size_t, PcaResult>& results,
                               std::size_t top_k = kDefaultTopComponents);

/// `layer,n_maps,r1..rk` with 1-based layer numbers.
std::string variance_report_csv(const VarianceReport& report);
std::string variance_report_json(const VarianceReport& report);

}  // namespace fishdet
