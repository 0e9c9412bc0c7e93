#pragma once

// Independent reference implementations. These share no code with the
// library beyond plain data types.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fishdet/config.hpp"
#include "fishdet/tensor.hpp"
#include "fishdet/weights.hpp"

namespace oracle {

/// Direct six-loop convolution in double with batch norm / bias and activation.
/// Output layout matches Tensor (channel-major).
std::vector<double> direct_conv(const fishdet::Tensor& input, const fishdet::ConvolutionalDef& def,
                                const fishdet::ConvParams& params, int& out_h, int& out_w);

/// Cyclic Jacobi eigensolver for a symmetric n x n matrix (row-major).
/// Returns eigenvalues descending with matching unit eigenvectors (columns).
struct Eigen {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
};
Eigen jacobi_eigen(std::vector<double> a, std::size_t n);

/// A box on the integer lattice given by corner coordinates.
struct LatticeBox {
    int x0, y0, x1, y1;
};

/// Exact greedy matching over lattice boxes. Detections are given in
/// descending score order; truths in their tie-breaking order. A detection
/// matches when 2 * inter >= union scaled by `iou_num / iou_den`, i.e.
/// inter * iou_den >= iou_num * union.
struct MatchOutcome {
    std::array<bool, 8> tp{};
    int tp_count = 0;
};
MatchOutcome lattice_match(const LatticeBox* dets, int n_dets, const LatticeBox* truths, int n_truths, int iou_num,
                           int iou_den);

/// AP from flags in rank order: (1 / G) * sum over TP ranks k of precision@k.
double rank_average_precision(const bool* tp, int n, int total_truths);

}  // namespace oracle
