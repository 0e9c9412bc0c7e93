#include "lattice_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <vector>

#include "fishdet/metrics.hpp"
#include "fishdet/parallel.hpp"
#include "oracles.hpp"

namespace oracle {

namespace {

std::vector<LatticeBox> box_set(LatticeBoxes kind) {
    std::vector<LatticeBox> out;
    if (kind == LatticeBoxes::Side2Grid) {
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) out.push_back({x, y, x + 2, y + 2});
        return out;
    }
    for (int y0 = 0; y0 < 4; ++y0)
        for (int y1 = y0 + 1; y1 < 4; ++y1)
            for (int x0 = 0; x0 < 4; ++x0)
                for (int x1 = x0 + 1; x1 < 4; ++x1) out.push_back({x0, y0, x1, y1});
    return out;
}

fishdet::Box to_box(const LatticeBox& b) { return fishdet::Box::from_corners(b.x0, b.y0, b.x1, b.y1); }

void multisets(int positions, int max_size, std::vector<std::vector<int>>& out) {
    std::vector<int> cur;
    auto rec = [&](auto&& self, int start) -> void {
        out.push_back(cur);
        if (static_cast<int>(cur.size()) == max_size) return;
        for (int p = start; p < positions; ++p) {
            cur.push_back(p);
            self(self, p);
            cur.pop_back();
        }
    };
    rec(rec, 0);
}

void sequences(int positions, int max_len, std::vector<std::vector<int>>& out) {
    std::vector<int> cur;
    auto rec = [&](auto&& self) -> void {
        out.push_back(cur);
        if (static_cast<int>(cur.size()) == max_len) return;
        for (int p = 0; p < positions; ++p) {
            cur.push_back(p);
            self(self);
            cur.pop_back();
        }
    };
    rec(rec);
}

}  // namespace

LatticeSweep sweep_lattice(int max_truths, int max_dets, int iou_num, int iou_den, LatticeBoxes boxes,
                           unsigned workers) {
    const auto set = box_set(boxes);
    const int positions = static_cast<int>(set.size());
    std::vector<std::vector<int>> truth_sets;
    std::vector<std::vector<int>> det_seqs;
    multisets(positions, max_truths, truth_sets);
    sequences(positions, max_dets, det_seqs);
    const double threshold = static_cast<double>(iou_num) / iou_den;

    LatticeSweep total;
    std::mutex mutex;
    fishdet::parallel_for(truth_sets.size(), workers, [&](std::size_t ti) {
        const auto& tset = truth_sets[ti];
        LatticeSweep local;
        std::vector<LatticeBox> tl;
        std::vector<fishdet::GroundTruthBox> tg;
        for (int p : tset) {
            tl.push_back(set[static_cast<std::size_t>(p)]);
            tg.push_back({0, to_box(tl.back())});
        }
        std::vector<LatticeBox> dl;
        std::vector<fishdet::ScoredBox> dg;
        std::vector<fishdet::FlaggedDetection> flags;
        for (const auto& seq : det_seqs) {
            dl.clear();
            dg.clear();
            for (std::size_t k = 0; k < seq.size(); ++k) {
                dl.push_back(set[static_cast<std::size_t>(seq[k])]);
                dg.push_back({0, 1.0 - 0.1 * static_cast<double>(k), to_box(dl.back())});
            }
            ++local.instances;
            const auto expected = lattice_match(dl.data(), static_cast<int>(dl.size()), tl.data(),
                                                static_cast<int>(tl.size()), iou_num, iou_den);
            const auto got = fishdet::match_detections(dg, tg, threshold);
            bool same = got.counts.tp == static_cast<std::size_t>(expected.tp_count) &&
                        got.counts.fp == dl.size() - got.counts.tp && got.counts.fn == tl.size() - got.counts.tp;
            for (std::size_t k = 0; k < dl.size(); ++k) same = same && got.true_positive[k] == expected.tp[k];
            if (!same) ++local.match_mismatches;
            if (tl.empty()) continue;
            flags.clear();
            for (std::size_t k = 0; k < dl.size(); ++k) flags.push_back({dg[k].score, static_cast<bool>(got.true_positive[k])});
            const double ap = fishdet::average_precision(flags, tl.size());
            const double ref =
                rank_average_precision(expected.tp.data(), static_cast<int>(dl.size()), static_cast<int>(tl.size()));
            const double diff = std::abs(ap - ref);
            local.max_ap_diff = std::max(local.max_ap_diff, diff);
            if (diff > 1e-12) ++local.ap_mismatches;
        }
        std::lock_guard lock(mutex);
        total.instances += local.instances;
        total.match_mismatches += local.match_mismatches;
        total.ap_mismatches += local.ap_mismatches;
        total.max_ap_diff = std::max(total.max_ap_diff, local.max_ap_diff);
    });
    return total;
}

}  // namespace oracle
