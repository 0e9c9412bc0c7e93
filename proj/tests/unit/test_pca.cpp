#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "expect_errc.hpp"
#include "fishdet/pca.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fishdet;

namespace {

FeatureMapSet random_maps(std::mt19937_64& rng, int n, int h, int w) {
    return feature_maps_from(fixture::random_tensor(rng, n, h, w), 0);
}

}  // namespace

TEST(Unpack, RowsAreFlattenedMaps) {
    std::mt19937_64 rng(20);
    const auto maps = random_maps(rng, 32, 13, 13);
    const auto m = unpack(maps);
    EXPECT_EQ(m.rows, 32u);
    EXPECT_EQ(m.cols, 169u);
    EXPECT_EQ(m.at(5, 13 * 2 + 7), maps.maps[5].at(2, 7));
    double mean = 0;
    for (double v : maps.maps[3].values) mean += v;
    EXPECT_NEAR(m.means[3], mean / 169, 1e-12);
}

TEST(Unpack, RejectsMixedDims) {
    FeatureMapSet set;
    set.height = 2;
    set.width = 2;
    set.maps = {{2, 2, {1, 2, 3, 4}}, {2, 3, {1, 2, 3, 4, 5, 6}}};
    EXPECT_ERRC(unpack(set), Errc::InconsistentDims);
    EXPECT_ERRC(unpack(FeatureMapSet{}), Errc::InconsistentDims);
}

TEST(Pca, IdenticalMapsHaveOneComponent) {
    std::mt19937_64 rng(21);
    const auto base = fixture::random_tensor(rng, 1, 8, 8);
    Tensor t(6, 8, 8);
    for (int c = 0; c < 6; ++c)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) t.at(c, y, x) = base.at(0, y, x);
    const auto r = pca(unpack(feature_maps_from(t, 0)));
    EXPECT_NEAR(r.ratios[0], 1.0, 1e-9);
    for (std::size_t k = 1; k < r.ratios.size(); ++k) EXPECT_NEAR(r.ratios[k], 0.0, 1e-9);
    for (double v : r.eigenvectors[0]) EXPECT_NEAR(v, 1 / std::sqrt(6.0), 1e-9);
}

TEST(Pca, ConstantMapsAreDegenerate) {
    const auto r = pca(unpack(feature_maps_from(Tensor(4, 5, 5, 2.f), 0)));
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.ratios, (std::vector<double>{1, 0, 0, 0}));
}

TEST(Pca, TooFewSamples) { EXPECT_ERRC(pca(unpack(feature_maps_from(Tensor(3, 1, 1), 0))), Errc::DegenerateMatrix); }

TEST(PcaProperty, RatiosSortedAndSumToOne) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const auto r = pca(unpack(random_maps(rng, 1 + trial % 12, 6, 7)));
        EXPECT_NEAR(std::accumulate(r.ratios.begin(), r.ratios.end(), 0.0), 1.0, 1e-12);
        for (std::size_t k = 1; k < r.eigenvalues.size(); ++k) EXPECT_GE(r.eigenvalues[k - 1], r.eigenvalues[k]);
        for (double v : r.eigenvalues) EXPECT_GE(v, 0.0);
    }
}

TEST(PcaProperty, EigenvectorsOrthonormalAndSignNormalised) {
    std::mt19937_64 rng(23);
    const auto r = pca(unpack(random_maps(rng, 10, 9, 9)));
    for (std::size_t a = 0; a < 10; ++a) {
        const auto& va = r.eigenvectors[a];
        const auto lead = std::max_element(va.begin(), va.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
        EXPECT_GT(*lead, 0.0);
        for (std::size_t b = 0; b < 10; ++b) {
            const double dot = std::inner_product(va.begin(), va.end(), r.eigenvectors[b].begin(), 0.0);
            EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-10);
        }
    }
}

TEST(PcaProperty, FullReconstruction) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 10; ++trial) {
        const auto maps = random_maps(rng, 8, 7, 6);
        const auto m = unpack(maps);
        const auto r = pca(m);
        std::vector<double> rebuilt(m.rows * m.cols, 0.0);
        for (std::size_t k = 1; k <= m.rows; ++k) {
            const auto proj = component_image(maps, r, k);
            for (std::size_t i = 0; i < m.rows; ++i)
                for (std::size_t c = 0; c < m.cols; ++c)
                    rebuilt[i * m.cols + c] += r.eigenvectors[k - 1][i] * proj.values[c];
        }
        for (std::size_t i = 0; i < m.rows; ++i)
            for (std::size_t c = 0; c < m.cols; ++c) EXPECT_NEAR(rebuilt[i * m.cols + c] + m.means[i], m.at(i, c), 1e-6);
    }
}

TEST(PcaProperty, MatchesJacobiOracle) {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 3 + trial;
        const auto m = unpack(random_maps(rng, static_cast<int>(n), 10, 10));
        std::vector<double> cov(n * n, 0.0);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                double s = 0;
                for (std::size_t c = 0; c < m.cols; ++c) s += (m.at(a, c) - m.means[a]) * (m.at(b, c) - m.means[b]);
                cov[a * n + b] = s / static_cast<double>(m.cols - 1);
            }
        const auto ref = oracle::jacobi_eigen(cov, n);
        const auto r = pca(m);
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_NEAR(r.eigenvalues[k], ref.values[k], 1e-8);
            // compare up to sign
            double dot = 0;
            for (std::size_t i = 0; i < n; ++i) dot += r.eigenvectors[k][i] * ref.vectors[k][i];
            EXPECT_NEAR(std::abs(dot), 1.0, 1e-8);
        }
    }
}

TEST(ComponentImage, Errors) {
    std::mt19937_64 rng(26);
    const auto maps = random_maps(rng, 4, 5, 5);
    const auto r = pca(unpack(maps));
    EXPECT_ERRC(component_image(maps, r, 0), Errc::IndexOutOfRange);
    EXPECT_ERRC(component_image(maps, r, 5), Errc::IndexOutOfRange);
    EXPECT_ERRC(component_image(random_maps(rng, 3, 5, 5), r, 1), Errc::InconsistentDims);
    const auto img = component_image(maps, r, 1);
    EXPECT_EQ(img.height, 5);
    EXPECT_EQ(img.width, 5);
}

TEST(VarianceReport, PadsAndFormats) {
    std::mt19937_64 rng(27);
    std::map<std::size_t, PcaResult> results;
    results[0] = pca(unpack(random_maps(rng, 3, 4, 4)));
    results[9] = pca(unpack(random_maps(rng, 8, 4, 4)));
    const auto report = variance_report(results);
    ASSERT_EQ(report.rows.size(), 2u);
    EXPECT_EQ(report.rows[0].ratios.size(), 5u);
    EXPECT_EQ(report.rows[0].ratios[4], 0.0);
    const auto csv = variance_report_csv(report);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "layer,n_maps,r1,r2,r3,r4,r5");
    EXPECT_NE(csv.find("\n10,8,"), std::string::npos);
    const auto j = nlohmann::json::parse(variance_report_json(report));
    EXPECT_EQ(j["layers"][0]["layer"], 1);
    EXPECT_EQ(j["layers"][1]["n_maps"], 8);
    EXPECT_ERRC(variance_report(results, 0), Errc::InvalidValue);
}
