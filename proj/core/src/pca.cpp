#include "fishdet/pca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "fishdet/error.hpp"

namespace fishdet {

FeatureMapSet feature_maps_from(const Tensor& output, std::size_t layer, std::string source) {
    FeatureMapSet set;
    set.layer = layer;
    set.source = std::move(source);
    set.height = output.height();
    set.width = output.width();
    set.maps.reserve(static_cast<std::size_t>(output.channels()));
    for (int c = 0; c < output.channels(); ++c) {
        const auto plane = output.plane(c);
        set.maps.push_back({output.height(), output.width(), std::vector<double>(plane.begin(), plane.end())});
    }
    return set;
}

DataMatrix unpack(const FeatureMapSet& maps) {
    if (maps.maps.empty()) throw Error(Errc::InconsistentDims, "feature map set is empty");
    DataMatrix m;
    m.rows = maps.maps.size();
    m.cols = static_cast<std::size_t>(maps.height) * maps.width;
    m.values.reserve(m.rows * m.cols);
    m.means.reserve(m.rows);
    for (const auto& map : maps.maps) {
        if (map.height != maps.height || map.width != maps.width || map.values.size() != m.cols) {
            throw Error(Errc::InconsistentDims, "feature maps must share one height x width");
        }
        m.values.insert(m.values.end(), map.values.begin(), map.values.end());
        m.means.push_back(std::accumulate(map.values.begin(), map.values.end(), 0.0) / static_cast<double>(m.cols));
    }
    return m;
}

PcaResult pca(const DataMatrix& m) {
    if (m.rows < 1 || m.cols < 2) throw Error(Errc::DegenerateMatrix, "PCA needs at least one variable and two samples");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> x(m.values.data(), static_cast<Eigen::Index>(m.rows),
                                       static_cast<Eigen::Index>(m.cols));
    const Eigen::Map<const Eigen::VectorXd> mean(m.means.data(), static_cast<Eigen::Index>(m.rows));
    const Eigen::MatrixXd centered = x.colwise() - mean;
    const Eigen::MatrixXd cov = (centered * centered.transpose()) / static_cast<double>(m.cols - 1);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error(Errc::DegenerateMatrix, "eigendecomposition did not converge");

    const auto n = m.rows;
    PcaResult result;
    result.eigenvalues.resize(n);
    result.eigenvectors.resize(n);
    // Eigen returns ascending eigenvalues.
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = static_cast<Eigen::Index>(n - 1 - k);
        result.eigenvalues[k] = std::max(0.0, solver.eigenvalues()(src));
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = solver.eigenvectors()(static_cast<Eigen::Index>(i), src);
        const auto lead = std::max_element(v.begin(), v.end(),
                                           [](double a, double b) { return std::abs(a) < std::abs(b); });
        if (*lead < 0) {
            for (auto& c : v) c = -c;
        }
        result.eigenvectors[k] = std::move(v);
    }
    const double total = std::accumulate(result.eigenvalues.begin(), result.eigenvalues.end(), 0.0);
    result.ratios.assign(n, 0.0);
    if (total > 0) {
        for (std::size_t k = 0; k < n; ++k) result.ratios[k] = result.eigenvalues[k] / total;
    } else {
        result.ratios[0] = 1.0;
        result.degenerate = true;
    }
    return result;
}

Raster component_image(const FeatureMapSet& maps, const PcaResult& result, std::size_t k) {
    if (k < 1 || k > result.eigenvectors.size()) {
        throw Error(Errc::IndexOutOfRange, "component " + std::to_string(k) + " outside 1.." +
                                               std::to_string(result.eigenvectors.size()));
    }
    if (maps.maps.size() != result.eigenvectors[k - 1].size()) {
        throw Error(Errc::InconsistentDims, "feature map count does not match the PCA result");
    }
    const auto data = unpack(maps);
    const auto& v = result.eigenvectors[k - 1];
    Raster out{maps.height, maps.width, std::vector<double>(data.cols, 0.0)};
    for (std::size_t i = 0; i < data.rows; ++i) {
        const double weight = v[i];
        const double mean = data.means[i];
        const double* row = data.values.data() + i * data.cols;
        for (std::size_t c = 0; c < data.cols; ++c) out.values[c] += weight * (row[c] - mean);
    }
    return out;
}

VarianceReport variance_report(const std::map<std::size_t, PcaResult>& results, std::size_t top_k) {
    if (top_k < 1) throw Error(Errc::InvalidValue, "top_k must be at least 1");
    VarianceReport report;
    report.top_k = top_k;
    for (const auto& [layer, r] : results) {
        VarianceRow row;
        row.layer = layer;
        row.n_maps = r.ratios.size();
        row.degenerate = r.degenerate;
        row.ratios.assign(top_k, 0.0);
        std::copy_n(r.ratios.begin(), std::min(top_k, r.ratios.size()), row.ratios.begin());
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string variance_report_csv(const VarianceReport& report) {
    std::ostringstream out;
    out << "layer,n_maps";
    for (std::size_t k = 1; k <= report.top_k; ++k) out << ",r" << k;
    out << '\n';
    char buf[32];
    for (const auto& row : report.rows) {
        out << row.layer + 1 << ',' << row.n_maps;
        for (double r : row.ratios) {
            std::snprintf(buf, sizeof(buf), ",%.9f", r);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

std::string variance_report_json(const VarianceReport& report) {
    using nlohmann::json;
    json j;
    j["top_k"] = report.top_k;
    j["layers"] = json::array();
    for (const auto& row : report.rows) {
        j["layers"].push_back({{"layer", row.layer + 1},
                               {"n_maps", row.n_maps},
                               {"ratios", row.ratios},
                               {"degenerate", row.degenerate}});
    }
    return j.dump(2) + "\n";
}

}  // namespace fishdet
