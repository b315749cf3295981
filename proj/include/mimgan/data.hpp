#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mimgan/matrix.hpp"
#include "mimgan/rng.hpp"

namespace mimgan {

// Per-feature min/max fitted on training data only.
struct NormStats {
    std::vector<double> min;
    std::vector<double> max;
};

struct TabularDataset {
    DenseMatrix features;                    // n x d
    std::vector<int> labels;                 // empty when unlabeled; 1 = anomaly
    std::vector<std::string> feature_names;  // size d
    std::optional<NormStats> norm;           // stats the features were scaled with

    std::size_t n() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
    bool has_labels() const { return !labels.empty(); }

    double anomaly_fraction() const {
        if (!has_labels() || labels.empty()) return 0.0;
        std::size_t a = 0;
        for (int l : labels) a += (l == 1);
        return static_cast<double>(a) / static_cast<double>(labels.size());
    }

    void validate() const {
        if (has_labels() && labels.size() != n())
            throw std::invalid_argument("data: " + std::to_string(labels.size()) +
                                        " labels for " + std::to_string(n()) + " rows");
        if (feature_names.size() != dim())
            throw std::invalid_argument("data: feature name count != dimension");
        for (int l : labels)
            if (l != 0 && l != 1) throw std::invalid_argument("data: labels must be 0 or 1");
    }
};

inline std::vector<std::string> default_feature_names(std::size_t d) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
    return names;
}

// n i.i.d. draws from N(mu, sigma^2), one feature, unlabeled.
inline TabularDataset sample_gaussian(double mu, double sigma, std::size_t n, std::uint64_t seed) {
    if (sigma <= 0.0)
        throw std::invalid_argument("data: sigma must be positive, got " + std::to_string(sigma));
    SplitRng rng(seed);
    TabularDataset ds;
    ds.features = DenseMatrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) ds.features[i] = rng.normal(mu, sigma);
    ds.feature_names = {"x"};
    return ds;
}

// Normals ~ N(0, I_d), anomalies ~ N(separation * 1, I_d); labeled and
// shuffled deterministically.
inline TabularDataset synth_anomaly_benchmark(std::size_t n_normal, std::size_t n_anomaly,
                                              std::size_t d, double separation,
                                              std::uint64_t seed) {
    if (d == 0) throw std::invalid_argument("data: benchmark needs d >= 1");
    SplitRng rng(seed);
    const std::size_t n = n_normal + n_anomaly;
    TabularDataset ds;
    ds.features = DenseMatrix(n, d);
    ds.labels.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const bool anomaly = i >= n_normal;
        ds.labels[i] = anomaly ? 1 : 0;
        for (std::size_t j = 0; j < d; ++j)
            ds.features.at(i, j) = rng.normal(anomaly ? separation : 0.0, 1.0);
    }
    // Fisher-Yates over rows.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        for (std::size_t c = 0; c < d; ++c)
            std::swap(ds.features.at(i - 1, c), ds.features.at(j, c));
        std::swap(ds.labels[i - 1], ds.labels[j]);
    }
    ds.feature_names = default_feature_names(d);
    return ds;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("data: malformed cell '" + cell + "' at row " +
                                    std::to_string(row) + ", column " + col);
    return v;
}

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace detail

// Header-first CSV with '.' decimals and no quoting. Label values must be
// exactly 0 or 1; row order is preserved.
inline TabularDataset load_tabular_csv(const std::string& path,
                                       const std::string& label_column = "") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("data: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("data: missing header in " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = detail::split_csv_line(line);

    std::ptrdiff_t label_idx = -1;
    if (!label_column.empty()) {
        auto it = std::find(header.begin(), header.end(), label_column);
        if (it == header.end())
            throw std::invalid_argument("data: unknown label column '" + label_column + "'");
        label_idx = it - header.begin();
    }

    TabularDataset ds;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (static_cast<std::ptrdiff_t>(j) != label_idx) ds.feature_names.push_back(header[j]);

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("data: row " + std::to_string(rows + 1) + " has " +
                                        std::to_string(cells.size()) + " cells, header has " +
                                        std::to_string(header.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (static_cast<std::ptrdiff_t>(j) == label_idx) {
                if (cells[j] == "0")
                    ds.labels.push_back(0);
                else if (cells[j] == "1")
                    ds.labels.push_back(1);
                else
                    throw std::invalid_argument("data: label cell '" + cells[j] + "' at row " +
                                                std::to_string(rows + 1) + " is not 0/1");
            } else {
                values.push_back(detail::parse_cell(cells[j], rows + 1, header[j]));
            }
        }
        ++rows;
    }
    ds.features = DenseMatrix(rows, ds.feature_names.size(), std::move(values));
    ds.validate();
    return ds;
}

inline void save_tabular_csv(const TabularDataset& ds, const std::string& path,
                             const std::string& label_column = "label") {
    ds.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("data: cannot write '" + path + "'");
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
        if (j) out << ',';
        out << ds.feature_names[j];
    }
    if (ds.has_labels()) out << ',' << label_column;
    out << '\n';
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            if (j) out << ',';
            out << detail::format_value(ds.features.at(i, j));
        }
        if (ds.has_labels()) out << ',' << ds.labels[i];
        out << '\n';
    }
}

enum class SplitMode { NormalOnlyTrain, Random };

// NormalOnlyTrain: a fraction of label-0 rows goes to train; everything else
// (all anomalies plus leftover normals) to test. Random: uniform row split.
inline std::pair<TabularDataset, TabularDataset> split_train_test(const TabularDataset& ds,
                                                                  double train_fraction,
                                                                  SplitMode mode,
                                                                  std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("data: train fraction must be in (0,1)");
    ds.validate();
    if (mode == SplitMode::NormalOnlyTrain && !ds.has_labels())
        throw std::invalid_argument("data: normal-only split requires labels");

    SplitRng rng(seed);
    std::vector<std::size_t> pool;
    if (mode == SplitMode::NormalOnlyTrain) {
        for (std::size_t i = 0; i < ds.n(); ++i)
            if (ds.labels[i] == 0) pool.push_back(i);
    } else {
        pool.resize(ds.n());
        std::iota(pool.begin(), pool.end(), std::size_t{0});
    }
    for (std::size_t i = pool.size(); i > 1; --i)
        std::swap(pool[i - 1], pool[static_cast<std::size_t>(rng.below(i))]);

    const std::size_t k = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(pool.size())));
    std::vector<bool> in_train(ds.n(), false);
    for (std::size_t i = 0; i < k && i < pool.size(); ++i) in_train[pool[i]] = true;

    auto take = [&](bool train_side) {
        TabularDataset part;
        part.feature_names = ds.feature_names;
        part.norm = ds.norm;
        std::vector<double> values;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            if (in_train[i] != train_side) continue;
            for (std::size_t j = 0; j < ds.dim(); ++j) values.push_back(ds.features.at(i, j));
            if (ds.has_labels()) part.labels.push_back(ds.labels[i]);
        }
        const std::size_t rows = values.size() / ds.dim();
        part.features = DenseMatrix(rows, ds.dim(), std::move(values));
        return part;
    };
    return {take(true), take(false)};
}

inline NormStats fit_minmax(const TabularDataset& train) {
    if (train.n() == 0) throw std::invalid_argument("data: cannot fit stats on empty dataset");
    NormStats st;
    st.min.assign(train.dim(), 0.0);
    st.max.assign(train.dim(), 0.0);
    for (std::size_t j = 0; j < train.dim(); ++j) {
        double lo = train.features.at(0, j), hi = lo;
        for (std::size_t i = 1; i < train.n(); ++i) {
            lo = std::min(lo, train.features.at(i, j));
            hi = std::max(hi, train.features.at(i, j));
        }
        st.min[j] = lo;
        st.max[j] = hi;
    }
    return st;
}

// Min-max scaling onto [-1, 1]; constant features map to 0. Stats travel with
// the result so test data is scaled with train statistics, never its own.
inline TabularDataset apply_minmax(const TabularDataset& ds, const NormStats& st) {
    if (st.min.size() != ds.dim())
        throw std::invalid_argument("data: normalization stats dimension mismatch");
    TabularDataset out = ds;
    for (std::size_t j = 0; j < ds.dim(); ++j) {
        const double span = st.max[j] - st.min[j];
        for (std::size_t i = 0; i < ds.n(); ++i) {
            const double x = ds.features.at(i, j);
            out.features.at(i, j) = span > 0.0 ? 2.0 * (x - st.min[j]) / span - 1.0 : 0.0;
        }
    }
    out.norm = st;
    return out;
}

}  // namespace mimgan
