#include "iflow/data.hpp"

#include <cmath>

namespace iflow {

const char* dataset_name_str(DatasetName n) {
    switch (n) {
        case DatasetName::Gaussian: return "gaussian";
        case DatasetName::GmmRing: return "gmm_ring";
        case DatasetName::TwoMoons: return "two_moons";
        case DatasetName::Checkerboard: return "checkerboard";
        case DatasetName::Spiral: return "spiral";
    }
    return "?";
}

DatasetName dataset_from_name(const std::string& name) {
    if (name == "gaussian") return DatasetName::Gaussian;
    if (name == "gmm_ring") return DatasetName::GmmRing;
    if (name == "two_moons") return DatasetName::TwoMoons;
    if (name == "checkerboard") return DatasetName::Checkerboard;
    if (name == "spiral") return DatasetName::Spiral;
    throw ArgumentError("unknown dataset '" + name +
                        "' (expected gaussian, gmm_ring, two_moons, checkerboard, spiral)");
}

ColumnStats column_stats(const Matrix& m) {
    ColumnStats stats;
    stats.mean.resize(m.cols);
    stats.sd.resize(m.cols);
    for (size_t j = 0; j < m.cols; ++j) {
        double mean = 0.0;
        for (size_t i = 0; i < m.rows; ++i) mean += m.at(i, j);
        mean /= static_cast<double>(m.rows);
        double var = 0.0;
        for (size_t i = 0; i < m.rows; ++i) {
            double d = m.at(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(m.rows);
        stats.mean[j] = mean;
        stats.sd[j] = std::sqrt(std::max(var, 1e-300));
    }
    return stats;
}

static void standardize(Matrix& m) {
    ColumnStats stats = column_stats(m);
    for (size_t j = 0; j < m.cols; ++j)
        for (size_t i = 0; i < m.rows; ++i)
            m.at(i, j) = (m.at(i, j) - stats.mean[j]) / stats.sd[j];
}

Dataset make_dataset(DatasetName name, int64_t count, const DatasetParams& p, uint64_t seed) {
    if (count < 1) throw ArgumentError("make_dataset: count must be >= 1");
    RngStream rng(seed, StreamPurpose::Dataset);
    Dataset ds;
    ds.name = name;
    ds.seed = seed;

    switch (name) {
        case DatasetName::Gaussian: {
            if (p.dim < 1) throw ArgumentError("make_dataset: gaussian dim must be >= 1");
            if (!(p.scale > 0.0)) throw ArgumentError("make_dataset: gaussian scale must be positive");
            ds.points = Matrix(count, p.dim);
            for (int64_t i = 0; i < count; ++i) {
                double* row = ds.points.row(i);
                rng.fill_normal(row, p.dim);
                for (int64_t j = 0; j < p.dim; ++j) row[j] *= p.scale;
            }
            break;
        }
        case DatasetName::GmmRing: {
            if (p.k < 1) throw ArgumentError("make_dataset: gmm_ring k must be >= 1");
            if (!(p.radius > 0.0) || !(p.scale > 0.0))
                throw ArgumentError("make_dataset: gmm_ring radius and scale must be positive");
            ds.points = Matrix(count, 2);
            for (int64_t i = 0; i < count; ++i) {
                uint64_t c = rng.uniform_int(static_cast<uint64_t>(p.k));
                double th = 2.0 * M_PI * static_cast<double>(c) / static_cast<double>(p.k);
                auto [e0, e1] = rng.normal_pair();
                ds.points.at(i, 0) = p.radius * std::cos(th) + p.scale * e0;
                ds.points.at(i, 1) = p.radius * std::sin(th) + p.scale * e1;
            }
            break;
        }
        case DatasetName::TwoMoons: {
            ds.points = Matrix(count, 2);
            for (int64_t i = 0; i < count; ++i) {
                bool upper = rng.uniform() < 0.5;
                double phi = M_PI * rng.uniform();
                double x, y;
                if (upper) {
                    x = std::cos(phi);
                    y = std::sin(phi);
                } else {
                    x = 1.0 - std::cos(phi);
                    y = 0.5 - std::sin(phi);
                }
                auto [e0, e1] = rng.normal_pair();
                ds.points.at(i, 0) = x + p.noise * e0;
                ds.points.at(i, 1) = y + p.noise * e1;
            }
            break;
        }
        case DatasetName::Checkerboard: {
            ds.points = Matrix(count, 2);
            for (int64_t i = 0; i < count; ++i) {
                // rejection over [-4,4]^2, keeping the dark squares
                for (;;) {
                    double x = -4.0 + 8.0 * rng.uniform();
                    double y = -4.0 + 8.0 * rng.uniform();
                    long cx = static_cast<long>(std::floor(x));
                    long cy = static_cast<long>(std::floor(y));
                    if (((cx + cy) & 1L) == 0L) {
                        ds.points.at(i, 0) = x;
                        ds.points.at(i, 1) = y;
                        break;
                    }
                }
            }
            break;
        }
        case DatasetName::Spiral: {
            ds.points = Matrix(count, 2);
            for (int64_t i = 0; i < count; ++i) {
                double u = rng.uniform();
                double th = 3.0 * M_PI * std::sqrt(u);  // sqrt for uniform arc density
                double r = 4.0 * th / (3.0 * M_PI);
                auto [e0, e1] = rng.normal_pair();
                ds.points.at(i, 0) = r * std::cos(th) + p.noise * e0;
                ds.points.at(i, 1) = r * std::sin(th) + p.noise * e1;
            }
            break;
        }
    }
    if (p.standardize) standardize(ds.points);
    return ds;
}

Split holdout_split(const Dataset& ds, double fraction, uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw ArgumentError("holdout_split: fraction must be in [0, 1)");
    int64_t n = ds.count();
    int64_t n_test = static_cast<int64_t>(std::llround(fraction * static_cast<double>(n)));
    if (n - n_test < 1) throw ArgumentError("holdout_split: train split would be empty");

    std::vector<int64_t> order(n);
    for (int64_t i = 0; i < n; ++i) order[i] = i;
    RngStream rng(seed, StreamPurpose::Split);
    for (int64_t i = n - 1; i > 0; --i) {
        uint64_t j = rng.uniform_int(static_cast<uint64_t>(i) + 1);
        std::swap(order[i], order[j]);
    }

    Split sp;
    sp.train.name = sp.test.name = ds.name;
    sp.train.seed = sp.test.seed = ds.seed;
    sp.train.points = Matrix(n - n_test, ds.points.cols);
    sp.test.points = Matrix(n_test, ds.points.cols);
    for (int64_t i = 0; i < n - n_test; ++i)
        sp.train.points.set_row(i, ds.points.row_vec(order[i]));
    for (int64_t i = 0; i < n_test; ++i)
        sp.test.points.set_row(i, ds.points.row_vec(order[n - n_test + i]));
    return sp;
}

MixtureSpec gmm_ring_mixture(int64_t k, double radius, double scale) {
    MixtureSpec mix;
    for (int64_t i = 0; i < k; ++i) {
        double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(k);
        mix.weights.push_back(1.0 / static_cast<double>(k));
        mix.means.push_back({radius * std::cos(th), radius * std::sin(th)});
        mix.scales.push_back(scale);
    }
    mix.validate();
    return mix;
}

}  // namespace iflow
