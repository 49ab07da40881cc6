#pragma once

#include <cstdint>
#include <string>

#include "iflow/common.hpp"
#include "iflow/oracle.hpp"
#include "iflow/rng.hpp"

namespace iflow {

enum class DatasetName { Gaussian, GmmRing, TwoMoons, Checkerboard, Spiral };

const char* dataset_name_str(DatasetName n);
DatasetName dataset_from_name(const std::string& name);

// Generator knobs; each dataset reads the subset it needs.
//   gaussian:      dim, scale (std of each coordinate)
//   gmm_ring:      k components on a circle of the given radius, component std = scale
//   two_moons:     noise (std added to the two arcs)
//   checkerboard:  none (uniform over the dark squares of [-4,4]^2)
//   spiral:        noise (std across the arm)
struct DatasetParams {
    int64_t dim = 2;
    double scale = 1.0;
    int64_t k = 8;
    double radius = 4.0;
    double noise = 0.05;
    bool standardize = false;
};

struct Dataset {
    DatasetName name = DatasetName::Gaussian;
    Matrix points;  // count x dim; ids are dense row indices
    uint64_t seed = 0;

    int64_t count() const { return static_cast<int64_t>(points.rows); }
    int64_t dim() const { return static_cast<int64_t>(points.cols); }
};

Dataset make_dataset(DatasetName name, int64_t count, const DatasetParams& params,
                     uint64_t seed);

// Per-column mean and standard deviation (population variance, floored away
// from zero) — the affine map the standardize flag applies. Exposed so other
// coordinates (analytic oracle samples, mixture parameters) can be carried
// into the standardized frame.
struct ColumnStats {
    Vec mean;
    Vec sd;
};
ColumnStats column_stats(const Matrix& m);

// Deterministic shuffle-split; fraction is the held-out share. Ids in both
// splits are re-densified (row order is the shuffled order).
struct Split {
    Dataset train;
    Dataset test;
};
Split holdout_split(const Dataset& ds, double fraction, uint64_t seed);

// The analytic mixture matching gmm_ring(k, radius, scale) draws.
MixtureSpec gmm_ring_mixture(int64_t k, double radius, double scale);

}  // namespace iflow
