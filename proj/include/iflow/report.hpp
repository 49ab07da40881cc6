#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "iflow/common.hpp"
#include "iflow/sampler.hpp"

namespace iflow {

// Streaming writer for training metrics: one `step,loss,ema_loss_window` row
// per logged step, flushed as it goes so a killed run still leaves a usable file.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& path);
    void row(int64_t step, double loss, double ema_loss_window);

private:
    std::ofstream out_;
    std::string path_;
};

// Samples: header dim0,dim1,... then one row per sample, full double precision.
void write_samples_csv(const std::string& path, const Matrix& samples);

// Trajectory: header t,z0,...,pred0,... ; one row per recorded time.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

struct EvalRow {
    std::string metric;
    double value = 0.0;
};

// Eval: header metric,value,config_hash,seed.
void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows,
                    const std::string& config_hash, uint64_t seed);

struct OracleCompareRow {
    std::string method;
    int64_t num_steps = 0;
    std::string metric;
    double value = 0.0;
};

// Oracle comparison: header method,num_steps,metric,value.
void write_oracle_compare_csv(const std::string& path,
                              const std::vector<OracleCompareRow>& rows);

// Scatter plot of 2-D samples as a self-contained SVG. Throws ArgumentError
// if the matrix is not 2-D.
void write_samples_svg(const std::string& path, const Matrix& samples);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace iflow
