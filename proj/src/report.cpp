#include "iflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace iflow {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("report: cannot open '" + path + "' for writing");
    return out;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

}  // namespace

MetricsWriter::MetricsWriter(const std::string& path) : out_(open_out(path)), path_(path) {
    out_ << "step,loss,ema_loss_window\n";
    out_.flush();
}

void MetricsWriter::row(int64_t step, double loss, double ema_loss_window) {
    out_ << step << ',' << fmt(loss) << ',' << fmt(ema_loss_window) << '\n';
    out_.flush();
    if (!out_) throw IoError("report: write failed on '" + path_ + "'");
}

void write_samples_csv(const std::string& path, const Matrix& samples) {
    std::ofstream out = open_out(path);
    for (size_t d = 0; d < samples.cols; ++d) out << (d ? "," : "") << "dim" << d;
    out << '\n';
    for (size_t i = 0; i < samples.rows; ++i) {
        const double* r = samples.row(i);
        for (size_t d = 0; d < samples.cols; ++d) out << (d ? "," : "") << fmt(r[d]);
        out << '\n';
    }
    if (!out) throw IoError("report: write failed on '" + path + "'");
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out = open_out(path);
    size_t dim = traj.endpoint.size();
    out << 't';
    for (size_t d = 0; d < dim; ++d) out << ",z" << d;
    for (size_t d = 0; d < dim; ++d) out << ",pred" << d;
    out << '\n';
    for (size_t i = 0; i < traj.times.size(); ++i) {
        out << fmt(traj.times[i]);
        for (size_t d = 0; d < dim; ++d) out << ',' << fmt(traj.states[i][d]);
        for (size_t d = 0; d < dim; ++d) out << ',' << fmt(traj.predictions[i][d]);
        out << '\n';
    }
    if (!out) throw IoError("report: write failed on '" + path + "'");
}

void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows,
                    const std::string& config_hash, uint64_t seed) {
    std::ofstream out = open_out(path);
    out << "metric,value,config_hash,seed\n";
    for (const auto& r : rows)
        out << r.metric << ',' << fmt(r.value) << ',' << config_hash << ',' << seed << '\n';
    if (!out) throw IoError("report: write failed on '" + path + "'");
}

void write_oracle_compare_csv(const std::string& path,
                              const std::vector<OracleCompareRow>& rows) {
    std::ofstream out = open_out(path);
    out << "method,num_steps,metric,value\n";
    for (const auto& r : rows)
        out << r.method << ',' << r.num_steps << ',' << r.metric << ',' << fmt(r.value)
            << '\n';
    if (!out) throw IoError("report: write failed on '" + path + "'");
}

void write_samples_svg(const std::string& path, const Matrix& samples) {
    if (samples.cols != 2)
        throw ArgumentError("svg: scatter plot needs 2-D samples, got dim " +
                            std::to_string(samples.cols));
    double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
    for (size_t i = 0; i < samples.rows; ++i) {
        const double* r = samples.row(i);
        if (i == 0) {
            lo_x = hi_x = r[0];
            lo_y = hi_y = r[1];
        } else {
            lo_x = std::min(lo_x, r[0]);
            hi_x = std::max(hi_x, r[0]);
            lo_y = std::min(lo_y, r[1]);
            hi_y = std::max(hi_y, r[1]);
        }
    }
    double span_x = std::max(hi_x - lo_x, 1e-9);
    double span_y = std::max(hi_y - lo_y, 1e-9);
    const double size = 640.0, margin = 32.0, plot = size - 2 * margin;

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
           "viewBox=\"0 0 640 640\">\n"
        << "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    out << std::setprecision(6);
    for (size_t i = 0; i < samples.rows; ++i) {
        const double* r = samples.row(i);
        double px = margin + (r[0] - lo_x) / span_x * plot;
        double py = size - margin - (r[1] - lo_y) / span_y * plot;
        out << "<circle cx=\"" << px << "\" cy=\"" << py
            << "\" r=\"1.5\" fill=\"#1f6fb2\" fill-opacity=\"0.55\"/>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("report: write failed on '" + path + "'");
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out = open_out(path);
    out << text;
    if (!out) throw IoError("report: write failed on '" + path + "'");
}

}  // namespace iflow
