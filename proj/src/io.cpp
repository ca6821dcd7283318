#include "fieldest/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace fieldest {

namespace {

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_field_csv(const std::string& path, const FieldModel& model, double sigma_v,
                     double tau, const EvalGrid& grid) {
    std::ofstream out = open_for_write(path);
    out << "x,y,phi,prob\n";
    for (int iy = 0; iy < grid.resolution; ++iy) {
        for (int ix = 0; ix < grid.resolution; ++ix) {
            const Eigen::Vector2d x = grid.point(ix, iy);
            const double phi = field_value(model, x);
            const double prob = detection_probability(model, sigma_v, tau, x);
            out << format_double(x[0]) << ',' << format_double(x[1]) << ','
                << format_double(phi) << ',' << format_double(prob) << '\n';
        }
    }
    finish(out, path);
}

void write_trace_csv(const std::string& path, const RunRecord& rec) {
    std::ofstream out = open_for_write(path);
    const Eigen::Index p = rec.beta_trace.empty() ? 0 : rec.beta_trace.front().size();
    out << "k";
    for (Eigen::Index i = 0; i < p; ++i) out << ",beta_" << (i + 1);
    out << ",grad_norm,hess_min_eig,damped\n";

    for (std::size_t k = 0; k < rec.beta_trace.size(); ++k) {
        out << k;
        for (Eigen::Index i = 0; i < p; ++i)
            out << ',' << format_double(rec.beta_trace[k][i]);
        if (k == 0) {
            out << ",0,0,0\n";  // initial state, no step behind it
        } else {
            const StepDiag& d = rec.step_diags[k - 1];
            out << ',' << format_double(d.grad_norm) << ','
                << format_double(d.hessian_min_eig) << ',' << (d.damped ? 1 : 0) << '\n';
        }
    }
    finish(out, path);
}

void write_waypoints_csv(const std::string& path, const RunRecord& rec) {
    std::ofstream out = open_for_write(path);
    out << "k,x,y,target_x,target_y,lambda_min\n";
    for (std::size_t k = 0; k < rec.targets.size(); ++k) {
        out << k << ',' << format_double(rec.positions[k][0]) << ','
            << format_double(rec.positions[k][1]) << ','
            << format_double(rec.targets[k][0]) << ','
            << format_double(rec.targets[k][1]) << ','
            << format_double(rec.target_lambda[k]) << '\n';
    }
    finish(out, path);
}

void write_step_mse_csv(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out = open_for_write(path);
    out << "scenario_id,k,mse\n";
    for (const RunRecord& rec : records) {
        for (std::size_t k = 0; k < rec.mse_trace.size(); ++k)
            out << rec.scenario_id << ',' << k << ',' << format_double(rec.mse_trace[k])
                << '\n';
    }
    finish(out, path);
}

void write_results_csv(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out = open_for_write(path);
    out << "scenario_id,seed,estimator,final_mse,time_s,aborted\n";
    for (const RunRecord& rec : records) {
        out << rec.scenario_id << ',' << rec.seed << ',' << estimator_name(rec.estimator)
            << ',' << format_double(rec.final_mse()) << ','
            << format_double(rec.algo_seconds) << ',' << (rec.aborted ? 1 : 0) << '\n';
    }
    finish(out, path);
}

void write_boxplot_csv(const std::string& path, const std::vector<BoxplotRow>& rows) {
    std::ofstream out = open_for_write(path);
    out << "estimator,q1,median,q3,whisker_lo,whisker_hi,outliers\n";
    for (const BoxplotRow& row : rows) {
        const Summary& s = row.summary;
        out << row.estimator << ',' << format_double(s.q1) << ','
            << format_double(s.median_mse) << ',' << format_double(s.q3) << ','
            << format_double(s.whisker_lo) << ',' << format_double(s.whisker_hi);
        for (double v : s.outliers) out << ',' << format_double(v);
        out << '\n';
    }
    finish(out, path);
}

}  // namespace fieldest
