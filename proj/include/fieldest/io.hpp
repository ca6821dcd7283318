#pragma once

#include <string>
#include <vector>

#include "fieldest/eval.hpp"

namespace fieldest {

class IoError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// 17-significant-digit representation; round-trips exactly.
std::string format_double(double v);

/// `x,y,phi,prob` over the grid, row-major with x fastest.
void write_field_csv(const std::string& path, const FieldModel& model, double sigma_v,
                     double tau, const EvalGrid& grid);

/// `k,beta_1..beta_p,grad_norm,hess_min_eig,damped`; row 0 is the initial state.
void write_trace_csv(const std::string& path, const RunRecord& rec);

/// `k,x,y,target_x,target_y,lambda_min`, one row per step taken.
void write_waypoints_csv(const std::string& path, const RunRecord& rec);

/// `scenario_id,k,mse`, k = 0 holding the initial estimate's value.
void write_step_mse_csv(const std::string& path, const std::vector<RunRecord>& records);

/// `scenario_id,seed,estimator,final_mse,time_s,aborted`.
void write_results_csv(const std::string& path, const std::vector<RunRecord>& records);

struct BoxplotRow {
    std::string estimator;
    Summary summary;
};

/// `estimator,q1,median,q3,whisker_lo,whisker_hi,outliers...`.
void write_boxplot_csv(const std::string& path, const std::vector<BoxplotRow>& rows);

}  // namespace fieldest
