#include "rmpc/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rmpc/errors.hpp"

namespace rmpc {

std::string csv_number(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-identical reruns
    if (!out) throw ConfigError("csv: cannot write '" + path + "'");
    return out;
}

}  // namespace

void write_trace_csv(const std::string& path, const ScenarioResult& result) {
    std::ofstream out = open_for_write(path);
    const Eigen::Index n = result.n_states;

    out << "t,r,y,y_true,u,theta";
    for (Eigen::Index i = 1; i <= n; ++i) out << ",xhat_" << i;
    out << "\n";

    for (std::size_t k = 0; k < result.t.size(); ++k) {
        out << csv_number(result.t[k]) << ',' << csv_number(result.r[k]) << ','
            << csv_number(result.y[k]) << ',' << csv_number(result.y_true[k]) << ','
            << csv_number(result.u[k]) << ',' << csv_number(result.theta[k]);
        for (Eigen::Index i = 0; i < n; ++i) {
            out << ',' << csv_number(result.x_hat[k](i));
        }
        out << "\n";
    }
}

void write_metrics_csv(const std::string& path, const std::vector<ScenarioResult>& results) {
    std::ofstream out = open_for_write(path);
    out << "scenario,controller,c,failed,tracking_rmse_settled,control_energy,"
           "smoothness,max_overshoot\n";
    for (const auto& r : results) {
        out << r.name << ',' << (r.controller == ControllerKind::Smpc ? "smpc" : "rmpc")
            << ',' << csv_number(r.c) << ',' << (r.failed ? 1 : 0) << ','
            << csv_number(r.metrics.tracking_rmse_settled) << ','
            << csv_number(r.metrics.control_energy) << ','
            << csv_number(r.metrics.smoothness) << ','
            << csv_number(r.metrics.max_overshoot) << "\n";
    }
}

}  // namespace rmpc
