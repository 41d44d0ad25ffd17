#pragma once

#include <string>

#include "appgame/analysis.hpp"
#include "appgame/config.hpp"

namespace appgame::io {

// %.17g -- enough digits to round-trip a double exactly.
std::string format_g17(double v);

// Columns: t,x1,x2,lambda1,lambda2,c1,c2,a1,a2,margin1,margin2,deadweight
std::string trajectory_csv(const Trajectory& traj, const ModelParams& p);

// Columns: t,x,lambda,c,x1,x2,c1,c2 (share-disaggregated paths appended)
std::string coop_trajectory_csv(const CoopTrajectory& traj, double pi_weight);

// Report JSON bodies (stable key order).
std::string report_json(const RegimeReport& report, const ShootingResult& shot,
                        const Trajectory& traj);
std::string coop_report_json(const CoopTrajectory& traj, double x0, const ModelParams& p);
std::string steady_report_json(const SteadyStateResult& result, const ModelParams& p);
std::string compare_report_json(const RegimeReport& report, const ShootingResult& shot,
                                const Trajectory& traj, const CoopTrajectory& coop);

// Long-format sweep table: axis columns, then report columns, then status.
std::string sweep_csv(const std::vector<SweepCell>& cells, const SweepGrid& grid);
std::string sweep_summary_json(const std::vector<SweepCell>& cells, const SweepGrid& grid);

// Plot emission: long-format series CSV and a small static SVG of the
// (x1, x2) and (a1, a2) time paths.
std::string plot_csv(const Trajectory& traj, const ModelParams& p);
std::string paths_svg(const Trajectory& traj, const ModelParams& p);

// Write via temp file + rename in the target directory.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace appgame::io
