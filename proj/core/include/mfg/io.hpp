#pragma once

#include <string>

#include "mfg/assumptions.hpp"
#include "mfg/config.hpp"
#include "mfg/diagnostics.hpp"
#include "mfg/fixedpoint.hpp"

namespace mfg {

/// Field triple written by `solve`, column order t,x[,x2],m,u,u_tilde with
/// 17 significant digits so values round-trip exactly.
struct FieldBundle {
    SpaceTimeField density;
    SpaceTimeField value;
    SpaceTimeField value_tilde;
};

void write_fields_csv(const std::string& path, const FieldBundle& fields);

/// Parses and validates against the declared grid; throws ConfigError with
/// the offending row on malformed input.
FieldBundle read_fields_csv(const std::string& path, const GridPtr& grid);

std::string report_json(const WeakSolution& solution, const DiagnosticsReport* diagnostics,
                        const std::string& config_hash);

std::string manifest_json(const WeakSolution& solution, const std::string& config_hash,
                          const std::vector<std::string>& files);

std::string probe_json(const AssumptionReport& assumptions, const MonotonicityProbe& monotonicity);

/// Plot-ready exports: per-slice series and a few spatial profiles.
void write_series_csv(const std::string& path, const FieldBundle& fields,
                      const Eigen::VectorXd& mu);
void write_profiles_csv(const std::string& path, const FieldBundle& fields);

}  // namespace mfg
