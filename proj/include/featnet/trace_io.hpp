#pragma once

#include <string>

#include "featnet/harness.hpp"
#include "featnet/trace.hpp"
#include "json.hpp"

namespace featnet {

inline constexpr const char* kTraceMagic = "# featnet trace v1";
inline constexpr const char* kTraceHeader =
    "iter,risk,excess_risk,msd,comm_net,comm_gross,gradient_evals,combination_ops,unbiasedness,"
    "grad_sum_drift,collisions";

// Two comment lines (format tag, config echo) then the header and one row per
// record. Reals use 17 significant digits; missing values are "nan".
void write_trace_csv(const std::string& path, const RunTrace& trace);
std::string trace_csv(const RunTrace& trace);
// Restores records and the config echo; run metadata comes from the config.
RunTrace read_trace_csv(const std::string& path);

nlohmann::json invariant_report_json(const InvariantReport& report);
nlohmann::json summary_json(const RunTrace& trace, const InvariantReport& report);
void write_json(const std::string& path, const nlohmann::json& doc);

}  // namespace featnet
