#ifndef FLEXSCHED_REPORT_HPP
#define FLEXSCHED_REPORT_HPP

#include <string>

#include "flexsched/serde.hpp"
#include "flexsched/simulation.hpp"

namespace flexsched {

// Writes <stem>.json (stable key order, 9-significant-digit floats) and
// <stem>.csv with one row per proposal. Identical reports produce identical
// bytes.
void write_report(const RunReport& report, const std::string& stem);

// Per-experiment JSON + CSV files plus a summary.json, under `directory`.
void write_comparison_bundle(const ComparisonBundle& bundle,
                             const std::string& directory);

std::string format_number(double value);  // %.9g

}  // namespace flexsched

#endif
