#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "cmokg/bo_loop.hpp"

namespace cmokg {

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// RFC-4180 quoting when the field contains a comma, quote or newline.
std::string csv_field(const std::string& value);

/// Columns: run_seed,mode,iter,x1,x2,m,y,cost,cum_cost. Objective indices are
/// 1-based; joint rows record m = ALL and the observed values joined by ';'.
std::string trace_csv(std::span<const RunSummary> runs);

/// Columns: mode,checkpoint_cost,mean_regret,ci95_halfwidth,n_runs. The CI
/// field is empty when a single run gives no spread estimate.
std::string aggregate_csv(std::span<const AggregateRow> rows);

/// Per-run checkpoint curves (extra artifact):
/// run_seed,mode,checkpoint_cost,regret,normalized_regret.
std::string regret_csv(std::span<const RunSummary> runs);

void write_text_file(const std::filesystem::path& path, const std::string& content);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& data);

}  // namespace cmokg
