#include "cmokg/report.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace cmokg {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

std::string trace_csv(std::span<const RunSummary> runs) {
  std::string out = "run_seed,mode,iter,x1,x2,m,y,cost,cum_cost\n";
  for (const auto& run : runs) {
    if (run.failed) continue;
    for (const auto& rec : run.trace.records) {
      out += std::to_string(run.problem_seed);
      out += ',';
      out += mode_name(run.mode);
      out += ',';
      out += std::to_string(rec.iteration);
      out += ',';
      out += format_double(rec.location[0]);
      out += ',';
      out += format_double(rec.location.size() > 1 ? rec.location[1] : 0.0);
      out += ',';
      out += rec.objective == kAllObjectives ? "ALL" : std::to_string(rec.objective + 1);
      out += ',';
      std::string y;
      for (size_t i = 0; i < rec.values.size(); ++i) {
        if (i > 0) y += ';';
        y += format_double(rec.values[i]);
      }
      out += csv_field(y);
      out += ',';
      out += format_double(rec.cost);
      out += ',';
      out += format_double(rec.cumulative_cost);
      out += '\n';
    }
  }
  return out;
}

std::string aggregate_csv(std::span<const AggregateRow> rows) {
  std::string out = "mode,checkpoint_cost,mean_regret,ci95_halfwidth,n_runs\n";
  for (const auto& row : rows) {
    out += mode_name(row.mode);
    out += ',';
    out += format_double(row.checkpoint);
    out += ',';
    out += format_double(row.mean_regret);
    out += ',';
    if (row.has_ci) out += format_double(row.ci95_halfwidth);
    out += ',';
    out += std::to_string(row.n_runs);
    out += '\n';
  }
  return out;
}

std::string regret_csv(std::span<const RunSummary> runs) {
  std::string out = "run_seed,mode,checkpoint_cost,regret,normalized_regret\n";
  for (const auto& run : runs) {
    if (run.failed) continue;
    for (const auto& cp : run.trace.checkpoints) {
      out += std::to_string(run.problem_seed);
      out += ',';
      out += mode_name(run.mode);
      out += ',';
      out += format_double(cp.threshold);
      out += ',';
      out += format_double(cp.report.regret);
      out += ',';
      out += format_double(cp.report.normalized_regret);
      out += '\n';
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[hash & 0xF];
    hash >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace cmokg
