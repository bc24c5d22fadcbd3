#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kinlab/expt/config.hpp"

namespace kinlab::expt {

struct Metric {
  double value = 0.0;
  double stderr_ = 0.0;
};

struct Flag {
  bool pass = false;
  bool applicable = true;  // not-applicable flags do not gate the exit code
  std::string detail;
};

/// Simple deterministic CSV builder (17 significant digits everywhere).
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  CsvTable& begin_row();
  CsvTable& cell(double v);
  CsvTable& cell(long v);
  CsvTable& cell(const std::string& v);
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Experiment output: metrics with uncertainties, pass/fail flags referencing
/// named acceptance rules, provenance (seed, config hash), and the CSV bodies
/// for each metric family. Fully deterministic for a fixed config + seed.
class Report {
 public:
  Report(std::string experiment, const Config& config);

  void add_metric(const std::string& name, double value, double stderr_);
  void add_flag(const std::string& name, bool pass, const std::string& detail,
                bool applicable = true);
  void add_csv(const std::string& filename, const std::string& body);

  bool overall_pass() const;
  const std::vector<std::pair<std::string, Flag>>& flags() const { return flags_; }
  const std::vector<std::pair<std::string, Metric>>& metrics() const { return metrics_; }
  double metric(const std::string& name) const;

  std::string to_json() const;

  /// Writes report.json and every CSV into out_dir (created if needed).
  void write(const std::string& out_dir) const;

 private:
  std::string experiment_;
  Config config_;
  std::vector<std::pair<std::string, Metric>> metrics_;
  std::vector<std::pair<std::string, Flag>> flags_;
  std::vector<std::pair<std::string, std::string>> csv_files_;
};

}  // namespace kinlab::expt
