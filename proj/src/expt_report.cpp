#include "kinlab/expt/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace kinlab::expt {
namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CsvTable& CsvTable::begin_row() {
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::cell(double v) {
  rows_.back().push_back(g17(v));
  return *this;
}

CsvTable& CsvTable::cell(long v) {
  rows_.back().push_back(std::to_string(v));
  return *this;
}

CsvTable& CsvTable::cell(const std::string& v) {
  rows_.back().push_back(v);
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    if (row.size() != columns_.size())
      throw std::logic_error("CsvTable: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

Report::Report(std::string experiment, const Config& config)
    : experiment_(std::move(experiment)), config_(config) {}

void Report::add_metric(const std::string& name, double value, double stderr_) {
  metrics_.emplace_back(name, Metric{value, stderr_});
}

void Report::add_flag(const std::string& name, bool pass, const std::string& detail,
                      bool applicable) {
  flags_.emplace_back(name, Flag{pass, applicable, detail});
}

void Report::add_csv(const std::string& filename, const std::string& body) {
  csv_files_.emplace_back(filename, body);
}

bool Report::overall_pass() const {
  for (const auto& [name, f] : flags_)
    if (f.applicable && !f.pass) return false;
  return true;
}

double Report::metric(const std::string& name) const {
  for (const auto& [n, m] : metrics_)
    if (n == name) return m.value;
  throw std::out_of_range("Report: no metric named '" + name + "'");
}

std::string Report::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment_;
  j["version"] = "1.0.0";
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(config_.hash()));
  j["config_hash"] = hash;
  j["seed"] = config_.get_long("seed", 0);
  j["overall_pass"] = overall_pass();
  nlohmann::ordered_json jm;
  for (const auto& [name, m] : metrics_) {
    jm[name] = {{"value", m.value}, {"stderr", m.stderr_}};
  }
  j["metrics"] = jm;
  nlohmann::ordered_json jf;
  for (const auto& [name, f] : flags_) {
    jf[name] = {{"pass", f.pass}, {"applicable", f.applicable}, {"detail", f.detail}};
  }
  j["flags"] = jf;
  nlohmann::ordered_json jc;
  for (const auto& [k, v] : config_.entries()) jc[k] = v;
  j["config"] = jc;
  std::vector<std::string> files;
  for (const auto& [name, body] : csv_files_) files.push_back(name);
  j["csv_files"] = files;
  return j.dump(2) + "\n";
}

void Report::write(const std::string& out_dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream os(fs::path(out_dir) / "report.json", std::ios::binary);
    if (!os) throw std::runtime_error("Report: cannot write to " + out_dir);
    os << to_json();
  }
  for (const auto& [name, body] : csv_files_) {
    std::ofstream os(fs::path(out_dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("Report: cannot write " + name);
    os << body;
  }
}

}  // namespace kinlab::expt
