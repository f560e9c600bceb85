#include "oodgauge/results.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oodgauge {

bool SweepRecord::same_measurement(const SweepRecord& other) const {
  return loss_kind == other.loss_kind && ssl_kind == other.ssl_kind &&
         scorer == other.scorer && axis == other.axis &&
         axis_value == other.axis_value && auroc == other.auroc &&
         id_accuracy == other.id_accuracy && seed == other.seed;
}

bool operator==(const SweepRecord& a, const SweepRecord& b) {
  return a.same_measurement(b) && a.wall_time_s == b.wall_time_s;
}

namespace {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_row(const SweepRecord& r) {
  std::string out;
  out += to_string(r.loss_kind);
  out += ',';
  out += to_string(r.ssl_kind);
  out += ',';
  out += to_string(r.scorer);
  out += ',';
  out += r.axis;
  out += ',';
  out += format_real(r.axis_value);
  out += ',';
  out += format_real(r.auroc);
  out += ',';
  out += format_real(r.id_accuracy);
  out += ',';
  out += std::to_string(r.seed);
  out += ',';
  out += format_real(r.wall_time_s);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

void check_header(const std::string& line, const std::string& path) {
  const std::vector<std::string> expected = split_csv(kResultsHeader);
  const std::vector<std::string> found = split_csv(line);
  if (found.size() != expected.size()) {
    throw std::runtime_error("results: " + path + " has " +
                             std::to_string(found.size()) +
                             " header columns, expected " +
                             std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (found[i] != expected[i]) {
      throw std::runtime_error("results: " + path + " header column " +
                               std::to_string(i + 1) + " is '" + found[i] +
                               "', expected '" + expected[i] + "'");
    }
  }
}

void validate_record(const SweepRecord& r, int row_no, const std::string& path) {
  if (!(r.auroc >= 0.0 && r.auroc <= 1.0)) {
    throw std::runtime_error("results: row " + std::to_string(row_no) +
                             " in " + path + " has auroc outside [0, 1]");
  }
  if (r.axis != "r" && r.axis != "mix") {
    throw std::runtime_error("results: row " + std::to_string(row_no) +
                             " in " + path + " has unknown axis '" + r.axis +
                             "'");
  }
}

}  // namespace

void write_results(const std::vector<SweepRecord>& records,
                   const std::string& path, const std::string& metadata) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  if (!metadata.empty()) {
    std::stringstream ss(metadata);
    std::string line;
    while (std::getline(ss, line)) out << "# " << line << '\n';
  }
  out << kResultsHeader << '\n';
  for (const SweepRecord& r : records) out << format_row(r) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void append_results(const std::vector<SweepRecord>& records,
                    const std::string& path) {
  if (!std::filesystem::exists(path)) {
    write_results(records, path);
    return;
  }
  {
    // Validate before appending so we never extend a foreign file.
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    bool found_header = false;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      check_header(line, path);
      found_header = true;
      break;
    }
    if (!found_header) {
      throw std::runtime_error("results: " + path + " has no header line");
    }
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open for appending: " + path);
  for (const SweepRecord& r : records) out << format_row(r) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<SweepRecord> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<SweepRecord> records;
  std::string line;
  bool seen_header = false;
  int row_no = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      check_header(line, path);
      seen_header = true;
      continue;
    }
    ++row_no;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != 9) {
      throw std::runtime_error("results: row " + std::to_string(row_no) +
                               " in " + path + " has " +
                               std::to_string(cells.size()) +
                               " cells, expected 9");
    }
    SweepRecord r;
    try {
      r.loss_kind = head_kind_from_string(cells[0]);
      r.ssl_kind = ssl_kind_from_string(cells[1]);
      r.scorer = scorer_from_string(cells[2]);
      r.axis = cells[3];
      r.axis_value = std::stod(cells[4]);
      r.auroc = std::stod(cells[5]);
      r.id_accuracy = std::stod(cells[6]);
      r.seed = std::stoull(cells[7]);
      r.wall_time_s = std::stod(cells[8]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("results: row " + std::to_string(row_no) +
                               " in " + path + ": " + e.what());
    }
    validate_record(r, row_no, path);
    records.push_back(std::move(r));
  }
  if (!seen_header) {
    throw std::runtime_error("results: " + path + " has no header line");
  }
  return records;
}

}  // namespace oodgauge
