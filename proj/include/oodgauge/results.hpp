#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oodgauge/model.hpp"
#include "oodgauge/scoring.hpp"
#include "oodgauge/ssl.hpp"

namespace oodgauge {

inline constexpr const char* kResultsHeader =
    "loss,ssl,scorer,axis,axis_value,auroc,id_accuracy,seed,wall_time_s";

// One evaluated point of a sweep. For r-sweeps axis = "r" and id_accuracy is
// ID test accuracy; for mixup sweeps axis = "mix" and id_accuracy is the
// accuracy on mixed samples against their ID labels.
struct SweepRecord {
  HeadKind loss_kind = HeadKind::ce;
  SslKind ssl_kind = SslKind::none;
  Scorer scorer = Scorer::baseline;
  std::string axis;
  double axis_value = 0.0;
  double auroc = 0.0;
  double id_accuracy = 0.0;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;

  // Everything except wall_time_s, which is physical time.
  bool same_measurement(const SweepRecord& other) const;
};

bool operator==(const SweepRecord& a, const SweepRecord& b);

// Fresh file: optional metadata block ('#'-prefixed lines), header, rows.
// Reals carry 17 significant digits so the round-trip is exact.
void write_results(const std::vector<SweepRecord>& records,
                   const std::string& path, const std::string& metadata = "");

// Appends rows to an existing results file (validating its header), or
// creates it if absent.
void append_results(const std::vector<SweepRecord>& records,
                    const std::string& path);

// Skips '#' lines; the header must match kResultsHeader column by column
// (mismatches are reported by column name).
std::vector<SweepRecord> read_results(const std::string& path);

}  // namespace oodgauge
