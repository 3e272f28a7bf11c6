#pragma once

#include <string>
#include <vector>

#include "pcurve/estimators.hpp"

namespace pcurve {

struct CsvOptions {
  std::string p_column = "p";
  std::string t_column = "t";
  std::string cluster_column = "cluster_id";
  std::string rounding_column = "rounding_digits";
};

struct RowError {
  long line = 0; // 1-based physical line in the file
  std::string reason;
};

struct IngestReport {
  long total_rows = 0;
  long parsed_rows = 0;
  std::vector<RowError> errors;
};

// reads a comma-separated file with a header row; a p column is preferred,
// otherwise t statistics are converted; rejects rows rather than guessing
PValueSample read_csv(const std::string& path, const CsvOptions& opts = {},
                      IngestReport* report = nullptr);

struct SummaryRecord {
  long n_total = 0;
  long n_04_05 = 0;  // p in [0.04, 0.05]
  long n_0_015 = 0;  // p in (0, 0.15]
  long n_clusters = 0;
  long n_rounded = 0;
  long n_converted = 0;
};

SummaryRecord summarize(const PValueSample& sample);

} // namespace pcurve
