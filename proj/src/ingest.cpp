#include "pcurve/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace pcurve {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  for (auto& s : cells) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

int find_column(const std::vector<std::string>& header,
                const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

} // namespace

PValueSample read_csv(const std::string& path, const CsvOptions& opts,
                      IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_csv: empty file '" + path + "'");
  const std::vector<std::string> header = split_csv_line(line);
  const int col_p = find_column(header, opts.p_column);
  const int col_t = find_column(header, opts.t_column);
  const int col_cluster = find_column(header, opts.cluster_column);
  const int col_round = find_column(header, opts.rounding_column);
  if (col_p < 0 && col_t < 0)
    throw std::runtime_error("read_csv: no '" + opts.p_column + "' or '" +
                             opts.t_column + "' column in '" + path + "'");

  IngestReport local;
  IngestReport& rep = report ? *report : local;
  rep = IngestReport{};

  PValueSample sample;
  long line_no = 1;
  auto reject = [&](const std::string& reason) {
    rep.errors.push_back(RowError{line_no, reason});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    ++rep.total_rows;
    const std::vector<std::string> cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != static_cast<int>(header.size())) {
      reject("wrong number of columns");
      continue;
    }
    auto cell = [&](int col) -> const std::string& {
      static const std::string empty;
      return col >= 0 ? cells[static_cast<std::size_t>(col)] : empty;
    };

    int digits = -1;
    if (col_round >= 0 && !cell(col_round).empty()) {
      if (!parse_int(cell(col_round), digits) || digits < 0) {
        reject("bad rounding_digits value");
        continue;
      }
    }

    double value;
    PValueOrigin origin;
    if (col_p >= 0 && !cell(col_p).empty()) {
      if (!parse_double(cell(col_p), value)) {
        reject("unparseable p");
        continue;
      }
      if (value < 0.0 || value > 1.0) {
        reject("p outside [0, 1]");
        continue;
      }
      if (value == 0.0 && digits < 0) {
        reject("p = 0 without rounding metadata");
        continue;
      }
      origin = PValueOrigin::reported_p;
    } else if (col_t >= 0 && !cell(col_t).empty()) {
      double t;
      if (!parse_double(cell(col_t), t)) {
        reject("unparseable t");
        continue;
      }
      value = t_to_p(t);
      origin = PValueOrigin::converted_from_t;
    } else {
      reject("neither p nor t present");
      continue;
    }

    if (col_cluster >= 0 && cell(col_cluster).empty()) {
      reject("missing cluster label");
      continue;
    }

    sample.values.push_back(value);
    sample.origin.push_back(origin);
    if (col_cluster >= 0) sample.cluster_id.push_back(cell(col_cluster));
    if (col_round >= 0) sample.rounding_digits.push_back(digits);
    ++rep.parsed_rows;
  }

  if (rep.parsed_rows + static_cast<long>(rep.errors.size()) != rep.total_rows)
    throw std::logic_error("read_csv: row accounting mismatch");
  if (rep.parsed_rows == 0)
    throw std::runtime_error("read_csv: no usable rows in '" + path + "'");
  sample.validate();
  return sample;
}

SummaryRecord summarize(const PValueSample& sample) {
  sample.validate();
  SummaryRecord rec;
  rec.n_total = static_cast<long>(sample.size());
  for (double p : sample.values) {
    if (p >= 0.04 && p <= 0.05) ++rec.n_04_05;
    if (p > 0.0 && p <= 0.15) ++rec.n_0_015;
  }
  if (sample.has_clusters()) {
    std::set<std::string> labels(sample.cluster_id.begin(),
                                 sample.cluster_id.end());
    rec.n_clusters = static_cast<long>(labels.size());
  }
  for (int d : sample.rounding_digits)
    if (d >= 0) ++rec.n_rounded;
  for (PValueOrigin o : sample.origin)
    if (o == PValueOrigin::converted_from_t) ++rec.n_converted;
  return rec;
}

} // namespace pcurve
