#include "ltdfm/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ltdfm/errors.hpp"

namespace ltdfm {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const ObservationMatrix& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "t";
  for (int i = 0; i < data.m(); ++i) {
    std::string name = i < static_cast<int>(data.channel_names.size())
                           ? data.channel_names[i]
                           : "ch" + std::to_string(i + 1);
    out << "," << name;
  }
  out << "\n";
  for (int t = 0; t < data.T(); ++t) {
    out << (t + 1);
    for (int i = 0; i < data.m(); ++i) out << "," << format_double(data.values(t, i));
    out << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

static std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

ObservationMatrix read_csv(const std::string& path, int stride, int drop_leading) {
  if (stride < 1) throw config_error("stride must be at least 1");
  if (drop_leading < 0) throw config_error("drop-leading must be nonnegative");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty CSV: " + path);
  std::vector<std::string> header = split_line(line);
  if (header.size() < 2) throw data_error("CSV header needs a time column and at least one channel");
  ObservationMatrix out;
  out.channel_names.assign(header.begin() + 1, header.end());
  const int m = static_cast<int>(out.channel_names.size());

  std::vector<double> values;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (static_cast<int>(fields.size()) != m + 1)
      throw data_error("CSV row " + std::to_string(row) + ": expected " + std::to_string(m + 1) +
                       " columns, got " + std::to_string(fields.size()));
    for (int i = 1; i <= m; ++i) {
      double v;
      const std::string& f = fields[i];
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
        throw data_error("CSV row " + std::to_string(row) + " column " + std::to_string(i + 1) +
                         ": cannot parse \"" + f + "\"");
      if (!std::isfinite(v))
        throw data_error("CSV row " + std::to_string(row) + " column " + std::to_string(i + 1) +
                         ": non-finite value");
      values.push_back(v);
    }
  }
  int total = static_cast<int>(values.size()) / m;
  if (total <= drop_leading)
    throw data_error("CSV has " + std::to_string(total) + " rows, cannot drop " +
                     std::to_string(drop_leading));
  int kept = (total - drop_leading + stride - 1) / stride;
  out.values.resize(kept, m);
  for (int k = 0; k < kept; ++k) {
    int src = drop_leading + k * stride;
    for (int i = 0; i < m; ++i) out.values(k, i) = values[static_cast<size_t>(src) * m + i];
  }
  return out;
}

}  // namespace ltdfm
