#include "bisurv/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "bisurv/errors.hpp"

namespace bisurv {

namespace {

void check_record(const SubjectRecord& r, std::size_t row) {
  if (!(std::isfinite(r.time) && r.time > 0.0)) throw RowError(row, "time must be finite and > 0");
  if (r.status != 0 && r.status != 1) throw RowError(row, "status must be 0 or 1");
  if (r.binary != 0 && r.binary != 1) throw RowError(row, "binary must be 0 or 1");
  if (r.group != 0 && r.group != 1) throw RowError(row, "treat must be 0 or 1");
}

}  // namespace

TrialDataset::TrialDataset(std::vector<SubjectRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) check_record(records_[i], i + 1);
  std::stable_sort(records_.begin(), records_.end(), [](const auto& a, const auto& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.status > b.status;
  });
  for (const auto& r : records_) {
    ++counts_[static_cast<std::size_t>(r.group)];
    responders_[static_cast<std::size_t>(r.group)] += static_cast<std::size_t>(r.binary);
  }
  if (counts_[0] < 2 || counts_[1] < 2)
    throw InsufficientDataError("each arm needs at least 2 subjects (got n0=" +
                                std::to_string(counts_[0]) + ", n1=" +
                                std::to_string(counts_[1]) + ")");
  pi_[0] = static_cast<double>(counts_[0]) / static_cast<double>(records_.size());
  pi_[1] = 1.0 - pi_[0];
}

double TrialDataset::p_hat(int group) const {
  return static_cast<double>(responders(group)) / static_cast<double>(n(group));
}

double TrialDataset::p_hat_pooled() const {
  return static_cast<double>(responders_[0] + responders_[1]) /
         static_cast<double>(records_.size());
}

double TrialDataset::last_time(int group) const {
  for (auto it = records_.rbegin(); it != records_.rend(); ++it)
    if (it->group == group) return it->time;
  return 0.0;
}

TrialDataset TrialDataset::relabeled() const {
  std::vector<SubjectRecord> r(records_.begin(), records_.end());
  for (auto& rec : r) rec.group = 1 - rec.group;
  return TrialDataset(std::move(r));
}

TrialDataset TrialDataset::rescaled(double k) const {
  std::vector<SubjectRecord> r(records_.begin(), records_.end());
  for (auto& rec : r) rec.time *= k;
  return TrialDataset(std::move(r));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> to_number(std::string_view cell) {
  double x = 0.0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) return std::nullopt;
  return x;
}

int to_flag(std::string_view cell, std::size_t row, const char* name) {
  const auto x = to_number(cell);
  if (!x) throw RowError(row, std::string("non-numeric ") + name + " '" + std::string(cell) + "'");
  if (*x != 0.0 && *x != 1.0) throw RowError(row, std::string(name) + " must be 0 or 1");
  return static_cast<int>(*x);
}

}  // namespace

TrialDataset parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw SchemaError("empty input: header row time,status,binary,treat required");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::map<std::string, std::size_t> column;
  {
    const auto names = split(line);
    for (std::size_t k = 0; k < names.size(); ++k) {
      std::string lower(names[k]);
      for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      column.emplace(lower, k);
    }
  }
  for (const char* required : {"time", "status", "binary", "treat"})
    if (!column.count(required)) throw SchemaError(std::string("missing column '") + required + "'");
  const std::size_t c_time = column["time"];
  const std::size_t c_status = column["status"];
  const std::size_t c_binary = column["binary"];
  const std::size_t c_treat = column["treat"];
  const std::size_t width = std::max({c_time, c_status, c_binary, c_treat}) + 1;

  std::vector<SubjectRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split(line);
    if (cells.size() < width) throw RowError(row, "expected at least " + std::to_string(width) + " columns");
    SubjectRecord r;
    const auto t = to_number(cells[c_time]);
    if (!t) throw RowError(row, "non-numeric time '" + std::string(cells[c_time]) + "'");
    r.time = *t;
    r.status = to_flag(cells[c_status], row, "status");
    r.binary = to_flag(cells[c_binary], row, "binary");
    r.group = to_flag(cells[c_treat], row, "treat");
    if (!(std::isfinite(r.time) && r.time > 0.0)) throw RowError(row, "time must be finite and > 0");
    records.push_back(r);
  }
  return TrialDataset(std::move(records));
}

TrialDataset parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_csv(in);
}

void write_csv(std::ostream& out, const TrialDataset& ds) {
  out << "time,status,binary,treat\n";
  char buf[64];
  for (const auto& r : ds.records()) {
    auto res = std::to_chars(buf, buf + sizeof buf, r.time);
    out.write(buf, res.ptr - buf);
    out << ',' << r.status << ',' << r.binary << ',' << r.group << '\n';
  }
}

}  // namespace bisurv
