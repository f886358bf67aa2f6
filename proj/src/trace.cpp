#include "omd/trace.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace omd {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

void append_cell(std::string& line, double value) {
  line.push_back(',');
  if (std::isnan(value)) return;
  line += format_double(value);
}

}  // namespace

void RunTrace::set_meta(const std::string& key, const std::string& value) {
  for (auto& kv : meta_) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  meta_.emplace_back(key, value);
}

void RunTrace::set_meta(const std::string& key, const char* value) {
  set_meta(key, std::string(value));
}

void RunTrace::set_meta(const std::string& key, double value) {
  set_meta(key, format_double(value));
}

void RunTrace::set_meta(const std::string& key, std::int64_t value) {
  set_meta(key, std::to_string(value));
}

void RunTrace::set_meta(const std::string& key, std::uint64_t value) {
  set_meta(key, std::to_string(value));
}

void RunTrace::set_meta(const std::string& key, bool value) {
  set_meta(key, std::string(value ? "1" : "0"));
}

const std::string* RunTrace::find_meta(const std::string& key) const {
  for (const auto& kv : meta_) {
    if (kv.first == key) return &kv.second;
  }
  return nullptr;
}

void RunTrace::add_row(TraceRow row) {
  if (!rows_.empty() && row.t <= rows_.back().t) {
    throw std::invalid_argument("RunTrace: row counter must strictly increase");
  }
  rows_.push_back(std::move(row));
}

void RunTrace::write_csv(std::ostream& out) const {
  out << "t,value,gap,q_step,flags\n";
  for (const TraceRow& row : rows_) {
    std::string line = std::to_string(row.t);
    append_cell(line, row.value);
    append_cell(line, row.gap);
    append_cell(line, row.q_step);
    line.push_back(',');
    line += row.flags;
    line.push_back('\n');
    out << line;
  }
}

std::string RunTrace::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

std::string RunTrace::summary_line() const {
  std::string line;
  for (const auto& kv : meta_) {
    if (!line.empty()) line.push_back(' ');
    line += kv.first;
    line.push_back('=');
    line += kv.second;
  }
  return line;
}

}  // namespace omd
