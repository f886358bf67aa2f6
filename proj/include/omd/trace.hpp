#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace omd {

std::string format_double(double value);

struct TraceRow {
  std::int64_t t = 0;
  double value = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  double q_step = std::numeric_limits<double>::quiet_NaN();
  std::string flags;
};

class RunTrace {
 public:
  void set_meta(const std::string& key, const std::string& value);
  void set_meta(const std::string& key, const char* value);
  void set_meta(const std::string& key, double value);
  void set_meta(const std::string& key, std::int64_t value);
  void set_meta(const std::string& key, std::uint64_t value);
  void set_meta(const std::string& key, bool value);

  const std::vector<std::pair<std::string, std::string>>& meta() const {
    return meta_;
  }
  const std::string* find_meta(const std::string& key) const;

  void add_row(TraceRow row);
  const std::vector<TraceRow>& rows() const { return rows_; }

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  std::string summary_line() const;

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<TraceRow> rows_;
};

}  // namespace omd
