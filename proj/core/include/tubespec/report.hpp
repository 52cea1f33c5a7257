#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "tubespec/fem.hpp"

namespace tubespec {

// 17 significant digits, '.' decimal separator
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(int v);
  CsvWriter& operator<<(const std::string& v);
  void end_row();

 private:
  std::ofstream os_;
  std::size_t columns_ = 0, filled_ = 0;
  void sep();
};

void write_text(const std::string& path, const std::string& text);

// "dofs N" then one value per line
void write_field(const std::string& path, const Vector& u);
Vector read_field(const std::string& path);

}  // namespace tubespec
