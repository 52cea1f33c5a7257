#include "tubespec/report.hpp"

#include <cstdio>

#include "tubespec/error.hpp"

namespace tubespec {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : os_(path, std::ios::binary), columns_(columns.size()) {
  if (!os_) throw Error(ErrorKind::Config, "cannot write " + path);
  for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
  os_ << '\n';
}

void CsvWriter::sep() {
  if (filled_ == columns_) throw Error(ErrorKind::Numerical, "csv row has too many cells");
  if (filled_++) os_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  os_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(int v) {
  sep();
  os_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  sep();
  os_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw Error(ErrorKind::Numerical, "csv row has too few cells");
  os_ << '\n';
  filled_ = 0;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Config, "cannot write " + path);
  os << text;
  if (text.empty() || text.back() != '\n') os << '\n';
}

void write_field(const std::string& path, const Vector& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Config, "cannot write " + path);
  os << "dofs " << u.size() << '\n';
  for (Eigen::Index i = 0; i < u.size(); ++i) os << format_double(u[i]) << '\n';
}

Vector read_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Parse, "cannot open " + path);
  std::string key;
  long n = -1;
  if (!(is >> key >> n) || key != "dofs" || n < 0) throw Error(ErrorKind::Parse, "bad field header in " + path);
  Vector u(n);
  for (long i = 0; i < n; ++i)
    if (!(is >> u[i])) throw Error(ErrorKind::Parse, "truncated field file " + path);
  return u;
}

}  // namespace tubespec
