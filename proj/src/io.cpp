#include "rvlab/io.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "rvlab/error.hpp"

namespace rvlab::io {

Writer::Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw Error("cannot open '" + path + "' for writing");
}

void Writer::bytes(std::uint64_t v, int n) {
  char buf[8];
  for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out_.write(buf, n);
  if (!out_) throw Error("write failed on '" + path_ + "'");
}

void Writer::magic(const char (&m)[5]) { out_.write(m, 4); }
void Writer::u32(std::uint32_t v) { bytes(v, 4); }
void Writer::f64(double v) { bytes(std::bit_cast<std::uint64_t>(v), 8); }
void Writer::f64s(const double* p, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    out_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    if (!out_) throw Error("write failed on '" + path_ + "'");
  } else {
    for (std::size_t i = 0; i < n; ++i) f64(p[i]);
  }
}

Reader::Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw Error("cannot open '" + path + "' for reading");
}

std::uint64_t Reader::bytes(int n) {
  unsigned char buf[8];
  in_.read(reinterpret_cast<char*>(buf), n);
  if (!in_) throw Error("truncated file '" + path_ + "'");
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void Reader::expect_magic(const char (&m)[5]) {
  char buf[4];
  in_.read(buf, 4);
  if (!in_ || std::memcmp(buf, m, 4) != 0) throw Error("'" + path_ + "' is not a " + std::string(m) + " file");
}

std::uint32_t Reader::u32() { return static_cast<std::uint32_t>(bytes(4)); }
double Reader::f64() { return std::bit_cast<double>(bytes(8)); }
void Reader::f64s(double* p, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    in_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in_) throw Error("truncated file '" + path_ + "'");
  } else {
    for (std::size_t i = 0; i < n; ++i) p[i] = f64();
  }
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

Csv::Csv(const std::string& path, const std::vector<std::string>& header)
    : out_(path), width_(header.size()) {
  if (!out_) throw Error("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void Csv::row(const std::vector<double>& values) {
  if (values.size() != width_) throw Error("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
  out_.flush();
}

}  // namespace rvlab::io
