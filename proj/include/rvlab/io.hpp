#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace rvlab::io {

// Little-endian binary primitives.
class Writer {
 public:
  explicit Writer(const std::string& path);
  void magic(const char (&m)[5]);
  void u32(std::uint32_t v);
  void f64(double v);
  void f64s(const double* p, std::size_t n);

 private:
  void bytes(std::uint64_t v, int n);
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path);
  void expect_magic(const char (&m)[5]);
  std::uint32_t u32();
  double f64();
  void f64s(double* p, std::size_t n);

 private:
  std::uint64_t bytes(int n);
  std::ifstream in_;
  std::string path_;
};

// Minimal CSV writer: header once, then numeric rows.
class Csv {
 public:
  Csv(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t width_;
};

std::string format_double(double v);

}  // namespace rvlab::io
