#include "mgmap/mapping/grid_io.hpp"

#include <fstream>

#include "mgmap/core/binio.hpp"
#include "mgmap/core/errors.hpp"

namespace mgmap::mapping {

void write_grid(const std::string& path, int rows, int cols, int channels, const float* data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open grid file for writing: " + path);
  out.write("MGG1", 4);
  write_u32(out, static_cast<uint32_t>(rows));
  write_u32(out, static_cast<uint32_t>(cols));
  write_u32(out, static_cast<uint32_t>(channels));
  long n = static_cast<long>(rows) * cols * channels;
  for (long i = 0; i < n; ++i) write_f32(out, data[i]);
  if (!out) throw DataError("grid write failed: " + path);
}

void write_grid(const std::string& path, int rows, int cols, int channels,
                const std::vector<float>& data) {
  if (static_cast<long>(data.size()) != static_cast<long>(rows) * cols * channels)
    throw DataError("grid write: payload size mismatch");
  write_grid(path, rows, cols, channels, data.data());
}

void write_grid(const std::string& path, int rows, int cols, int channels,
                const std::vector<double>& data) {
  std::vector<float> f(data.begin(), data.end());
  write_grid(path, rows, cols, channels, f);
}

void write_ppm_heat(const std::string& path, int rows, int cols, const float* values) {
  long n = static_cast<long>(rows) * cols;
  float lo = values[0], hi = values[0];
  for (long i = 1; i < n; ++i) {
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  float span = hi - lo > 0 ? hi - lo : 1.0f;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open image for writing: " + path);
  out << "P6\n" << cols << " " << rows << "\n255\n";
  for (long i = 0; i < n; ++i) {
    float t = (values[i] - lo) / span;
    unsigned char rgb[3] = {static_cast<unsigned char>(255 * t),
                            static_cast<unsigned char>(64 * (1 - std::abs(2 * t - 1))),
                            static_cast<unsigned char>(255 * (1 - t))};
    out.write(reinterpret_cast<const char*>(rgb), 3);
  }
  if (!out) throw DataError("image write failed: " + path);
}

void write_grid_csv(const std::string& path, const GridDump& grid) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open CSV for writing: " + path);
  for (int ch = 0; ch < grid.channels; ++ch) {
    for (int r = 0; r < grid.rows; ++r) {
      for (int c = 0; c < grid.cols; ++c) {
        out << grid.data[(static_cast<long>(ch) * grid.rows + r) * grid.cols + c];
        if (c + 1 < grid.cols) out << ",";
      }
      out << "\n";
    }
    if (ch + 1 < grid.channels) out << "\n";
  }
  if (!out) throw DataError("CSV write failed: " + path);
}

GridDump read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open grid file: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "MGG1")
    throw DataError("not an MGG1 grid: " + path);
  GridDump g;
  g.rows = static_cast<int>(read_u32(in, "rows"));
  g.cols = static_cast<int>(read_u32(in, "cols"));
  g.channels = static_cast<int>(read_u32(in, "channels"));
  long n = static_cast<long>(g.rows) * g.cols * g.channels;
  if (n < 0 || n > (1L << 28)) throw DataError("grid dimensions out of range: " + path);
  g.data.resize(n);
  for (long i = 0; i < n; ++i) g.data[i] = read_f32(in, "payload");
  return g;
}

}  // namespace mgmap::mapping
