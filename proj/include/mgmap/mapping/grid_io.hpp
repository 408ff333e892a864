#pragma once

#include <string>
#include <vector>

namespace mgmap::mapping {

// MGG1 grid dump: magic "MGG1", u32 rows, u32 cols, u32 channels, then f32
// row-major payload (channel-major: channels x rows x cols), little-endian.
struct GridDump {
  int rows = 0, cols = 0, channels = 0;
  std::vector<float> data;
};

void write_grid(const std::string& path, int rows, int cols, int channels, const float* data);
void write_grid(const std::string& path, int rows, int cols, int channels,
                const std::vector<float>& data);
void write_grid(const std::string& path, int rows, int cols, int channels,
                const std::vector<double>& data);
GridDump read_grid(const std::string& path);

// Min-max-normalized heat ramp (blue -> red) as a binary PPM, one channel.
void write_ppm_heat(const std::string& path, int rows, int cols, const float* values);

// One CSV row per grid row; channels stacked vertically with blank separators.
void write_grid_csv(const std::string& path, const GridDump& grid);

}  // namespace mgmap::mapping
