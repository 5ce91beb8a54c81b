// Copyright 2026 The Microdoom Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MICRODOOM_FRAME_CODEC_H_
#define MICRODOOM_FRAME_CODEC_H_

// Frame -> 40x25 ASCII brightness grid + 16-bin depth grid, plus the digit
// grid text given to LLM agents.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace microdoom {

inline constexpr int kFrameCols = 40;
inline constexpr int kFrameRows = 25;
inline constexpr int kFrameCells = kFrameCols * kFrameRows;
// 1,000 content characters + 24 row separators.
inline constexpr int kSerializedFrameLength = kFrameCells + kFrameRows - 1;
inline constexpr std::string_view kPalette = " .:-=+*#%@";
inline constexpr int kNumDepthBins = 16;

struct RgbFrame {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major RGB triples

  RgbFrame() = default;
  RgbFrame(int w, int h, uint8_t r = 0, uint8_t g = 0, uint8_t b = 0);

  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b);
  void Validate() const;
};

// Single-channel 8-bit image. Also used for depth buffers
// (0 = nearest, 255 = farthest).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> values;  // row-major

  GrayImage() = default;
  GrayImage(int w, int h, uint8_t fill = 0)
      : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

  uint8_t at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
  void Validate() const;
};

using DepthBuffer = GrayImage;

class AsciiFrame {
 public:
  AsciiFrame();  // all spaces

  // Rows must be 25 strings of 40 palette characters.
  static AsciiFrame FromRows(const std::array<std::string, kFrameRows>& rows);
  // Accepts the newline-separated 1,024-character form.
  static AsciiFrame Parse(std::string_view text);

  char at(int row, int col) const { return rows_[row][col]; }
  void set(int row, int col, char c);
  const std::string& row(int r) const { return rows_[r]; }
  const std::array<std::string, kFrameRows>& rows() const { return rows_; }

  std::string Serialize() const;
  bool operator==(const AsciiFrame&) const = default;

 private:
  std::array<std::string, kFrameRows> rows_;
};

struct DepthGrid {
  std::array<uint8_t, kFrameCells> bins{};  // row-major, each in [0, 15]

  uint8_t at(int row, int col) const { return bins[row * kFrameCols + col]; }
  uint8_t& at(int row, int col) { return bins[row * kFrameCols + col]; }
  bool operator==(const DepthGrid&) const = default;
};

using DigitGrid = std::array<std::string, kFrameRows>;

// BT.601 luma, rounded half up.
uint8_t Luma(uint8_t r, uint8_t g, uint8_t b);
GrayImage ToGrayscale(const RgbFrame& frame);

// Floor-boundary block averaging; cell (r, c) averages input rows
// [floor(r*H/out_rows), floor((r+1)*H/out_rows)) and the analogous columns.
GrayImage BlockDownscale(const GrayImage& grid, int out_cols = kFrameCols,
                         int out_rows = kFrameRows);

char BrightnessToChar(uint8_t v);
int PaletteIndex(char c);  // -1 if not a palette character

// Maps an already 40x25 luma grid to characters.
AsciiFrame AsciiFromLuma(const GrayImage& luma);
AsciiFrame EncodeAscii(const RgbFrame& frame);

// Full-range normalization: bin = min(floor(v * 16 / 255), 15).
uint8_t DepthValueToBin(uint8_t v);
DepthGrid QuantizeDepth(const DepthBuffer& buffer);

uint8_t DepthBinToDigit(uint8_t bin);
DigitGrid DepthToDigitGrid(const DepthGrid& grid);
std::string SerializeDigitGrid(const DigitGrid& digits);

}  // namespace microdoom

#endif  // MICRODOOM_FRAME_CODEC_H_
