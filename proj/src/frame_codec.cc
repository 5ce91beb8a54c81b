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

#include "microdoom/frame_codec.h"

#include <algorithm>

#include "microdoom/error.h"

namespace microdoom {

RgbFrame::RgbFrame(int w, int h, uint8_t r, uint8_t g, uint8_t b)
    : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3) {
  for (size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
  }
}

void RgbFrame::set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
  size_t i = (static_cast<size_t>(y) * width + x) * 3;
  pixels[i] = r;
  pixels[i + 1] = g;
  pixels[i + 2] = b;
}

void RgbFrame::Validate() const {
  if (width < kFrameCols || height < kFrameRows) {
    Fail(ErrorKind::kInputTooSmall, "frame " + std::to_string(width) + "x" +
                                        std::to_string(height) + " is below 40x25");
  }
  if (pixels.size() != static_cast<size_t>(width) * height * 3) {
    Fail(ErrorKind::kShapeMismatch, "pixel buffer does not match frame dimensions");
  }
}

void GrayImage::Validate() const {
  if (values.size() != static_cast<size_t>(width) * height) {
    Fail(ErrorKind::kShapeMismatch, "buffer does not match image dimensions");
  }
}

AsciiFrame::AsciiFrame() { rows_.fill(std::string(kFrameCols, ' ')); }

AsciiFrame AsciiFrame::FromRows(const std::array<std::string, kFrameRows>& rows) {
  for (int r = 0; r < kFrameRows; ++r) {
    if (rows[r].size() != static_cast<size_t>(kFrameCols)) {
      Fail(ErrorKind::kInvalidFrame, "row " + std::to_string(r) + " has " +
                                         std::to_string(rows[r].size()) + " chars");
    }
    for (char c : rows[r]) {
      if (PaletteIndex(c) < 0) {
        Fail(ErrorKind::kInvalidFrame,
             std::string("character '") + c + "' is not in the palette");
      }
    }
  }
  AsciiFrame f;
  f.rows_ = rows;
  return f;
}

AsciiFrame AsciiFrame::Parse(std::string_view text) {
  std::array<std::string, kFrameRows> rows;
  int r = 0;
  size_t start = 0;
  while (true) {
    size_t end = text.find('\n', start);
    std::string_view line =
        text.substr(start, end == std::string_view::npos ? text.npos : end - start);
    if (r >= kFrameRows) Fail(ErrorKind::kInvalidFrame, "more than 25 rows");
    rows[r++] = std::string(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (r != kFrameRows) {
    Fail(ErrorKind::kInvalidFrame, "expected 25 rows, got " + std::to_string(r));
  }
  return FromRows(rows);
}

void AsciiFrame::set(int row, int col, char c) {
  if (PaletteIndex(c) < 0) {
    Fail(ErrorKind::kInvalidFrame, std::string("character '") + c + "' is not in the palette");
  }
  rows_[row][col] = c;
}

std::string AsciiFrame::Serialize() const {
  std::string out;
  out.reserve(kSerializedFrameLength);
  for (int r = 0; r < kFrameRows; ++r) {
    if (r > 0) out += '\n';
    out += rows_[r];
  }
  return out;
}

uint8_t Luma(uint8_t r, uint8_t g, uint8_t b) {
  // Integer form of round(0.299 R + 0.587 G + 0.114 B); max is exactly 255.
  return static_cast<uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

GrayImage ToGrayscale(const RgbFrame& frame) {
  frame.Validate();
  GrayImage out(frame.width, frame.height);
  for (size_t i = 0; i < out.values.size(); ++i) {
    const uint8_t* p = &frame.pixels[i * 3];
    out.values[i] = Luma(p[0], p[1], p[2]);
  }
  return out;
}

GrayImage BlockDownscale(const GrayImage& grid, int out_cols, int out_rows) {
  grid.Validate();
  if (grid.width < out_cols || grid.height < out_rows) {
    Fail(ErrorKind::kInputTooSmall, "input " + std::to_string(grid.width) + "x" +
                                        std::to_string(grid.height) + " is below " +
                                        std::to_string(out_cols) + "x" +
                                        std::to_string(out_rows));
  }
  GrayImage out(out_cols, out_rows);
  for (int r = 0; r < out_rows; ++r) {
    const int y0 = static_cast<int>(static_cast<int64_t>(r) * grid.height / out_rows);
    const int y1 = static_cast<int>(static_cast<int64_t>(r + 1) * grid.height / out_rows);
    for (int c = 0; c < out_cols; ++c) {
      const int x0 = static_cast<int>(static_cast<int64_t>(c) * grid.width / out_cols);
      const int x1 = static_cast<int>(static_cast<int64_t>(c + 1) * grid.width / out_cols);
      uint64_t sum = 0;
      for (int y = y0; y < y1; ++y) {
        const uint8_t* row = &grid.values[static_cast<size_t>(y) * grid.width];
        for (int x = x0; x < x1; ++x) sum += row[x];
      }
      const uint64_t count = static_cast<uint64_t>(y1 - y0) * (x1 - x0);
      out.at(c, r) = static_cast<uint8_t>((sum + count / 2) / count);
    }
  }
  return out;
}

char BrightnessToChar(uint8_t v) {
  return kPalette[std::min(v * 10 / 256, 9)];
}

int PaletteIndex(char c) {
  auto pos = kPalette.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

AsciiFrame AsciiFromLuma(const GrayImage& luma) {
  if (luma.width != kFrameCols || luma.height != kFrameRows) {
    Fail(ErrorKind::kShapeMismatch, "luma grid must be 40x25");
  }
  std::array<std::string, kFrameRows> rows;
  for (int r = 0; r < kFrameRows; ++r) {
    rows[r].resize(kFrameCols);
    for (int c = 0; c < kFrameCols; ++c) rows[r][c] = BrightnessToChar(luma.at(c, r));
  }
  return AsciiFrame::FromRows(rows);
}

AsciiFrame EncodeAscii(const RgbFrame& frame) {
  return AsciiFromLuma(BlockDownscale(ToGrayscale(frame)));
}

uint8_t DepthValueToBin(uint8_t v) {
  return static_cast<uint8_t>(std::min(v * kNumDepthBins / 255, kNumDepthBins - 1));
}

DepthGrid QuantizeDepth(const DepthBuffer& buffer) {
  GrayImage small = BlockDownscale(buffer);
  DepthGrid grid;
  for (int i = 0; i < kFrameCells; ++i) grid.bins[i] = DepthValueToBin(small.values[i]);
  return grid;
}

uint8_t DepthBinToDigit(uint8_t bin) {
  return static_cast<uint8_t>('0' + std::min(bin * 10 / kNumDepthBins, 9));
}

DigitGrid DepthToDigitGrid(const DepthGrid& grid) {
  DigitGrid out;
  for (int r = 0; r < kFrameRows; ++r) {
    out[r].resize(kFrameCols);
    for (int c = 0; c < kFrameCols; ++c) out[r][c] = static_cast<char>(DepthBinToDigit(grid.at(r, c)));
  }
  return out;
}

std::string SerializeDigitGrid(const DigitGrid& digits) {
  std::string out;
  for (int r = 0; r < kFrameRows; ++r) {
    if (r > 0) out += '\n';
    out += digits[r];
  }
  return out;
}

}  // namespace microdoom
