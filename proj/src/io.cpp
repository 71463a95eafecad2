/* Copyright 2026 The LSR Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "lsr/io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace lsr::io {

namespace {

void ExpectMagic(std::istream& is, const std::string& magic) {
  std::string line;
  if (!std::getline(is, line)) throw Error("missing " + magic + " header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != magic) throw Error("expected magic '" + magic + "', got '" + line + "'");
}

template <typename T>
T ReadValue(std::istream& is, const char* what) {
  T value{};
  if (!(is >> value)) throw Error(std::string("truncated or malformed ") + what);
  return value;
}

std::ofstream OpenOut(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream OpenIn(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  return is;
}

std::vector<std::string> SplitComma(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string FormatReal(double x) { return fmt::format("{}", x); }

void WriteLabelMap(std::ostream& os, const LabelMap& labels) {
  os << "LSRLABEL\n" << labels.width() << ' ' << labels.height() << ' '
     << labels.void_id() << '\n';
  for (int r = 0; r < labels.height(); ++r) {
    for (int c = 0; c < labels.width(); ++c) {
      if (c) os << ' ';
      os << labels.at(r, c);
    }
    os << '\n';
  }
}

LabelMap ReadLabelMap(std::istream& is) {
  ExpectMagic(is, "LSRLABEL");
  const int width = ReadValue<int>(is, "label header");
  const int height = ReadValue<int>(is, "label header");
  const int void_id = ReadValue<int>(is, "label header");
  if (width <= 0 || height <= 0) throw Error("label map dimensions must be positive");
  std::vector<int> data(static_cast<std::size_t>(width) * height);
  for (auto& v : data) v = ReadValue<int>(is, "label data");
  return LabelMap(height, width, void_id, std::move(data));
}

void WriteFeatureMap(std::ostream& os, const FeatureMap& feats) {
  os << "LSRFEAT\n" << feats.height() << ' ' << feats.width() << ' '
     << feats.channels() << '\n';
  for (int r = 0; r < feats.height(); ++r) {
    for (int c = 0; c < feats.width(); ++c) {
      const auto v = feats.at(r, c);
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) os << ' ';
        os << FormatReal(v[k]);
      }
      os << '\n';
    }
  }
}

FeatureMap ReadFeatureMap(std::istream& is) {
  ExpectMagic(is, "LSRFEAT");
  const int h = ReadValue<int>(is, "feature header");
  const int w = ReadValue<int>(is, "feature header");
  const int k = ReadValue<int>(is, "feature header");
  if (h <= 0 || w <= 0 || k <= 0) throw Error("feature map dimensions must be positive");
  std::vector<double> data(static_cast<std::size_t>(h) * w * k);
  for (auto& v : data) v = ReadValue<double>(is, "feature data");
  FeatureMap out(h, w, k, std::move(data));
  out.Validate();
  return out;
}

void WriteImage(std::ostream& os, const Image& image) {
  os << "LSRIMG\n" << image.width << ' ' << image.height << ' ' << image.channels
     << '\n';
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      for (int ch = 0; ch < image.channels; ++ch) {
        if (ch) os << ' ';
        os << FormatReal(image.at(r, c, ch));
      }
      os << '\n';
    }
  }
}

Image ReadImage(std::istream& is) {
  ExpectMagic(is, "LSRIMG");
  const int w = ReadValue<int>(is, "image header");
  const int h = ReadValue<int>(is, "image header");
  const int ch = ReadValue<int>(is, "image header");
  if (h <= 0 || w <= 0 || ch <= 0) throw Error("image dimensions must be positive");
  Image image(h, w, ch);
  for (auto& v : image.data) v = ReadValue<double>(is, "image data");
  return image;
}

void SaveLabelMap(const std::filesystem::path& path, const LabelMap& labels) {
  auto os = OpenOut(path);
  WriteLabelMap(os, labels);
}
LabelMap LoadLabelMap(const std::filesystem::path& path) {
  auto is = OpenIn(path);
  return ReadLabelMap(is);
}
void SaveFeatureMap(const std::filesystem::path& path, const FeatureMap& feats) {
  auto os = OpenOut(path);
  WriteFeatureMap(os, feats);
}
FeatureMap LoadFeatureMap(const std::filesystem::path& path) {
  auto is = OpenIn(path);
  return ReadFeatureMap(is);
}
void SaveImage(const std::filesystem::path& path, const Image& image) {
  auto os = OpenOut(path);
  WriteImage(os, image);
}
Image LoadImage(const std::filesystem::path& path) {
  auto is = OpenIn(path);
  return ReadImage(is);
}

std::size_t CsvTable::Column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error("CSV has no column '" + name + "'");
}

CsvTable ReadCsv(std::istream& is) {
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = SplitComma(line);
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) throw Error("empty CSV");
  return table;
}

CsvTable LoadCsv(const std::filesystem::path& path) {
  auto is = OpenIn(path);
  return ReadCsv(is);
}

void WriteCsv(std::ostream& os, const CsvTable& table) {
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << row[i];
    }
    os << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

void SaveCsv(const std::filesystem::path& path, const CsvTable& table) {
  auto os = OpenOut(path);
  WriteCsv(os, table);
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  auto os = OpenOut(path);
  os << text;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  auto is = OpenIn(path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace lsr::io
