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

#ifndef LSR_IO_HPP_
#define LSR_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lsr/core.hpp"

namespace lsr::io {

// Text formats:
//   LSRLABEL / "width height void_id" / one row of ids per line.
//   LSRFEAT  / "h w k" / one latent cell (k values) per line, row-major.
//   LSRIMG   / "width height channels" / one pixel per line, row-major.
// Reals are written in shortest round-trip form.
void WriteLabelMap(std::ostream& os, const LabelMap& labels);
LabelMap ReadLabelMap(std::istream& is);
void WriteFeatureMap(std::ostream& os, const FeatureMap& feats);
FeatureMap ReadFeatureMap(std::istream& is);
void WriteImage(std::ostream& os, const Image& image);
Image ReadImage(std::istream& is);

void SaveLabelMap(const std::filesystem::path& path, const LabelMap& labels);
LabelMap LoadLabelMap(const std::filesystem::path& path);
void SaveFeatureMap(const std::filesystem::path& path, const FeatureMap& feats);
FeatureMap LoadFeatureMap(const std::filesystem::path& path);
void SaveImage(const std::filesystem::path& path, const Image& image);
Image LoadImage(const std::filesystem::path& path);

std::string FormatReal(double x);

// Minimal CSV: comma separated, no quoting, first row is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws if the column is missing.
  std::size_t Column(const std::string& name) const;
};

CsvTable ReadCsv(std::istream& is);
CsvTable LoadCsv(const std::filesystem::path& path);
void WriteCsv(std::ostream& os, const CsvTable& table);
void SaveCsv(const std::filesystem::path& path, const CsvTable& table);

void WriteTextFile(const std::filesystem::path& path, const std::string& text);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace lsr::io

#endif  // LSR_IO_HPP_
