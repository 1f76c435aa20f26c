// Copyright 2026 The qscorer Authors.
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

#include "qscorer/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "qscorer/errors.hpp"
#include "qscorer/io.hpp"

namespace qscorer {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

template <class T>
T parse_number(std::string_view field, std::size_t line, const std::string& column) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("line " + std::to_string(line) + ", column " + column + ": cannot parse '" +
                         std::string(field) + "' as a number",
                     line);
  }
  if (!std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line) + ", column " + column +
                         ": NaN or infinite value rejected",
                     line);
  }
  return value;
}

// Calls fn(line_number, line) for every non-empty line.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto line = trim(text.substr(start, end - start));
    if (!line.empty()) fn(line_no, line);
    start = end + 1;
  }
}

bool is_index(std::string_view s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string_view::npos;
}

}  // namespace

Dataset parse_csv(std::string_view text, const std::string& label_col, const std::string& name) {
  Dataset ds;
  ds.name = name;
  std::vector<std::string> header;
  std::size_t label = 0;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split(line, ',');
    if (header.empty()) {
      for (auto f : fields) header.emplace_back(f);
      if (header.size() < 2) throw ParseError("line 1: CSV needs a label and at least one feature", 1);
      if (label_col.empty()) {
        label = header.size() - 1;
        for (std::size_t j = 0; j < header.size(); ++j) {
          if (header[j] == "label") label = j;
        }
      } else {
        label = header.size();
        for (std::size_t j = 0; j < header.size(); ++j) {
          if (header[j] == label_col) label = j;
        }
        if (label == header.size() && is_index(label_col)) label = std::stoul(label_col);
        if (label >= header.size()) {
          throw ArgumentError("label column '" + label_col + "' not found in CSV header");
        }
      }
      for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != label) ds.feature_names.push_back(header[j]);
      }
      ds.n_features = header.size() - 1;
      return;
    }
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j == label) {
        ds.labels.push_back(parse_number<double>(fields[j], line_no, header[j]));
      } else {
        ds.features.push_back(parse_number<float>(fields[j], line_no, header[j]));
      }
    }
    ++ds.n_rows;
  });
  if (header.empty()) throw ParseError("CSV has no header", 1);
  return ds;
}

Dataset parse_svmlight(std::string_view text, std::size_t n_features, const std::string& name) {
  struct Entry {
    std::size_t index;
    float value;
  };
  std::vector<std::vector<Entry>> rows;
  Dataset ds;
  ds.name = name;
  std::size_t max_index = 0;
  bool any = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) return;
    std::vector<std::string_view> tokens;
    for (auto t : split(line, ' ')) {
      if (!t.empty()) tokens.push_back(t);
    }
    ds.labels.push_back(parse_number<double>(tokens[0], line_no, "label"));
    std::vector<Entry> row;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto colon = tokens[i].find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("line " + std::to_string(line_no) + ": expected index:value, got '" +
                             std::string(tokens[i]) + "'",
                         line_no);
      }
      const auto key = tokens[i].substr(0, colon);
      if (key == "qid") continue;
      const auto index = parse_number<double>(key, line_no, "index");
      if (index < 0 || index != std::floor(index)) {
        throw ParseError("line " + std::to_string(line_no) + ": bad feature index '" +
                             std::string(key) + "'",
                         line_no);
      }
      const auto k = static_cast<std::size_t>(index);
      row.push_back({k, parse_number<float>(tokens[i].substr(colon + 1), line_no, std::string(key))});
      max_index = std::max(max_index, k);
      any = true;
    }
    rows.push_back(std::move(row));
  });
  ds.n_rows = rows.size();
  ds.n_features = n_features != 0 ? n_features : (any ? max_index + 1 : 0);
  if (any && max_index >= ds.n_features) {
    throw ArgumentError("feature index " + std::to_string(max_index) + " exceeds d = " +
                        std::to_string(ds.n_features));
  }
  ds.features.assign(ds.n_rows * ds.n_features, 0.0f);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& e : rows[i]) ds.features[i * ds.n_features + e.index] = e.value;
  }
  return ds;
}

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
  DataFormat format = options.format;
  if (format == DataFormat::kAuto) {
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    format = csv ? DataFormat::kCsv : DataFormat::kSvmlight;
  }
  const std::string text = read_text_file(path);
  auto slash = path.find_last_of('/');
  const std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  if (format == DataFormat::kCsv) return parse_csv(text, options.label_col, name);
  return parse_svmlight(text, options.n_features, name);
}

}  // namespace qscorer
