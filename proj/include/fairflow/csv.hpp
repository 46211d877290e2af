#pragma once

// CSV reading/writing (RFC 4180 quoting, header row required) and the
// conversion between raw tables and Dataset.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "fairflow/dataset.hpp"
#include "fairflow/error.hpp"

namespace fairflow {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  if (v == 0.0) return std::signbit(v) ? "-0" : "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Writes to "<path>.tmp" and renames over the target so readers never see a
/// half-written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

inline CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> lines;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1, record_line = 1;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // Blank lines are skipped.
    if (!(record.size() == 1 && record[0].empty())) {
      records.push_back(std::move(record));
      lines.push_back(record_line);
    }
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) throw DataError("csv line " + std::to_string(line) + ": stray quote");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  if (records.empty()) throw DataError("csv: missing header row");
  CsvTable t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw DataError("csv line " + std::to_string(lines[r]) + ": expected " + std::to_string(t.header.size()) +
                      " fields, got " + std::to_string(records[r].size()));
    }
    t.rows.push_back(std::move(records[r]));
    t.line_numbers.push_back(lines[r]);
  }
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string to_csv(const CsvTable& t) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& rec) {
    for (std::size_t i = 0; i < rec.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(rec[i]);
    }
    out += '\n';
  };
  emit(t.header);
  for (const auto& r : t.rows) emit(r);
  return out;
}

namespace detail {

inline bool is_missing(const std::string& s) {
  std::string t = s;
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
  return t.empty() || t == "?" || t == "NA" || t == "NaN" || t == "nan";
}

inline double parse_number(const std::string& s, std::size_t line, const std::string& column) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  double v = 0.0;
  const char* first = s.data() + b;
  if (b < e && *first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + e, v);
  if (res.ec != std::errc() || res.ptr != s.data() + e || !std::isfinite(v)) {
    throw DataError("csv line " + std::to_string(line) + ", column '" + column + "': '" + s +
                    "' is not a number");
  }
  return v;
}

inline int parse_binary(const std::string& s, std::size_t line, const std::string& column) {
  const double v = parse_number(s, line, column);
  if (v != 0.0 && v != 1.0) {
    throw DataError("csv line " + std::to_string(line) + ", column '" + column + "': '" + s + "' is not 0 or 1");
  }
  return static_cast<int>(v);
}

}  // namespace detail

/// z-scores every non-binary feature column (population sd); binary columns and
/// constant columns keep sd 1. Returns the parameters used.
inline Standardization standardize_in_place(Dataset& data) {
  Standardization st;
  st.columns = data.feature_names;
  st.mean.assign(data.dim(), 0.0);
  st.sd.assign(data.dim(), 1.0);
  const std::size_t n = data.size();
  for (std::size_t j = 0; j < data.dim(); ++j) {
    bool binary = true;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = data.features(i, j);
      binary = binary && (v == 0.0 || v == 1.0);
      mean += v;
    }
    if (binary || n == 0) continue;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (data.features(i, j) - mean) * (data.features(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    st.mean[j] = mean;
    st.sd[j] = sd > 0.0 ? sd : 1.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < data.dim(); ++j) data.features(i, j) = (data.features(i, j) - st.mean[j]) / st.sd[j];
  data.standardization = st;
  return st;
}

/// Applies previously recorded parameters (matched by column name).
inline void apply_standardization(Dataset& data, const Standardization& st) {
  if (st.columns != data.feature_names) {
    throw DataError("standardization columns do not match the dataset's feature columns");
  }
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < data.dim(); ++j) data.features(i, j) = (data.features(i, j) - st.mean[j]) / st.sd[j];
  data.standardization = st;
}

struct CsvSchema {
  std::string label_column;
  std::vector<std::string> protected_columns;
  // Columns present in the file but neither features nor label/protected.
  std::vector<std::string> ignore_columns;
};

/// Table -> Dataset. Rows with any missing cell are dropped; every other
/// non-label, non-protected, non-ignored column must be numeric.
inline Dataset dataset_from_table(const CsvTable& t, const CsvSchema& schema, bool standardize) {
  {
    std::set<std::string> seen;
    for (const auto& h : t.header)
      if (!seen.insert(h).second) throw DataError("csv: duplicate header name '" + h + "'");
  }
  auto find_col = [&](const std::string& name) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw DataError("csv: column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - t.header.begin());
  };
  const std::size_t label_idx = find_col(schema.label_column);
  std::vector<std::size_t> prot_idx;
  for (const auto& p : schema.protected_columns) prot_idx.push_back(find_col(p));
  std::vector<std::size_t> ignore_idx;
  for (const auto& c : schema.ignore_columns) ignore_idx.push_back(find_col(c));

  Dataset d;
  std::vector<std::size_t> feat_idx;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    const bool special = j == label_idx || std::find(prot_idx.begin(), prot_idx.end(), j) != prot_idx.end() ||
                         std::find(ignore_idx.begin(), ignore_idx.end(), j) != ignore_idx.end();
    if (!special) {
      feat_idx.push_back(j);
      d.feature_names.push_back(t.header[j]);
    }
  }
  for (const auto& p : schema.protected_columns) d.protected_attributes[p];

  std::vector<double> values;
  std::size_t kept = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const bool missing = std::any_of(row.begin(), row.end(), [](const std::string& s) { return detail::is_missing(s); });
    if (missing) continue;
    const std::size_t line = t.line_numbers.empty() ? r + 2 : t.line_numbers[r];
    for (std::size_t j : feat_idx) values.push_back(detail::parse_number(row[j], line, t.header[j]));
    d.labels.push_back(detail::parse_binary(row[label_idx], line, schema.label_column));
    for (std::size_t k = 0; k < prot_idx.size(); ++k) {
      d.protected_attributes[schema.protected_columns[k]].push_back(
          detail::parse_binary(row[prot_idx[k]], line, schema.protected_columns[k]));
    }
    ++kept;
  }
  d.features = Matrix(kept, feat_idx.size(), std::move(values));
  d.validate();
  if (standardize) standardize_in_place(d);
  return d;
}

inline Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema, bool standardize) {
  return dataset_from_table(read_csv(path), schema, standardize);
}

inline Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                        const std::vector<std::string>& protected_columns, bool standardize) {
  return load_csv(path, CsvSchema{label_column, protected_columns, {}}, standardize);
}

/// Features first, then the label column, then protected columns (map order).
inline CsvTable dataset_to_table(const Dataset& d, const std::string& label_column) {
  CsvTable t;
  t.header = d.feature_names;
  t.header.push_back(label_column);
  for (const auto& [name, col] : d.protected_attributes) t.header.push_back(name);
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<std::string> row;
    row.reserve(t.header.size());
    for (std::size_t j = 0; j < d.dim(); ++j) row.push_back(format_double(d.features(i, j)));
    row.push_back(std::to_string(d.labels[i]));
    for (const auto& [name, col] : d.protected_attributes) row.push_back(std::to_string(col[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void save_csv(const Dataset& d, const std::string& label_column, const std::filesystem::path& path) {
  write_file_atomic(path, to_csv(dataset_to_table(d, label_column)));
}

}  // namespace fairflow
