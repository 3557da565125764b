// Copyright 2026-present the zshash project
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

#include "zshash/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace zshash::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view field, const std::string& path,
                    std::size_t line_no) {
    field = trim(field);
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": cannot parse '" + std::string(field) + "' as a number");
    }
    return value;
}

void split_fields(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

Matrix read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::vector<double> values;
    std::size_t n_cols = 0;
    std::size_t n_rows = 0;
    std::string line;
    std::vector<std::string_view> fields;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view stripped = trim(line);
        if (stripped.empty()) continue;
        split_fields(stripped, fields);
        if (n_cols == 0) {
            n_cols = fields.size();
        } else if (fields.size() != n_cols) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(n_cols) + " columns, found " +
                            std::to_string(fields.size()));
        }
        for (const auto field : fields)
            values.push_back(parse_double(field, path, line_no));
        ++n_rows;
    }
    if (n_rows == 0) throw DataError(path + ": empty file");

    Matrix m(static_cast<Index>(n_rows), static_cast<Index>(n_cols));
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

void write_matrix(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    char buf[64];
    for (Index i = 0; i < m.rows(); ++i) {
        std::string line;
        for (Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            if (j > 0) line += ',';
            line += buf;
        }
        line += '\n';
        out << line;
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<long long> read_int_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<long long> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view stripped = trim(line);
        if (stripped.empty()) continue;
        long long value = 0;
        const auto [ptr, ec] = std::from_chars(
            stripped.data(), stripped.data() + stripped.size(), value);
        if (ec != std::errc{} || ptr != stripped.data() + stripped.size()) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": cannot parse '" + std::string(stripped) +
                            "' as an integer");
        }
        values.push_back(value);
    }
    if (values.empty()) throw DataError(path + ": empty file");
    return values;
}

void write_int_column(const std::string& path, const std::vector<int>& values) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const int v : values) out << v << '\n';
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace zshash::csv
