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

#pragma once

#include <string>
#include <vector>

#include "zshash/types.hpp"

// Headerless CSV: '.' decimal separator, ',' field separator, '\n' rows.

namespace zshash::csv {

// Reads a rectangular matrix of doubles; throws DataError on ragged rows,
// parse failures, or an empty file.
Matrix read_matrix(const std::string& path);

// Writes with 17 significant digits so doubles round-trip exactly.
void write_matrix(const std::string& path, const Matrix& m);

// One integer per row.
std::vector<long long> read_int_column(const std::string& path);
void write_int_column(const std::string& path, const std::vector<int>& values);

}  // namespace zshash::csv
