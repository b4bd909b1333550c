/*
 * Copyright 2026 The zsnas Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>

#include "json.hpp"
#include "zsnas/hardware.hpp"
#include "zsnas/proxies.hpp"
#include "zsnas/search.hpp"

namespace zsnas {

/// Finite numbers as numbers; infinities as the strings "inf" / "-inf".
nlohmann::json number_json(double v);

nlohmann::json scores_json(const CellArch& arch, const ProxyScores& scores, std::uint64_t seed);
nlohmann::json cost_json(const CellArch& arch, const CostBreakdown& cost);

/// One line per applied removal, then a final summary line. Wall time is left
/// out so that reports of identical runs compare equal.
std::string search_report_jsonl(const SearchReport& report, std::uint64_t seed);

}  // namespace zsnas
