// Copyright 2026 The HetNAS Authors
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

// Static SVG charts for run reports.

#ifndef HETNAS_CLI_PLOT_HPP_
#define HETNAS_CLI_PLOT_HPP_

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hetnas::plot {

std::string bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars);

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::map<std::string, std::vector<std::pair<double, double>>>& series);

}  // namespace hetnas::plot

#endif  // HETNAS_CLI_PLOT_HPP_
