// Copyright 2026 The glab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// One measured inequality lhs <= rhs + slack.

#pragma once

#include <string>
#include <utility>

namespace glab {

struct AuditLine {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool pass = false;
    std::string anchor;
};

inline AuditLine audit_le(std::string name, double lhs, double rhs, double slack, std::string anchor) {
    AuditLine a{std::move(name), lhs, rhs, slack, false, std::move(anchor)};
    a.pass = lhs <= rhs + slack;
    return a;
}

}  // namespace glab
