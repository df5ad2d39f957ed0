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

// Runs every acceptance criterion at full size and prints one line each.
// Optional arguments select criteria by number.

#include <cstdio>
#include <cstdlib>
#include <set>

#include "glab/verify.hpp"

int main(int argc, char **argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::atoi(argv[i]));
    }
    glab::VerifyOptions opt;
    int failed = 0;
    for (const auto &c : glab::criteria()) {
        if (!only.empty() && !only.count(c.id)) {
            continue;
        }
        glab::CriterionResult r = glab::run_criterion(c, opt);
        std::printf("%s\n", glab::describe(r).c_str());
        std::fflush(stdout);
        failed += !r.pass();
    }
    return failed == 0 ? 0 : 1;
}
