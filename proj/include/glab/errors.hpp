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

#pragma once

#include <stdexcept>
#include <string>

namespace glab {

class Error : public std::runtime_error {
   public:
    explicit Error(const std::string &what) : std::runtime_error(what) {
    }
};

#define GLAB_ERROR_KIND(Name)                                   \
    class Name : public Error {                                 \
       public:                                                  \
        explicit Name(const std::string &what) : Error(what) { \
        }                                                       \
    };

GLAB_ERROR_KIND(GeometryError)
GLAB_ERROR_KIND(PartitionError)
GLAB_ERROR_KIND(LabelError)
GLAB_ERROR_KIND(DomainError)
GLAB_ERROR_KIND(ResourceError)
GLAB_ERROR_KIND(NumericalIntegrityError)
GLAB_ERROR_KIND(PathDiscretizationError)
GLAB_ERROR_KIND(ContractError)
GLAB_ERROR_KIND(ValidationError)

#undef GLAB_ERROR_KIND

}  // namespace glab
