// Copyright 2026 The protodisc Authors
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

#include <stdexcept>
#include <string>

namespace protodisc {

// Root of every error the engine throws. Each subclass names one failure
// class so callers (and the CLI exit path) can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PROTODISC_DEFINE_ERROR(Name) \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

PROTODISC_DEFINE_ERROR(DimensionError);
PROTODISC_DEFINE_ERROR(NonFiniteError);
PROTODISC_DEFINE_ERROR(ZeroNormError);
PROTODISC_DEFINE_ERROR(EmptyInputError);
PROTODISC_DEFINE_ERROR(ConfigError);
PROTODISC_DEFINE_ERROR(ShapeError);
PROTODISC_DEFINE_ERROR(SchemaError);
PROTODISC_DEFINE_ERROR(DuplicateIdError);
PROTODISC_DEFINE_ERROR(MissingLabelError);
PROTODISC_DEFINE_ERROR(IoError);
PROTODISC_DEFINE_ERROR(SeparationError);
PROTODISC_DEFINE_ERROR(InfeasibleKError);
PROTODISC_DEFINE_ERROR(MissingCategoryError);
PROTODISC_DEFINE_ERROR(EmptyClusterError);
PROTODISC_DEFINE_ERROR(LabelError);
PROTODISC_DEFINE_ERROR(EvalDataError);
PROTODISC_DEFINE_ERROR(UsageError);

#undef PROTODISC_DEFINE_ERROR

}  // namespace protodisc
