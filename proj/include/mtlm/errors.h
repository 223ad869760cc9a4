// include/mtlm/errors.h

// Copyright 2026  MTLM toolkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MTLM_ERRORS_H_
#define MTLM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mtlm {

// Bad data from the outside world: malformed files, OOV tokens, empty
// corpora, mismatched vocabularies.  CLI maps these to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke an API precondition (shape mismatch, invalid plan, ...).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

#define MTLM_CHECK(cond, msg)                       \
  do {                                              \
    if (!(cond)) throw ::mtlm::ContractViolation(msg); \
  } while (0)

}  // namespace mtlm

#endif  // MTLM_ERRORS_H_
