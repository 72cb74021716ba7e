/*
 * Copyright 2026 the tagsem authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file
 * except in compliance with the License. You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under the
 * License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND,
 * either express or implied. See the License for the specific language governing permissions
 * and limitations under the License.
 */

#ifndef TAGSEM_ERROR_HPP
#define TAGSEM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tagsem {

enum class ErrorCode {
  kIo = 1,
  kParse = 2,
  kValidation = 3,
  kConfig = 4,
  kMissingInput = 5,
  kNumeric = 6,
  kInvalidArgument = 7,
};

/// Exception carrying a coarse error category, mapped to C API status codes
/// and CLI exit codes at the boundaries.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tagsem

#endif  // TAGSEM_ERROR_HPP
