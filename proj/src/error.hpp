// Copyright 2026 The spr Authors
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

#ifndef SPR_ERROR_HPP
#define SPR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace spr {

// Error categories map 1:1 onto process exit codes and C API status values:
// usage = 2, data = 3, io = 4.
enum class ErrorCode {
  usage = 2,
  data = 3,
  io = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

  static Error usage(std::string message) {
    return Error(ErrorCode::usage, std::move(message));
  }
  static Error data(std::string message) {
    return Error(ErrorCode::data, std::move(message));
  }
  static Error io(std::string message) {
    return Error(ErrorCode::io, std::move(message));
  }

 private:
  ErrorCode code_;
};

}  // namespace spr

#endif  // SPR_ERROR_HPP
