// Copyright 2026 The TENet-KWS Authors
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

namespace tenet {

enum class Errc {
  invalid_argument,  // shape / channel / parameter contract violations
  io,                // file could not be opened, read or written
  malformed_wav,
  unsupported_wav,
  bad_magic,
  truncated_payload,
  shape_mismatch,
  bad_header,
  empty_input,
  numeric,           // non-finite values, divergence
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::io: return "i/o error";
    case Errc::malformed_wav: return "malformed RIFF/WAV";
    case Errc::unsupported_wav: return "unsupported WAV encoding";
    case Errc::bad_magic: return "bad magic";
    case Errc::truncated_payload: return "truncated payload";
    case Errc::shape_mismatch: return "shape mismatch";
    case Errc::bad_header: return "bad header";
    case Errc::empty_input: return "empty input";
    case Errc::numeric: return "numeric failure";
  }
  return "unknown error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace tenet
