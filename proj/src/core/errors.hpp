// This file is part of the gaitdiff project, a silhouette-domain video
// diffusion toolkit for gait sequence synthesis and evaluation.
//
// Copyright 2026 the gaitdiff authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
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

namespace gaitdiff {

/// Error categories; values match the gd_status codes of the public C API
/// (and the CLI exit codes, which are the same table).
enum class ErrorCode : int {
    io = 1,          ///< filesystem access, decode/encode failures
    parse = 2,       ///< malformed config / manifest / archive
    validation = 3,  ///< semantically invalid data (manifest, config tree)
    param = 4,       ///< bad argument value
    shape = 5,       ///< tensor shape mismatch
    vocab = 6,       ///< unknown label or identity index out of range
    numeric = 7,     ///< non-finite values encountered
    internal = 8,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

inline Error io_error(const std::string& msg) { return Error(ErrorCode::io, msg); }
inline Error parse_error(const std::string& msg) { return Error(ErrorCode::parse, msg); }
inline Error validation_error(const std::string& msg) { return Error(ErrorCode::validation, msg); }
inline Error param_error(const std::string& msg) { return Error(ErrorCode::param, msg); }
inline Error shape_error(const std::string& msg) { return Error(ErrorCode::shape, msg); }
inline Error vocab_error(const std::string& msg) { return Error(ErrorCode::vocab, msg); }
inline Error numeric_error(const std::string& msg) { return Error(ErrorCode::numeric, msg); }
inline Error internal_error(const std::string& msg) { return Error(ErrorCode::internal, msg); }

}  // namespace gaitdiff
