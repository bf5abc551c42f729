// Copyright 2026 The repstab Authors
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

#ifndef REPSTAB_ERRORS_H
#define REPSTAB_ERRORS_H

#include <stdexcept>
#include <string>

namespace repstab {

/// Malformed input: bad circuit structure, invalid code spec, bad config values,
/// dimension mismatches between records and layouts.
class ValidationError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// A numeric stage produced something that cannot be used (non-finite fit,
/// no solution to a projection, too few points to fit).
class NumericError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written, or has a corrupted header.
class IoError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace repstab

#endif
