/*
 * Copyright 2026 the gan-detect-lab authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GDL_ERRORS_HPP_
#define GDL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace gdl {

/// Base class for all gan-detect-lab errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GDL_DEFINE_ERROR(NAME)  \
  class NAME : public Error {   \
   public:                      \
    using Error::Error;         \
  }

// imgdata
GDL_DEFINE_ERROR(MissingCategory);
GDL_DEFINE_ERROR(EmptyClass);
GDL_DEFINE_ERROR(DecodeError);
GDL_DEFINE_ERROR(BadK);

// augment
GDL_DEFINE_ERROR(BadSigma);
GDL_DEFINE_ERROR(EncodeError);
GDL_DEFINE_ERROR(TooSmall);

// spectral
GDL_DEFINE_ERROR(EmptySample);
GDL_DEFINE_ERROR(NotFitted);
GDL_DEFINE_ERROR(ShapeMismatch);

// model / train
GDL_DEFINE_ERROR(CheckpointUnavailable);
GDL_DEFINE_ERROR(NonFiniteInput);
GDL_DEFINE_ERROR(DivergedLoss);

// evalmetrics
GDL_DEFINE_ERROR(DegenerateLabels);
GDL_DEFINE_ERROR(EmptyReport);
GDL_DEFINE_ERROR(MissingSet);
GDL_DEFINE_ERROR(MissingColumn);

#undef GDL_DEFINE_ERROR

/// Config parse/validation failure with a dotted path to the offending field,
/// e.g. ConfigInvalid("policy.kind", "unknown policy kind 'blurr'").
class ConfigInvalid : public Error {
 public:
  ConfigInvalid(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace gdl

#endif  // GDL_ERRORS_HPP_
