// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace typodr {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct NoEligibleWord : Error {
  using Error::Error;
};
struct DegenerateWord : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct NonFiniteLoss : Error {
  using Error::Error;
};
struct DuplicatePid : Error {
  using Error::Error;
};
struct EmptyIndex : Error {
  using Error::Error;
};
struct ZeroVector : Error {
  using Error::Error;
};
struct ReplicaMismatch : Error {
  using Error::Error;
};
struct AllZeroDenominator : Error {
  using Error::Error;
};
struct InsufficientNegatives : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace typodr
