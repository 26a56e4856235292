/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_ERRORS_HPP
#define MOGP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mogp {

/// Linear-algebra failure that survived jitter escalation (e.g. an
/// indefinite kernel matrix). The message names the offending block.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A requested computation exceeds a hard size guard.
class ResourceError : public std::runtime_error {
public:
  explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File parsing / serialization failure. The message names file, line and
/// column where applicable.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace mogp

#endif
