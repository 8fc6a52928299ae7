#pragma once

#include <stdexcept>
#include <string>

namespace rle {

/// Bad run configuration (CLI flags, config files). Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A resource cap was hit (memory guard, enumeration cap). Maps to exit code 3.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// A verification run produced a hard failure. Maps to exit code 4.
class VerificationError : public std::runtime_error {
 public:
  explicit VerificationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rle
