#pragma once

#include <stdexcept>
#include <string>

namespace spgmrf {

/// Requested problem size exceeds an enumeration/materialization cap.
class capacity_error : public std::runtime_error {
public:
  explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file, schema violation, or unusable data.
class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spgmrf
