#pragma once

#include <stdexcept>
#include <string>

namespace corpusmix {

// All library failures surface as this type; the message carries the
// offending path, line number or id where one exists.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace corpusmix
